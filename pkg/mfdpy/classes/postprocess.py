# -*- coding: utf-8 -*-
"""
Inference-time box filtering and merging: greedy NMS, merging of a
horizontally flipped test pass, and weighted box fusion for ensembles.

Classes are handled independently everywhere, an embedded formula never
suppresses or fuses with an isolated one.

Copyright (c) 2021-2026, mfdpy developers
            Distributed under a Modified BSD License.
              See accompanying file LICENSE

"""
# pylint: disable=C0103, R0902, R0914, R0913
import dataclasses
import logging
from dataclasses import dataclass, field

import numpy as np

from mfdpy.classes.geometry import Box, ClassLabel, boxes_to_array, hflip, iou_many

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Detection:
    """
    Scored, labelled box.

    Parameters
    ----------
    box : `Box`
    label : `ClassLabel`
    score : `float` in [0, 1]
    model_id : `int`, optional
        source model for ensembling, Default: 0
    page_id : `str`, optional
    """
    box: Box
    label: ClassLabel
    score: float
    model_id: int = 0
    page_id: str = ""

    def __post_init__(self):
        score = float(self.score)
        if not 0.0 <= score <= 1.0:
            raise ValueError(f"score {score} outside [0, 1]")
        if int(self.model_id) < 0:
            raise ValueError(f"model_id must be nonnegative, got {self.model_id}")
        if not isinstance(self.label, ClassLabel):
            object.__setattr__(self, "label", ClassLabel.parse(self.label))
        object.__setattr__(self, "score", score)
        object.__setattr__(self, "model_id", int(self.model_id))


@dataclass(frozen=True)
class FusedDetection(Detection):
    """Detection produced by fusing ``cluster_size`` source boxes."""
    cluster_size: int = 1

    def __post_init__(self):
        super().__post_init__()
        if int(self.cluster_size) < 1:
            raise ValueError(f"cluster_size must be >= 1, got {self.cluster_size}")


def _check_threshold(name, value):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} {value} outside [0, 1]")


def _score_order(scores):
    """Indices by descending score, ties by input position."""
    return sorted(range(len(scores)), key=lambda i: (-scores[i], i))


def nms(dets, iou_thresh=0.6):
    """
    Greedy per-class non-maximum suppression.

    Parameters
    ----------
    dets : `list` of `Detection`
    iou_thresh : `float`, optional
        boxes with IoU strictly above the threshold are suppressed
        Default: 0.6

    Returns
    -------
    `list` of `Detection` in descending score order
    """
    _check_threshold("iou_thresh", iou_thresh)
    dets = list(dets)
    if not dets:
        return []
    order = np.array(_score_order([d.score for d in dets]), dtype=np.int64)
    boxes = boxes_to_array([d.box for d in dets])
    labels = np.array([d.label is ClassLabel.ISOLATED for d in dets])
    suppressed = np.zeros(len(dets), dtype=bool)
    kept = []
    for position, index in enumerate(order):
        if suppressed[index]:
            continue
        kept.append(index)
        rest = order[position + 1:]
        rest = rest[(labels[rest] == labels[index]) & ~suppressed[rest]]
        if len(rest):
            suppressed[rest[iou_many(boxes[index], boxes[rest]) > iou_thresh]] = True
    log.debug("nms kept %d of %d", len(kept), len(dets))
    return [dets[i] for i in kept]


def merge_flip(dets, dets_flipped, image_width, iou_thresh=0.6):
    """
    Maps the detections of a horizontally flipped pass back and merges both
    passes with NMS.

    Parameters
    ----------
    dets : `list` of `Detection`
    dets_flipped : `list` of `Detection`
        detections in flipped image coordinates
    image_width : `float`
    iou_thresh : `float`, optional
        Default: 0.6
    """
    if image_width <= 0:
        raise ValueError(f"image width must be positive, got {image_width}")
    mapped = [dataclasses.replace(d, box=hflip(d.box, image_width)) for d in dets_flipped]
    return nms(list(dets) + mapped, iou_thresh)


@dataclass
class _Cluster:
    label: ClassLabel
    boxes: list
    weighted: list
    scores: list
    weights: list
    model_ids: list
    page_id: str
    fused: np.ndarray = None
    members: list = field(default_factory=list)

    def refit(self):
        boxes = np.array(self.boxes)
        weighted = np.array(self.weighted)
        if len(boxes) == 1:
            self.fused = boxes[0].copy()
            return
        if weighted.sum() > 0.0:
            fused = (weighted[:, None] * boxes).sum(axis=0) / weighted.sum()
        else:
            fused = boxes.mean(axis=0)
        self.fused = np.clip(fused, boxes.min(axis=0), boxes.max(axis=0))

    def fused_score(self, num_models):
        scores = np.array(self.scores)
        if len(scores) == 1:
            mean = float(scores[0])
        else:
            weights = np.array(self.weights)
            mean = min(float(np.dot(weights, scores) / weights.sum()), float(scores.max()))
        return mean * min(len(scores), num_models) / num_models


def wbf(det_sets, iou_thresh=0.4, model_weights=None):
    """
    Weighted box fusion of the detections of several models.

    Detections are visited by descending weighted score. Each one joins the
    first same-class cluster whose current fused box overlaps it with IoU
    above the threshold, otherwise it opens a new cluster. The fused box is
    the score-weighted mean of the members, the fused score the mean member
    score scaled by min(cluster size, M)/M.

    Parameters
    ----------
    det_sets : `list` of `list` of `Detection`
        one list per model
    iou_thresh : `float`, optional
        Default: 0.4
    model_weights : `list` of `float`, optional
        positive weight per model, Default: all 1

    Returns
    -------
    `list` of `FusedDetection` in descending fused score order
    """
    return [fused for fused, _ in wbf_clusters(det_sets, iou_thresh, model_weights)]


def wbf_clusters(det_sets, iou_thresh=0.4, model_weights=None):
    """
    Same as `wbf` but keeps the members of every cluster.

    Returns
    -------
    `list` of (`FusedDetection`, `list` of `Detection`) in descending fused score order
    """
    _check_threshold("iou_thresh", iou_thresh)
    det_sets = [list(dets) for dets in det_sets]
    num_models = len(det_sets)
    if num_models == 0:
        raise ValueError("wbf needs at least one detection set")
    if model_weights is None:
        model_weights = [1.0] * num_models
    model_weights = [float(w) for w in model_weights]
    if len(model_weights) != num_models:
        raise ValueError(f"{len(model_weights)} weights given for {num_models} models")
    if any(w <= 0.0 for w in model_weights):
        raise ValueError(f"model weights must be positive, got {model_weights}")

    pool = [(det, model_weights[m]) for m, dets in enumerate(det_sets) for det in dets]
    clusters = []
    by_label = {label: [] for label in ClassLabel}
    for index in _score_order([det.score * weight for det, weight in pool]):
        det, weight = pool[index]
        candidates = by_label[det.label]
        target = None
        if candidates:
            fused = np.array([clusters[c].fused for c in candidates])
            hits = np.flatnonzero(iou_many(det.box, fused) > iou_thresh)
            if len(hits):
                target = clusters[candidates[hits[0]]]
        if target is None:
            target = _Cluster(det.label, [], [], [], [], [], det.page_id)
            by_label[det.label].append(len(clusters))
            clusters.append(target)
        target.members.append(det)
        target.boxes.append(det.box.as_array())
        target.weighted.append(det.score * weight)
        target.scores.append(det.score)
        target.weights.append(weight)
        target.model_ids.append(det.model_id)
        target.refit()

    fused_dets = []
    for cluster in clusters:
        x1, y1, x2, y2 = (float(v) for v in cluster.fused)
        fused_dets.append(FusedDetection(Box(x1, y1, max(x2, x1), max(y2, y1)), cluster.label,
                                         cluster.fused_score(num_models), cluster.model_ids[0],
                                         cluster.page_id, len(cluster.boxes)))
    log.debug("wbf fused %d detections of %d models into %d", len(pool), num_models, len(fused_dets))
    return [(fused_dets[i], clusters[i].members) for i in _score_order([d.score for d in fused_dets])]


def score_filter(dets, min_score):
    """
    Keeps detections with score >= min_score, order preserved.

    Parameters
    ----------
    dets : `list` of `Detection`
    min_score : `float`
    """
    _check_threshold("min_score", min_score)
    return [d for d in dets if d.score >= min_score]


def group_by_page(dets):
    """
    Groups detections by page id.

    Returns
    -------
    `dict` page_id -> `list` of `Detection`, pages sorted, input order kept
    """
    pages = {}
    for det in dets:
        pages.setdefault(det.page_id, []).append(det)
    return {page: pages[page] for page in sorted(pages)}

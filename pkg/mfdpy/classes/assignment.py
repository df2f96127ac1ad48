# -*- coding: utf-8 -*-
"""
Positive-sample assignment on the pyramid lattice.

Two strategies are provided: the area-proportional baseline that makes every
grid point inside a box a positive, and adaptive training sample selection
(ATSS) that picks the k closest points per level and keeps the ones whose
pseudo-anchor IoU exceeds mean + std of the candidates.

Copyright (c) 2021-2026, mfdpy developers
            Distributed under a Modified BSD License.
              See accompanying file LICENSE

"""
# pylint: disable=C0103, R0902, R0914, R0913
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from mfdpy.classes.geometry import area, boxes_to_array, iou_many
from mfdpy.classes.pyramid import GridPoint, PyramidSpec, grid_array

log = logging.getLogger(__name__)

ANCHOR_SCALE = 8


@dataclass
class AssignmentResult:
    """
    Positives per GT instance.

    Parameters
    ----------
    positives : `list` of `list` of `GridPoint`
    candidate_counts : `list` of `int`
    thresholds : `list` of `float` or `None`
        IoU threshold per GT (None for random assignment)
    strategy : `str`
    """
    positives: list = field(default_factory=list)
    candidate_counts: list = field(default_factory=list)
    thresholds: list = field(default_factory=list)
    strategy: str = ""

    @property
    def positive_counts(self):
        return [len(points) for points in self.positives]

    @classmethod
    def concatenate(cls, results):
        """Pools results of several pages, GT order preserved."""
        merged = cls()
        for result in results:
            merged.positives.extend(result.positives)
            merged.candidate_counts.extend(result.candidate_counts)
            merged.thresholds.extend(result.thresholds)
            if result.strategy:
                merged.strategy = result.strategy
        return merged


class _Lattice:
    """All grid points of a pyramid, levels concatenated."""
    def __init__(self, spec, image_w, image_h):
        self.spec = spec
        points = []
        levels = []
        self.level_slices = []
        start = 0
        for level in spec.levels:
            pts = grid_array(level, image_w, image_h)
            points.append(pts)
            levels.append(np.full(len(pts), level, dtype=np.int64))
            self.level_slices.append((level, slice(start, start + len(pts))))
            start += len(pts)
        self.xy = np.concatenate(points) if points else np.zeros((0, 2))
        self.levels = np.concatenate(levels) if levels else np.zeros(0, dtype=np.int64)

    def point(self, index):
        return GridPoint(float(self.xy[index, 0]), float(self.xy[index, 1]), int(self.levels[index]))

    def inside(self, box, indices=None):
        xy = self.xy if indices is None else self.xy[indices]
        return ((xy[:, 0] > box.x1) & (xy[:, 0] < box.x2)
                & (xy[:, 1] > box.y1) & (xy[:, 1] < box.y2))


def random_assign(gts, spec, image_w, image_h):
    """
    Every grid point strictly inside a GT is a positive of that GT.

    Points inside several GTs go to the GT with the smallest area (ties: input
    order).

    Parameters
    ----------
    gts : `list` of `Box`
    spec : `PyramidSpec`
    image_w : `float`
    image_h : `float`

    Returns
    -------
    `AssignmentResult`
    """
    lattice = _Lattice(spec, image_w, image_h)
    owner = np.full(len(lattice.xy), -1, dtype=np.int64)
    candidate_counts = [0] * len(gts)
    for i in sorted(range(len(gts)), key=lambda i: (area(gts[i]), i)):
        mask = lattice.inside(gts[i])
        candidate_counts[i] = int(mask.sum())
        owner[mask & (owner < 0)] = i
    positives = [[] for _ in gts]
    for j in np.flatnonzero(owner >= 0):
        positives[owner[j]].append(lattice.point(j))
    return AssignmentResult(positives, candidate_counts, [None] * len(gts), "random")


def _k_nearest(distances, k):
    """Indices of the k smallest distances, ties resolved by index."""
    if len(distances) <= k:
        return np.argsort(distances, kind="stable")
    kth = np.partition(distances, k - 1)[k - 1]
    pool = np.flatnonzero(distances <= kth)
    pool = pool[np.argsort(distances[pool], kind="stable")]
    return pool[:k]


def pseudo_anchors(xy, level_ids):
    """Square anchors of side 8*stride centered on grid points, (n, 4)."""
    half = ANCHOR_SCALE * np.power(2.0, level_ids) / 2.0
    return np.stack([xy[:, 0] - half, xy[:, 1] - half, xy[:, 0] + half, xy[:, 1] + half], axis=1)


def atss_assign(gts, spec, image_w, image_h, k=9):
    """
    Adaptive training sample selection.

    For each GT: the k grid points nearest to its center on every level are
    candidates, the IoU of their pseudo-anchors with the GT is thresholded at
    mean + population std, and candidates above the threshold whose point lies
    strictly inside the GT become positives. A point claimed by several GTs
    stays with the GT of highest IoU (ties: smaller area, then input order).

    Parameters
    ----------
    gts : `list` of `Box`
    spec : `PyramidSpec`
    image_w : `float`
    image_h : `float`
    k : `int`, optional
        Default: 9

    Returns
    -------
    `AssignmentResult`
    """
    if int(k) < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    k = int(k)
    lattice = _Lattice(spec, image_w, image_h)
    candidate_counts = []
    thresholds = []
    claims = []
    for gt_index, gt in enumerate(gts):
        cx, cy = gt.center
        candidates = []
        for _, level_slice in lattice.level_slices:
            xy = lattice.xy[level_slice]
            if len(xy) == 0:
                continue
            dx = xy[:, 0] - cx
            dy = xy[:, 1] - cy
            distances = np.sqrt(dx * dx + dy * dy)
            candidates.append(_k_nearest(distances, k) + level_slice.start)
        candidates = np.concatenate(candidates) if candidates else np.zeros(0, dtype=np.int64)
        candidate_counts.append(int(len(candidates)))
        if len(candidates) == 0:
            thresholds.append(0.0)
            continue
        ious = iou_many(gt, pseudo_anchors(lattice.xy[candidates], lattice.levels[candidates]))
        threshold = float(ious.mean() + ious.std())
        thresholds.append(threshold)
        keep = (ious >= threshold) & lattice.inside(gt, candidates)
        for point_index, overlap in zip(candidates[keep], ious[keep]):
            claims.append((int(point_index), float(overlap), area(gt), gt_index))
        log.debug("gt %d: %d candidates, threshold %.4f, %d above", gt_index,
                  len(candidates), threshold, int(keep.sum()))

    # a point claimed by several GTs: highest IoU, then smaller area, then input order
    winner = {}
    for point_index, overlap, gt_area, gt_index in claims:
        key = (-overlap, gt_area, gt_index)
        if point_index not in winner or key < winner[point_index][0]:
            winner[point_index] = (key, gt_index)
    positives = [[] for _ in gts]
    for point_index in sorted(winner):
        positives[winner[point_index][1]].append(lattice.point(point_index))
    return AssignmentResult(positives, candidate_counts, thresholds, "atss")


@dataclass
class ImbalanceStats:
    """
    Relation between instance area and number of positives.

    Parameters
    ----------
    areas : `list` of `float`
    counts : `list` of `int`
    pearson : `float`
        correlation of log10(area) and positive count
    spearman : `float`
        rank correlation of area and positive count
    histogram : `dict`
        positive count -> number of GTs
    """
    areas: list
    counts: list
    pearson: float
    spearman: float
    histogram: dict


def _correlation(x, y, method):
    if len(x) < 2 or np.std(x) == 0.0 or np.std(y) == 0.0:
        return 0.0
    x, y = pd.Series(x), pd.Series(y)
    if method == "spearman":
        x, y = x.rank(), y.rank()
    value = x.corr(y)
    if not np.isfinite(value):
        return 0.0
    return float(np.clip(value, -1.0, 1.0))


def imbalance_stats(r, gts):
    """
    Per-GT (area, positive count) pairs and their correlation.

    Areas below 1 px² are clamped to 1 px² before taking log10.

    Parameters
    ----------
    r : `AssignmentResult`
    gts : `list` of `Box`

    Returns
    -------
    `ImbalanceStats`
    """
    if len(r.positives) != len(gts):
        raise ValueError(f"result covers {len(r.positives)} instances, got {len(gts)} boxes")
    areas = np.array([area(gt) for gt in gts], dtype=np.float64)
    counts = np.array(r.positive_counts, dtype=np.float64)
    if np.any(areas < 1.0):
        log.warning("%d instances below 1 px² clamped for log-area", int(np.sum(areas < 1.0)))
    log_areas = np.log10(np.maximum(areas, 1.0))
    histogram = {}
    if len(counts):
        for value, number in enumerate(np.bincount(counts.astype(np.int64))):
            if number:
                histogram[value] = int(number)
    return ImbalanceStats(areas=areas.tolist(),
                          counts=[int(c) for c in counts],
                          pearson=_correlation(log_areas, counts, "pearson"),
                          spearman=_correlation(areas, counts, "spearman"),
                          histogram=histogram)

# -*- coding: utf-8 -*-
"""
mfdpy is a toolkit for the non-neural parts of a mathematical formula
detection pipeline: label assignment analysis, pyramid coverage, offset
decoding, post-processing and evaluation.

Copyright (c) 2021-2026, mfdpy developers
            Distributed under a Modified BSD License.
              See accompanying file LICENSE

"""

# pylint: disable=C0103, R0902, R0914, R0913
import logging

from mfdpy.classes import assignment, evaluation, gfl_decode, postprocess, pyramid
from mfdpy.classes.run_config import RunConfig
import mfdpy.file_parser.file_parser as parser
import mfdpy.file_parser.common_mfd_analyses as analyses

log = logging.getLogger(__name__)


class MFD:
    """Entry point bundling all workflows under one run configuration.

    Parameters
    ----------
    config : `RunConfig`, optional
        Default: `RunConfig()` (FPN(2-6), regmax 24, k 9, NMS 0.6, WBF 0.4)
    **args
        any `RunConfig` field, overriding ``config``
    """
    def __init__(self, config=None, **args):
        self.config = (config or RunConfig()).replace(**args)

    @property
    def spec(self):
        return self.config.pyramid()

    @staticmethod
    def read_gt(path):
        return parser.parse_gt(path)

    @staticmethod
    def read_preds(path):
        return parser.parse_preds(path)

    def coverage(self, gts):
        """
        Pyramid coverage of ground truth instances.

        Parameters
        ----------
        gts : `list` of `GroundTruthInstance`

        Returns
        -------
        `CoverageReport`
        """
        return pyramid.coverage_report(gts, self.spec)

    def extents(self):
        return analyses.extents_frame(self.spec)

    def simulate_assignment(self, gts):
        """
        Runs random and ATSS assignment page by page.

        Every page is taken to have the configured image size.

        Parameters
        ----------
        gts : `list` of `GroundTruthInstance`

        Returns
        -------
        (`pandas.DataFrame`, `ImbalanceStats` random, `ImbalanceStats` atss)
            the frame has one row per GT, ordered by page then input order
        """
        pages = {}
        for gt in gts:
            pages.setdefault(gt.page_id, []).append(gt)
        ordered, random_results, atss_results = [], [], []
        width, height = self.config.image_size
        for page in sorted(pages):
            boxes = [gt.box for gt in pages[page]]
            random_results.append(assignment.random_assign(boxes, self.spec, width, height))
            atss_results.append(assignment.atss_assign(boxes, self.spec, width, height,
                                                       self.config.atss_k))
            ordered.extend(pages[page])
            log.debug("page %s: %d instances assigned", page, len(boxes))
        boxes = [gt.box for gt in ordered]
        random_stats = assignment.imbalance_stats(
            assignment.AssignmentResult.concatenate(random_results), boxes)
        atss_stats = assignment.imbalance_stats(
            assignment.AssignmentResult.concatenate(atss_results), boxes)
        return analyses.imbalance_frame(ordered, random_stats, atss_stats), random_stats, atss_stats

    def _filtered(self, dets, min_score):
        return postprocess.score_filter(dets, self.config.min_score if min_score is None else min_score)

    def nms(self, dets, iou_thresh=None, min_score=None):
        """Per-page NMS; pages in sorted order."""
        iou_thresh = self.config.nms_iou if iou_thresh is None else iou_thresh
        out = []
        for page_dets in postprocess.group_by_page(self._filtered(dets, min_score)).values():
            out.extend(postprocess.nms(page_dets, iou_thresh))
        return out

    def flip_merge(self, dets, dets_flipped, image_width=None, iou_thresh=None, min_score=None):
        """Per-page merge of an original and a horizontally flipped pass."""
        image_width = self.config.image_width if image_width is None else image_width
        iou_thresh = self.config.nms_iou if iou_thresh is None else iou_thresh
        original = postprocess.group_by_page(self._filtered(dets, min_score))
        flipped = postprocess.group_by_page(self._filtered(dets_flipped, min_score))
        out = []
        for page in sorted(set(original) | set(flipped)):
            out.extend(postprocess.merge_flip(original.get(page, []), flipped.get(page, []),
                                              image_width, iou_thresh))
        return out

    def fuse(self, det_sets, iou_thresh=None, weights=None, min_score=None):
        """
        Per-page weighted box fusion; the position of a set is its model id.

        Parameters
        ----------
        det_sets : `list` of `list` of `Detection`
        """
        if len(det_sets) == 0:
            raise ValueError("fusion needs at least one detection set")
        iou_thresh = self.config.wbf_iou if iou_thresh is None else iou_thresh
        grouped = [postprocess.group_by_page(self._filtered(dets, min_score)) for dets in det_sets]
        pages = sorted(set().union(*grouped))
        out = []
        for page in pages:
            sets = [[postprocess.Detection(d.box, d.label, d.score, m, d.page_id)
                     for d in per_model.get(page, [])]
                    for m, per_model in enumerate(grouped)]
            out.extend(postprocess.wbf(sets, iou_thresh, weights))
        return out

    def decode(self, records, clip=False):
        """Decodes distribution records, optionally clipped to the configured image."""
        image_size = self.config.image_size if clip else None
        return gfl_decode.decode_records(records, self.spec, image_size)

    def read_decode(self, path, clip=False):
        """Reads and decodes a distribution file, errors carry the line number."""
        image_size = self.config.image_size if clip else None
        return parser.parse_decode(path, self.spec, image_size)

    def evaluate(self, splits, iou_thresh=None, per_page=False):
        """
        Parameters
        ----------
        splits : `list` of (`list` of `Detection`, `list` of `GroundTruthInstance`)

        Returns
        -------
        `EvalReport`
        """
        iou_thresh = self.config.eval_iou if iou_thresh is None else iou_thresh
        return evaluation.evaluate_splits(splits, iou_thresh, per_page)

    @staticmethod
    def statistics(gts):
        return analyses.dataset_statistics(analyses.instance_frame(gts))

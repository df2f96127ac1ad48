# -*- coding: utf-8 -*-
"""
Precision, recall and F1 per formula class and in total.

Predictions are matched greedily in descending score order against the
unmatched ground truth of the same class with the highest IoU. The total is
the micro-average, i.e. TP/FP/FN are pooled over both classes.

Copyright (c) 2021-2026, mfdpy developers
            Distributed under a Modified BSD License.
              See accompanying file LICENSE

"""
# pylint: disable=C0103, R0902, R0914, R0913
import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from mfdpy.classes.geometry import ClassLabel, boxes_to_array, iou_matrix

log = logging.getLogger(__name__)

TOTAL = "total"


@dataclass
class MatchCounts:
    """TP/FP/FN of one class with the derived scores."""
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other):
        return MatchCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)

    @property
    def precision(self):
        if self.tp + self.fp == 0:
            return 1.0
        return self.tp / (self.tp + self.fp)

    @property
    def recall(self):
        if self.tp + self.fn == 0:
            return 1.0
        return self.tp / (self.tp + self.fn)

    @property
    def f1(self):
        p, r = self.precision, self.recall
        if p + r == 0.0:
            return 0.0
        return 2.0 * p * r / (p + r)


def _empty_counts():
    return {label: MatchCounts() for label in ClassLabel}


def _add_counts(a, b):
    return {label: a[label] + b[label] for label in ClassLabel}


def match_pairs(preds, gts, iou_thresh=0.5):
    """
    Greedy score-ordered matching on one page.

    Parameters
    ----------
    preds : `list` of `Detection`
    gts : `list` of `GroundTruthInstance`
    iou_thresh : `float`, optional
        Default: 0.5

    Returns
    -------
    `list` of (pred index, gt index) tuples
    """
    if not 0.0 <= iou_thresh <= 1.0:
        raise ValueError(f"iou_thresh {iou_thresh} outside [0, 1]")
    pairs = []
    for label in ClassLabel:
        pred_idx = [i for i, p in enumerate(preds) if p.label is label]
        gt_idx = [j for j, g in enumerate(gts) if g.label is label]
        if not pred_idx or not gt_idx:
            continue
        pred_idx.sort(key=lambda i: (-preds[i].score, i))
        overlaps = iou_matrix(boxes_to_array([preds[i].box for i in pred_idx]),
                              boxes_to_array([gts[j].box for j in gt_idx]))
        taken = np.zeros(len(gt_idx), dtype=bool)
        for row, i in enumerate(pred_idx):
            candidates = np.where(taken, -1.0, overlaps[row])
            best = int(np.argmax(candidates))
            if not taken[best] and candidates[best] >= iou_thresh:
                taken[best] = True
                pairs.append((i, gt_idx[best]))
    return pairs


def match_page(preds, gts, iou_thresh=0.5):
    """
    TP/FP/FN per class on one page.

    Returns
    -------
    `dict` ClassLabel -> `MatchCounts`
    """
    pairs = match_pairs(preds, gts, iou_thresh)
    counts = _empty_counts()
    for i, _ in pairs:
        counts[preds[i].label].tp += 1
    for label in ClassLabel:
        n_pred = sum(1 for p in preds if p.label is label)
        n_gt = sum(1 for g in gts if g.label is label)
        counts[label].fp = n_pred - counts[label].tp
        counts[label].fn = n_gt - counts[label].tp
    return counts


def optimal_tp(preds, gts, iou_thresh=0.5):
    """
    Maximum number of matches by exhaustive search. Only meant for small pages.
    """
    total = 0
    for label in ClassLabel:
        p = [d for d in preds if d.label is label]
        g = [t for t in gts if t.label is label]
        if not p or not g:
            continue
        valid = iou_matrix(boxes_to_array([d.box for d in p]), boxes_to_array([t.box for t in g])) >= iou_thresh
        best = 0
        small, large = (p, g) if len(p) <= len(g) else (g, p)
        grid = valid if small is p else valid.T
        for perm in itertools.permutations(range(len(large)), len(small)):
            best = max(best, sum(1 for row, col in enumerate(perm) if grid[row, col]))
            if best == len(small):
                break
        total += best
    return total


def greedy_gap(preds, gts, iou_thresh=0.5, page_id=""):
    """
    Difference between the optimal and the greedy TP count; logged as a
    warning when positive.
    """
    greedy = len(match_pairs(preds, gts, iou_thresh))
    gap = optimal_tp(preds, gts, iou_thresh) - greedy
    if gap > 0:
        log.warning("page '%s': greedy matching found %d TP, optimal %d", page_id, greedy, greedy + gap)
    return gap


@dataclass
class EvalReport:
    """
    Per-class and total counts with precision/recall/F1.

    Parameters
    ----------
    classes : `dict` ClassLabel -> `MatchCounts`
    pages : `dict` page_id -> (`dict` ClassLabel -> `MatchCounts`), optional
    """
    classes: dict = field(default_factory=_empty_counts)
    pages: dict = field(default_factory=dict)

    @property
    def total(self):
        total = MatchCounts()
        for counts in self.classes.values():
            total = total + counts
        return total

    def rows(self):
        """(name, MatchCounts) for both classes and the total."""
        return [(str(label), self.classes[label]) for label in ClassLabel] + [(TOTAL, self.total)]

    def __add__(self, other):
        pages = dict(self.pages)
        for page, counts in other.pages.items():
            pages[page] = _add_counts(pages[page], counts) if page in pages else counts
        return EvalReport(_add_counts(self.classes, other.classes), pages)

    def to_frame(self):
        """
        Returns
        -------
        `pandas.DataFrame` indexed by class with F1, p, r, TP, FP, FN
        """
        records = [{"class": name, "F1": c.f1, "p": c.precision, "r": c.recall,
                    "TP": c.tp, "FP": c.fp, "FN": c.fn} for name, c in self.rows()]
        return pd.DataFrame.from_records(records, index="class")

    def format_table(self):
        """Fixed-width text table."""
        lines = [f"{'class':<10}{'F1':>10}{'p':>10}{'r':>10}{'TP':>10}{'FP':>10}{'FN':>10}"]
        for name, c in self.rows():
            lines.append(f"{name:<10}{c.f1:>10.4f}{c.precision:>10.4f}{c.recall:>10.4f}"
                         f"{c.tp:>10d}{c.fp:>10d}{c.fn:>10d}")
        return "\n".join(lines)

    def table_row(self, name=TOTAL):
        """
        Percent scores in the "F1 / p:.. r:.." layout of published result tables.

        Parameters
        ----------
        name : `str`
            "embedded", "isolated" or "total"
        """
        c = self.total if name == TOTAL else self.classes[ClassLabel.parse(name)]
        return f"{100 * c.f1:.2f} / p:{100 * c.precision:.2f} r:{100 * c.recall:.2f}"

    def to_dict(self):
        out = {name: {"f1": round(c.f1, 6), "precision": round(c.precision, 6),
                      "recall": round(c.recall, 6), "tp": c.tp, "fp": c.fp, "fn": c.fn}
               for name, c in self.rows()}
        if self.pages:
            out["pages"] = {page: {str(label): {"tp": c.tp, "fp": c.fp, "fn": c.fn}
                                   for label, c in counts.items()}
                            for page, counts in sorted(self.pages.items())}
        return out


def evaluate(preds, gts, iou_thresh=0.5, per_page=False):
    """
    Evaluates predictions of a whole split.

    Parameters
    ----------
    preds : `list` of `Detection`
        page ids must occur in the ground truth
    gts : `list` of `GroundTruthInstance`
    iou_thresh : `float`, optional
        Default: 0.5
    per_page : `bool`, optional
        keep the per-page breakdown

    Returns
    -------
    `EvalReport`
    """
    gt_pages = {}
    for gt in gts:
        gt_pages.setdefault(gt.page_id, []).append(gt)
    pred_pages = {}
    for pred in preds:
        pred_pages.setdefault(pred.page_id, []).append(pred)
    unknown = sorted(set(pred_pages) - set(gt_pages))
    if unknown:
        raise ValueError(f"predictions reference pages without ground truth: {', '.join(unknown)}")
    report = EvalReport()
    for page in sorted(gt_pages):
        counts = match_page(pred_pages.get(page, []), gt_pages[page], iou_thresh)
        report.classes = _add_counts(report.classes, counts)
        if per_page:
            report.pages[page] = counts
        log.debug("page %s: %s", page, counts)
    return report


def evaluate_splits(splits, iou_thresh=0.5, per_page=False):
    """
    Sums the reports of several (preds, gts) splits, e.g. two test sets.

    Parameters
    ----------
    splits : `list` of (`list` of `Detection`, `list` of `GroundTruthInstance`)
    """
    report = EvalReport()
    for preds, gts in splits:
        report = report + evaluate(preds, gts, iou_thresh, per_page)
    return report

#!/usr/bin/env python

# Copyright (c) 2021-2026, mfdpy developers
#            Distributed under a Modified BSD License.
#              See accompanying file LICENSE

"""
Tabular views of coverage, sampling-imbalance and dataset statistics.
"""

import numpy as np
import pandas as pd

from mfdpy.classes.pyramid import DETECTABLE_CELLS, PyramidSpec, max_regressable_side


# Helper functions
def check_input(df, interest, context):
    diff = set(interest) - set(df.columns)
    if diff:
        raise KeyError('Column(s) of interest ({}) is/are not present in table'.format(','.join(sorted(diff))))
    diff = set(context) - set(df.columns)
    if diff:
        raise KeyError('Column(s) of context ({}) is/are not present in table'.format(','.join(sorted(diff))))


def check_output(pt, interest, context):
    if pt.empty:
        raise ValueError(
            'The values of {} are not associated to any of {}.'.format(','.join(interest), ','.join(context)))


# decorator for analyses
def pre_post_check(interest, context):
    def wrap(f):
        def wrapped_f(df):
            check_input(df, interest, context)
            pt = f(df)
            check_output(pt, interest, context)
            return pt

        return wrapped_f

    return wrap


def coverage_frame(report):
    """One row per GT: page_id, class, short_side, levels, detectable."""
    return pd.DataFrame({
        "page_id": [e.page_id for e in report.entries],
        "class": [str(e.label) for e in report.entries],
        "short_side": [e.short_side for e in report.entries],
        "levels": [";".join(str(level) for level in e.levels) for e in report.entries],
        "detectable": [int(e.detectable) for e in report.entries],
    }, columns=["page_id", "class", "short_side", "levels", "detectable"])


def coverage_summary(report):
    """Per class: total, flagged and the number of GTs usable on every level."""
    records = []
    for label, cov in report.summary.items():
        record = {"class": str(label), "total": cov.total, "flagged": cov.flagged}
        for level in report.spec.levels:
            record[f"level_{level}"] = cov.per_level.get(level, 0)
        records.append(record)
    total = {"class": "total", "total": report.total, "flagged": report.total_flagged}
    for level in report.spec.levels:
        total[f"level_{level}"] = sum(r[f"level_{level}"] for r in records)
    records.append(total)
    return pd.DataFrame.from_records(records)


def extents_frame(spec):
    """Per level: stride, smallest detectable short side, largest regressable side."""
    return pd.DataFrame({
        "level": list(spec.levels),
        "stride": [PyramidSpec.stride(level) for level in spec.levels],
        "min_short_side": [DETECTABLE_CELLS * PyramidSpec.stride(level) for level in spec.levels],
        "max_regressable_side": [max_regressable_side(level, spec.regmax) for level in spec.levels],
    })


def imbalance_frame(gts, random_stats, atss_stats):
    """One row per GT with its area and positive counts under both strategies."""
    return pd.DataFrame({
        "page_id": [gt.page_id for gt in gts],
        "class": [str(gt.label) for gt in gts],
        "area": random_stats.areas,
        "positives_random": random_stats.counts,
        "positives_atss": atss_stats.counts,
    }, columns=["page_id", "class", "area", "positives_random", "positives_atss"])


def instance_frame(gts):
    """Ground truth with derived geometry columns."""
    return pd.DataFrame({
        "page_id": [gt.page_id for gt in gts],
        "class": [str(gt.label) for gt in gts],
        "area": [gt.box.width * gt.box.height for gt in gts],
        "aspect_ratio": [gt.box.aspect_ratio for gt in gts],
        "short_side": [gt.box.short_side for gt in gts],
    }, columns=["page_id", "class", "area", "aspect_ratio", "short_side"])


@pre_post_check(interest=["area", "aspect_ratio", "short_side"], context=["class"])
def dataset_statistics(df):
    """
    Scale span and aspect-ratio span per class (and over all instances).
    """
    def summarize(group):
        areas = group["area"]
        positive = areas[areas > 0]
        finite_aspect = group["aspect_ratio"].replace([np.inf, -np.inf], np.nan).dropna()
        return pd.Series({
            "count": len(group),
            "area_min": areas.min(),
            "area_median": areas.median(),
            "area_max": areas.max(),
            "area_span": positive.max() / positive.min() if len(positive) else np.nan,
            "aspect_min": finite_aspect.min(),
            "aspect_max": finite_aspect.max(),
            "short_side_p05": group["short_side"].quantile(0.05),
            "short_side_p50": group["short_side"].quantile(0.5),
            "short_side_p95": group["short_side"].quantile(0.95),
        })

    if df.empty:
        return pd.DataFrame()
    per_class = {name: summarize(group) for name, group in df.groupby("class", sort=True)}
    per_class["total"] = summarize(df)
    pt = pd.DataFrame(per_class).T
    pt.index.name = "class"
    pt["count"] = pt["count"].astype(int)
    return pt

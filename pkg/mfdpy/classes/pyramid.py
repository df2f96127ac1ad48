# -*- coding: utf-8 -*-
"""
Feature pyramid geometry: grid points, detectability limits and the
regression extent of every level.

A level l has stride 2**l. An object is detectable on a level when its short
side covers at least three feature-map cells, and regressable when its long
side does not exceed 2*regmax*stride, i.e. both opposite side offsets
saturated at regmax bins.

Copyright (c) 2021-2026, mfdpy developers
            Distributed under a Modified BSD License.
              See accompanying file LICENSE

"""
# pylint: disable=C0103, R0902, R0914, R0913
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from mfdpy.classes.geometry import ClassLabel

log = logging.getLogger(__name__)

DETECTABLE_CELLS = 3
MIN_LEVEL = 1
MAX_LEVEL = 8


@dataclass(frozen=True)
class PyramidSpec:
    """
    Ordered FPN levels sharing one regmax.

    Parameters
    ----------
    levels : `tuple` of `int`
        strictly increasing level indices in [1, 8]
    regmax : `int`
        number of regression bins R per side
    """
    levels: tuple
    regmax: int = 24

    def __post_init__(self):
        levels = tuple(int(level) for level in self.levels)
        if len(levels) == 0:
            raise ValueError("a pyramid needs at least one level")
        for level in levels:
            if not MIN_LEVEL <= level <= MAX_LEVEL:
                raise ValueError(f"level {level} outside [{MIN_LEVEL}, {MAX_LEVEL}]")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError(f"levels {levels} are not strictly increasing")
        if int(self.regmax) < 1:
            raise ValueError(f"regmax must be >= 1, got {self.regmax}")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "regmax", int(self.regmax))

    @classmethod
    def from_range(cls, lowest, highest, regmax=24):
        """FPN(lowest-highest), both ends inclusive."""
        return cls(tuple(range(lowest, highest + 1)), regmax)

    @classmethod
    def parse(cls, text, regmax=24):
        """
        Parses "2-6" (inclusive range) or "2,3,4".
        """
        text = str(text).strip()
        try:
            if "-" in text:
                lowest, highest = (int(part) for part in text.split("-", 1))
                return cls.from_range(lowest, highest, regmax)
            return cls(tuple(int(part) for part in text.split(",") if part.strip()), regmax)
        except ValueError as err:
            raise ValueError(f"invalid level list '{text}': {err}") from None

    @staticmethod
    def stride(level):
        return float(2 ** int(level))

    def shifted(self, offset):
        """The same pyramid with every level moved by ``offset``."""
        return PyramidSpec(tuple(level + offset for level in self.levels), self.regmax)

    def __str__(self):
        if list(self.levels) == list(range(self.levels[0], self.levels[-1] + 1)):
            return f"FPN({self.levels[0]}-{self.levels[-1]})"
        return "FPN(" + ",".join(str(level) for level in self.levels) + ")"


@dataclass(frozen=True)
class GridPoint:
    """Center of a feature-map cell."""
    x: float
    y: float
    level: int


def _axis_centers(stride, extent):
    count = max(int(math.ceil(extent / stride + 0.5)), 0)
    centers = stride * (np.arange(count, dtype=np.float64) + 0.5)
    return centers[(centers > 0.0) & (centers < extent)]


def grid_array(level, image_w, image_h):
    """
    Cell centers of one level as an (n, 2) array of (x, y), row-major.

    Parameters
    ----------
    level : `int`
    image_w : `float`
    image_h : `float`
    """
    if image_w <= 0 or image_h <= 0:
        raise ValueError(f"image size must be positive, got {image_w}x{image_h}")
    stride = PyramidSpec.stride(level)
    xs = _axis_centers(stride, float(image_w))
    ys = _axis_centers(stride, float(image_h))
    grid_x, grid_y = np.meshgrid(xs, ys)
    return np.stack([grid_x.ravel(), grid_y.ravel()], axis=1)


def grid_points(level, image_w, image_h):
    """
    All cell centers strictly inside the image, row-major.

    Parameters
    ----------
    level : `int`
    image_w : `float`
    image_h : `float`

    Returns
    -------
    `list` of `GridPoint`
    """
    return [GridPoint(float(x), float(y), int(level)) for x, y in grid_array(level, image_w, image_h)]


def min_detectable_short_side(spec):
    """Smallest short side detectable anywhere in the pyramid (3 cells of the finest level)."""
    return DETECTABLE_CELLS * PyramidSpec.stride(spec.levels[0])


def max_regressable_side(level, regmax):
    """Largest box side reachable when both opposite offsets saturate at regmax bins."""
    if int(regmax) < 1:
        raise ValueError(f"regmax must be >= 1, got {regmax}")
    return 2.0 * int(regmax) * PyramidSpec.stride(level)


def usable_levels(short_side, long_side, spec):
    """Levels on which a box is both detectable and regressable."""
    usable = []
    for level in spec.levels:
        detectable = short_side >= DETECTABLE_CELLS * PyramidSpec.stride(level)
        regressable = long_side <= max_regressable_side(level, spec.regmax)
        if detectable and regressable:
            usable.append(level)
    return tuple(usable)


@dataclass(frozen=True)
class CoverageEntry:
    page_id: str
    label: ClassLabel
    short_side: float
    long_side: float
    levels: tuple

    @property
    def detectable(self):
        return len(self.levels) > 0


@dataclass
class ClassCoverage:
    total: int = 0
    flagged: int = 0
    per_level: dict = field(default_factory=dict)


@dataclass
class CoverageReport:
    """
    Per-GT usable levels and per-class counts of GTs without any usable level.
    """
    spec: PyramidSpec
    entries: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def flagged(self):
        return [entry for entry in self.entries if not entry.detectable]

    @property
    def total(self):
        return sum(cov.total for cov in self.summary.values())

    @property
    def total_flagged(self):
        return sum(cov.flagged for cov in self.summary.values())


def coverage_report(gts, spec):
    """
    Checks which pyramid levels can detect and regress each GT.

    Parameters
    ----------
    gts : `list` of `GroundTruthInstance`
    spec : `PyramidSpec`

    Returns
    -------
    `CoverageReport`
    """
    summary = {label: ClassCoverage(per_level={level: 0 for level in spec.levels})
               for label in ClassLabel}
    entries = []
    for gt in gts:
        levels = usable_levels(gt.box.short_side, gt.box.long_side, spec)
        entry = CoverageEntry(gt.page_id, gt.label, gt.box.short_side, gt.box.long_side, levels)
        entries.append(entry)
        cov = summary[gt.label]
        cov.total += 1
        if not entry.detectable:
            cov.flagged += 1
        for level in levels:
            cov.per_level[level] += 1
    report = CoverageReport(spec, entries, summary)
    log.info("%s: %d of %d instances without a usable level", spec,
             report.total_flagged, report.total)
    return report

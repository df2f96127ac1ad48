# -*- coding: utf-8 -*-
"""
Run configuration with the defaults of the competition setup: FPN(2-6),
regmax 24, ATSS k=9, NMS at IoU 0.6, WBF at IoU 0.4 and 1583x2048 test pages.

Copyright (c) 2021-2026, mfdpy developers
            Distributed under a Modified BSD License.
              See accompanying file LICENSE

"""
# pylint: disable=C0103, R0902, R0914, R0913
import dataclasses
from dataclasses import dataclass

from mfdpy.classes.pyramid import PyramidSpec


@dataclass(frozen=True)
class RunConfig:
    """
    Parameters
    ----------
    levels : `tuple` of `int`, optional
        Default: (2, 3, 4, 5, 6)
    regmax : `int`, optional
        Default: 24
    atss_k : `int`, optional
        Default: 9
    nms_iou : `float`, optional
        Default: 0.6
    wbf_iou : `float`, optional
        Default: 0.4
    eval_iou : `float`, optional
        Default: 0.5
    min_score : `float`, optional
        Default: 0.0
    image_width : `float`, optional
        Default: 1583
    image_height : `float`, optional
        Default: 2048
    """
    levels: tuple = (2, 3, 4, 5, 6)
    regmax: int = 24
    atss_k: int = 9
    nms_iou: float = 0.6
    wbf_iou: float = 0.4
    eval_iou: float = 0.5
    min_score: float = 0.0
    image_width: float = 1583.0
    image_height: float = 2048.0

    def __post_init__(self):
        # validates levels and regmax
        spec = PyramidSpec(tuple(self.levels), self.regmax)
        object.__setattr__(self, "levels", spec.levels)
        for name in ("nms_iou", "wbf_iou", "eval_iou", "min_score"):
            value = float(getattr(self, name))
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")
            object.__setattr__(self, name, value)
        if int(self.atss_k) < 1:
            raise ValueError(f"atss_k must be >= 1, got {self.atss_k}")
        if self.image_width <= 0 or self.image_height <= 0:
            raise ValueError(f"image size must be positive, got {self.image_width}x{self.image_height}")

    def replace(self, **overrides):
        """Copy with the given fields replaced; ``None`` values are ignored."""
        return dataclasses.replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def pyramid(self):
        return PyramidSpec(self.levels, self.regmax)

    @property
    def image_size(self):
        return (self.image_width, self.image_height)

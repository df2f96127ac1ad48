# -*- coding: utf-8 -*-
"""
Axis-aligned box primitives shared by every other module.

Coordinates are continuous pixel values with (x1, y1) the top-left and
(x2, y2) the bottom-right corner. The bottom-right corner is exclusive, i.e.
the area is (x2-x1)*(y2-y1) without any "+1" convention.

Copyright (c) 2021-2026, mfdpy developers
            Distributed under a Modified BSD License.
              See accompanying file LICENSE

"""
# pylint: disable=C0103, R0902, R0914, R0913
import enum
import math
from dataclasses import dataclass

import numpy as np


class ClassLabel(enum.Enum):
    """The two formula classes."""
    EMBEDDED = "embedded"
    ISOLATED = "isolated"

    @classmethod
    def parse(cls, text):
        """
        Case-insensitive parsing of a class name.

        Parameters
        ----------
        text : `str`
        """
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise ValueError(f"unknown class '{text}' (expected embedded or isolated)") from None

    def __str__(self):
        return self.value


def real_number(value, name):
    """
    Finite JSON number as `float`; strings, booleans and null are rejected.

    Parameters
    ----------
    value : any
    name : `str`
        field name used in the error message
    """
    if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
        raise ValueError(f"{name} must be a number, got {value!r}")
    number = float(value)
    if not math.isfinite(number):
        raise ValueError(f"{name} {value!r} is not finite")
    return number


@dataclass(frozen=True)
class Box:
    """
    Axis-aligned rectangle in pixel coordinates.

    Parameters
    ----------
    x1, y1 : `float`
        top-left corner
    x2, y2 : `float`
        bottom-right corner, x2 >= x1 and y2 >= y1
    """
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        for name in ("x1", "y1", "x2", "y2"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"box coordinate {name}={value} is not finite")
            object.__setattr__(self, name, value)
        if self.x2 < self.x1:
            raise ValueError(f"negative box width: x2={self.x2} < x1={self.x1}")
        if self.y2 < self.y1:
            raise ValueError(f"negative box height: y2={self.y2} < y1={self.y1}")

    @property
    def width(self):
        return self.x2 - self.x1

    @property
    def height(self):
        return self.y2 - self.y1

    @property
    def short_side(self):
        return min(self.width, self.height)

    @property
    def long_side(self):
        return max(self.width, self.height)

    @property
    def center(self):
        return ((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)

    @property
    def aspect_ratio(self):
        """height / width, inf for zero-width boxes"""
        if self.width == 0.0:
            return math.inf
        return self.height / self.width

    def as_array(self):
        return np.array([self.x1, self.y1, self.x2, self.y2], dtype=np.float64)


@dataclass(frozen=True)
class GroundTruthInstance:
    """Annotated formula on one page."""
    box: Box
    label: ClassLabel
    page_id: str


def area(b):
    """
    Area of a box in px².

    Parameters
    ----------
    b : `Box`
    """
    return (b.x2 - b.x1) * (b.y2 - b.y1)


def _intersection(ax1, ay1, ax2, ay2, bx1, by1, bx2, by2):
    iw = np.maximum(np.minimum(ax2, bx2) - np.maximum(ax1, bx1), 0.0)
    ih = np.maximum(np.minimum(ay2, by2) - np.maximum(ay1, by1), 0.0)
    return iw * ih


def iou(a, b):
    """
    Intersection over union of two boxes, 0 when the union is empty.

    Parameters
    ----------
    a : `Box`
    b : `Box`
    """
    inter = max(min(a.x2, b.x2) - max(a.x1, b.x1), 0.0) * max(min(a.y2, b.y2) - max(a.y1, b.y1), 0.0)
    union = area(a) + area(b) - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def boxes_to_array(boxes):
    """Stacks boxes into an (n, 4) float64 array."""
    if len(boxes) == 0:
        return np.zeros((0, 4), dtype=np.float64)
    return np.array([[b.x1, b.y1, b.x2, b.y2] for b in boxes], dtype=np.float64)


def iou_many(box, boxes):
    """
    IoU of one box against an (n, 4) array of boxes.

    Uses the same arithmetic as `iou`, so both agree exactly.

    Parameters
    ----------
    box : `Box` or array of length 4
    boxes : `numpy.ndarray`
    """
    ref = box.as_array() if isinstance(box, Box) else np.asarray(box, dtype=np.float64)
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    inter = _intersection(ref[0], ref[1], ref[2], ref[3],
                          boxes[:, 0], boxes[:, 1], boxes[:, 2], boxes[:, 3])
    area_ref = (ref[2] - ref[0]) * (ref[3] - ref[1])
    areas = (boxes[:, 2] - boxes[:, 0]) * (boxes[:, 3] - boxes[:, 1])
    union = area_ref + areas - inter
    out = np.zeros(len(boxes), dtype=np.float64)
    np.divide(inter, union, out=out, where=union > 0.0)
    return out


def iou_matrix(boxes_a, boxes_b):
    """
    Pairwise IoU between two (n, 4) / (m, 4) arrays, shape (n, m).
    """
    a = np.asarray(boxes_a, dtype=np.float64).reshape(-1, 4)
    b = np.asarray(boxes_b, dtype=np.float64).reshape(-1, 4)
    inter = _intersection(a[:, None, 0], a[:, None, 1], a[:, None, 2], a[:, None, 3],
                          b[None, :, 0], b[None, :, 1], b[None, :, 2], b[None, :, 3])
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    out = np.zeros(inter.shape, dtype=np.float64)
    np.divide(inter, union, out=out, where=union > 0.0)
    return out


def hflip(b, image_width):
    """
    Mirrors a box about the vertical center line of an image.

    Parameters
    ----------
    b : `Box`
    image_width : `float`

    Returns
    -------
    `Box` (W-x2, y1, W-x1, y2)
    """
    if b.x1 < 0.0:
        raise ValueError(f"box x1={b.x1} lies left of the image")
    if b.x2 > image_width:
        raise ValueError(f"box x2={b.x2} exceeds image width {image_width}")
    return Box(image_width - b.x2, b.y1, image_width - b.x1, b.y2)

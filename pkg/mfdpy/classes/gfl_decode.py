# -*- coding: utf-8 -*-
"""
Decoding of discrete side-offset distributions into boxes.

Each box side is predicted as a probability distribution over the integer
offsets 0..R (R = regmax). The decoded offset is the expectation scaled by the
stride of the level, so a side never exceeds R*stride.

Copyright (c) 2021-2026, mfdpy developers
            Distributed under a Modified BSD License.
              See accompanying file LICENSE

"""
# pylint: disable=C0103, R0902, R0914, R0913
from dataclasses import dataclass

import numpy as np

from mfdpy.classes.geometry import Box, ClassLabel, real_number
from mfdpy.classes.postprocess import Detection
from mfdpy.classes.pyramid import GridPoint, PyramidSpec

SUM_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class SideDistribution:
    """
    Probabilities p_0..p_R over the offset bins of one side.

    Parameters
    ----------
    probabilities : array-like of length R+1
    """
    probabilities: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probabilities, dtype=np.float64).ravel()
        if len(probs) < 2:
            raise ValueError(f"a distribution needs at least 2 bins, got {len(probs)}")
        if not np.all(np.isfinite(probs)):
            raise ValueError("distribution contains non-finite values")
        if np.any(probs < 0.0):
            raise ValueError("distribution contains negative probabilities")
        total = probs.sum()
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"distribution sums to {total}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probabilities", probs)

    @property
    def regmax(self):
        return len(self.probabilities) - 1

    @classmethod
    def one_hot(cls, index, regmax):
        probs = np.zeros(regmax + 1)
        probs[index] = 1.0
        return cls(probs)

    @classmethod
    def uniform(cls, regmax):
        return cls(np.full(regmax + 1, 1.0 / (regmax + 1)))


def _as_distribution(d):
    return d if isinstance(d, SideDistribution) else SideDistribution(d)


def decode_side(d, stride):
    """
    Expected offset of a side in pixels.

    Parameters
    ----------
    d : `SideDistribution` or array-like
    stride : `float`

    Returns
    -------
    `float` in [0, R*stride]
    """
    d = _as_distribution(d)
    expectation = float(np.dot(np.arange(d.regmax + 1, dtype=np.float64), d.probabilities))
    return float(np.clip(expectation * stride, 0.0, d.regmax * stride))


def decode_box(p, left, top, right, bottom, spec, image_size=None):
    """
    Assembles a box around a grid point from four side distributions.

    Parameters
    ----------
    p : `GridPoint`
    left, top, right, bottom : `SideDistribution`
    spec : `PyramidSpec`
    image_size : `tuple` (width, height), optional
        clip the box to the image if given

    Returns
    -------
    `Box`
    """
    if p.level not in spec.levels:
        raise ValueError(f"level {p.level} not in {spec}")
    stride = PyramidSpec.stride(p.level)
    sides = []
    for d in (left, top, right, bottom):
        d = _as_distribution(d)
        if d.regmax != spec.regmax:
            raise ValueError(f"distribution has {d.regmax + 1} bins, expected {spec.regmax + 1}")
        sides.append(decode_side(d, stride))
    x1, y1 = p.x - sides[0], p.y - sides[1]
    x2, y2 = p.x + sides[2], p.y + sides[3]
    if image_size is not None:
        width, height = image_size
        x1, x2 = float(np.clip(x1, 0.0, width)), float(np.clip(x2, 0.0, width))
        y1, y2 = float(np.clip(y1, 0.0, height)), float(np.clip(y2, 0.0, height))
    return Box(x1, y1, x2, y2)


def _whole_number(value, name):
    number = real_number(value, name)
    if not number.is_integer():
        raise ValueError(f"{name} must be a whole number, got {value!r}")
    return int(number)


def _distribution_from_json(values, side):
    if not isinstance(values, list):
        raise ValueError(f"{side} distribution must be a list, got {values!r}")
    return SideDistribution([real_number(v, f"{side} probability") for v in values])


def decode_record(record, spec, image_size=None):
    """
    Decodes one record of the ``decode`` input format.

    The record holds ``page_id``, ``level``, ``x``, ``y`` and ``dists``
    (four lists of R+1 probabilities, order left, top, right, bottom).
    With ``class`` and ``score`` present it also becomes a detection.
    Every malformed field raises `ValueError`.

    Parameters
    ----------
    record : `dict`
    spec : `PyramidSpec`
    image_size : `tuple`, optional

    Returns
    -------
    `dict` with keys page_id, box and optionally detection
    """
    for key in ("page_id", "level", "x", "y", "dists"):
        if key not in record:
            raise ValueError(f"missing field '{key}'")
    page_id = record["page_id"]
    if not isinstance(page_id, str) or not page_id:
        raise ValueError("page_id must be a nonempty string")
    dists = record["dists"]
    if not isinstance(dists, list) or len(dists) != 4:
        raise ValueError(f"dists must be a list of 4 side distributions, got {dists!r}")
    dists = [_distribution_from_json(d, side)
             for d, side in zip(dists, ("left", "top", "right", "bottom"))]
    point = GridPoint(real_number(record["x"], "x"), real_number(record["y"], "y"),
                      _whole_number(record["level"], "level"))
    box = decode_box(point, *dists, spec=spec, image_size=image_size)
    entry = {"page_id": page_id, "box": box}
    if "class" in record and "score" in record:
        model_id = record.get("model_id", 0)
        if isinstance(model_id, bool) or not isinstance(model_id, int) or model_id < 0:
            raise ValueError(f"model_id must be a nonnegative integer, got {model_id!r}")
        entry["detection"] = Detection(box, ClassLabel.parse(record["class"]),
                                       real_number(record["score"], "score"), model_id, page_id)
    return entry


def decode_records(records, spec, image_size=None):
    """
    Decodes an iterable of records with `decode_record`.

    Parameters
    ----------
    records : iterable of `dict`
    spec : `PyramidSpec`
    image_size : `tuple`, optional

    Returns
    -------
    `list` of `dict` with keys page_id, box and optionally detection
    """
    return [decode_record(record, spec, image_size) for record in records]

#!/usr/bin/env python

# Copyright (c) 2021-2026, mfdpy developers
#            Distributed under a Modified BSD License.
#              See accompanying file LICENSE

"""
Readers and writers for the ground-truth CSV and prediction JSON-lines files.

Ground truth: CSV with header ``page_id,class,x1,y1,x2,y2``.
Predictions: one JSON object per line,
``{"page_id": str, "class": "embedded"|"isolated", "score": float,
"box": [x1, y1, x2, y2], "model_id": int (optional)}``.
Floats are written with 6 decimals.
"""

import json
import logging
import math

import pandas as pd

from mfdpy.classes import gfl_decode
from mfdpy.classes.geometry import Box, ClassLabel, GroundTruthInstance, real_number
from mfdpy.classes.postprocess import Detection, FusedDetection

log = logging.getLogger(__name__)

GT_COLUMNS = ["page_id", "class", "x1", "y1", "x2", "y2"]
FLOAT_FORMAT = "{:.6f}"


class ParseError(ValueError):
    """Malformed input record, positioned by file and line."""
    def __init__(self, path, line, reason):
        self.path = str(path)
        self.line = line
        self.reason = reason
        where = self.path if line is None else f"{self.path}:{line}"
        super().__init__(f"{where}: {reason}")


def _to_float(value, name):
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ValueError(f"{name} '{value}' is not a number") from None
    if not math.isfinite(number):
        raise ValueError(f"{name} '{value}' is not finite")
    return number


def _is_blank(values):
    return all((isinstance(v, float) and math.isnan(v)) or str(v).strip() == "" for v in values)


def parse_gt(path):
    """
    Reads a ground-truth CSV file.

    Parameters
    ----------
    path : `str`

    Returns
    -------
    `list` of `GroundTruthInstance`
    """
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=False)
    except pd.errors.EmptyDataError:
        log.info("%s is empty", path)
        return []
    except pd.errors.ParserError as err:
        raise ParseError(path, None, str(err).strip()) from None
    columns = [str(c).strip() for c in df.columns]
    if columns != GT_COLUMNS:
        raise ParseError(path, 1, f"header {','.join(columns)} differs from {','.join(GT_COLUMNS)}")
    instances = []
    seen = {}
    for row in df.itertuples(index=True, name=None):
        line = row[0] + 2
        values = row[1:]
        if _is_blank(values):
            continue
        page_id, label, *coords = (str(v).strip() for v in values)
        try:
            if not page_id:
                raise ValueError("empty page_id")
            label = ClassLabel.parse(label)
            box = Box(*(_to_float(v, name) for v, name in zip(coords, GT_COLUMNS[2:])))
        except ValueError as err:
            raise ParseError(path, line, str(err)) from None
        key = (page_id, label, box)
        if key in seen:
            raise ParseError(path, line, f"duplicate of line {seen[key]}")
        seen[key] = line
        instances.append(GroundTruthInstance(box, label, page_id))
    log.debug("read %d ground-truth instances from %s", len(instances), path)
    return instances


def read_jsonl(path):
    """
    Reads a JSON-lines file into (line number, object) pairs; blank lines are skipped.
    """
    records = []
    with open(path, encoding="utf-8") as stream:
        for line_nr, line in enumerate(stream, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as err:
                raise ParseError(path, line_nr, f"invalid JSON: {err.msg}") from None
            if not isinstance(record, dict):
                raise ParseError(path, line_nr, "record is not a JSON object")
            records.append((line_nr, record))
    return records


def _detection_from_record(record):
    for key in ("page_id", "class", "score", "box"):
        if key not in record:
            raise ValueError(f"missing field '{key}'")
    page_id = record["page_id"]
    if not isinstance(page_id, str) or not page_id:
        raise ValueError("page_id must be a nonempty string")
    score = real_number(record["score"], "score")
    if not 0.0 <= score <= 1.0:
        raise ValueError(f"score {score} outside [0, 1]")
    coords = record["box"]
    if not isinstance(coords, list) or len(coords) != 4:
        raise ValueError("box must be a list [x1, y1, x2, y2]")
    box = Box(*(real_number(v, name) for v, name in zip(coords, GT_COLUMNS[2:])))
    model_id = record.get("model_id", 0)
    if isinstance(model_id, bool) or not isinstance(model_id, int) or model_id < 0:
        raise ValueError(f"model_id must be a nonnegative integer, got {model_id!r}")
    return Detection(box, ClassLabel.parse(record["class"]), score, model_id, page_id)


def parse_preds(path):
    """
    Reads a prediction JSON-lines file.

    Parameters
    ----------
    path : `str`

    Returns
    -------
    `list` of `Detection`
    """
    detections = []
    for line_nr, record in read_jsonl(path):
        try:
            detections.append(_detection_from_record(record))
        except ValueError as err:
            raise ParseError(path, line_nr, str(err)) from None
    log.debug("read %d detections from %s", len(detections), path)
    return detections


def parse_decode(path, spec, image_size=None):
    """
    Reads and decodes a JSON-lines file of side distributions.

    Parameters
    ----------
    path : `str`
    spec : `PyramidSpec`
    image_size : `tuple`, optional
        (width, height) to clip the decoded boxes to

    Returns
    -------
    `list` of `dict` as returned by `gfl_decode.decode_record`
    """
    decoded = []
    for line_nr, record in read_jsonl(path):
        try:
            decoded.append(gfl_decode.decode_record(record, spec, image_size))
        except ValueError as err:
            raise ParseError(path, line_nr, str(err)) from None
    log.debug("decoded %d records from %s", len(decoded), path)
    return decoded


def _fmt(value):
    return FLOAT_FORMAT.format(value)


def detection_to_json(det):
    """One JSON line for a detection, floats with 6 decimals."""
    box = ", ".join(_fmt(v) for v in (det.box.x1, det.box.y1, det.box.x2, det.box.y2))
    line = (f'{{"page_id": {json.dumps(det.page_id)}, "class": "{det.label}", '
            f'"score": {_fmt(det.score)}, "box": [{box}], "model_id": {det.model_id}')
    if isinstance(det, FusedDetection):
        line += f', "cluster_size": {det.cluster_size}'
    return line + "}"


def write_preds(dets, stream):
    """
    Writes detections (or fused detections) as JSON lines.

    Parameters
    ----------
    dets : `list` of `Detection`
    stream : writable text stream
    """
    for det in dets:
        stream.write(detection_to_json(det) + "\n")


def gt_frame(gts):
    """Ground truth as a DataFrame with the CSV columns."""
    return pd.DataFrame([[gt.page_id, str(gt.label), gt.box.x1, gt.box.y1, gt.box.x2, gt.box.y2]
                         for gt in gts], columns=GT_COLUMNS)


def write_gt(gts, stream):
    """
    Writes ground truth as CSV.

    Parameters
    ----------
    gts : `list` of `GroundTruthInstance`
    stream : writable text stream
    """
    stream.write(gt_frame(gts).to_csv(index=False, float_format="%.6f"))


def box_to_json(page_id, box):
    """JSON line for a bare decoded box."""
    coords = ", ".join(_fmt(v) for v in (box.x1, box.y1, box.x2, box.y2))
    return f'{{"page_id": {json.dumps(page_id)}, "box": [{coords}]}}'

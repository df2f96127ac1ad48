# -*- coding: utf-8 -*-
"""
Command line interface of mfdpy.

Subcommands: eval, nms, fuse, flip-merge, atss-sim, fpn-coverage, decode, stats.
Results go to stdout or ``--out``, log messages to stderr. Output is written
only once a command succeeded, a failing command leaves no ``--out`` file.

Copyright (c) 2021-2026, mfdpy developers
            Distributed under a Modified BSD License.
              See accompanying file LICENSE

"""
# pylint: disable=C0103, R0902, R0914, R0913
import argparse
import contextlib
import io
import json
import logging
import sys

from mfdpy._version import __version__
from mfdpy.classes.pyramid import PyramidSpec
from mfdpy.classes.run_config import RunConfig
from mfdpy.mfd import MFD
import mfdpy.file_parser.file_parser as parser
import mfdpy.file_parser.common_mfd_analyses as analyses

log = logging.getLogger(__name__)

DEFAULTS = RunConfig()


def _levels(text):
    try:
        return PyramidSpec.parse(text).levels
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def _unit_interval(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not a number") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{value} outside [0, 1]")
    return value


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as stream:
            yield stream


def _write_frame(df, stream, index=False):
    stream.write(df.to_csv(index=index, float_format="%.6f"))


def _write_comment_block(title, df, stream):
    stream.write(f"# {title}\n")
    for line in df.to_csv(index=False, float_format="%.6f").splitlines():
        stream.write(f"# {line}\n")


def cmd_eval(args, stream):
    if len(args.gt) != len(args.pred):
        raise ValueError(f"{len(args.gt)} --gt files but {len(args.pred)} --pred files")
    model = MFD(eval_iou=args.iou_thresh)
    splits = [(model.read_preds(pred), model.read_gt(gt)) for gt, pred in zip(args.gt, args.pred)]
    report = model.evaluate(splits, per_page=args.per_page)
    stream.write(report.format_table() + "\n")
    if args.table_rows:
        for name, _ in report.rows():
            stream.write(f"{name}: {report.table_row(name)}\n")
    if args.json is not None:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def cmd_nms(args, stream):
    model = MFD(nms_iou=args.iou_thresh, min_score=args.min_score)
    parser.write_preds(model.nms(model.read_preds(args.pred)), stream)


def cmd_fuse(args, stream):
    model = MFD(wbf_iou=args.iou_thresh, min_score=args.min_score)
    det_sets = [model.read_preds(path) for path in args.preds]
    parser.write_preds(model.fuse(det_sets, weights=args.weights), stream)


def cmd_flip_merge(args, stream):
    model = MFD(nms_iou=args.iou_thresh, min_score=args.min_score, image_width=args.image_width)
    merged = model.flip_merge(model.read_preds(args.pred), model.read_preds(args.flipped))
    parser.write_preds(merged, stream)


def cmd_atss_sim(args, stream):
    model = MFD(levels=args.levels, regmax=args.regmax, atss_k=args.k,
                image_width=args.image_width, image_height=args.image_height)
    df, random_stats, atss_stats = model.simulate_assignment(model.read_gt(args.gt))
    _write_frame(df, stream)
    stream.write(f"# pearson_random={random_stats.pearson:.6f},pearson_atss={atss_stats.pearson:.6f},"
                 f"spearman_random={random_stats.spearman:.6f},spearman_atss={atss_stats.spearman:.6f}\n")


def cmd_fpn_coverage(args, stream):
    model = MFD(levels=args.levels, regmax=args.regmax)
    report = model.coverage(model.read_gt(args.gt))
    _write_frame(analyses.coverage_frame(report), stream)
    _write_comment_block(f"summary {report.spec} regmax={report.spec.regmax}",
                         analyses.coverage_summary(report), stream)
    if args.extents:
        _write_comment_block("extents", model.extents(), stream)


def cmd_decode(args, stream):
    model = MFD(levels=args.levels, regmax=args.regmax,
                image_width=args.image_width, image_height=args.image_height)
    for entry in model.read_decode(args.input, clip=args.clip):
        if "detection" in entry:
            stream.write(parser.detection_to_json(entry["detection"]) + "\n")
        else:
            stream.write(parser.box_to_json(entry["page_id"], entry["box"]) + "\n")


def cmd_stats(args, stream):
    _write_frame(MFD.statistics(MFD.read_gt(args.gt)), stream, index=True)


def build_parser():
    formatter = argparse.ArgumentDefaultsHelpFormatter
    p = argparse.ArgumentParser(prog="mfdpy", formatter_class=formatter,
                                description="Formula detection pipeline tools: assignment, pyramid "
                                            "coverage, decoding, post-processing and evaluation.")
    p.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug logging")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="cmd", required=True, metavar="command")

    def add(name, func, help_text):
        s = sub.add_parser(name, help=help_text, description=help_text, formatter_class=formatter)
        s.add_argument("--out", help="output file (default: stdout)")
        s.set_defaults(func=func)
        return s

    def add_pyramid(s):
        s.add_argument("--levels", type=_levels, default=DEFAULTS.levels,
                       help="FPN levels as '2-6' or '2,3,4' (FPN(2-6) resolves formulas down to 12 px)")
        s.add_argument("--regmax", type=int, default=DEFAULTS.regmax,
                       help="regression bins per side (raised from 16 to 24 for slim isolated formulas)")

    def add_image(s):
        s.add_argument("--image-width", type=float, default=DEFAULTS.image_width, help="test page width")
        s.add_argument("--image-height", type=float, default=DEFAULTS.image_height, help="test page height")

    s = add("eval", cmd_eval, "precision/recall/F1 per class and total")
    s.add_argument("--gt", action="append", required=True, help="ground truth CSV (repeat per split)")
    s.add_argument("--pred", action="append", required=True, help="predictions JSONL (repeat per split)")
    s.add_argument("--iou-thresh", type=_unit_interval, default=DEFAULTS.eval_iou, help="matching IoU")
    s.add_argument("--json", help="also write the report as JSON to this file")
    s.add_argument("--per-page", action="store_true", help="include per-page counts in the JSON report")
    s.add_argument("--table-rows", action="store_true", help="print 'F1 / p: r:' rows in percent")

    s = add("nms", cmd_nms, "per-page, per-class greedy non-maximum suppression")
    s.add_argument("pred", help="predictions JSONL")
    s.add_argument("--iou-thresh", type=_unit_interval, default=DEFAULTS.nms_iou, help="suppression IoU")
    s.add_argument("--min-score", type=_unit_interval, default=DEFAULTS.min_score, help="score filter")

    s = add("fuse", cmd_fuse, "weighted box fusion of several models, one JSONL file per model")
    s.add_argument("preds", nargs="+", help="predictions JSONL, one per model")
    s.add_argument("--iou-thresh", type=_unit_interval, default=DEFAULTS.wbf_iou, help="fusion IoU")
    s.add_argument("--weights", type=float, nargs="+", help="model weights (default: all 1)")
    s.add_argument("--min-score", type=_unit_interval, default=DEFAULTS.min_score, help="score filter")

    s = add("flip-merge", cmd_flip_merge, "merge an original and a horizontally flipped test pass")
    s.add_argument("--pred", required=True, help="predictions of the original pass")
    s.add_argument("--flipped", required=True, help="predictions of the flipped pass (flipped coordinates)")
    s.add_argument("--image-width", type=float, default=DEFAULTS.image_width, help="test page width")
    s.add_argument("--iou-thresh", type=_unit_interval, default=DEFAULTS.nms_iou, help="suppression IoU")
    s.add_argument("--min-score", type=_unit_interval, default=DEFAULTS.min_score, help="score filter")

    s = add("atss-sim", cmd_atss_sim, "positive counts per instance under random and ATSS assignment")
    s.add_argument("--gt", required=True, help="ground truth CSV")
    s.add_argument("--k", type=int, default=DEFAULTS.atss_k, help="ATSS candidates per level")
    add_pyramid(s)
    add_image(s)

    s = add("fpn-coverage", cmd_fpn_coverage, "usable pyramid levels per instance")
    s.add_argument("--gt", required=True, help="ground truth CSV")
    s.add_argument("--extents", action="store_true", help="append the per-level extent table")
    add_pyramid(s)

    s = add("decode", cmd_decode, "decode side distributions into boxes")
    s.add_argument("input", help="JSONL with page_id, level, x, y, dists")
    s.add_argument("--clip", action="store_true", help="clip boxes to the image")
    add_pyramid(s)
    add_image(s)

    s = add("stats", cmd_stats, "scale and aspect-ratio statistics of a ground truth file")
    s.add_argument("--gt", required=True, help="ground truth CSV")
    return p


def _configure_logging(verbosity):
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s: %(name)s: %(message)s",
                        force=True)


def cli_dispatch(argv=None):
    """
    Runs one subcommand.

    Parameters
    ----------
    argv : `list` of `str`, optional
        Default: sys.argv[1:]

    Returns
    -------
    `int` exit status: 0 success, 1 invalid input, 2 usage error
    """
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    _configure_logging(args.verbose)
    buffer = io.StringIO()
    try:
        args.func(args, buffer)
        with _output(args.out) as stream:
            stream.write(buffer.getvalue())
    except (ValueError, KeyError, OSError) as err:
        log.error("%s", err)
        return 1
    return 0


def main():
    sys.exit(cli_dispatch())


if __name__ == "__main__":
    main()

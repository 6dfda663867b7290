"""Command-line entry point: ``stencil-dse <subcommand> ...``.

Exit codes: 0 ok, 2 infeasible or empty space, 3 bad input, 4 internal
inconsistency.  Failures print one JSON line to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import reports
from .area import calibrate, load_anchors
from .bottleneck import decompose, hyperthreading_sweep
from .codesign import (ArchGridSpec, allocation_to_csv, codesign, grids_for, pareto,
                       pareto_csv_rows, points_to_csv, rows_to_csv, sensitivity_to_csv)
from .core import (coeffs_from_dict, coeffs_to_dict, load_arch,
                   load_calibration, load_kernel, load_suite, load_tile, read_json,
                   tile_to_dict)
from .energy import energy
from .errors import (DomainError, EmptyDesignSpace, EmptyFeasibleSpace, InfeasibleError,
                     NegativeCoeffError, ParseError, RankError, SizeError, StencilDSEError,
                     ValidationError)
from .memory import feasible
from .time_model import t_alg
from .tuner import grids_from_json, supertune, tune

EXIT_OK = 0
EXIT_EMPTY = 2
EXIT_INPUT = 3
EXIT_INTERNAL = 4

_EXIT_FOR = (
    ((InfeasibleError, EmptyFeasibleSpace, EmptyDesignSpace), EXIT_EMPTY),
    ((ParseError, ValidationError, DomainError, RankError, NegativeCoeffError, SizeError),
     EXIT_INPUT),
)


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _k_range(text):
    lo, sep, hi = text.partition("..")
    try:
        lo, hi = int(lo), int(hi if sep else lo)
    except ValueError:
        raise ValidationError("sweep-k", f"expected a..b, got {text!r}") from None
    if lo < 1 or hi < lo:
        raise ValidationError("sweep-k", f"need 1 <= a <= b, got {text!r}")
    return range(lo, hi + 1)


def _load_grids(path):
    return grids_from_json(read_json(path))


def _single_grids(path, kernel):
    return grids_for(kernel, _load_grids(path))


def cmd_predict(args):
    kernel, arch = load_kernel(args.kernel), load_arch(args.arch)
    calib, tile = load_calibration(args.calib), load_tile(args.tile)
    fp = feasible(kernel, arch, tile)
    timing = t_alg(kernel, arch, calib, tile)
    out = {
        "kernel": kernel.name,
        "tile": tile_to_dict(tile),
        "time": reports.time_dict(timing),
        "energy": reports.energy_dict(energy(kernel, arch, calib, tile, timing)),
        "footprint": reports.footprint_dict(fp),
    }
    # convenience copy of the headline number at top level
    out["t_alg_ns"] = timing.t_alg
    _write(args.out, reports.dumps(out))


def _tune_common(args, multi):
    kernel, arch, calib = load_kernel(args.kernel), load_arch(args.arch), load_calibration(args.calib)
    grids = _single_grids(args.grid, kernel)
    if multi:
        res = supertune(kernel, arch, calib, grids, args.objective, args.top, args.workers,
                        args.prune_keep)
    else:
        if len(grids) != 1:
            raise ValidationError("grid", "tune takes exactly one grid; use supertune for several")
        res = tune(kernel, arch, calib, grids[0], args.objective, args.top, args.workers,
                   args.prune_keep)
    _write(args.out, reports.dumps(reports.tune_dict(kernel, arch, res)))
    if args.csv:
        _write(args.csv, reports.top_k_csv(res))


def cmd_tune(args):
    _tune_common(args, multi=False)


def cmd_supertune(args):
    _tune_common(args, multi=True)


def cmd_codesign(args):
    suite = load_suite(args.suite)
    space = ArchGridSpec.from_dict(read_json(args.space))
    calib = load_calibration(args.calib)
    coeffs = coeffs_from_dict(read_json(args.coeffs)) if args.coeffs else calib.area_coeffs
    grids = _load_grids(args.grids)
    points = codesign(suite, space, coeffs, calib, grids, args.budget, args.objective,
                      args.workers, args.prune_keep)
    front = pareto(points).points
    os.makedirs(args.out_dir, exist_ok=True)
    files = {
        "design_points.csv": points_to_csv(points),
        "pareto.csv": points_to_csv(front),
        "allocation.csv": allocation_to_csv(points, coeffs, front),
        "sensitivity.csv": sensitivity_to_csv(points),
    }
    summary = {
        "budget_mm2": args.budget,
        "design_points": len(points),
        "pareto": [reports.design_point_dict(p) for p in front],
    }
    files["pareto.json"] = reports.dumps(summary)
    for name, text in files.items():
        _write(os.path.join(args.out_dir, name), text)
    _write(args.out, reports.dumps(summary))


def cmd_bottleneck(args):
    kernel, arch = load_kernel(args.kernel), load_arch(args.arch)
    calib, tile = load_calibration(args.calib), load_tile(args.tile)
    coeffs = None
    if args.budget is not None:
        coeffs = coeffs_from_dict(read_json(args.coeffs)) if args.coeffs else calib.area_coeffs
    report = decompose(kernel, arch, calib, tile, args.budget, coeffs)
    sweep = None
    if args.sweep_k:
        sweep = hyperthreading_sweep(kernel, arch, calib, tile, _k_range(args.sweep_k))
    _write(args.out, reports.dumps(reports.bottleneck_dict(kernel, tile, report, sweep)))


def cmd_calibrate_area(args):
    anchors = load_anchors(args.anchors)
    free = [s.strip() for s in args.free.split(",") if s.strip()]
    fixed = coeffs_from_dict(read_json(args.fixed)) if args.fixed else None
    fitted = calibrate(anchors, free, fixed)
    _write(args.out, reports.dumps(coeffs_to_dict(fitted)))


def cmd_pareto(args):
    try:
        with open(args.points, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"{args.points}: {exc.strerror or exc}") from exc
    fields, rows = pareto_csv_rows(text)
    _write(args.out, rows_to_csv(fields, rows))


def _add_model_inputs(p, tile=True):
    p.add_argument("--kernel", required=True, help="kernel JSON")
    p.add_argument("--arch", required=True, help="architecture JSON")
    p.add_argument("--calib", required=True, help="calibration JSON")
    if tile:
        p.add_argument("--tile", required=True, help="tile JSON")


def _add_search_opts(p):
    p.add_argument("--objective", choices=("time", "energy", "edp"), default="time")
    p.add_argument("--workers", type=int, default=None,
                   help="process count (default: $STENCIL_DSE_THREADS or 1)")
    p.add_argument("--prune-keep", type=int, default=None,
                   help="evaluate only this many closed-form-ranked hexagonal tiles")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stencil-dse",
                                     description="Stencil tiling and accelerator design-space exploration.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="cost report for a single tile")
    _add_model_inputs(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_predict)

    for name, func, help_ in (("tune", cmd_tune, "best tile of one strategy grid"),
                              ("supertune", cmd_supertune, "best tile across strategies")):
        p = sub.add_parser(name, help=help_)
        _add_model_inputs(p, tile=False)
        p.add_argument("--grid", required=True, help="tile grid JSON")
        p.add_argument("--top", type=int, default=10)
        p.add_argument("--csv", default=None, help="write the top-K table here")
        p.add_argument("--out", default=None)
        _add_search_opts(p)
        p.set_defaults(func=func)

    p = sub.add_parser("codesign", help="architecture search under an area budget")
    p.add_argument("--suite", required=True)
    p.add_argument("--space", required=True, help="architecture grid JSON")
    p.add_argument("--calib", required=True)
    p.add_argument("--coeffs", default=None, help="area coefficients JSON (default: from calib)")
    p.add_argument("--grids", required=True, help="tile grids JSON")
    p.add_argument("--budget", type=float, required=True, help="area budget, mm^2")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--out", default=None)
    _add_search_opts(p)
    p.set_defaults(func=cmd_codesign)

    p = sub.add_parser("bottleneck", help="overhead decomposition and resource slack")
    _add_model_inputs(p)
    p.add_argument("--sweep-k", default=None, metavar="A..B")
    p.add_argument("--budget", type=float, default=None)
    p.add_argument("--coeffs", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bottleneck)

    p = sub.add_parser("calibrate-area", help="least-squares area coefficients")
    p.add_argument("--anchors", required=True)
    p.add_argument("--free", required=True, help="comma-separated coefficient names")
    p.add_argument("--fixed", default=None, help="values for the coefficients not fitted")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_calibrate_area)

    p = sub.add_parser("pareto", help="frontier of a design-point CSV")
    p.add_argument("--points", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_pareto)
    return parser


def _fail(code, exc):
    line = {"error": type(exc).__name__, "exit_code": code, "message": str(exc)}
    if isinstance(exc, ValidationError):
        line["field"] = exc.field
    sys.stderr.write(json.dumps(line, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except StencilDSEError as exc:
        for kinds, code in _EXIT_FOR:
            if isinstance(exc, kinds):
                return _fail(code, exc)
        return _fail(EXIT_INTERNAL, exc)
    except Exception as exc:  # noqa: BLE001  anything else is a bug in the model
        return _fail(EXIT_INTERNAL, exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: interpolate, render, dimension, verify.

Exit codes are stable API: 0 ok, 1 verify failure, 2 validation/input error,
3 non-contractive configuration, 4 raster strip too small, 5 closed-form
hypothesis violated.  Numeric knobs resolve as flag > BIFRACT_* environment
variable > built-in default; every subcommand is deterministic under fixed
flags and seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .biaffine import load_chain_csv, to_interpolation_problem
from .core import load_problem_csv, piecewise_linear
from .dimension import (
    build_report,
    closed_form_dimension,
    compute_gamma,
    write_columns_csv,
    write_report_csv,
)
from .errors import (
    BifractError,
    DepthTooLarge,
    EndpointMismatch,
    HypothesisViolated,
    IndexOutOfRange,
    InvalidProblem,
    NonUniformKnots,
    NotContractive,
    PointOutsideDomain,
    ScalingNotContractive,
    StripTooSmall,
    TooFewResolutions,
)
from .ifs import build_maps, chaos_game, hutchinson_iterate, write_cloud_csv
from .operator import (
    OperatorContext,
    fixed_point,
    graph_samples,
    operator_norm_bound,
    refinement_lattice,
    write_samples_csv,
)
from .render import blank_bitmap, mark_points, points_to_bitmap, svg_loglog, svg_polyline, write_pgm
from .verify import SUITES, run_suites

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_VALIDATION = 2
EXIT_NOT_CONTRACTIVE = 3
EXIT_RASTER = 4
EXIT_HYPOTHESIS = 5


def _env(name, default, cast):
    raw = os.environ.get(f"BIFRACT_{name.upper()}")
    if raw is None:
        return default
    return cast(raw)


def _resolve(flag_value, name, default, cast):
    """flag > BIFRACT_<NAME> environment variable > default."""
    if flag_value is not None:
        return flag_value
    return _env(name, default, cast)


def _g(v: float) -> str:
    return f"{v:.17g}"


def _load_input(path):
    """Return ('problem', problem) or ('chain', chain) by CSV header."""
    with open(path, newline="") as fh:
        header = fh.readline().strip().lower().replace(" ", "")
    if header.startswith("x,ylow,yhigh"):
        return "chain", load_chain_csv(path)
    return "problem", load_problem_csv(path)


def _problem_from_input(path):
    kind, obj = _load_input(path)
    if kind == "chain":
        return to_interpolation_problem(obj), obj
    return obj, None


# ---------------------------------------------------------------------------
# subcommands


def cmd_interpolate(args) -> int:
    depth = _resolve(args.depth, "depth", 10, int)
    tol = _resolve(args.tol, "tol", 1e-10, float)
    fmt = _resolve(args.format, "format", "csv", str)
    problem, _ = _problem_from_input(args.infile)
    ctx = OperatorContext(problem)
    lattice = refinement_lattice(problem, depth)
    result = fixed_point(ctx, lattice, tol=tol)
    out = args.out or ("samples.svg" if fmt == "svg" else "samples.csv")
    if fmt == "svg":
        with open(out, "w") as fh:
            fh.write(svg_polyline(result.function.xs, result.function.ys))
    else:
        write_samples_csv(out, result.function.xs, result.function.ys)
    print(f"iterations={result.iterations}")
    print(f"residual={_g(result.residual)}")
    print(f"error_bound={_g(result.error_bound)}")
    print(f"operator_norm_bound={_g(operator_norm_bound(ctx))}")
    print(f"samples={len(lattice)}")
    print(f"wrote {out}")
    return EXIT_OK


def _graph_strip(problem, depth, height):
    xs, ys = graph_samples(problem, min(depth, 12))
    pad = max((ys.max() - ys.min()) * 0.05, 2.0 * (ys.max() - ys.min() + 1.0) / height)
    return float(ys.min() - pad), float(ys.max() + pad)


def cmd_render(args) -> int:
    mode = _resolve(args.mode, "mode", "chaos", str)
    fmt = _resolve(args.format, "format", "pgm", str)
    width = _resolve(args.width, "width", 1024, int)
    height = _resolve(args.height, "height", 768, int)
    seed = _resolve(args.seed, "seed", 0, int)
    points = _resolve(args.points, "points", 1000000, int)
    burn_in = _resolve(args.burn_in, "burn_in", 100, int)
    k = _resolve(args.k, "k", 12, int)
    depth = _resolve(args.depth, "depth", 10, int)
    kind, obj = _load_input(args.infile)
    if kind == "chain":
        problem = to_interpolation_problem(obj)
        from .biaffine import build_biaffine

        mapset = build_biaffine(obj)
    else:
        problem = obj
        mapset = build_maps(problem)
    OperatorContext(problem)  # raises on non-contractive scalings
    if fmt == "svg":
        out = args.out or "graph.svg"
        xs, ys = graph_samples(problem, depth)
        with open(out, "w") as fh:
            fh.write(svg_polyline(xs, ys, width=width, height=height))
        print(f"wrote {out}")
        return EXIT_OK
    lo, hi = problem.domain()
    y0, y1 = _graph_strip(problem, depth, height)
    out = args.out or "render.pgm"
    if mode == "chaos":
        cloud = chaos_game(mapset, points, burn_in=burn_in, seed=seed)
        bmp = points_to_bitmap(cloud[:, 0], cloud[:, 1], width, height, lo, hi, y0, y1)
    elif mode == "deterministic":
        dense = np.linspace(lo, hi, 4 * width)
        start = mark_points(
            blank_bitmap(width, height, lo, hi, y0, y1),
            dense,
            piecewise_linear(problem, dense),
        )
        bmp = hutchinson_iterate(mapset, start, k)
    else:
        raise ValueError(f"unknown render mode {mode!r}")
    write_pgm(out, bmp)
    print(f"wrote {out} ({bmp.count()} pixels set)")
    return EXIT_OK


def cmd_dimension(args) -> int:
    rmin = _resolve(args.rmin, "rmin", 4, int)
    rmax = _resolve(args.rmax, "rmax", 10, int)
    oversample = _resolve(args.oversample, "oversample", 6, int)
    problem, _ = _problem_from_input(args.infile)
    want_closed = args.closed_form or not args.empirical
    want_empirical = args.empirical or not args.closed_form
    print(f"gamma={_g(compute_gamma(problem))}")
    if want_closed:
        try:
            cf = closed_form_dimension(problem)
            if cf.collinear:
                print("degenerate: collinear, dimension=1")
            elif cf.gamma_le_one:
                print("degenerate: gamma<=1, dimension=1")
            print(f"closed_form={_g(cf.value)}")
        except HypothesisViolated as exc:
            if args.closed_form:
                raise
            print(f"closed_form=withheld ({exc})")
    if want_empirical:
        report = build_report(
            problem,
            range(rmin, rmax + 1),
            oversample=oversample,
            min_r=rmin,
            dump_columns=args.dump_columns,
        )
        lo, hi = report.slope_interval
        print(f"empirical_slope={_g(report.slope)}")
        print(f"slope_interval=[{_g(lo)},{_g(hi)}]")
        out = args.out or "report.csv"
        write_report_csv(out, report)
        print(f"wrote {out}")
        if args.dump_columns:
            write_columns_csv(out + ".columns.csv", report)
            print(f"wrote {out}.columns.csv")
        svg_path = args.svg or "report.svg"
        with open(svg_path, "w") as fh:
            fh.write(
                svg_loglog(report.resolutions, report.totals, report.base, report.slope)
            )
        print(f"wrote {svg_path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    suite = _resolve(args.suite, "suite", "all", str)
    trials = _resolve(args.trials, "trials", None, int)
    seed = _resolve(args.seed, "seed", 1, int)
    r = _resolve(args.r, "r", 4, int)
    tol = _resolve(args.tol, "tol", 1e-10, float)
    names = SUITES if suite == "all" else (suite,)
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
    problem = chain = None
    if args.infile:
        kind, obj = _load_input(args.infile)
        if kind == "chain":
            chain = obj
        else:
            problem = obj
    records, ok = run_suites(
        names, problem=problem, chain=chain, trials=trials, seed=seed, r=r, tol=tol,
        eta=args.eta, beta=args.beta,
    )
    lines = [json.dumps(rec, sort_keys=True) for rec in records]
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    for line in lines:
        print(line)
    if not ok:
        for rec in records:
            if not rec["pass"]:
                print(f"FAILED: {json.dumps(rec, sort_keys=True)}", file=sys.stderr)
        return EXIT_VERIFY
    print(f"all {len(records)} checks passed", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bifract",
        description="Bilinear fractal interpolation, attractor rendering, and box dimension.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("interpolate", help="compute interpolant samples to CSV/SVG")
    p.add_argument("--in", dest="infile", required=True, help="problem CSV (x,y,s)")
    p.add_argument("--out", help="output path (default samples.csv)")
    p.add_argument("--depth", type=int, help="lattice refinement depth (default 10)")
    p.add_argument("--tol", type=float, help="sup-norm error target (default 1e-10)")
    p.add_argument("--format", choices=["csv", "svg"], help="output format (default csv)")
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser("render", help="render the attractor to PGM (or graph SVG)")
    p.add_argument("--in", dest="infile", required=True, help="problem or chain CSV")
    p.add_argument("--out", help="output path (default render.pgm)")
    p.add_argument("--mode", choices=["chaos", "deterministic"], help="renderer (default chaos)")
    p.add_argument("--points", type=int, help="chaos-game points (default 1000000)")
    p.add_argument("--burn-in", dest="burn_in", type=int, help="discarded prefix (default 100)")
    p.add_argument("--seed", type=int, help="chaos-game seed (default 0)")
    p.add_argument("--k", type=int, help="deterministic iteration count (default 12)")
    p.add_argument("--width", type=int, help="raster width (default 1024)")
    p.add_argument("--height", type=int, help="raster height (default 768)")
    p.add_argument("--depth", type=int, help="graph sample depth for SVG (default 10)")
    p.add_argument("--format", choices=["pgm", "svg"], help="output format (default pgm)")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("dimension", help="closed-form and empirical box dimension")
    p.add_argument("--in", dest="infile", required=True, help="problem or chain CSV")
    p.add_argument("--out", help="report CSV path (default report.csv)")
    p.add_argument("--svg", help="log-log plot path (default report.svg)")
    p.add_argument("--rmin", type=int, help="smallest resolution depth (default 4)")
    p.add_argument("--rmax", type=int, help="largest resolution depth (default 10)")
    p.add_argument("--oversample", type=int, help="extent oversampling levels (default 6)")
    p.add_argument("--closed-form", dest="closed_form", action="store_true",
                   help="require the closed form (exit 5 outside its regime)")
    p.add_argument("--empirical", action="store_true", help="grid counting only")
    p.add_argument("--dump-columns", dest="dump_columns", action="store_true",
                   help="also write per-column counts")
    p.set_defaults(func=cmd_dimension)

    p = sub.add_parser("verify", help="run numeric verification suites")
    p.add_argument("--in", dest="infile", help="problem or chain CSV (built-in default)")
    p.add_argument("--suite", help=f"one of {', '.join(SUITES)}, or all (default all)")
    p.add_argument("--trials", type=int, help="sample count where applicable")
    p.add_argument("--seed", type=int, help="sampling seed (default 1)")
    p.add_argument("--r", type=int, help="resolution for the recursion suite (default 4)")
    p.add_argument("--tol", type=float, help="fixed-point tolerance (default 1e-10)")
    p.add_argument("--eta", type=float, help="strip half-height override")
    p.add_argument("--beta", type=float, help="metric weight override")
    p.add_argument("--out", help="also write the JSON-lines log here")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScalingNotContractive, NotContractive) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONTRACTIVE
    except StripTooSmall as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RASTER
    except HypothesisViolated as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (
        InvalidProblem,
        PointOutsideDomain,
        IndexOutOfRange,
        EndpointMismatch,
        NonUniformKnots,
        DepthTooLarge,
        TooFewResolutions,
        BifractError,
        OSError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

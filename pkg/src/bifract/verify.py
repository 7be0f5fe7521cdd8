"""Numeric verification suites behind ``bifract verify``.

Each suite returns a list of JSON-serializable records, one per assertion,
with a boolean ``pass`` field; the CLI emits them as JSON lines and fails the
process when any record fails.
"""

from __future__ import annotations

import math

import numpy as np

from .biaffine import TrapezoidChain, build_biaffine, square_contraction_certificate
from .core import InterpolationProblem, SampledFunction, piecewise_linear, validate
from .dimension import cylinder_count, recursion_bounds_check
from .ifs import (
    TaxicabMetric,
    build_maps,
    contraction_analysis,
    default_eta,
    verify_contraction,
)
from .operator import (
    OperatorContext,
    apply_operator,
    fixed_point,
    graph_samples,
    iteration_bound,
    refinement_lattice,
)

__all__ = [
    "SUITES",
    "default_problem",
    "default_chain",
    "lattice_depth_for",
    "run_suites",
]


def default_problem() -> InterpolationProblem:
    return InterpolationProblem([0.0, 0.5, 1.0], [0.0, 1.0, 0.0], [0.6, 0.8, 0.6])


def default_chain() -> TrapezoidChain:
    return TrapezoidChain([0.0, 0.5, 1.0], [0.0, 0.4, 0.0], [0.6, 0.9, 0.6])


def lattice_depth_for(problem, budget: int = 4096) -> int:
    """Deepest refinement whose lattice stays within ~budget points."""
    n = problem.n_maps
    return max(2, int(math.floor(math.log(budget) / math.log(n))) - 1)


def _record(suite, check, passed, **extra):
    rec = {"suite": suite, "check": check, "pass": bool(passed)}
    rec.update(extra)
    return rec


def metric_suite(problem, trials=100000, seed=1):
    """Metric axioms for the sheared taxicab distance with q = computed f."""
    validate(problem)
    depth = lattice_depth_for(problem)
    xs, ys = graph_samples(problem, depth)
    metric = TaxicabMetric(alpha=1.0, beta=1.0, q=SampledFunction(xs, ys))
    rng = np.random.default_rng(seed)
    lo, hi = problem.domain()
    span_y = (ys.min() - 2.0, ys.max() + 2.0)
    px = rng.uniform(lo, hi, size=(3, trials))
    py = rng.uniform(*span_y, size=(3, trials))
    d12 = metric.distance((px[0], py[0]), (px[1], py[1]))
    d21 = metric.distance((px[1], py[1]), (px[0], py[0]))
    d23 = metric.distance((px[1], py[1]), (px[2], py[2]))
    d13 = metric.distance((px[0], py[0]), (px[2], py[2]))
    sym = float(np.max(np.abs(d12 - d21)))
    ident = float(np.max(metric.distance((px[0], py[0]), (px[0], py[0]))))
    distinct = (px[0] != px[1]) | (py[0] != py[1])
    positive = float(np.min(d12[distinct])) if np.any(distinct) else 1.0
    tri = float(np.max(d13 - (d12 + d23)))
    return [
        _record("metric", "symmetry", sym == 0.0, trials=trials, max_violation=sym),
        _record("metric", "identity", ident == 0.0, trials=trials, max_violation=ident),
        _record("metric", "positivity", positive > 0.0, trials=trials, min_distance=positive),
        _record("metric", "triangle", tri <= 1e-12, trials=trials, max_violation=tri, bound=1e-12),
    ]


def contraction_suite(problem, trials=20000, seed=1, eta=None, beta=None):
    """Strip contraction ratio of every plane map against the certified factor."""
    validate(problem)
    depth = lattice_depth_for(problem)
    xs, ys = graph_samples(problem, depth)
    graph = SampledFunction(xs, ys)
    if eta is None:
        eta = default_eta(problem, graph)
    analysis = contraction_analysis(problem, eta)
    if beta is None:
        beta = analysis.beta
    factor = max(analysis.s_max, analysis.lambda_l + beta * analysis.lambda_l * analysis.lambda_s * eta)
    metric = TaxicabMetric(alpha=1.0, beta=beta, q=graph)
    mapset = build_maps(problem)
    ratio = verify_contraction(mapset, metric, eta, trials=trials, seed=seed)
    return [
        _record(
            "contraction",
            "strip_ratio",
            ratio <= factor + 1e-9,
            trials=trials,
            eta=eta,
            beta=beta,
            beta_max=analysis.beta_max,
            lambda_l=analysis.lambda_l,
            lambda_s=analysis.lambda_s,
            factor=factor,
            max_ratio=ratio,
        )
    ]


def fixedpoint_suite(problem, tol=1e-10, depth=None):
    """Residual, data interpolation, and the a-priori iteration bound."""
    validate(problem)
    if depth is None:
        depth = lattice_depth_for(problem)
    ctx = OperatorContext(problem)
    lattice = refinement_lattice(problem, depth)
    result = fixed_point(ctx, lattice, tol=tol)
    resid = float(
        np.max(np.abs(apply_operator(ctx, result.function).ys - result.function.ys))
    )
    kpos = np.searchsorted(lattice, problem.knots)
    exact = bool(np.array_equal(result.function.ys[kpos], problem.values))
    kb = iteration_bound(ctx, result.residuals[0], tol)
    return [
        _record("fixedpoint", "residual", resid <= tol, residual=resid, tol=tol),
        _record("fixedpoint", "interpolates_data", exact),
        _record(
            "fixedpoint",
            "iteration_bound",
            result.iterations <= kb,
            iterations=result.iterations,
            bound=kb,
        ),
    ]


def vertices_suite(problem=None, chain=None):
    """Join conditions, edge identities, and unit-square corner conditions."""
    recs = []
    if problem is not None:
        mapset = build_maps(problem)  # construction itself checks joins exactly
        k, v, s = problem.knots, problem.values, problem.scalings
        ts = np.linspace(-1.0, 1.0, 9)
        worst = 0.0
        for n in range(1, mapset.n_maps):
            _, ly = mapset.apply(n, np.full_like(ts, k[-1]), v[-1] + ts)
            _, ry = mapset.apply(n + 1, np.full_like(ts, k[0]), v[0] + ts)
            want = v[n] + s[n] * ts
            worst = max(worst, float(np.max(np.abs(ly - want))), float(np.max(np.abs(ry - want))))
        recs.append(_record("vertices", "edges_fit", worst <= 1e-12, max_violation=worst, bound=1e-12))
        recs.append(_record("vertices", "join_points", True, maps=mapset.n_maps))
    if chain is not None:
        build_biaffine(chain)  # corner conditions checked exactly at build
        recs.append(_record("vertices", "square_corners", True, maps=chain.n_maps))
        cert = square_contraction_certificate(chain, trials=20000)
        recs.append(
            _record(
                "vertices",
                "square_contraction",
                cert.max_ratio <= cert.bound + 1e-9,
                max_ratio=cert.max_ratio,
                bound=cert.bound,
                beta=cert.beta,
            )
        )
    return recs


def recursion_suite(problem, r=4, oversample=8):
    """Two-sided refinement bounds on measured column counts."""
    audit = recursion_bounds_check(problem, r, oversample)
    return [
        _record(
            "recursion",
            "cell_bounds",
            audit.max_cell_violation <= 0.0,
            r=r,
            cells=audit.cells,
            max_violation=audit.max_cell_violation,
        ),
        _record(
            "recursion",
            "aggregate_bound",
            audit.max_aggregate_violation <= 0.0,
            r=r,
            c1=audit.c1,
            max_violation=audit.max_aggregate_violation,
        ),
    ]


def cylinder_suite(problem, max_depth=6, seed=3, spread_bound=4.0):
    """Stability of cylinder-count ratios across word length and word choice."""
    rng = np.random.default_rng(seed)
    n = problem.n_maps
    ratios = []
    for d in range(1, max_depth + 1):
        words = {(1,) * d, (n,) * d}
        for _ in range(6):
            words.add(tuple(int(x) for x in rng.integers(1, n + 1, size=d)))
        for w in sorted(words):
            ratios.append(cylinder_count(problem, w, extra_depth=8).ratio)
    lo, hi = min(ratios), max(ratios)
    finite = math.isfinite(lo) and math.isfinite(hi) and lo > 0
    return [
        _record(
            "cylinder",
            "ratio_band",
            finite and hi / lo <= spread_bound,
            words=len(ratios),
            c_lo=lo,
            c_hi=hi,
            spread=hi / lo if lo > 0 else float("inf"),
            bound=spread_bound,
        )
    ]


SUITES = ("metric", "contraction", "fixedpoint", "vertices", "recursion", "cylinder")


def run_suites(names, problem=None, chain=None, trials=None, seed=1, r=4, tol=1e-10,
               eta=None, beta=None):
    """Run the named suites; returns (records, all_passed)."""
    if problem is None and chain is None:
        problem, chain = default_problem(), default_chain()
    elif problem is None:
        problem = InterpolationProblem(chain.knots, chain.lower, chain.scalings)
    records = []
    for name in names:
        if name == "metric":
            records += metric_suite(problem, trials=trials or 100000, seed=seed)
        elif name == "contraction":
            records += contraction_suite(problem, trials=trials or 20000, seed=seed, eta=eta, beta=beta)
        elif name == "fixedpoint":
            records += fixedpoint_suite(problem, tol=tol)
        elif name == "vertices":
            records += vertices_suite(problem=problem, chain=chain)
        elif name == "recursion":
            records += recursion_suite(problem, r=r)
        elif name == "cylinder":
            records += cylinder_suite(problem)
        else:
            raise ValueError(f"unknown suite {name!r}")
    return records, all(rec["pass"] for rec in records)

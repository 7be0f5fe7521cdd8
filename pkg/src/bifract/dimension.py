"""Box-counting machinery for interpolant graphs over uniform knots on [0, 1].

Counting is column-wise on the fixed N^r grid: the y-extent of the graph over
column k is measured from exact fixed-point samples (no iteration error) at
`oversample` extra refinement levels, and the column's box count is
floor(max*N^r) - floor(min*N^r) + 1 (boxes form an interval by continuity;
points on a horizontal grid line count toward one box only).  The closed-form
dimension 1 + log(gamma)/log(N) with gamma = sum of averaged adjacent scaling
factors applies under uniform knots, matching end scalings and nonnegative
scalings, and degenerates to 1 when gamma <= 1 or the data are collinear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import InterpolationProblem, chord, is_collinear, validate
from .errors import (
    DepthTooLarge,
    HypothesisViolated,
    IndexOutOfRange,
    NonUniformKnots,
    TooFewResolutions,
)
from .operator import _push_forward, graph_samples

__all__ = [
    "MAX_COLUMNS",
    "box_count",
    "box_count_profile",
    "compute_gamma",
    "ClosedFormResult",
    "closed_form_dimension",
    "FitResult",
    "fit_dimension",
    "RecursionAudit",
    "recursion_bounds_check",
    "CylinderReport",
    "cylinder_count",
    "estimate_cylinder_constants",
    "normalize",
    "DimensionReport",
    "build_report",
    "write_report_csv",
    "write_columns_csv",
]

MAX_COLUMNS = 2**24
_FULL_LATTICE_BUDGET = 2**23  # points; above this box_count streams per column


def _require_unit_uniform(problem: InterpolationProblem, exc=NonUniformKnots):
    k = problem.knots
    n = problem.n_maps
    target = np.arange(n + 1) / n
    if k[0] != 0.0 or k[-1] != 1.0 or np.max(np.abs(k - target)) > 1e-12:
        raise exc("knots must be uniformly spaced on [0, 1]")


def _column_minmax_from_samples(ys: np.ndarray, columns: int):
    """Per-column (min, max) of samples whose columns share boundary points."""
    q = (len(ys) - 1) // columns
    body = ys[:-1].reshape(columns, q)
    mins = body.min(axis=1)
    maxs = body.max(axis=1)
    right = ys[q::q]
    np.minimum(mins, right, out=mins)
    np.maximum(maxs, right, out=maxs)
    return mins, maxs


def _counts_from_extents(mins, maxs, r: int, base: int):
    scale = float(base) ** r
    return (np.floor(maxs * scale) - np.floor(mins * scale)).astype(np.int64) + 1


def box_count(problem: InterpolationProblem, r: int, oversample: int = 6):
    """Column box counts of the interpolant graph at resolution base**-r.

    Parameters
    ----------
    problem : InterpolationProblem
        Must have uniform knots on [0, 1] (raises NonUniformKnots otherwise).
    r : int
        Resolution depth; the grid has N^r columns of width N^-r.
    oversample : int
        Extra refinement levels used to measure column extents; the sampling
        scale is N^-(r+oversample+1).

    Returns
    -------
    (counts, total) : per-column int64 array of length N^r, and its sum.
    """
    validate(problem)
    _require_unit_uniform(problem)
    if r < 0 or oversample < 1:
        raise ValueError("need r >= 0 and oversample >= 1")
    n = problem.n_maps
    columns = n**r
    if columns > MAX_COLUMNS:
        raise DepthTooLarge(f"{columns} columns exceed the {MAX_COLUMNS} budget")
    if n ** (r + oversample + 1) + 1 <= _FULL_LATTICE_BUDGET:
        _, ys = graph_samples(problem, r + oversample)
        mins, maxs = _column_minmax_from_samples(ys, columns)
    else:
        mins, maxs = _column_extents_streaming(problem, r, oversample)
    counts = _counts_from_extents(mins, maxs, r, n)
    return counts, int(counts.sum())


def _column_extents_streaming(problem, r, oversample):
    """Per-column extents via word-wise map application, constant memory/column."""
    n = problem.n_maps
    base_xs, base_ys = graph_samples(problem, oversample)
    columns = n**r
    mins = np.empty(columns)
    maxs = np.empty(columns)
    for k in range(columns):
        word = _column_word(k, r, n)
        xs, ys = base_xs, base_ys
        for digit in reversed(word):
            xs, ys = _push_forward(problem, digit, xs, ys)
        mins[k] = ys.min()
        maxs[k] = ys.max()
    return mins, maxs


def _column_word(k: int, r: int, n: int):
    """Map word (most significant digit first) of 0-based column k at depth r."""
    digits = []
    for _ in range(r):
        digits.append(k % n + 1)
        k //= n
    return tuple(reversed(digits))


def box_count_profile(problem: InterpolationProblem, r_values, oversample: int = 6):
    """Box counts for several resolutions, sharing one exact sample lattice.

    Equivalent to calling :func:`box_count` per r (bit-identical counts): the
    depth-(r+oversample) samples are a strided subset of the finest lattice.
    """
    validate(problem)
    _require_unit_uniform(problem)
    r_values = sorted(int(r) for r in r_values)
    if any(r < 0 for r in r_values):
        raise ValueError("resolutions must be >= 0")
    n = problem.n_maps
    r_max = r_values[-1]
    if n**r_max > MAX_COLUMNS:
        raise DepthTooLarge(f"{n**r_max} columns exceed the {MAX_COLUMNS} budget")
    finest = r_max + oversample
    if n ** (finest + 1) + 1 <= _FULL_LATTICE_BUDGET:
        _, ys = graph_samples(problem, finest)
        out = []
        for r in r_values:
            sub = ys[:: n ** (r_max - r)]
            mins, maxs = _column_minmax_from_samples(sub, n**r)
            counts = _counts_from_extents(mins, maxs, r, n)
            out.append((r, counts, int(counts.sum())))
        return out
    return [(r, *box_count(problem, r, oversample)) for r in r_values]


def compute_gamma(problem: InterpolationProblem) -> float:
    """Column growth rate: sum over maps of the averaged endpoint scalings."""
    s = problem.scalings
    return float(np.sum((s[:-1] + s[1:]) / 2.0))


@dataclass(frozen=True)
class ClosedFormResult:
    value: float
    gamma: float
    gamma_le_one: bool
    collinear: bool


def closed_form_dimension(problem: InterpolationProblem) -> ClosedFormResult:
    """Closed-form box dimension of the interpolant graph, with degeneracy flags.

    Requires uniform knots on [0, 1], at least two maps, nonnegative scalings
    and matching end scalings; raises HypothesisViolated outside that regime
    rather than extrapolating.  Returns 1 + log(gamma)/log(N) when gamma > 1
    and the data are not collinear, and exactly 1 otherwise.
    """
    validate(problem)
    _require_unit_uniform(problem, exc=HypothesisViolated)
    s = problem.scalings
    if problem.n_maps < 2:
        raise HypothesisViolated("need at least two maps (N >= 2)")
    if np.any(s < 0):
        raise HypothesisViolated("scalings must be nonnegative in the proven regime")
    if s[0] != s[-1]:
        raise HypothesisViolated(f"end scalings must match, got {s[0]!r} and {s[-1]!r}")
    gamma = compute_gamma(problem)
    collinear = is_collinear(problem)
    degenerate = gamma <= 1.0 or collinear
    value = 1.0 if degenerate else 1.0 + math.log(gamma) / math.log(problem.n_maps)
    return ClosedFormResult(value, gamma, gamma <= 1.0, collinear)


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    stderr: float
    interval: tuple
    used_resolutions: tuple


def fit_dimension(resolutions, totals, base: int, min_r: int = 4) -> FitResult:
    """Least-squares slope of log N(r) against r*log(base).

    Resolutions below min_r are dropped as pre-asymptotic; at least three
    must remain.  The interval is slope +/- 2 residual standard errors.
    """
    rs = np.asarray(resolutions, dtype=float)
    ns = np.asarray(totals, dtype=float)
    keep = rs >= min_r
    rs, ns = rs[keep], ns[keep]
    if len(rs) < 3:
        raise TooFewResolutions(f"{len(rs)} resolutions >= {min_r}; need 3")
    x = rs * math.log(base)
    y = np.log(ns)
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    stderr = math.sqrt(float(np.sum(resid**2)) / (len(x) - 2) / sxx)
    return FitResult(
        slope=slope,
        intercept=float(intercept),
        stderr=stderr,
        interval=(slope - 2 * stderr, slope + 2 * stderr),
        used_resolutions=tuple(int(r) for r in rs),
    )


@dataclass(frozen=True)
class RecursionAudit:
    """Measured column counts at r+1 against the refinement-inequality bounds."""

    r: int
    max_cell_violation: float
    max_aggregate_violation: float
    c1: float
    cells: int


def recursion_bounds_check(
    problem: InterpolationProblem, r: int, oversample: int = 8
) -> RecursionAudit:
    """Check every (column, map) count at depth r+1 against its two-sided bound.

    The bound pair for target column k + (n-1)N^r is
    N*(s_{n-1} + ds_n*k'/N^r)*N(r,k) +/- (2N(|a_n| + |ds_n|) + 2), with k' = k
    on the side where the scaling ramp is larger and k-1 on the other,
    switching roles with the sign of ds_n.  Violations are signed; <= 0 means
    the bound holds.  The aggregate per source column is checked against
    (N*gamma)*N(r,k) + c1 with c1 = sum(2N(|a_n|+|ds_n|) + |ds_n|/N + 2).
    """
    counts_r, _ = box_count(problem, r, oversample)
    counts_r1, _ = box_count(problem, r + 1, oversample)
    n = problem.n_maps
    s = problem.scalings
    a = np.diff(problem.values)
    ds = np.diff(s)
    cols = n**r
    k = np.arange(1, cols + 1, dtype=float)
    scale = float(n) ** r
    worst_cell = -np.inf
    agg = np.zeros(cols)
    c1 = float(np.sum(2 * n * (np.abs(a) + np.abs(ds)) + np.abs(ds) / n + 2))
    for m in range(1, n + 1):
        dsn = ds[m - 1]
        slack = 2 * n * (abs(a[m - 1]) + abs(dsn)) + 2
        hi_ramp = s[m - 1] + dsn * (k if dsn >= 0 else k - 1) / scale
        lo_ramp = s[m - 1] + dsn * ((k - 1) if dsn >= 0 else k) / scale
        measured = counts_r1[(m - 1) * cols : m * cols].astype(float)
        upper = n * hi_ramp * counts_r + slack
        lower = n * lo_ramp * counts_r - slack
        violation = np.maximum(lower - measured, measured - upper)
        worst_cell = max(worst_cell, float(np.max(violation)))
        agg += measured
    gamma = compute_gamma(problem)
    agg_violation = float(np.max(agg - (n * gamma * counts_r + c1)))
    return RecursionAudit(
        r=r,
        max_cell_violation=worst_cell,
        max_aggregate_violation=agg_violation,
        c1=c1,
        cells=cols * n,
    )


@dataclass(frozen=True)
class CylinderReport:
    """Grid-box count of one cylinder piece against its growth-rate reference."""

    word: tuple
    count: int
    reference: float  # product of per-digit growth rates times N^|word|
    ratio: float
    lower: float = None
    upper: float = None


def cylinder_count(
    problem: InterpolationProblem,
    word,
    extra_depth: int = 6,
    constants: tuple = None,
) -> CylinderReport:
    """Count resolution-N^-|word| grid boxes covering the graph piece of a word.

    The piece over a length-r word occupies exactly one grid column, so the
    count is that column's box count measured at extra_depth further levels.
    The reference value is the product of the word's per-map growth rates
    gamma_n = (s_{n-1}+s_n)/2 times N^r; `constants` (c_lo, c_hi), typically
    from :func:`estimate_cylinder_constants`, scale it into a bound pair.
    """
    validate(problem)
    _require_unit_uniform(problem)
    word = tuple(int(d) for d in word)
    n = problem.n_maps
    for d in word:
        if not 1 <= d <= n:
            raise IndexOutOfRange(f"word digit {d} outside 1..{n}")
    s = problem.scalings
    gammas = (s[:-1] + s[1:]) / 2.0
    if np.any(gammas <= 0):
        raise HypothesisViolated("per-map growth rates must be positive")
    r = len(word)
    if n**r > MAX_COLUMNS:
        raise DepthTooLarge(f"{n**r} columns exceed the {MAX_COLUMNS} budget")
    xs, ys = graph_samples(problem, extra_depth)
    for digit in reversed(word):
        xs, ys = _push_forward(problem, digit, xs, ys)
    counts = _counts_from_extents(np.array([ys.min()]), np.array([ys.max()]), r, n)
    count = int(counts[0])
    reference = float(np.prod([gammas[d - 1] for d in word])) * float(n) ** r
    lower = upper = None
    if constants is not None:
        lower, upper = constants[0] * reference, constants[1] * reference
    return CylinderReport(
        word=word,
        count=count,
        reference=reference,
        ratio=count / reference,
        lower=lower,
        upper=upper,
    )


def estimate_cylinder_constants(problem, words, extra_depth: int = 6):
    """Empirical (c_lo, c_hi) bracketing count/reference over the given words.

    These are existence constants; the estimates carry no correctness claim
    beyond the sampled words.
    """
    ratios = [cylinder_count(problem, w, extra_depth).ratio for w in words]
    return min(ratios), max(ratios)


def normalize(problem: InterpolationProblem) -> InterpolationProblem:
    """Subtract the endpoint chord from the data values (scalings unchanged).

    The first and last value become exactly 0; the closed-form dimension is
    invariant under this shear.
    """
    new_values = problem.values - chord(problem, problem.knots)
    return InterpolationProblem(problem.knots, new_values, problem.scalings)


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class DimensionReport:
    """Counting study: totals per resolution, fit, and the closed-form value.

    closed_form is None when the problem is outside the proven regime (the
    reason string then says why).  For sane inputs the fitted slope lies in
    [1, 2] up to fit noise.
    """

    base: int
    resolutions: tuple
    totals: tuple
    columns: tuple  # per-resolution count arrays, or None when not dumped
    slope: float
    slope_interval: tuple
    gamma: float
    closed_form: float
    closed_form_reason: str
    gamma_le_one: bool
    collinear: bool

    def local_slopes(self):
        """Pairwise log-count slopes between consecutive resolutions."""
        out = [None]
        for i in range(1, len(self.resolutions)):
            dr = self.resolutions[i] - self.resolutions[i - 1]
            out.append(
                math.log(self.totals[i] / self.totals[i - 1])
                / (dr * math.log(self.base))
            )
        return out


def build_report(
    problem: InterpolationProblem,
    r_values,
    oversample: int = 6,
    min_r: int = 4,
    dump_columns: bool = False,
) -> DimensionReport:
    profile = box_count_profile(problem, r_values, oversample)
    resolutions = tuple(r for r, _, _ in profile)
    totals = tuple(total for _, _, total in profile)
    columns = tuple(counts for _, counts, _ in profile) if dump_columns else None
    fit = fit_dimension(resolutions, totals, problem.n_maps, min_r=min_r)
    gamma = compute_gamma(problem)
    try:
        cf = closed_form_dimension(problem)
        closed_form, reason = cf.value, ""
        gamma_le_one, collinear = cf.gamma_le_one, cf.collinear
    except HypothesisViolated as exc:
        closed_form, reason = None, str(exc)
        gamma_le_one, collinear = gamma <= 1.0, is_collinear(problem)
    return DimensionReport(
        base=problem.n_maps,
        resolutions=resolutions,
        totals=totals,
        columns=columns,
        slope=fit.slope,
        slope_interval=fit.interval,
        gamma=gamma,
        closed_form=closed_form,
        closed_form_reason=reason,
        gamma_le_one=gamma_le_one,
        collinear=collinear,
    )


def write_report_csv(path, report: DimensionReport):
    """Rows ``r,N_r,slope_partial`` (pairwise slope; empty on the first row)."""
    slopes = report.local_slopes()
    with open(path, "w", newline="") as fh:
        fh.write("r,N_r,slope_partial\n")
        for r, total, sl in zip(report.resolutions, report.totals, slopes):
            tail = "" if sl is None else f"{sl:.17g}"
            fh.write(f"{r},{total},{tail}\n")


def write_columns_csv(path, report: DimensionReport):
    if report.columns is None:
        raise ValueError("report was built without dump_columns")
    with open(path, "w", newline="") as fh:
        fh.write("r,k,N_rk\n")
        for r, counts in zip(report.resolutions, report.columns):
            for k, c in enumerate(counts, start=1):
                fh.write(f"{r},{k},{int(c)}\n")

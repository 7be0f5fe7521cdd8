"""Interpolation data model and the four generating functions.

An interpolation problem is the triple (knots, values, scalings): N+1 strictly
increasing abscissae X_0..X_N, matching ordinates Y_0..Y_N, and vertical
scaling factors s_0..s_N with every |s_j| < 1.  Everything else in the package
is derived from it: the affine interval maps onto the knot subintervals, the
piecewise-linear scaling function, the endpoint chord, and the piecewise-linear
data interpolant.

All evaluators accept scalars or numpy arrays and snap exact endpoint/knot
inputs so that the defining identities (interval maps hitting knots, the
interpolant passing through the data) hold bit-exactly, not merely to rounding.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EndpointMismatch,
    IndexOutOfRange,
    InvalidProblem,
    PointOutsideDomain,
)

__all__ = [
    "InterpolationProblem",
    "SampledFunction",
    "AddressPoint",
    "validate",
    "validation_errors",
    "subinterval_map",
    "locate",
    "map_scaling",
    "scaling",
    "chord",
    "piecewise_linear",
    "is_collinear",
    "load_problem_csv",
    "write_problem_csv",
]

COLLINEAR_TOL = 1e-12


def _readonly(a) -> np.ndarray:
    out = np.asarray(a, dtype=float).copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class InterpolationProblem:
    """Knots, data values and vertex scaling factors.

    Construction only checks shapes; call :func:`validate` to enforce the
    ordering and scaling invariants (the CSV loader does this for you).
    """

    knots: np.ndarray
    values: np.ndarray
    scalings: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "knots", _readonly(self.knots))
        object.__setattr__(self, "values", _readonly(self.values))
        object.__setattr__(self, "scalings", _readonly(self.scalings))
        if self.knots.ndim != 1:
            raise InvalidProblem(["LengthMismatch: knots must be a 1-d sequence"])

    @property
    def n_maps(self) -> int:
        """Number of knot subintervals N."""
        return len(self.knots) - 1

    @property
    def span(self) -> float:
        return float(self.knots[-1] - self.knots[0])

    @property
    def s_max(self) -> float:
        """max_j |s_j|; the operator contracts iff this is < 1."""
        return float(np.max(np.abs(self.scalings)))

    def domain(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])


@dataclass(frozen=True)
class SampledFunction:
    """A function on [X_0, X_N] carried by samples, piecewise linear between.

    Abscissae must be strictly increasing; ordinates must be finite.
    """

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "xs", _readonly(self.xs))
        object.__setattr__(self, "ys", _readonly(self.ys))
        if self.xs.shape != self.ys.shape or self.xs.ndim != 1 or len(self.xs) < 2:
            raise ValueError("sampled function needs matching 1-d xs/ys, length >= 2")
        if not np.all(np.diff(self.xs) > 0):
            raise ValueError("sample abscissae must be strictly increasing")
        if not (np.all(np.isfinite(self.xs)) and np.all(np.isfinite(self.ys))):
            raise ValueError("samples must be finite")

    def __call__(self, x):
        return np.interp(x, self.xs, self.ys)

    @classmethod
    def constant(cls, x0: float, x1: float, value: float) -> "SampledFunction":
        return cls(np.array([x0, x1]), np.array([value, value]))


def sup_distance(f: SampledFunction, g: SampledFunction) -> float:
    """d_inf between two sampled functions, evaluated on the union grid."""
    if f.xs.shape == g.xs.shape and np.array_equal(f.xs, g.xs):
        return float(np.max(np.abs(f.ys - g.ys)))
    grid = np.union1d(f.xs, g.xs)
    return float(np.max(np.abs(f(grid) - g(grid))))


@dataclass(frozen=True)
class AddressPoint:
    """A finite map word over {1..N} plus a knot anchor index.

    Encodes the point obtained by applying the subinterval maps named by the
    word (rightmost digit first) to the anchor knot.
    """

    word: tuple = field(default=())
    anchor: int = 0

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(int(d) for d in self.word))
        object.__setattr__(self, "anchor", int(self.anchor))

    def to_string(self) -> str:
        """Serialize as dot-separated digits plus '@anchor', e.g. '2.1.1@0'."""
        return ".".join(str(d) for d in self.word) + f"@{self.anchor}"

    @classmethod
    def from_string(cls, text: str) -> "AddressPoint":
        body, _, anchor = text.partition("@")
        if not anchor:
            raise ValueError(f"address {text!r} lacks an '@anchor' suffix")
        word = tuple(int(d) for d in body.split(".")) if body else ()
        return cls(word=word, anchor=int(anchor))


# ---------------------------------------------------------------------------
# validation


def validation_errors(problem: InterpolationProblem) -> list[str]:
    """Return every violated invariant, empty when the problem is valid."""
    errs = []
    k, v, s = problem.knots, problem.values, problem.scalings
    if len(k) < 2:
        errs.append("TooFewKnots: need at least 2 knots (N >= 1)")
    if len(v) != len(k) or len(s) != len(k):
        errs.append(
            f"LengthMismatch: {len(k)} knots but {len(v)} values, {len(s)} scalings"
        )
    if not (np.all(np.isfinite(k)) and np.all(np.isfinite(v)) and np.all(np.isfinite(s))):
        errs.append("NonFiniteData: knots, values and scalings must be finite")
        return errs
    bad = np.nonzero(np.diff(k) <= 0)[0]
    for i in bad:
        errs.append(
            f"NonIncreasingKnots: X_{i} = {k[i]!r} !< X_{i + 1} = {k[i + 1]!r}"
        )
    for j in np.nonzero(np.abs(s) >= 1.0)[0]:
        errs.append(f"ScalingOutOfRange: |s_{j}| = {abs(s[j])!r} >= 1")
    return errs


def validate(problem: InterpolationProblem) -> InterpolationProblem:
    """Return the problem unchanged, or raise InvalidProblem listing violations."""
    errs = validation_errors(problem)
    if errs:
        raise InvalidProblem(errs)
    return problem


# ---------------------------------------------------------------------------
# generating functions


def _as_points(problem, x):
    xs = np.asarray(x, dtype=float)
    lo, hi = problem.domain()
    if np.any(xs < lo) or np.any(xs > hi):
        raise PointOutsideDomain(f"x outside [{lo}, {hi}]")
    return xs


def _check_index(problem, n: int):
    if not 1 <= n <= problem.n_maps:
        raise IndexOutOfRange(f"map index {n} outside 1..{problem.n_maps}")


def _scalar_like(x, out):
    return float(out) if np.isscalar(x) or np.asarray(x).ndim == 0 else out


def subinterval_map(problem, n: int, x):
    """Affine map of the full interval onto the n-th knot subinterval.

    Endpoints are snapped: X_0 maps to X_{n-1} and X_N to X_n exactly.
    """
    _check_index(problem, n)
    xs = _as_points(problem, x)
    k = problem.knots
    lo, hi = k[0], k[-1]
    ratio = (k[n] - k[n - 1]) / (hi - lo)
    out = k[n - 1] + ratio * (xs - lo)
    out = np.where(xs == hi, k[n], out)
    return _scalar_like(x, out)


def locate(problem, x):
    """Owning subinterval index and pulled-back coordinate.

    Returns (n, y) with x in [X_{n-1}, X_n) — the last interval is closed —
    and y the preimage of x under the n-th subinterval map.  Interior knots
    belong to the subinterval on their right.
    """
    xs = _as_points(problem, x)
    k = problem.knots
    lo, hi = k[0], k[-1]
    n = np.searchsorted(k, xs, side="right")
    n = np.clip(n, 1, problem.n_maps)
    y = lo + (xs - k[n - 1]) * (hi - lo) / (k[n] - k[n - 1])
    y = np.where(xs == hi, hi, y)
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return int(n), float(y)
    return n.astype(int), y


def map_scaling(problem, n, x):
    """Scaling ramp of map n evaluated at a source point: runs s_{n-1} -> s_n."""
    xs = _as_points(problem, x)
    k, s = problem.knots, problem.scalings
    lo, hi = k[0], k[-1]
    narr = np.asarray(n, dtype=int)
    if narr.ndim == 0:
        _check_index(problem, int(narr))
    s0, s1 = s[narr - 1], s[narr]
    out = s0 + (s1 - s0) / (hi - lo) * (xs - lo)
    out = np.where(xs == hi, s1, out)
    return _scalar_like(x, out)


def scaling(problem, x):
    """The vertical scaling function on I: continuous, equals s_j at knot j."""
    xs = _as_points(problem, x)
    n, y = locate(problem, xs)
    out = map_scaling(problem, n, y)
    # knots are shared by two ramps; pin them to s_j so both one-sided limits agree
    out = _snap_knots(problem, xs, out, problem.scalings)
    return _scalar_like(x, out)


def _snap_knots(problem, xs, out, knot_values):
    """Overwrite entries of out where xs is exactly a knot with the knot value."""
    k = problem.knots
    idx = np.searchsorted(k, xs)
    idx = np.minimum(idx, len(k) - 1)
    hit = k[idx] == xs
    out = np.asarray(out, dtype=float)
    if out.ndim == 0:
        return np.where(hit, knot_values[idx], out)
    out = out.copy()
    out[hit] = knot_values[idx][hit] if np.ndim(hit) else knot_values[idx]
    return out


def chord(problem, x):
    """The straight line through the first and last data point (exact there)."""
    xs = _as_points(problem, x)
    k, v = problem.knots, problem.values
    lo, hi = k[0], k[-1]
    out = v[0] + (v[-1] - v[0]) / (hi - lo) * (xs - lo)
    out = np.where(xs == hi, v[-1], out)
    return _scalar_like(x, out)


def piecewise_linear(problem, x):
    """The piecewise-linear interpolant through all data points (exact at knots)."""
    xs = _as_points(problem, x)
    k, v = problem.knots, problem.values
    n = np.clip(np.searchsorted(k, xs, side="right"), 1, problem.n_maps)
    out = v[n - 1] + (v[n] - v[n - 1]) / (k[n] - k[n - 1]) * (xs - k[n - 1])
    out = _snap_knots(problem, xs, out, v)
    return _scalar_like(x, out)


def is_collinear(problem, tol: float = COLLINEAR_TOL) -> bool:
    """True when all data points lie within tol (perpendicular) of the chord."""
    k, v = problem.knots, problem.values
    dx, dy = k[-1] - k[0], v[-1] - v[0]
    cross = dx * (v - v[0]) - dy * (k - k[0])
    dist = np.abs(cross) / float(np.hypot(dx, dy))
    return bool(np.max(dist) <= tol)


# ---------------------------------------------------------------------------
# CSV ingestion (header: x,y,s)


def load_problem_csv(path) -> InterpolationProblem:
    """Load and validate a problem from CSV with header ``x,y,s``.

    Parse failures and invariant violations are reported with 1-based file
    line numbers (line 1 is the header).
    """
    rows = []
    errs = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header] != ["x", "y", "s"]:
            raise InvalidProblem([f"LengthMismatch: expected header 'x,y,s', got {header!r}"])
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                errs.append(f"LengthMismatch: line {lineno}: expected 3 fields, got {len(row)}")
                continue
            try:
                rows.append(tuple(float(c) for c in row))
            except ValueError:
                errs.append(f"NonFiniteData: line {lineno}: unparsable number in {row!r}")
    if errs:
        raise InvalidProblem(errs)
    if len(rows) < 2:
        raise InvalidProblem([f"TooFewKnots: file has {len(rows)} data rows, need >= 2"])
    data = np.array(rows, dtype=float)
    problem = InterpolationProblem(data[:, 0], data[:, 1], data[:, 2])
    errs = validation_errors(problem)
    if errs:
        # knots order violations name the offending file lines
        relabeled = []
        for e in errs:
            if e.startswith("NonIncreasingKnots"):
                i = int(e.split("X_")[1].split(" ")[0])
                relabeled.append(f"{e} (lines {i + 2}-{i + 3})")
            else:
                relabeled.append(e)
        raise InvalidProblem(relabeled)
    return problem


def write_problem_csv(path, problem: InterpolationProblem):
    with open(path, "w", newline="") as fh:
        fh.write("x,y,s\n")
        for x, y, s in zip(problem.knots, problem.values, problem.scalings):
            fh.write(f"{x:.17g},{y:.17g},{s:.17g}\n")


def require_endpoint_interpolation(problem, g: SampledFunction):
    """Check g interpolates the endpoint data exactly (membership in C*)."""
    lo, hi = problem.domain()
    if g.xs[0] != lo or g.xs[-1] != hi:
        raise EndpointMismatch(
            f"samples cover [{g.xs[0]}, {g.xs[-1]}], problem domain is [{lo}, {hi}]"
        )
    if g.ys[0] != problem.values[0] or g.ys[-1] != problem.values[-1]:
        raise EndpointMismatch(
            "function must take the endpoint data values exactly "
            f"(got {g.ys[0]!r}, {g.ys[-1]!r})"
        )

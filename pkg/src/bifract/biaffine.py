"""Unit-square IFS built from two data chains (lower and upper).

A chain gives, at each knot in [0, 1], the bottom and top of a trapezoid
column; map n carries the filled unit square onto the n-th trapezoid, sending
the corners (0,0), (1,0), (1,1), (0,1) to the trapezoid's vertices in order.
The lower chain is the interpolated data; the gap between the chains supplies
the vertical scaling factors.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .core import InterpolationProblem
from .errors import InvalidProblem, NotContractive
from .ifs import BilinearMapSet, CornerMap

__all__ = [
    "TrapezoidChain",
    "chain_errors",
    "validate_chain",
    "build_biaffine",
    "SquareCertificate",
    "square_contraction_certificate",
    "to_interpolation_problem",
    "load_chain_csv",
    "write_chain_csv",
]


def _readonly(a):
    out = np.asarray(a, dtype=float).copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class TrapezoidChain:
    """Knots on [0, 1] with lower/upper chain values 0 <= low <= high < 1."""

    knots: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "knots", _readonly(self.knots))
        object.__setattr__(self, "lower", _readonly(self.lower))
        object.__setattr__(self, "upper", _readonly(self.upper))

    @property
    def n_maps(self) -> int:
        return len(self.knots) - 1

    @property
    def scalings(self) -> np.ndarray:
        """Derived vertical scaling factors: upper minus lower, in [0, 1)."""
        return self.upper - self.lower

    @property
    def steps(self) -> np.ndarray:
        """Per-map rise of the lower chain."""
        return np.diff(self.lower)


def chain_errors(chain: TrapezoidChain) -> list[str]:
    errs = []
    k, lo, hi = chain.knots, chain.lower, chain.upper
    if len(k) < 2:
        errs.append("TooFewKnots: need at least 2 knots")
        return errs
    if len(lo) != len(k) or len(hi) != len(k):
        errs.append(f"LengthMismatch: {len(k)} knots, {len(lo)} lower, {len(hi)} upper")
        return errs
    if not (np.all(np.isfinite(k)) and np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        errs.append("NonFiniteData: chain entries must be finite")
        return errs
    if k[0] != 0.0 or k[-1] != 1.0:
        errs.append(f"NonIncreasingKnots: knots must run from 0 to 1, got [{k[0]}, {k[-1]}]")
    for i in np.nonzero(np.diff(k) <= 0)[0]:
        errs.append(f"NonIncreasingKnots: X_{i} = {k[i]!r} !< X_{i + 1} = {k[i + 1]!r}")
    for j in range(len(k)):
        if not (0.0 <= lo[j] <= hi[j] < 1.0):
            errs.append(
                f"ScalingOutOfRange: need 0 <= low_{j} <= high_{j} < 1, "
                f"got ({lo[j]!r}, {hi[j]!r})"
            )
    return errs


def validate_chain(chain: TrapezoidChain) -> TrapezoidChain:
    errs = chain_errors(chain)
    if errs:
        raise InvalidProblem(errs)
    return chain


def build_biaffine(chain: TrapezoidChain) -> BilinearMapSet:
    """Unit-square maps onto the trapezoid columns, corner conditions exact.

    The second coordinate is evaluated in corner (bilinear Lagrange) form, so
    all four vertex images are bit-exact and the xy expansion has no quadratic
    term.
    """
    validate_chain(chain)
    k, lo, hi = chain.knots, chain.lower, chain.upper
    maps = []
    for n in range(1, chain.n_maps + 1):
        maps.append(
            CornerMap(
                xl=float(k[n - 1]),
                xr=float(k[n]),
                a=float(lo[n - 1]),
                b=float(lo[n]),
                c=float(hi[n]),
                d=float(hi[n - 1]),
            )
        )
    mapset = BilinearMapSet(tuple(maps), k, lo, chain.scalings, None)
    _check_vertices(mapset, chain)
    return mapset


def _check_vertices(mapset: BilinearMapSet, chain: TrapezoidChain):
    k, lo, hi = chain.knots, chain.lower, chain.upper
    corners = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))
    for n in range(1, mapset.n_maps + 1):
        want = (
            (k[n - 1], lo[n - 1]),
            (k[n], lo[n]),
            (k[n], hi[n]),
            (k[n - 1], hi[n - 1]),
        )
        for (x, y), (wx, wy) in zip(corners, want):
            cx, cy = mapset.apply(n, x, y)
            if cx != wx or cy != wy:
                raise AssertionError(f"map {n} sends ({x},{y}) to ({cx},{cy}), expected ({wx},{wy})")


@dataclass(frozen=True)
class SquareCertificate:
    """Numeric contraction certificate for the unit-square maps under d_1."""

    lambda_l: float
    beta_max: float
    beta: float
    bound: float
    max_ratio: float
    step_abs_max: float  # max |lower-chain rise| per map (<= 1 in the square)
    scale_jump_abs_max: float  # max |s_n - s_{n-1}| per map (<= 1 in the square)


def square_contraction_certificate(
    chain: TrapezoidChain, trials: int = 100000, seed: int = 0, beta: float = None
) -> SquareCertificate:
    """Audit the weighted-taxicab contraction of the square maps.

    With constant shear the metric reduces to |dx| + beta*|dy|.  The admissible
    window is 0 < beta < (1 - lambda_l)/2; the default beta is its midpoint.
    The certified bound is max{lambda_l + 2*beta, max_n s_n}.
    """
    validate_chain(chain)
    mapset = build_biaffine(chain)
    lambda_l = float(np.max(np.diff(chain.knots)))
    if lambda_l >= 1.0:
        raise NotContractive("single-map chains have lambda_l = 1; need N >= 2")
    beta_max = (1.0 - lambda_l) / 2.0
    if beta is None:
        beta = beta_max / 2.0
    bound = max(lambda_l + 2.0 * beta, float(np.max(chain.scalings)))
    rng = np.random.default_rng(seed)
    x1, y1, x2, y2 = rng.uniform(0.0, 1.0, size=(4, trials))
    base = np.abs(x1 - x2) + beta * np.abs(y1 - y2)
    keep = base > 0
    worst = 0.0
    for n in range(1, mapset.n_maps + 1):
        ax, ay = mapset.apply(n, x1, y1)
        bx, by = mapset.apply(n, x2, y2)
        num = np.abs(ax - bx) + beta * np.abs(ay - by)
        worst = max(worst, float(np.max(num[keep] / base[keep])))
    return SquareCertificate(
        lambda_l=lambda_l,
        beta_max=beta_max,
        beta=beta,
        bound=bound,
        max_ratio=worst,
        step_abs_max=float(np.max(np.abs(chain.steps))),
        scale_jump_abs_max=float(np.max(np.abs(np.diff(chain.scalings)))),
    )


def to_interpolation_problem(chain: TrapezoidChain) -> InterpolationProblem:
    """Interpolation problem interpolating the lower chain with derived scalings."""
    validate_chain(chain)
    return InterpolationProblem(chain.knots, chain.lower, chain.scalings)


def load_chain_csv(path) -> TrapezoidChain:
    """Load and validate a chain from CSV with header ``x,ylow,yhigh``."""
    rows = []
    errs = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        names = [c.strip().lower() for c in header] if header else None
        if names not in (["x", "ylow", "yhigh"], ["x", "ylow", "yhigh", "s"]):
            raise InvalidProblem(
                [f"LengthMismatch: expected header 'x,ylow,yhigh', got {header!r}"]
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 3:
                errs.append(f"LengthMismatch: line {lineno}: expected 3+ fields, got {len(row)}")
                continue
            try:
                rows.append(tuple(float(c) for c in row[:3]))
            except ValueError:
                errs.append(f"NonFiniteData: line {lineno}: unparsable number in {row!r}")
    if errs:
        raise InvalidProblem(errs)
    if len(rows) < 2:
        raise InvalidProblem([f"TooFewKnots: file has {len(rows)} data rows, need >= 2"])
    data = np.array(rows, dtype=float)
    return validate_chain(TrapezoidChain(data[:, 0], data[:, 1], data[:, 2]))


def write_chain_csv(path, chain: TrapezoidChain):
    """Write the chain with the derived scaling column appended."""
    with open(path, "w", newline="") as fh:
        fh.write("x,ylow,yhigh,s\n")
        for x, lo, hi, s in zip(chain.knots, chain.lower, chain.upper, chain.scalings):
            fh.write(f"{x:.17g},{lo:.17g},{hi:.17g},{s:.17g}\n")

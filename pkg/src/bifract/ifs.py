"""The plane iterated function system whose attractor is the interpolant graph.

Each map sends (x, y) to (l_n(x), P_n(x) + Q_n(x) * (y - R_n(x))) where P_n is
the data polyline composed with l_n, Q_n the scaling ramp of map n, and R_n
the endpoint chord; all three are affine in x, so the second coordinate is
affine in y for fixed x and in x for fixed y, plus a single quadratic-in-x
correction term -Q'R' x^2 that vanishes whenever the scalings are constant or
the chord is flat (and always for the unit-square maps of :mod:`.biaffine`).

Also here: the sheared taxicab metric used for the contraction analysis, a
numeric contraction audit on graph strips, the chaos game, and deterministic
set-valued (Hutchinson) iteration on bitmaps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    InterpolationProblem,
    SampledFunction,
    chord,
    piecewise_linear,
    validate,
)
from .errors import IndexOutOfRange, NotContractive, PointOutsideDomain
from .operator import graph_samples, refinement_lattice
from .render import Bitmap, mark_points

__all__ = [
    "BilinearMap",
    "CornerMap",
    "BilinearMapSet",
    "build_maps",
    "TaxicabMetric",
    "ContractionAnalysis",
    "contraction_analysis",
    "default_eta",
    "verify_contraction",
    "splitmix64",
    "chaos_game",
    "hutchinson_iterate",
    "write_cloud_csv",
]


@dataclass(frozen=True)
class BilinearMap:
    """One plane map in endpoint form.

    The x part carries the source interval onto [xl, xr]; the y part is
    P(x) + Q(x)*(y - R(x)) with each affine factor stored by its values at the
    two source endpoints, so images of the endpoints are computed exactly.
    """

    x0: float
    x1: float
    xl: float
    xr: float
    p: tuple  # polyline-composed-with-map at (x0, x1)
    q: tuple  # scaling ramp at (x0, x1)
    r: tuple  # chord at (x0, x1); (0, 0) for unit-square maps

    def apply(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        w = (x - self.x0) / (self.x1 - self.x0)
        wc = (self.x1 - x) / (self.x1 - self.x0)
        cx = self.xl * wc + self.xr * w
        p = self.p[0] * wc + self.p[1] * w
        q = self.q[0] * wc + self.q[1] * w
        r = self.r[0] * wc + self.r[1] * w
        cy = p + q * (y - r)
        if cx.ndim == 0:
            return float(cx), float(cy)
        return cx, cy

    @property
    def poly_coefficients(self):
        """Expansion (const, x, y, xy, xx) of the second coordinate.

        The xx coefficient is nonzero exactly when both the scaling ramp and
        the chord have nonzero slope; it is identically zero for unit-square
        maps and for chord-normalized data.
        """
        span = self.x1 - self.x0
        a1 = (self.p[1] - self.p[0]) / span
        a0 = self.p[0] - a1 * self.x0
        q1 = (self.q[1] - self.q[0]) / span
        q0 = self.q[0] - q1 * self.x0
        r1 = (self.r[1] - self.r[0]) / span
        r0 = self.r[0] - r1 * self.x0
        return (
            a0 - q0 * r0,
            a1 - q0 * r1 - q1 * r0,
            q0,
            q1,
            -q1 * r1,
        )

    @property
    def x_coefficients(self):
        """(offset, slope) of the first coordinate."""
        slope = (self.xr - self.xl) / (self.x1 - self.x0)
        return self.xl - slope * self.x0, slope


@dataclass(frozen=True)
class CornerMap:
    """Unit-square plane map stored by its four corner images.

    Evaluated in bilinear Lagrange form, so the images of (0,0), (1,0), (1,1)
    and (0,1) are exactly the stored corners; the polynomial expansion never
    has a quadratic term.
    """

    xl: float
    xr: float
    a: float  # y-image of (0, 0)
    b: float  # y-image of (1, 0)
    c: float  # y-image of (1, 1)
    d: float  # y-image of (0, 1)

    def apply(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        xc = 1.0 - x
        cx = self.xl * xc + self.xr * x
        bottom = self.a * xc + self.b * x
        top = self.d * xc + self.c * x
        cy = bottom * (1.0 - y) + top * y
        if cx.ndim == 0:
            return float(cx), float(cy)
        return cx, cy

    @property
    def poly_coefficients(self):
        return (
            self.a,
            self.b - self.a,
            self.d - self.a,
            self.a - self.b + self.c - self.d,
            0.0,
        )

    @property
    def x_coefficients(self):
        return self.xl, self.xr - self.xl


@dataclass(frozen=True)
class BilinearMapSet:
    """The N plane maps of a problem (or unit-square chain), 1-indexed access."""

    maps: tuple
    knots: np.ndarray
    values: np.ndarray
    scalings: np.ndarray
    problem: InterpolationProblem = None

    def __post_init__(self):
        object.__setattr__(self, "knots", np.asarray(self.knots, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "scalings", np.asarray(self.scalings, dtype=float))

    @property
    def n_maps(self) -> int:
        return len(self.maps)

    def map(self, n: int) -> BilinearMap:
        if not 1 <= n <= self.n_maps:
            raise IndexOutOfRange(f"map index {n} outside 1..{self.n_maps}")
        return self.maps[n - 1]

    def apply(self, n: int, x, y):
        return self.map(n).apply(x, y)

    def apply_word(self, word, x, y):
        """Composite map for a word, rightmost digit applied first."""
        for n in reversed(tuple(word)):
            x, y = self.apply(n, x, y)
        return x, y


def build_maps(problem: InterpolationProblem) -> BilinearMapSet:
    """Plane maps of a validated problem, join conditions checked at build.

    Each map takes the graph of the interpolant onto its piece over the n-th
    knot interval; the vertical edges of consecutive pieces coincide.
    """
    validate(problem)
    k, v, s = problem.knots, problem.values, problem.scalings
    lo, hi = float(k[0]), float(k[-1])
    maps = []
    for n in range(1, problem.n_maps + 1):
        maps.append(
            BilinearMap(
                x0=lo,
                x1=hi,
                xl=float(k[n - 1]),
                xr=float(k[n]),
                p=(float(v[n - 1]), float(v[n])),
                q=(float(s[n - 1]), float(s[n])),
                r=(float(v[0]), float(v[-1])),
            )
        )
    mapset = BilinearMapSet(tuple(maps), k, v, s, problem)
    _check_construction(mapset)
    return mapset


def _check_construction(mapset: BilinearMapSet):
    """Join conditions and edge identities, exact by the endpoint form."""
    k, v, s = mapset.knots, mapset.values, mapset.scalings
    lo, hi = k[0], k[-1]
    probe = np.array([-1.0, 0.0, 0.5, 2.0])
    for n in range(1, mapset.n_maps + 1):
        cx, cy = mapset.apply(n, lo, v[0])
        if cx != k[n - 1] or cy != v[n - 1]:
            raise AssertionError(f"map {n} misses the left join point")
        cx, cy = mapset.apply(n, hi, v[-1])
        if cx != k[n] or cy != v[n]:
            raise AssertionError(f"map {n} misses the right join point")
        cx, cy = mapset.apply(n, np.full_like(probe, hi), probe)
        if np.any(cx != k[n]) or np.any(cy != v[n] + s[n] * (probe - v[-1])):
            raise AssertionError(f"map {n} breaks the right-edge identity")


# ---------------------------------------------------------------------------
# sheared taxicab metric


@dataclass(frozen=True)
class TaxicabMetric:
    """alpha*|dx| + beta*|d(y - q(x))| on I x R for a continuous shear q."""

    alpha: float
    beta: float
    q: SampledFunction

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")

    def distance(self, p1, p2):
        x1, y1 = (np.asarray(c, dtype=float) for c in p1)
        x2, y2 = (np.asarray(c, dtype=float) for c in p2)
        lo, hi = self.q.xs[0], self.q.xs[-1]
        for x in (x1, x2):
            if np.any(x < lo) or np.any(x > hi):
                raise PointOutsideDomain(f"x outside [{lo}, {hi}]")
        d = self.alpha * np.abs(x1 - x2) + self.beta * np.abs(
            (y1 - self.q(x1)) - (y2 - self.q(x2))
        )
        return float(d) if d.ndim == 0 else d


# ---------------------------------------------------------------------------
# contraction analysis


@dataclass(frozen=True)
class ContractionAnalysis:
    """Constants certifying strip contractivity of the plane maps."""

    lambda_l: float
    lambda_s: float
    s_max: float
    eta: float
    alpha: float
    beta_max: float
    beta: float
    factor: float
    beta_unconstrained: bool


def contraction_analysis(problem: InterpolationProblem, eta: float) -> ContractionAnalysis:
    """Lipschitz constants and the contraction factor on a strip of half-height eta.

    With alpha = 1 and beta at half the admissible maximum, the factor is
    max{s_max, lambda_l + beta*lambda_l*lambda_s*eta} < 1.  Constant scalings
    make the beta window unconstrained (flagged, beta set to 1).
    """
    validate(problem)
    if eta <= 0:
        raise ValueError("eta must be positive")
    k, s = problem.knots, problem.scalings
    span = k[-1] - k[0]
    lambda_l = float(np.max(np.diff(k)) / span)
    if lambda_l >= 1.0:
        raise NotContractive("single-map problems have lambda_l = 1; need N >= 2")
    lambda_s = float(np.max(np.abs(np.diff(s)) / np.diff(k)))
    s_max = problem.s_max
    denom = lambda_l * lambda_s * eta
    if denom == 0.0:
        beta_max = np.inf
        beta = 1.0
        unconstrained = True
    else:
        beta_max = (1.0 - lambda_l) / denom
        beta = beta_max / 2.0
        unconstrained = False
    factor = max(s_max, lambda_l + beta * lambda_l * lambda_s * eta)
    return ContractionAnalysis(
        lambda_l=lambda_l,
        lambda_s=lambda_s,
        s_max=s_max,
        eta=eta,
        alpha=1.0,
        beta_max=float(beta_max),
        beta=beta,
        factor=factor,
        beta_unconstrained=unconstrained,
    )


def default_eta(problem: InterpolationProblem, graph: SampledFunction = None) -> float:
    """Strip half-height: peak data deviation from the chord plus one.

    When exact graph samples are supplied the result is enlarged if the
    computed interpolant strays further from the chord than the heuristic.
    """
    dev = np.abs(problem.values - chord(problem, problem.knots))
    eta = float(np.max(dev)) + 1.0
    if graph is not None:
        reach = float(np.max(np.abs(graph.ys - chord(problem, graph.xs))))
        if reach > eta:
            eta = reach + 1.0
    return eta


def _lattice_depth_of(problem, q: SampledFunction) -> int:
    n = problem.n_maps
    size = len(q.xs) - 1
    depth = round(np.log(size) / np.log(n)) - 1
    if n ** (depth + 1) != size or depth < 1:
        raise ValueError(
            "metric shear must be exact fixed-point samples on a refinement lattice"
        )
    return depth


def verify_contraction(
    mapset: BilinearMapSet,
    metric: TaxicabMetric,
    eta: float,
    trials: int = 20000,
    seed: int = 0,
) -> float:
    """Max observed ratio d(w_n p, w_n r) / d(p, r) over strip point pairs.

    The metric's shear must be the exact fixed point on a refinement lattice
    (as built by :func:`graph_samples`); pair abscissae are drawn one level
    coarser so that both q(x) and q(l_n(x)) are exact samples and the ratio
    carries no interpolation slack.
    """
    problem = mapset.problem
    depth = _lattice_depth_of(problem, metric.q)
    xs, fs = graph_samples(problem, depth - 1)
    rng = np.random.default_rng(seed)
    i = rng.integers(0, len(xs), size=trials)
    j = rng.integers(0, len(xs), size=trials)
    y1 = fs[i] + rng.uniform(-eta, eta, size=trials)
    y2 = fs[j] + rng.uniform(-eta, eta, size=trials)
    base = metric.distance((xs[i], y1), (xs[j], y2))
    keep = base > 0
    worst = 0.0
    for n in range(1, mapset.n_maps + 1):
        ax, ay = mapset.apply(n, xs[i], y1)
        bx, by = mapset.apply(n, xs[j], y2)
        num = metric.distance((ax, ay), (bx, by))
        ratios = num[keep] / base[keep]
        worst = max(worst, float(np.max(ratios)))
    return worst


# ---------------------------------------------------------------------------
# chaos game

_SM64_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM64_M1 = np.uint64(0xBF58476D1CE4E5B9)
_SM64_M2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, count: int) -> np.ndarray:
    """First `count` outputs of the splitmix64 generator for a 64-bit seed.

    Counter-based: output i mixes seed + (i+1)*0x9E3779B97F4A7C15 through two
    xor-shift-multiply rounds (constants 0xBF58476D1CE4E5B9, 0x94D049BB133111EB)
    and a final 31-bit xor-shift.  Identical on every platform.
    """
    with np.errstate(over="ignore"):
        idx = np.arange(1, count + 1, dtype=np.uint64)
        z = np.uint64(seed) + idx * _SM64_GAMMA
        z = (z ^ (z >> np.uint64(30))) * _SM64_M1
        z = (z ^ (z >> np.uint64(27))) * _SM64_M2
        return z ^ (z >> np.uint64(31))


def _map_choices(seed: int, count: int, n_maps: int) -> np.ndarray:
    """Uniform map indices in 1..n_maps from the high 32 bits of splitmix64."""
    z = splitmix64(seed, count) >> np.uint64(32)
    return ((z * np.uint64(n_maps)) >> np.uint64(32)).astype(np.int64) + 1


def chaos_game(
    mapset: BilinearMapSet, n_points: int, burn_in: int = 100, seed: int = 0
) -> np.ndarray:
    """Random-orbit approximation of the attractor.

    Starts at the first data point (already on the attractor), applies a
    uniformly chosen map per step, discards burn_in points, and returns the
    next n_points as an (n_points, 2) array.  Bit-reproducible given the seed.
    """
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    total = n_points + burn_in
    choices = _map_choices(seed, total, mapset.n_maps)
    coeffs = []
    for m in mapset.maps:
        c0, cx, cy, cxy, cxx = m.poly_coefficients
        off, slope = m.x_coefficients
        coeffs.append((off, slope, c0, cx, cy, cxy, cxx))
    x = float(mapset.knots[0])
    y = float(mapset.values[0])
    out = np.empty((n_points, 2), dtype=float)
    kept = 0
    for step in range(total):
        off, slope, c0, cx, cy, cxy, cxx = coeffs[choices[step] - 1]
        y = c0 + cx * x + (cy + cxy * x) * y + cxx * x * x
        x = off + slope * x
        if step >= burn_in:
            out[kept, 0] = x
            out[kept, 1] = y
            kept += 1
    return out


def write_cloud_csv(path, cloud: np.ndarray):
    with open(path, "w", newline="") as fh:
        fh.write("x,y\n")
        for x, y in cloud:
            fh.write(f"{x:.17g},{y:.17g}\n")


# ---------------------------------------------------------------------------
# deterministic set-valued iteration

_SUBPIXEL = 4  # sub-sample grid per source pixel, per axis


def hutchinson_iterate(mapset: BilinearMapSet, initial: Bitmap, k: int) -> Bitmap:
    """k-fold set-valued iteration of the maps on a bitmap.

    Every set pixel is sampled on a 4x4 sub-grid of its closed square, each
    sample is pushed through every map, and the images are re-rasterized.
    k = 0 returns the input unchanged.  Raises StripTooSmall when images
    escape the raster's y-range.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    bmp = initial
    f = _SUBPIXEL
    offs = (np.arange(f) + 0.5) / f
    pw = (bmp.x1 - bmp.x0) / bmp.width
    ph = (bmp.y1 - bmp.y0) / bmp.height
    dx = np.repeat(offs, f) * pw
    dy = np.tile(offs, f) * ph
    for _ in range(k):
        rows, cols = np.nonzero(bmp.pixels)
        if len(rows) == 0:
            break
        base_x = bmp.x0 + cols * pw
        base_y = bmp.y1 - (rows + 1) * ph
        sx = (base_x[:, None] + dx[None, :]).ravel()
        sy = (base_y[:, None] + dy[None, :]).ravel()
        nxt = Bitmap(np.zeros_like(bmp.pixels), bmp.x0, bmp.x1, bmp.y0, bmp.y1)
        for n in range(1, mapset.n_maps + 1):
            ix, iy = mapset.apply(n, sx, sy)
            nxt = mark_points(nxt, ix, iy)
        bmp = nxt
    return bmp

"""Geometry of d mu_alpha(x) = x^{2 alpha + 1} dx on (0, inf).

Ball measures, Muckenhoupt A_p products over explicit interval families,
a grid maximal operator and the Rubio de Francia iteration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy import special

__all__ = [
    "WeightSpec",
    "BallMeasure",
    "Tabulated",
    "InadmissibleWeight",
    "mu_ball",
    "mu_interval",
    "ball_equivalence_ratio",
    "dyadic_intervals",
    "ap_constant",
    "maximal_fn",
    "maximal_on_grid",
    "maximal_norm_estimate",
    "rubio_de_francia_weight",
    "rdf_a1_check",
]


class InadmissibleWeight(ValueError):
    """w or w^{-p'/p} is not locally integrable on a requested interval."""


@dataclass(frozen=True)
class WeightSpec:
    """A weight on (0, inf) together with the exponent p of its A_p test.

    kind is ``"constant_one"``, ``"power"`` (w = x^delta) or ``"tabulated"``
    (log-linear interpolation of positive samples on ``grid``).
    """

    kind: Literal["constant_one", "power", "tabulated"]
    p: float
    delta: float = 0.0
    grid: tuple[tuple[float, float], ...] = ()
    scale: float = 1.0

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError("p must lie in (1, inf)")
        if self.kind == "tabulated":
            if len(self.grid) < 2:
                raise ValueError("tabulated weight needs at least two samples")
            xs = np.array([g[0] for g in self.grid])
            ws = np.array([g[1] for g in self.grid])
            if np.any(xs <= 0) or np.any(np.diff(xs) <= 0) or np.any(ws <= 0):
                raise ValueError("tabulated weight needs increasing x > 0 and w > 0")
        elif self.kind not in ("constant_one", "power"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @property
    def dual_exponent(self) -> float:
        """-p'/p = -1/(p-1), the power applied to w in the second average."""
        return -1.0 / (self.p - 1.0)

    def scaled(self, c: float) -> "WeightSpec":
        return WeightSpec(self.kind, self.p, self.delta, self.grid, self.scale * c)

    def admissible_power_range(self, alpha: float) -> tuple[float, float]:
        """Open interval of delta for which x^delta has both averages locally finite."""
        return (-(2 * alpha + 2), (2 * alpha + 2) * (self.p - 1))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "constant_one":
            return self.scale * np.ones_like(x)
        if self.kind == "power":
            return self.scale * x**self.delta
        xs = np.log([g[0] for g in self.grid])
        lw = np.log([g[1] for g in self.grid])
        return self.scale * np.exp(np.interp(np.log(x), xs, lw))


@dataclass(frozen=True)
class BallMeasure:
    alpha: float
    x: float
    r: float
    value: float

    @classmethod
    def of(cls, alpha: float, x: float, r: float) -> "BallMeasure":
        return cls(alpha, float(x), float(r), float(mu_ball(alpha, x, r)))


def mu_interval(alpha: float, a, b):
    """mu_alpha((a, b)) for 0 <= a <= b."""
    e = 2.0 * alpha + 2.0
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return (b**e - a**e) / e


def mu_ball(alpha: float, x, r):
    """mu_alpha(B(x, r) cap (0, inf)) in closed form; vectorized."""
    if not alpha > -1:
        raise ValueError("alpha must exceed -1")
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(x <= 0) or np.any(r <= 0):
        raise ValueError("need x > 0 and r > 0")
    e = 2.0 * alpha + 2.0
    lo = np.maximum(0.0, x - r)
    # b^e - a^e loses everything for tiny r; expm1 keeps it
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio_log = np.log1p(-2.0 * r / (x + r))
    out = np.where(lo > 0, (x + r) ** e * -np.expm1(e * ratio_log) / e, (x + r) ** e / e)
    return float(out) if out.ndim == 0 else out


def ball_equivalence_ratio(alpha: float, x, y):
    """mu_alpha(B(x, |x-y|)) / (|x-y| (x+y)^{2 alpha + 1})."""
    if alpha < -0.5:
        raise ValueError("alpha must be >= -1/2")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x == y):
        raise ValueError("x = y is excluded")
    d = np.abs(x - y)
    out = mu_ball(alpha, x, d) / (d * (x + y) ** (2 * alpha + 1))
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# A_p


def dyadic_intervals(k_min: int, k_max: int, shifted: bool = True, from_zero: bool = False):
    """[2^k, 2^{k+1}] for k_min <= k < k_max, plus 3/2-shifted copies and
    unions of consecutive dyadic blocks; ``from_zero`` adds (0, 2^k)."""
    out = []
    for k in range(k_min, k_max):
        out.append((2.0**k, 2.0 ** (k + 1)))
        if shifted:
            out.append((1.5 * 2.0**k, 1.5 * 2.0 ** (k + 1)))
    for k0 in range(k_min, k_max):
        for k1 in range(k0 + 2, k_max + 1):
            out.append((2.0**k0, 2.0**k1))
    if from_zero:
        out.extend((0.0, 2.0**k) for k in range(k_min, k_max + 1))
    return out


def _power_average(alpha, e, a, b):
    """mu(I)^{-1} int_a^b t^e d mu_alpha, for a power t^e."""
    q = e + 2 * alpha + 2
    if a == 0 and q <= 0:
        raise InadmissibleWeight(f"t^{e} is not integrable at 0 against d mu_{alpha}")
    mu = mu_interval(alpha, a, b)
    if abs(q) < 1e-14:
        num = math.log(b / a)
    else:
        num = (b**q - a**q) / q
    return float(num / mu)


_GL_T, _GL_W = special.roots_legendre(64)


def _tab_average(alpha, fn, a, b):
    # geometric panels so that log-linear weights are integrated accurately
    if a == 0:
        raise InadmissibleWeight("tabulated weights are only tested on intervals away from 0")
    edges = np.geomspace(a, b, 9)
    tot = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        t = lo + 0.5 * (hi - lo) * (_GL_T + 1)
        tot += 0.5 * (hi - lo) * np.dot(_GL_W, fn(t) * t ** (2 * alpha + 1))
    return tot / float(mu_interval(alpha, a, b))


def ap_constant(alpha: float, w: WeightSpec, intervals: Sequence[tuple[float, float]]) -> float:
    """max over ``intervals`` of  <w>_I <w^{-p'/p}>_I^{p/p'}  (averages in d mu_alpha).

    A lower bound for the A_p constant of w.  Raises InadmissibleWeight if
    an average diverges.
    """
    if not alpha > -1:
        raise ValueError("alpha must exceed -1")
    if len(intervals) == 0:
        raise ValueError("need at least one interval")
    p = w.p
    dual = w.dual_exponent
    best = 0.0
    for a, b in intervals:
        if not (0 <= a < b):
            raise ValueError(f"bad interval ({a}, {b})")
        if w.kind == "constant_one":
            first = w.scale
            second = w.scale**dual
        elif w.kind == "power":
            first = w.scale * _power_average(alpha, w.delta, a, b)
            second = w.scale**dual * _power_average(alpha, w.delta * dual, a, b)
        else:
            first = _tab_average(alpha, w, a, b)
            second = _tab_average(alpha, lambda t: w(t) ** dual, a, b)
        best = max(best, first * second ** (p - 1.0))
    return best


# ---------------------------------------------------------------------------
# maximal operator


@dataclass(frozen=True)
class Tabulated:
    """Piecewise-linear function on an increasing grid.

    A repeated abscissa encodes a jump.  The function is extended by its
    first value on (0, x_0] and by 0 beyond the last node.
    """

    x: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        f = np.asarray(self.f, dtype=float)
        if x.ndim != 1 or x.shape != f.shape or x.size < 2:
            raise ValueError("x and f must be 1-D of equal length >= 2")
        if np.any(np.diff(x) < 0) or x[0] <= 0:
            raise ValueError("grid must be positive and nondecreasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "f", f)

    @classmethod
    def geometric(cls, fn, x_min=1e-3, x_max=50.0, n=400):
        xs = np.geomspace(x_min, x_max, n)
        return cls(xs, np.asarray(fn(xs), dtype=float))

    def __call__(self, t):
        return np.interp(t, self.x, self.f, left=self.f[0], right=0.0)

    def abs(self) -> "Tabulated":
        return Tabulated(self.x, np.abs(self.f))


def _cumulative(alpha, tab: Tabulated):
    """Exact  int_0^{x_i} g d mu_alpha  at every node, g piecewise linear."""
    q = 2 * alpha + 1
    x, g = tab.x, tab.f
    head = g[0] * x[0] ** (q + 1) / (q + 1)
    dx = np.diff(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(dx > 0, np.diff(g) / np.where(dx > 0, dx, 1.0), 0.0)
    c0 = g[:-1] - slope * x[:-1]
    seg = c0 * (x[1:] ** (q + 1) - x[:-1] ** (q + 1)) / (q + 1) + slope * (
        x[1:] ** (q + 2) - x[:-1] ** (q + 2)
    ) / (q + 2)
    return np.concatenate([[head], head + np.cumsum(seg)])


def _integral_to(alpha, tab: Tabulated, F, t):
    """int_0^t g d mu_alpha for arbitrary t >= 0 (vectorized)."""
    q = 2 * alpha + 1
    t = np.asarray(t, dtype=float)
    x, g = tab.x, tab.f
    out = np.empty_like(t)
    below = t <= x[0]
    out[below] = g[0] * t[below] ** (q + 1) / (q + 1)
    above = t >= x[-1]
    out[above] = F[-1]
    mid = ~(below | above)
    if np.any(mid):
        tm = t[mid]
        i = np.searchsorted(x, tm, side="right") - 1
        x0, x1 = x[i], x[i + 1]
        g0, g1 = g[i], g[i + 1]
        dx = x1 - x0
        s = np.where(dx > 0, (g1 - g0) / np.where(dx > 0, dx, 1.0), 0.0)
        c0 = g0 - s * x0
        out[mid] = F[i] + c0 * (tm ** (q + 1) - x0 ** (q + 1)) / (q + 1) + s * (
            tm ** (q + 2) - x0 ** (q + 2)
        ) / (q + 2)
    return out


def maximal_fn(alpha: float, f: Tabulated, x: float, radii: Sequence[float]) -> float:
    """sup over the supplied balls containing x of the mu_alpha-average of |f|.

    For every radius r three intervals of length 2r containing x are used:
    centred at x, and with x at the left or right endpoint.
    """
    if not alpha > -1:
        raise ValueError("alpha must exceed -1")
    radii = np.asarray(radii, dtype=float)
    if radii.size == 0:
        raise ValueError("radii must be nonempty")
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    g = f.abs()
    F = _cumulative(alpha, g)
    lo = np.concatenate([x - radii, np.full_like(radii, x), x - 2 * radii])
    hi = np.concatenate([x + radii, x + 2 * radii, np.full_like(radii, x)])
    lo = np.maximum(lo, 0.0)
    num = _integral_to(alpha, g, F, hi) - _integral_to(alpha, g, F, lo)
    den = mu_interval(alpha, lo, hi)
    ok = den > 0
    return float(np.max(num[ok] / den[ok]))


def maximal_on_grid(alpha: float, f: Tabulated) -> np.ndarray:
    """M_alpha |f| at the nodes, sup over intervals with grid endpoints (or 0).

    Degenerate intervals supply the point value, so the result dominates |f|
    at every node.
    """
    g = f.abs()
    F = np.concatenate([[0.0], _cumulative(alpha, g)])
    ends = np.concatenate([[0.0], g.x])
    mu = mu_interval(alpha, 0.0, ends)
    num = F[None, :] - F[:, None]
    den = mu[None, :] - mu[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        G = np.where(den > 0, num / den, -np.inf)
    # S[a, i] = max_{b >= i} G[a, b];  M[i] = max_{a <= i} S[a, i]
    S = np.maximum.accumulate(G[:, ::-1], axis=1)[:, ::-1]
    M = np.maximum.accumulate(S, axis=0)
    # node i of g sits at index i+1 of ``ends``; intervals must be (a, b) with a < i+1 <= b
    n = g.x.size
    idx = np.arange(1, n + 1)
    out = M[idx - 1, idx]
    return np.maximum(out, g.f)


def _lp_norm(alpha, tab: Tabulated, p):
    return float(_cumulative(alpha, Tabulated(tab.x, np.abs(tab.f) ** p))[-1] ** (1.0 / p))


def maximal_norm_estimate(alpha: float, p: float, grid: np.ndarray, iters: int = 30, seed: int = 0) -> float:
    """Empirical lower estimate of ||M_alpha||_{L^p(mu_alpha)} on ``grid``.

    Power iteration h <- (M h)^{p-1} normalized, started from a few bumps
    and a random positive function; returns the largest ratio seen.
    """
    rng = np.random.default_rng(seed)
    grid = np.asarray(grid, dtype=float)
    starts = [
        np.exp(-((np.log(grid) - c) ** 2)) for c in np.linspace(np.log(grid[0]), np.log(grid[-1]), 5)
    ]
    starts.append(rng.uniform(0.1, 1.0, grid.size))
    best = 1.0
    for h in starts:
        for _ in range(iters):
            tab = Tabulated(grid, h)
            Mh = maximal_on_grid(alpha, tab)
            best = max(best, _lp_norm(alpha, Tabulated(grid, Mh), p) / _lp_norm(alpha, tab, p))
            h = Mh ** (p - 1.0)
            h = h / h.max()
    return best


@dataclass(frozen=True)
class RdFWeight:
    grid: np.ndarray
    values: np.ndarray
    tail: np.ndarray
    norm_bound: float
    n_terms: int

    def tabulated(self) -> Tabulated:
        return Tabulated(self.grid, self.values)


def rubio_de_francia_weight(
    alpha: float, p: float, h: Tabulated, n_terms: int, norm_bound: float
) -> RdFWeight:
    """R h = sum_{m=0}^{n_terms} M^m h / (2 B)^m on the grid of h.

    ``tail`` holds M^{n_terms+1} h / (2B)^{n_terms+1}, the first omitted
    term, which bounds the failure of M(Rh) <= 2B Rh.
    """
    if not norm_bound > 0:
        raise ValueError("norm_bound must be positive")
    if np.any(h.f < 0):
        raise ValueError("h must be nonnegative")
    if not p > 1:
        raise ValueError("p must exceed 1")
    term = h.f.copy()
    total = term.copy()
    for m in range(1, n_terms + 2):
        term = maximal_on_grid(alpha, Tabulated(h.x, term)) / (2.0 * norm_bound)
        if m <= n_terms:
            total += term
    return RdFWeight(h.x, total, term, float(norm_bound), int(n_terms))


def rdf_a1_check(alpha: float, rh: RdFWeight) -> float:
    """max over nodes of M(Rh) / (2B Rh + 2B tail); <= 1 up to rounding."""
    M = maximal_on_grid(alpha, rh.tabulated())
    B2 = 2.0 * rh.norm_bound
    return float(np.max(M / (B2 * (rh.values + rh.tail))))

"""Spherical-harmonic channels of the harmonic oscillator H = -Delta + |x|^2
in dimensions 2 and 3, the Riesz transform R = (grad + x) H^{-1/2}
assembled channel by channel through Laguerre expansions, and an
independent Cartesian Hermite route for the same quantity.

In the channel (j, l) a function contributes f_{jl}(r) Y_{jl}(x') and
H^{-1/2} acts on g = r^{-j} f_{jl} as L_{a_j}^{-1/2}, a_j = n/2 - 1 + j.
With A = r^j R^{a_j} g and T = r^j T^{a_j} g the vector Rf(x) is

    sum (A + j T) Y x'  +  sum T grad_0 Y,

the first term normal to the sphere and the second tangent to it.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from .measure import WeightSpec
from .specfun import hermite_fn_table, laguerre_fn_table
from .spectral_ops import eigenvalues, riesz_multiplier

__all__ = [
    "harmonic_dim",
    "harmonic_basis",
    "harmonic_gradient",
    "channel_index",
    "SphericalDecomposition",
    "RadialRule",
    "radial_rule_for_band",
    "uniform_radial_rule",
    "decompose",
    "mixed_norm",
    "OscillatorEigenfunction",
    "eigenfunction_eval",
    "RieszOutput",
    "oscillator_riesz",
    "HermiteExpansion",
    "random_band_limited",
    "hermite_oracle_riesz",
]


# ---------------------------------------------------------------------------
# harmonics


def harmonic_dim(n: int, j: int) -> int:
    if n == 2:
        return 1 if j == 0 else 2
    if n == 3:
        return 2 * j + 1
    raise ValueError("only n = 2 and n = 3 are supported")


def channel_index(n: int, j_max: int) -> list[tuple[int, int]]:
    return [(j, l) for j in range(j_max + 1) for l in range(1, harmonic_dim(n, j) + 1)]


def _check(n, j, l):
    if j < 0 or not (1 <= l <= harmonic_dim(n, j)):
        raise ValueError(f"no harmonic ({j}, {l}) in dimension {n}")


def _sph_angles(xp):
    xp = np.asarray(xp, dtype=float)
    theta = np.arccos(np.clip(xp[..., 2], -1.0, 1.0))
    phi = np.arctan2(xp[..., 1], xp[..., 0])
    return theta, phi


def _legendre_norm(j, m):
    return math.sqrt((2 * j + 1) / (4 * math.pi) * math.exp(special.gammaln(j - m + 1) - special.gammaln(j + m + 1)))


def _lm(j, l):
    # l = 1 -> m = 0; l = 2m -> cos(m phi); l = 2m + 1 -> sin(m phi)
    if l == 1:
        return 0, "c"
    return l // 2, ("c" if l % 2 == 0 else "s")


def harmonic_basis(n: int, j: int, l: int, xp):
    """Real orthonormal spherical harmonic Y_{j,l} at unit vectors ``xp`` (shape (..., n)).

    n = 2: 1/sqrt(2 pi), then cos(j t)/sqrt(pi) (l = 1) and sin(j t)/sqrt(pi) (l = 2).
    n = 3: l = 1 is the zonal harmonic, l = 2m and 2m + 1 carry cos(m phi) and sin(m phi).
    """
    _check(n, j, l)
    xp = np.asarray(xp, dtype=float)
    if n == 2:
        t = np.arctan2(xp[..., 1], xp[..., 0])
        if j == 0:
            return np.full(t.shape, 1.0 / math.sqrt(2 * math.pi))
        return (np.cos(j * t) if l == 1 else np.sin(j * t)) / math.sqrt(math.pi)
    theta, phi = _sph_angles(xp)
    m, cs = _lm(j, l)
    P = special.lpmv(m, j, np.cos(theta))
    ang = np.cos(m * phi) if cs == "c" else np.sin(m * phi)
    scale = _legendre_norm(j, m) * (math.sqrt(2.0) if m > 0 else 1.0)
    return scale * P * ang


def harmonic_gradient(n: int, j: int, l: int, xp):
    """Tangential gradient grad_0 Y_{j,l} as Cartesian vectors (shape (..., n)).

    For n = 3 the poles (sin theta = 0) are excluded.
    """
    _check(n, j, l)
    xp = np.asarray(xp, dtype=float)
    if n == 2:
        t = np.arctan2(xp[..., 1], xp[..., 0])
        e_t = np.stack([-np.sin(t), np.cos(t)], axis=-1)
        if j == 0:
            d = np.zeros_like(t)
        elif l == 1:
            d = -j * np.sin(j * t) / math.sqrt(math.pi)
        else:
            d = j * np.cos(j * t) / math.sqrt(math.pi)
        return d[..., None] * e_t
    theta, phi = _sph_angles(xp)
    st, ct = np.sin(theta), np.cos(theta)
    m, cs = _lm(j, l)
    scale = _legendre_norm(j, m) * (math.sqrt(2.0) if m > 0 else 1.0)
    P = special.lpmv(m, j, ct)
    Pm1 = special.lpmv(m, j - 1, ct) if j >= 1 else np.zeros_like(ct)
    # (x^2 - 1) dP_j^m/dx = j x P_j^m - (j + m) P_{j-1}^m, and d/dtheta = -sin(theta) d/dx
    dP_dtheta = (j * ct * P - (j + m) * Pm1) / st
    if cs == "c":
        ang, dang = np.cos(m * phi), -m * np.sin(m * phi)
    else:
        ang, dang = np.sin(m * phi), m * np.cos(m * phi)
    g_theta = scale * dP_dtheta * ang
    g_phi = scale * P * dang / st
    e_theta = np.stack([ct * np.cos(phi), ct * np.sin(phi), -st], axis=-1)
    e_phi = np.stack([-np.sin(phi), np.cos(phi), np.zeros_like(phi)], axis=-1)
    return g_theta[..., None] * e_theta + g_phi[..., None] * e_phi


def _angular_rule(n: int, degree: int):
    """Unit vectors and weights integrating polynomials of the given degree on S^{n-1} exactly."""
    if n == 2:
        M = degree + 1
        t = 2 * math.pi * np.arange(M) / M
        return np.stack([np.cos(t), np.sin(t)], axis=-1), np.full(M, 2 * math.pi / M)
    if n == 3:
        nt = degree // 2 + 1
        x, w = special.roots_legendre(nt)
        M = degree + 1
        phi = 2 * math.pi * np.arange(M) / M
        X, P = np.meshgrid(x, phi, indexing="ij")
        st = np.sqrt(1 - X**2)
        pts = np.stack([st * np.cos(P), st * np.sin(P), X], axis=-1).reshape(-1, 3)
        wts = (w[:, None] * np.full(M, 2 * math.pi / M)[None, :]).ravel()
        return pts, wts
    raise ValueError("only n = 2 and n = 3 are supported")


# ---------------------------------------------------------------------------
# decomposition


@dataclass(frozen=True)
class RadialRule:
    """Radial nodes with weights for dr, plus optional per-order Gauss rules.

    ``channel_rules[j]`` is a pair (node indices, weights for r^{n-1+2j} dr)
    that integrates r^{-2j} f_{jl} ell_k exactly for band-limited inputs.
    """

    r: np.ndarray
    w: np.ndarray
    channel_rules: dict = field(default_factory=dict)


def uniform_radial_rule(r_max: float = 12.0, panels: int = 48, N: int = 16) -> RadialRule:
    """Composite Gauss-Legendre rule for dr on [0, r_max]."""
    t, w = special.roots_legendre(N)
    edges = np.linspace(0.0, r_max, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    r = (a + 0.5 * (b - a) * (t + 1)).ravel()
    wt = (0.5 * (b - a) * w).ravel()
    return RadialRule(r, wt)


def radial_rule_for_band(n: int, D: int, base: RadialRule | None = None) -> RadialRule:
    """Generalized Gauss-Laguerre nodes (in u = r^2) for each order n/2 - 1 + j, j <= D.

    A degree-D Hermite combination has profiles r^j e^{-r^2/2} p(r^2) with
    deg p <= (D - j)/2, so D + 2 nodes integrate every projection exactly.
    """
    base = base if base is not None else RadialRule(np.empty(0), np.empty(0))
    rs = [base.r]
    ws = [base.w]
    rules = {}
    offset = base.r.size
    for j in range(D + 1):
        a = n / 2 - 1 + j
        u, wu = special.roots_genlaguerre(D + 2, a)
        r = np.sqrt(u)
        # int F(r) r^{2a+1} dr = 1/2 int F(sqrt u) u^a du; the rule carries e^{-u}
        wr = 0.5 * wu * np.exp(u)
        idx = np.arange(offset, offset + r.size)
        rules[j] = (idx, wr)
        rs.append(r)
        ws.append(np.zeros_like(r))
        offset += r.size
    return RadialRule(np.concatenate(rs), np.concatenate(ws), rules)


@dataclass
class SphericalDecomposition:
    n: int
    j_max: int
    rule: RadialRule
    profiles: dict[tuple[int, int], np.ndarray]

    @property
    def r(self) -> np.ndarray:
        return self.rule.r

    def channel_energy(self) -> np.ndarray:
        """sum_{j,l} |f_{jl}(r)|^2 at each radius."""
        return np.sum([v**2 for v in self.profiles.values()], axis=0)


def decompose(f: Callable, n: int, j_max: int, rule: RadialRule, angular_degree: int | None = None) -> SphericalDecomposition:
    """f_{jl}(r) = int_{S^{n-1}} f(r x') Y_{jl}(x') d sigma at every radius of ``rule``.

    ``f`` takes an array of points of shape (..., n).  The angular rule is
    exact for harmonics up to ``angular_degree`` (default 2 j_max + 2) paired
    with Y_{jl}.
    """
    deg = angular_degree if angular_degree is not None else 2 * j_max + 2
    pts, wts = _angular_rule(n, deg + j_max)
    r = rule.r
    X = r[:, None, None] * pts[None, :, :]
    F = np.asarray(f(X), dtype=float)  # (n_r, n_ang)
    profiles = {}
    for j, l in channel_index(n, j_max):
        Y = harmonic_basis(n, j, l, pts)
        profiles[(j, l)] = F @ (wts * Y)
    return SphericalDecomposition(n, j_max, rule, profiles)


def mixed_norm(dec: SphericalDecomposition, p: float, w: WeightSpec | None = None, energy=None) -> float:
    """|| (sum |f_{jl}(r)|^2)^{1/2} ||_{L^p(w(r) r^{n-1} dr)} on the rule of ``dec``.

    ``energy`` overrides the channel energy sum (used for vector-valued Rf).
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    e = dec.channel_energy() if energy is None else np.asarray(energy, dtype=float)
    r = dec.r
    wr = dec.rule.w
    mask = wr > 0
    ww = np.ones_like(r[mask]) if w is None else w(r[mask])
    val = np.sum(wr[mask] * ww * r[mask] ** (dec.n - 1) * np.sqrt(e[mask]) ** p)
    return float(val ** (1.0 / p))


# ---------------------------------------------------------------------------
# eigenfunctions


@dataclass(frozen=True)
class OscillatorEigenfunction:
    n: int
    m: int
    k: int
    l: int

    def __post_init__(self):
        if not (0 <= self.k <= self.m // 2):
            raise ValueError("need 0 <= k <= m/2")
        _check(self.n, self.j, self.l)

    @property
    def j(self) -> int:
        return self.m - 2 * self.k

    @property
    def order(self) -> float:
        return self.n / 2 - 1 + self.j

    @property
    def eigenvalue(self) -> float:
        return self.n + 2 * self.m


def _split(x, n):
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    safe = np.where(r > 0, r, 1.0)
    xp = x / safe[..., None]
    xp = np.where((r > 0)[..., None], xp, np.eye(n)[0])
    return r, xp


def eigenfunction_eval(e: OscillatorEigenfunction, x):
    """ell_k^{n/2-1+j}(r) r^j Y_{j,l}(x'), j = m - 2k."""
    r, xp = _split(x, e.n)
    lag = laguerre_fn_table(e.k, e.order, r)[e.k]
    return lag * r**e.j * harmonic_basis(e.n, e.j, e.l, xp)


# ---------------------------------------------------------------------------
# Riesz transform through the channels


@dataclass
class RieszOutput:
    """Channel functions of Rf.

    riesz_part[(j, l)]   = r^j R^{a_j}(r^{-j} f_{jl})
    angular_part[(j, l)] = r^j T^{a_j}(r^{-j} f_{jl})
    radial_part[(j, l)]  = riesz_part + j angular_part   (the x'-directed coefficient)
    """

    n: int
    coeffs: dict[tuple[int, int], np.ndarray]

    def _channel(self, j, c, r):
        a = self.n / 2 - 1 + j
        K = c.size - 1
        r = np.asarray(r, dtype=float)
        mult = riesz_multiplier(a, K)
        A = np.zeros_like(r)
        if K >= 1:
            tab1 = laguerre_fn_table(K - 1, a + 1.0, r)
            A = r ** (j + 1) * np.tensordot(mult[1:] * c[1:], tab1, axes=1)
        tab0 = laguerre_fn_table(K, a, r)
        G = np.tensordot(eigenvalues(a, K) ** -0.5 * c, tab0, axes=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            T = np.where(r > 0, r ** (j - 1.0) * G, 0.0 if j >= 1 else np.inf)
        return A, T

    def riesz_part(self, j, l, r):
        return self._channel(j, self.coeffs[(j, l)], r)[0]

    def angular_part(self, j, l, r):
        return self._channel(j, self.coeffs[(j, l)], r)[1]

    def radial_part(self, j, l, r):
        A, T = self._channel(j, self.coeffs[(j, l)], r)
        return A + j * T

    def sphere_l2(self, r):
        """(int_{S^{n-1}} |Rf(r x')|^2 d sigma)^{1/2}."""
        r = np.asarray(r, dtype=float)
        tot = np.zeros_like(r)
        for (j, l), c in self.coeffs.items():
            A, T = self._channel(j, c, r)
            tot += (A + j * T) ** 2 + j * (j + self.n - 2) * T**2
        return np.sqrt(tot)

    def vector(self, x):
        """Rf(x) as Cartesian vectors, x of shape (..., n) with |x| > 0."""
        r, xp = _split(x, self.n)
        if np.any(r <= 0):
            raise ValueError("the channel assembly needs |x| > 0")
        out = np.zeros(np.shape(x))
        for (j, l), c in self.coeffs.items():
            A, T = self._channel(j, c, r)
            Y = harmonic_basis(self.n, j, l, xp)
            out += ((A + j * T) * Y)[..., None] * xp
            if j > 0:
                out += T[..., None] * harmonic_gradient(self.n, j, l, xp)
        return out

    def magnitude(self, x):
        return np.linalg.norm(self.vector(x), axis=-1)


def oscillator_riesz(dec: SphericalDecomposition, K: int) -> RieszOutput:
    """Laguerre coefficients c_k = int f_{jl} ell_k^{a_j} r^{n-1+j} dr for every channel.

    Needs the per-order rules of ``radial_rule_for_band``.  Coefficients
    beyond what the rule integrates exactly are not requested: K is capped
    by the rule size.
    """
    rules = dec.rule.channel_rules
    if not rules:
        raise ValueError("decomposition was not built on a band rule (radial_rule_for_band)")
    coeffs = {}
    for (j, l), prof in dec.profiles.items():
        if j not in rules:
            raise ValueError(f"no radial rule for order j = {j}")
        idx, wr = rules[j]
        a = dec.n / 2 - 1 + j
        r = dec.r[idx]
        tab = laguerre_fn_table(K, a, r)
        # f_{jl} r^{-j} against ell_k in d mu_a = r^{2a+1} dr
        c = tab @ (wr * prof[idx] * r ** (-float(j)))
        if not np.all(np.isfinite(c)):
            raise FloatingPointError(f"channel ({j}, {l}) has non-finite coefficients")
        coeffs[(j, l)] = c
    return RieszOutput(dec.n, coeffs)


# ---------------------------------------------------------------------------
# Cartesian Hermite route


@dataclass(frozen=True)
class HermiteExpansion:
    """f = sum_k c_k prod_i h_{k_i}(x_i) over multi-indices k with |k| <= D."""

    n: int
    D: int
    indices: tuple[tuple[int, ...], ...]
    coeffs: np.ndarray

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        tabs = [hermite_fn_table(self.D, x[..., i]) for i in range(self.n)]
        out = np.zeros(x.shape[:-1])
        for k, c in zip(self.indices, self.coeffs):
            term = np.full(x.shape[:-1], c)
            for i, ki in enumerate(k):
                term = term * tabs[i][ki]
            out += term
        return out


def _multi_indices(n, D):
    return tuple(k for k in itertools.product(range(D + 1), repeat=n) if sum(k) <= D)


def random_band_limited(n: int, D: int, seed: int) -> HermiteExpansion:
    """Standard normal coefficients on every multi-index of degree <= D.

    The generator is numpy's default_rng (PCG64) seeded with ``seed``;
    multi-indices are visited in lexicographic order.
    """
    rng = np.random.default_rng(seed)
    idx = _multi_indices(n, D)
    return HermiteExpansion(n, D, idx, rng.standard_normal(len(idx)))


def hermite_oracle_riesz(f: HermiteExpansion, x) -> np.ndarray:
    """|(grad + x) H^{-1/2} f|(x) from (d_i + x_i) phi_k = sqrt(2 k_i) phi_{k - e_i}."""
    x = np.asarray(x, dtype=float)
    tabs = [hermite_fn_table(f.D, x[..., i]) for i in range(f.n)]
    comps = np.zeros(x.shape[:-1] + (f.n,))
    for k, c in zip(f.indices, f.coeffs):
        s = c / math.sqrt(2 * sum(k) + f.n)
        for i in range(f.n):
            if k[i] == 0:
                continue
            term = np.full(x.shape[:-1], s * math.sqrt(2 * k[i]))
            for q in range(f.n):
                term = term * tabs[q][k[q] - (1 if q == i else 0)]
            comps[..., i] += term
    return np.linalg.norm(comps, axis=-1)

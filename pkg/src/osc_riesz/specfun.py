"""Special functions used throughout the package.

Everything here is overflow-safe: gamma ratios go through ``gammaln``,
Bessel functions are exponentially scaled, and the Laguerre / Hermite
function recurrences carry a running log-scale so that large degrees at
large arguments neither under- nor overflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import special

__all__ = [
    "LaguerreOrder",
    "QuadratureRule",
    "log_gamma",
    "gamma_ratio",
    "bessel_i_scaled",
    "log_bessel_i_scaled",
    "laguerre_poly",
    "laguerre_fn",
    "laguerre_fn_table",
    "LaguerreProjector",
    "laguerre_fn_deriv",
    "hermite_fn",
    "hermite_fn_table",
    "make_pi_alpha_rule",
    "pi_alpha_mass",
    "make_radial_rule",
    "radial_window",
]

_RESCALE = 1e150
_LOG_RESCALE = math.log(_RESCALE)


@dataclass(frozen=True)
class LaguerreOrder:
    alpha: float

    def __post_init__(self):
        if not self.alpha > -1:
            raise ValueError(f"Laguerre order must exceed -1, got {self.alpha}")

    @property
    def valid_for_kernels(self) -> bool:
        return self.alpha >= -0.5


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights for one of the package's measures.

    ``kind`` is one of ``radial_mu_alpha`` (x^{2a+1} dx on a window),
    ``jacobi_pi_alpha`` (the Schlafli measure on [-1, 1]) or
    ``xi_unit_interval`` (Lebesgue measure on (0, 1)).
    """

    kind: Literal["radial_mu_alpha", "jacobi_pi_alpha", "xi_unit_interval"]
    nodes: np.ndarray
    weights: np.ndarray
    domain: tuple[float, float]
    alpha: float | None = None

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights))

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


# ---------------------------------------------------------------------------
# Gamma


def log_gamma(x):
    """ln Gamma(x) for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("log_gamma requires x > 0")
    out = special.gammaln(x)
    return float(out) if out.ndim == 0 else out


def gamma_ratio(z, r, t):
    """Gamma(z + r) / Gamma(z + t) as the Pochhammer symbol (z + t)_{r - t}.

    ``poch`` avoids the cancellation of a log-gamma difference, which
    loses about eps * |ln Gamma(z)| relative accuracy for large z.
    """
    a = np.asarray(z, dtype=float) + r
    b = np.asarray(z, dtype=float) + t
    if np.any(~(a > 0)) or np.any(~(b > 0)):
        raise ValueError("gamma_ratio requires z + r > 0 and z + t > 0")
    out = special.poch(b, r - t)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Modified Bessel


def bessel_i_scaled(alpha, z):
    """e^{-z} I_alpha(z) for z >= 0."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("bessel_i_scaled requires z >= 0")
    out = special.ive(alpha, z)
    return float(out) if np.ndim(out) == 0 else out


def _log_bessel_series(alpha, z, terms=60):
    # log I_alpha(z) - z from the power series; only used for small z / large alpha
    alpha = np.asarray(alpha, dtype=float)
    z = np.asarray(z, dtype=float)
    with np.errstate(divide="ignore"):
        lhz = np.log(z / 2.0)
    lead = alpha * lhz - special.gammaln(alpha + 1.0)
    q = (z * z) / 4.0
    term = np.ones(np.broadcast(alpha, z).shape)
    acc = term.copy()
    for m in range(1, terms):
        term = term * q / (m * (m + alpha))
        acc = acc + term
    return lead + np.log(acc) - z


def _log_bessel_asymptotic(alpha, z, terms=6):
    # Hankel expansion of e^{-z} I_alpha(z); used where ive gives up (z ~ 1e9 and beyond)
    mu = 4.0 * np.asarray(alpha, dtype=float) ** 2
    term = np.ones(np.broadcast(mu, z).shape)
    acc = term.copy()
    for k in range(1, terms):
        term = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
        acc = acc + term
    return -0.5 * np.log(2.0 * np.pi * z) + np.log(acc)


def log_bessel_i_scaled(alpha, z):
    """log(e^{-z} I_alpha(z)), finite wherever I_alpha(z) > 0.

    Falls back to a log-space power series where ``ive`` underflows
    (large order, small argument).  Returns -inf at z = 0 for alpha > 0.
    """
    alpha_b, z_b = np.broadcast_arrays(np.asarray(alpha, dtype=float), np.asarray(z, dtype=float))
    val = special.ive(alpha_b, z_b)
    with np.errstate(divide="ignore"):
        out = np.log(val)
    big = (z_b > 1e6) & (z_b > 50.0 * alpha_b**2)
    bad = ~(val > 1e-280) | ~np.isfinite(out)
    bad &= (z_b > 0) & ~big
    if np.any(big) or np.any(bad):
        out = np.array(out, copy=True)
        out[big] = _log_bessel_asymptotic(alpha_b[big], z_b[big])
        out[bad] = _log_bessel_series(alpha_b[bad], z_b[bad])
    return out


# ---------------------------------------------------------------------------
# Laguerre


def laguerre_poly(k: int, alpha: float, x):
    """Generalized Laguerre polynomial L_k^alpha(x) by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    for n in range(k):
        prev, cur = cur, ((2 * n + 1 + alpha - x) * cur - (n + alpha) * prev) / (n + 1)
    return float(cur) if cur.ndim == 0 else cur


def laguerre_fn_table(K: int, alpha: float, x) -> np.ndarray:
    """Rows ell_0^alpha(x), ..., ell_K^alpha(x); shape (K + 1,) + x.shape.

    The normalized recurrence

        ell_{k+1} = ((2k+1+a-x^2) ell_k - sqrt(k(k+a)) ell_{k-1}) / sqrt((k+1)(k+a+1))

    is run on values stripped of e^{-x^2/2}; a per-point log scale is
    accumulated whenever magnitudes exceed 1e150 and reapplied at the end.
    """
    if not alpha > -1:
        raise ValueError("alpha must exceed -1")
    x = np.asarray(x, dtype=float)
    u = x * x
    shape = x.shape
    out = np.empty((K + 1,) + shape)
    logscale = np.zeros(shape)
    prev = np.zeros(shape)
    cur = np.full(shape, math.sqrt(2.0) * math.exp(-0.5 * special.gammaln(alpha + 1.0)))

    def emit(k, vals):
        with np.errstate(under="ignore"):
            out[k] = vals * np.exp(logscale - 0.5 * u)

    emit(0, cur)
    for k in range(K):
        nxt = ((2 * k + 1 + alpha - u) * cur - math.sqrt(k * (k + alpha)) * prev) / math.sqrt(
            (k + 1) * (k + alpha + 1)
        )
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE
        if np.any(big):
            cur = np.where(big, cur / _RESCALE, cur)
            prev = np.where(big, prev / _RESCALE, prev)
            logscale = logscale + np.where(big, _LOG_RESCALE, 0.0)
        emit(k + 1, cur)
    return out


class LaguerreProjector:
    """Running projections  c_k[g] = sum_i w_i ell_k^{alpha_g}(x_i)  for groups g.

    The normalized recurrence is advanced in place, so extending from K to
    2K costs only the new degrees and no (K x n) table is stored.  Each
    group is a triple (alpha, nodes, weights).
    """

    def __init__(self, groups):
        if not groups:
            raise ValueError("need at least one group")
        a, u, logw, w, starts = [], [], [], [], []
        n = 0
        for alpha, x, wt in groups:
            if not alpha > -1:
                raise ValueError("alpha must exceed -1")
            x = np.asarray(x, dtype=float).ravel()
            wt = np.asarray(wt, dtype=float).ravel()
            if x.shape != wt.shape or x.size == 0:
                raise ValueError("nodes and weights must be nonempty and of equal size")
            starts.append(n)
            n += x.size
            a.append(np.full(x.size, float(alpha)))
            u.append(x * x)
            # ell_0 = sqrt(2 / Gamma(a+1)) e^{-u/2}; the constant and e^{-u/2} live in the weight
            logw.append(0.5 * math.log(2.0) - 0.5 * special.gammaln(alpha + 1.0) - 0.5 * x * x)
            w.append(wt)
        self._a = np.concatenate(a)
        self._u = np.concatenate(u)
        self._sign = np.sign(np.concatenate(w))
        self._logw = np.concatenate(logw) + np.log(np.abs(np.where(self._sign == 0, 1.0, np.concatenate(w))))
        self._W = self._sign * np.exp(self._logw)
        self._starts = np.array(starts)
        self._prev = np.zeros(n)
        self._cur = np.ones(n)
        self._k = 0
        self._rows = [np.add.reduceat(self._W, self._starts)]

    @property
    def K(self) -> int:
        return self._k

    @property
    def coeffs(self) -> np.ndarray:
        """Array of shape (K + 1, n_groups)."""
        return np.array(self._rows)

    def extend(self, K: int) -> np.ndarray:
        """Advance to degree K (no-op if already there); returns :attr:`coeffs`."""
        a, u = self._a, self._u
        prev, cur = self._prev, self._cur
        rows = self._rows
        for k in range(self._k, K):
            nxt = ((2 * k + 1 + a - u) * cur - np.sqrt(k * (k + a)) * prev) / np.sqrt((k + 1) * (k + a + 1))
            prev, cur = cur, nxt
            if k % 16 == 0:
                big = np.abs(cur) > _RESCALE
                if np.any(big):
                    cur = np.where(big, cur / _RESCALE, cur)
                    prev = np.where(big, prev / _RESCALE, prev)
                    self._logw = self._logw + np.where(big, _LOG_RESCALE, 0.0)
                    self._W = self._sign * np.exp(self._logw)
            rows.append(np.add.reduceat(self._W * cur, self._starts))
        self._prev, self._cur = prev, cur
        self._k = max(self._k, K)
        return self.coeffs


def laguerre_fn(k: int, alpha: float, x):
    """Laguerre function of convolution type ell_k^alpha(x)."""
    out = laguerre_fn_table(k, alpha, x)[k]
    return float(out) if np.ndim(out) == 0 else out


def laguerre_fn_deriv(k: int, alpha: float, x):
    """d/dx ell_k^alpha(x) from dL_k^a/du = -L_{k-1}^{a+1}.

    With u = x^2 this gives
    ell_k' = -2 x c_k L_{k-1}^{a+1}(x^2) e^{-x^2/2} - x ell_k, and
    c_k L_{k-1}^{a+1} e^{-x^2/2} = sqrt(k) ell_{k-1}^{a+1}.
    """
    x = np.asarray(x, dtype=float)
    lk = laguerre_fn_table(k, alpha, x)[k]
    if k == 0:
        out = -x * lk
    else:
        lower = laguerre_fn_table(k - 1, alpha + 1.0, x)[k - 1]
        out = -2.0 * math.sqrt(k) * x * lower - x * lk
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Hermite


def hermite_fn_table(K: int, x) -> np.ndarray:
    """Normalized Hermite functions h_0..h_K at x; shape (K + 1,) + x.shape."""
    x = np.asarray(x, dtype=float)
    shape = x.shape
    out = np.empty((K + 1,) + shape)
    logscale = np.zeros(shape)
    prev = np.zeros(shape)
    cur = np.full(shape, math.pi ** -0.25)
    half = 0.5 * x * x

    def emit(k, vals):
        with np.errstate(under="ignore"):
            out[k] = vals * np.exp(logscale - half)

    emit(0, cur)
    for k in range(K):
        nxt = x * math.sqrt(2.0 / (k + 1)) * cur - math.sqrt(k / (k + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE
        if np.any(big):
            cur = np.where(big, cur / _RESCALE, cur)
            prev = np.where(big, prev / _RESCALE, prev)
            logscale = logscale + np.where(big, _LOG_RESCALE, 0.0)
        emit(k + 1, cur)
    return out


def hermite_fn(k: int, x):
    """Normalized Hermite function h_k(x)."""
    out = hermite_fn_table(k, x)[k]
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Quadrature


def pi_alpha_mass(alpha: float) -> float:
    """Total mass of Pi_alpha, 1 / (2^alpha Gamma(alpha + 1))."""
    return math.exp(-alpha * math.log(2.0) - special.gammaln(alpha + 1.0))


def make_pi_alpha_rule(alpha: float, N: int = 64) -> QuadratureRule:
    """Gauss-Jacobi rule for the Schlafli measure Pi_alpha on [-1, 1].

    Density (1 - s^2)^{alpha - 1/2} / (sqrt(pi) 2^alpha Gamma(alpha + 1/2)).
    At alpha = -1/2 the family degenerates to two atoms at s = -1, 1, each
    of mass sqrt(2/pi) / 2, which is the weak limit of the family and
    keeps ``z^a int e^{-zs} Pi_a(ds) = I_a(z)`` exact.
    """
    if alpha < -0.5:
        raise ValueError("Pi_alpha requires alpha >= -1/2")
    if N < 1:
        raise ValueError("N must be positive")
    if alpha == -0.5:
        w = 0.5 * math.sqrt(2.0 / math.pi)
        return QuadratureRule("jacobi_pi_alpha", np.array([-1.0, 1.0]), np.array([w, w]), (-1.0, 1.0), alpha)
    nodes, weights = special.roots_jacobi(N, alpha - 0.5, alpha - 0.5)
    log_norm = 0.5 * math.log(math.pi) + alpha * math.log(2.0) + special.gammaln(alpha + 0.5)
    weights = weights * math.exp(-log_norm)
    return QuadratureRule("jacobi_pi_alpha", nodes, weights, (-1.0, 1.0), alpha)


def radial_window(k: int, alpha: float) -> tuple[float, float]:
    """Window [0, sqrt(16k + 8a + 20)] beyond which ell_k^a is negligible."""
    return (0.0, math.sqrt(max(16 * k + 8 * alpha + 20, 1.0)))


def make_radial_rule(alpha: float, window, N: int = 24, panels: int = 16, grading: int = 8) -> QuadratureRule:
    """Composite Gauss-Legendre rule for d mu_alpha = x^{2a+1} dx on ``window``.

    ``N`` points per panel, ``panels`` uniform panels; when the window
    starts at 0 the first panel is split geometrically ``grading`` times
    toward the origin to absorb the non-smooth factor x^{2a+1}.
    """
    if not alpha > -1:
        raise ValueError("alpha must exceed -1")
    a, b = float(window[0]), float(window[1])
    if a < 0 or b <= a:
        raise ValueError("window must satisfy 0 <= a < b")
    edges = list(np.linspace(a, b, panels + 1))
    if a == 0.0 and grading > 0:
        first = edges[1]
        graded = [first * 2.0 ** (-i) for i in range(grading, 0, -1)]
        edges = [0.0] + graded + edges[1:]
    t, w = special.roots_legendre(N)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        nodes.append(lo + half * (t + 1.0))
        weights.append(half * w)
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights) * nodes ** (2 * alpha + 1)
    return QuadratureRule("radial_mu_alpha", nodes, weights, (a, b), alpha)

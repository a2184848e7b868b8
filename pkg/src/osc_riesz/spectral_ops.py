"""Spectral calculus for the Laguerre operator L_alpha.

Functions on R_+ are represented by their coefficients against the
orthonormal basis ell_k^alpha of L^2(R_+, x^{2a+1} dx).  The operators
here act diagonally (heat semigroup, fractional integrals) or as a
diagonal map into the basis x ell_{k-1}^{alpha+1} (the Riesz transform).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import mpmath
import numpy as np
from scipy import special

from .specfun import (
    LaguerreProjector,
    QuadratureRule,
    laguerre_fn_table,
    log_bessel_i_scaled,
    make_radial_rule,
    radial_window,
)

__all__ = [
    "ExpansionCoeffs",
    "RieszCoeffs",
    "TwistParams",
    "HeatKernelEval",
    "eigenvalues",
    "project",
    "synthesize",
    "heat_apply",
    "fractional_integral",
    "riesz_apply",
    "angular_apply",
    "twisted_apply",
    "twisted_riesz_pairing",
    "twisted_angular_pairing",
    "converged_pairing",
    "heat_kernel_closed",
    "heat_kernel_spectral",
    "heat_kernel_reference",
    "heat_truncation",
    "riesz_multiplier",
    "angular_l2_norm",
]


def eigenvalues(alpha: float, K: int) -> np.ndarray:
    """4k + 2 alpha + 2 for k = 0..K."""
    return 4.0 * np.arange(K + 1) + 2.0 * alpha + 2.0


@dataclass(frozen=True)
class ExpansionCoeffs:
    alpha: float
    c: np.ndarray = field(repr=False)

    @property
    def K(self) -> int:
        return len(self.c) - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.c))


@dataclass(frozen=True)
class RieszCoeffs:
    """Coefficients over x ell_{k-1}^{alpha+1}, k >= 1 (b[0] is always 0)."""

    alpha: float
    b: np.ndarray = field(repr=False)

    def norm(self) -> float:
        return float(np.linalg.norm(self.b))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if len(self.b) < 2:
            return np.zeros_like(x)
        tab = laguerre_fn_table(len(self.b) - 2, self.alpha + 1.0, x)
        return x * np.tensordot(self.b[1:], tab, axes=1)


@dataclass(frozen=True)
class TwistParams:
    a: float
    j: int

    def __post_init__(self):
        if self.a < 1:
            raise ValueError("twist exponent a must be >= 1")
        if self.j < 0:
            raise ValueError("j must be nonnegative")

    @property
    def power(self) -> float:
        return self.a * self.j

    def order(self, alpha: float) -> float:
        return alpha + self.a * self.j

    def u(self, x):
        return np.asarray(x, dtype=float) ** self.power


@dataclass(frozen=True)
class HeatKernelEval:
    alpha: float
    t: float
    x: float
    y: float
    value: float
    log_value: float


def _default_rule(alpha: float, K: int) -> QuadratureRule:
    return make_radial_rule(alpha, radial_window(K, alpha), N=24, panels=max(16, K // 2))


def project(f: Callable, alpha: float, K: int, rule: QuadratureRule | None = None) -> ExpansionCoeffs:
    """Coefficients <f, ell_k^alpha>_{d mu_alpha}, k = 0..K, by quadrature."""
    if rule is None:
        rule = _default_rule(alpha, K)
    vals = np.asarray(f(rule.nodes), dtype=float)
    tab = laguerre_fn_table(K, alpha, rule.nodes)
    return ExpansionCoeffs(alpha, tab @ (rule.weights * vals))


def synthesize(coeffs: ExpansionCoeffs, x):
    """Sum_k c_k ell_k^alpha(x)."""
    x = np.asarray(x, dtype=float)
    tab = laguerre_fn_table(coeffs.K, coeffs.alpha, x)
    out = np.tensordot(coeffs.c, tab, axes=1)
    return float(out) if np.ndim(out) == 0 else out


def heat_apply(coeffs: ExpansionCoeffs, t: float) -> ExpansionCoeffs:
    if not t > 0:
        raise ValueError("heat time must be positive")
    lam = eigenvalues(coeffs.alpha, coeffs.K)
    return ExpansionCoeffs(coeffs.alpha, np.exp(-t * lam) * coeffs.c)


def fractional_integral(coeffs: ExpansionCoeffs, sigma: float) -> ExpansionCoeffs:
    """(L_alpha)^{-sigma}: c_k -> (4k + 2 alpha + 2)^{-sigma} c_k."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    lam = eigenvalues(coeffs.alpha, coeffs.K)
    return ExpansionCoeffs(coeffs.alpha, lam ** (-sigma) * coeffs.c)


def riesz_multiplier(alpha: float, K: int) -> np.ndarray:
    """-2 sqrt(k / (4k + 2 alpha + 2)), k = 0..K."""
    k = np.arange(K + 1)
    return -2.0 * np.sqrt(k / eigenvalues(alpha, K))


def riesz_apply(coeffs: ExpansionCoeffs) -> RieszCoeffs:
    """delta_alpha (L_alpha)^{-1/2}, returned in the basis x ell_{k-1}^{alpha+1}."""
    if coeffs.alpha < -0.5:
        raise ValueError("Riesz transform requires alpha >= -1/2")
    return RieszCoeffs(coeffs.alpha, riesz_multiplier(coeffs.alpha, coeffs.K) * coeffs.c)


def angular_apply(coeffs: ExpansionCoeffs, x):
    """(1/x) (L_alpha)^{-1/2} f at x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("angular operator needs x > 0")
    out = synthesize(fractional_integral(coeffs, 0.5), x) / x
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Twisted operators u_j Op^{alpha + a j} u_j^{-1}


def _twisted_coeffs(f: Callable, alpha: float, tw: TwistParams, K: int, rule: QuadratureRule | None):
    # <u_j^{-1} f, ell_k^m>_{mu_m} = int f(y) y^{aj} ell_k^m(y) d mu_alpha(y)
    m = tw.order(alpha)
    if rule is None:
        rule = _default_rule(alpha, K)
    vals = np.asarray(f(rule.nodes), dtype=float) * rule.nodes ** tw.power
    tab = laguerre_fn_table(K, m, rule.nodes)
    return ExpansionCoeffs(m, tab @ (rule.weights * vals))


def twisted_apply(
    op: Literal["riesz", "angular"],
    alpha: float,
    tw: TwistParams,
    f: Callable,
    x,
    K: int = 60,
    rule: QuadratureRule | None = None,
):
    """u_j(x) Op^{alpha + a j}(u_j^{-1} f)(x); the angular variant carries the factor j."""
    x = np.asarray(x, dtype=float)
    coeffs = _twisted_coeffs(f, alpha, tw, K, rule)
    if op == "riesz":
        out = tw.u(x) * riesz_apply(coeffs)(x)
    elif op == "angular":
        out = tw.j * tw.u(x) * angular_apply(coeffs, x)
    else:
        raise ValueError(f"unknown operator {op!r}")
    return float(out) if np.ndim(out) == 0 else out


def _pairing_rules(support, alpha, n_panels=8, N=32):
    return make_radial_rule(alpha, support, N=N, panels=n_panels, grading=0)


class _PairingSeries:
    """Spectral coefficients of a twisted pairing, extendable in K.

    ``c_k = <u_j^{-1} f, ell_k^m>_{mu_m}`` and ``e_k`` is the matching
    projection of g (order m + 1 times x u_j for riesz, order m times
    u_j / x for angular), so the pairing truncated at K is a weighted
    sum over k <= K of c_k e_k (shifted by one for riesz).
    """

    def __init__(self, op, alpha, tw, f, f_support, g, g_support, N):
        if op not in ("riesz", "angular"):
            raise ValueError(f"unknown operator {op!r}")
        self.op, self.tw = op, tw
        self.m = tw.order(alpha)
        rf = _pairing_rules(f_support, alpha, N=N)
        rg = _pairing_rules(g_support, alpha, N=N)
        wf = rf.weights * f(rf.nodes) * rf.nodes**tw.power
        if op == "riesz":
            # <g, u_j x ell_{k-1}^{m+1}>_{mu_alpha}
            og, wg = self.m + 1.0, rg.weights * g(rg.nodes) * rg.nodes ** (tw.power + 1.0)
        else:
            og, wg = self.m, rg.weights * g(rg.nodes) * rg.nodes ** (tw.power - 1.0)
        self._proj = LaguerreProjector([(self.m, rf.nodes, wf), (og, rg.nodes, wg)])

    def value(self, K: int) -> float:
        coef = self._proj.extend(K)[: K + 1]
        c, e = coef[:, 0], coef[:, 1]
        if self.op == "riesz":
            mult = riesz_multiplier(self.m, K)
            return float(np.dot(mult[1:] * c[1:], e[:-1]))
        lam = eigenvalues(self.m, K)
        return float(self.tw.j * np.dot(lam**-0.5 * c, e))


def twisted_riesz_pairing(alpha, tw: TwistParams, f, f_support, g, g_support, K=400, N=32) -> float:
    """<u_j R^{alpha+aj}(u_j^{-1} f), g>_{d mu_alpha} through the spectral definition, truncated at K."""
    return _PairingSeries("riesz", alpha, tw, f, f_support, g, g_support, N).value(K)


def twisted_angular_pairing(alpha, tw: TwistParams, f, f_support, g, g_support, K=400, N=32) -> float:
    """<j u_j T^{alpha+aj}(u_j^{-1} f), g>_{d mu_alpha} through the spectral definition, truncated at K."""
    return _PairingSeries("angular", alpha, tw, f, f_support, g, g_support, N).value(K)


def converged_pairing(op, alpha, tw: TwistParams, f, f_support, g, g_support,
                      K0=2000, K_max=32000, rtol=1e-7, N=48):
    """Spectral pairing with K doubled until two successive values agree to ``rtol``.

    Disjointly supported test functions pair to a number far smaller than the
    individual terms, and compactly supported bumps have Laguerre
    coefficients that decay only sub-exponentially, so a fixed K is not enough.
    Returns (value, K, last relative change).
    """
    series = _PairingSeries(op, alpha, tw, f, f_support, g, g_support, N)
    K = K0
    prev = series.value(K)
    while True:
        K *= 2
        cur = series.value(K)
        change = abs(cur - prev) / abs(cur)
        if change <= rtol or K >= K_max:
            return cur, K, change
        prev = cur


# ---------------------------------------------------------------------------
# Heat kernel


def heat_kernel_closed(alpha: float, t: float, x: float, y: float) -> HeatKernelEval:
    """Closed-form Laguerre heat kernel with respect to d mu_alpha.

    (sinh 2t)^{-1} exp(-coth(2t)(x^2+y^2)/2) (xy)^{-alpha} I_alpha(xy / sinh 2t),
    with the Gaussian and the Bessel growth fused into
    -((x-y)^2 + 2 sinh(t)^2 (x^2+y^2)) / (2 sinh 2t).
    """
    if alpha < -0.5:
        raise ValueError("heat kernel requires alpha >= -1/2")
    if not (t > 0 and x > 0 and y > 0):
        raise ValueError("t, x, y must be positive")
    s2 = math.sinh(2 * t)
    z = x * y / s2
    expo = -((x - y) ** 2 + 2.0 * math.sinh(t) ** 2 * (x * x + y * y)) / (2.0 * s2)
    logv = -math.log(s2) + expo - alpha * math.log(x * y) + float(log_bessel_i_scaled(alpha, z))
    return HeatKernelEval(alpha, t, x, y, math.exp(logv), logv)


def heat_truncation(t: float, tol: float = 1e-14) -> int:
    """Smallest K with e^{-4tK} < tol."""
    return int(math.ceil(-math.log(tol) / (4.0 * t)))


def heat_kernel_spectral(alpha: float, t: float, x, y, K: int | None = None, dps: int | None = None):
    """Truncated series sum_{k<=K} e^{-t(4k+2a+2)} ell_k(x) ell_k(y).

    With ``dps`` the sum runs in mpmath at that many digits, which is
    needed off the diagonal at small t where the kernel is many orders of
    magnitude below the individual terms.
    """
    if K is None:
        K = heat_truncation(t)
    if dps is None:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        w = np.exp(-t * eigenvalues(alpha, K))
        tx = laguerre_fn_table(K, alpha, x)
        ty = laguerre_fn_table(K, alpha, y)
        out = np.tensordot(w, tx * ty, axes=1)
        return float(out) if np.ndim(out) == 0 else out
    with mpmath.workdps(dps):
        a = mpmath.mpf(alpha)
        lx = _mp_laguerre_fns(K, a, mpmath.mpf(x))
        ly = _mp_laguerre_fns(K, a, mpmath.mpf(y))
        tt = mpmath.mpf(t)
        total = mpmath.mpf(0)
        for k in range(K + 1):
            total += mpmath.exp(-tt * (4 * k + 2 * a + 2)) * lx[k] * ly[k]
        return float(total)


def heat_kernel_reference(alpha: float, t: float, x: float, y: float, rtol: float = 1e-10):
    """Spectral series summed to relative accuracy ``rtol``; returns (value, K, dps).

    K is taken from the tail bound  sum_{k>K} e^{-4tk} |ell_k(x) ell_k(y)|,
    with |ell_k| <= 2 (k+1)^{max(a,0)/2} on the evaluated range, relative to
    the closed form's magnitude.  When the double-precision partial sums
    cancel by more than six orders of magnitude the series is redone in
    mpmath with enough digits to absorb the cancellation.
    """
    target = heat_kernel_closed(alpha, t, x, y)
    log_goal = math.log(rtol) + target.log_value
    q = 4.0 * t
    amax = max(alpha, 0.0)
    K = 1
    while True:
        # log of 4 (K+1)^a e^{-t(4K+2a+2)} / (1 - e^{-4t})
        tail = math.log(4.0) + amax * math.log(K + 1.0) - t * (4 * K + 2 * alpha + 2) - math.log1p(-math.exp(-q))
        if tail < log_goal:
            break
        K = int(K * 1.25) + 1
    w = np.exp(-t * eigenvalues(alpha, K))
    terms = w * laguerre_fn_table(K, alpha, x) * laguerre_fn_table(K, alpha, y)
    total = float(terms.sum())
    absum = float(np.abs(terms).sum())
    cancel = absum / abs(target.value) if target.value > 0 else np.inf
    if cancel < 1e6:
        return total, K, None
    dps = 20 + int(math.ceil(math.log10(cancel)))
    return heat_kernel_spectral(alpha, t, x, y, K=K, dps=dps), K, dps


def _mp_laguerre_fns(K, alpha, x):
    u = x * x
    vals = [mpmath.sqrt(2 / mpmath.gamma(alpha + 1)) * mpmath.exp(-u / 2)]
    prev = mpmath.mpf(0)
    for k in range(K):
        nxt = ((2 * k + 1 + alpha - u) * vals[-1] - mpmath.sqrt(k * (k + alpha)) * prev) / mpmath.sqrt(
            (k + 1) * (k + alpha + 1)
        )
        prev = vals[-1]
        vals.append(nxt)
    return vals


# ---------------------------------------------------------------------------
# L^2 operator norm of the angular operator


def angular_l2_norm(m: float, K: int = 80, scaled: bool = True) -> float:
    """Norm of m T^m (or T^m if not ``scaled``) on span{ell_0..ell_K} in L^2(d mu_m).

    T^m g = x^{-1} (L_m)^{-1/2} g, so the squared norm is the top eigenvalue
    of D G D with D = diag(lambda_k^{-1/2}) and Gram matrix
    G_{kl} = int ell_k ell_l x^{-2} d mu_m, integrated exactly in u = x^2 by
    generalized Gauss-Laguerre with exponent m - 1.  Requires m > 0.
    """
    if not m > 0:
        raise ValueError("angular norm requires order m > 0")
    u, w = special.roots_genlaguerre(K + 2, m - 1.0)
    x = np.sqrt(u)
    # int ell_k ell_l x^{2m-1} dx = 1/2 int (ell_k ell_l e^{u}) u^{m-1} e^{-u} du
    tab = laguerre_fn_table(K, m, x) * np.exp(0.5 * u)
    gram = 0.5 * (tab * w) @ tab.T
    d = eigenvalues(m, K) ** -0.5
    top = np.linalg.eigvalsh(d[:, None] * gram * d[None, :])[-1]
    norm = math.sqrt(top)
    return m * norm if scaled else norm

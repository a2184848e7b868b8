import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import special

from osc_riesz import specfun as sf


def mp_laguerre_fn(k, alpha, x, dps=40):
    """ell_k^alpha(x) from the hypergeometric Laguerre polynomial."""
    with mp.workdps(dps):
        x = mp.mpf(x)
        c = mp.sqrt(2 * mp.gamma(k + 1) / mp.gamma(k + alpha + 1))
        return float(c * mp.laguerre(k, alpha, x * x) * mp.exp(-x * x / 2))


def mp_hermite_fn(k, x, dps=40):
    with mp.workdps(dps):
        x = mp.mpf(x)
        c = 1 / mp.sqrt(2**k * mp.factorial(k) * mp.sqrt(mp.pi))
        return float(c * mp.hermite(k, x) * mp.exp(-x * x / 2))


# ---------------------------------------------------------------------------
# gamma


@pytest.mark.parametrize("z,r,t", [(0.5, 0.5, 0.0), (10.0, 1.5, 0.5), (200.0, 0.25, 0.0), (1e4, 3.0, 1.0)])
def test_gamma_ratio_matches_mpmath(z, r, t):
    ref = float(mp.gamma(mp.mpf(z) + r) / mp.gamma(mp.mpf(z) + t))
    assert_allclose(sf.gamma_ratio(z, r, t), ref, rtol=1e-12)


def test_gamma_ratio_large_argument_no_overflow():
    # Gamma(500)/Gamma(499.5) ~ sqrt(499.5)
    assert_allclose(sf.gamma_ratio(499.5, 0.5, 0.0), float(mp.gamma(500) / mp.gamma(499.5)), rtol=1e-12)


def test_log_gamma_rejects_nonpositive():
    with pytest.raises(ValueError):
        sf.log_gamma(0.0)
    with pytest.raises(ValueError):
        sf.gamma_ratio(-3.0, 1.0, 0.0)


# ---------------------------------------------------------------------------
# Bessel


@pytest.mark.parametrize("alpha", [-0.5, 0.0, 0.5, 3.0, 40.0, 60.0])
@pytest.mark.parametrize("z", [1e-3, 0.1, 1.0, 10.0, 100.0, 1e4, 1e10])
def test_log_bessel_scaled_matches_mpmath(alpha, z):
    with mp.workdps(40):
        ref = float(mp.log(mp.besseli(alpha, z)) - z)
    got = float(sf.log_bessel_i_scaled(alpha, z))
    assert_allclose(got, ref, rtol=1e-12, atol=1e-12)


def test_bessel_scaled_matches_scipy_and_rejects_negative():
    z = np.array([0.0, 0.5, 20.0])
    assert_allclose(sf.bessel_i_scaled(1.5, z), special.ive(1.5, z))
    with pytest.raises(ValueError):
        sf.bessel_i_scaled(0.0, -1.0)


def test_log_bessel_scaled_zero_argument():
    assert sf.log_bessel_i_scaled(2.0, 0.0) == -np.inf
    assert_allclose(sf.log_bessel_i_scaled(0.0, 0.0), 0.0)


# ---------------------------------------------------------------------------
# Laguerre


@settings(max_examples=60, deadline=None)
@given(
    k=st.integers(0, 30),
    alpha=st.floats(-0.9, 20.0),
    x=st.floats(0.0, 60.0),
)
def test_laguerre_poly_matches_scipy(k, alpha, x):
    ref = special.eval_genlaguerre(k, alpha, x)
    # the polynomial is a sum of terms up to binom(k+alpha, k) e^x in size
    scale = max(abs(ref), special.binom(k + alpha, k) if k + alpha > -1 else 1.0, 1.0) * math.exp(min(x, 50) / 2)
    assert abs(sf.laguerre_poly(k, alpha, x) - ref) <= 1e-10 * scale


@pytest.mark.parametrize("alpha", [-0.5, 0.0, 1.3, 12.0, 40.0])
@pytest.mark.parametrize("k,x", [(0, 0.3), (5, 1.7), (40, 3.0), (150, 8.0), (150, 20.0), (400, 30.0)])
def test_laguerre_fn_table_matches_mpmath(alpha, k, x):
    got = sf.laguerre_fn_table(k, alpha, np.array([x]))[k, 0]
    ref = mp_laguerre_fn(k, alpha, x, dps=60)
    assert_allclose(got, ref, rtol=1e-9, atol=1e-300)


@pytest.mark.parametrize("alpha", [-0.5, 0.0, 2.5, 12.0])
def test_laguerre_orthonormality_by_mpmath_quadrature(alpha):
    # independent quadrature: mpmath tanh-sinh on [0, inf)
    ks = [0, 3, 7]
    with mp.workdps(25):
        for i in ks:
            for j in ks:
                val = mp.quad(lambda x: mp_laguerre_fn(i, alpha, x, 25) * mp_laguerre_fn(j, alpha, x, 25)
                              * x ** (2 * alpha + 1), [0, 2, 5, mp.inf])
                assert_allclose(float(val), 1.0 if i == j else 0.0, atol=1e-9)


@pytest.mark.parametrize("alpha", [-0.5, 0.0, 1.0, 7.5])
@pytest.mark.parametrize("k", [0, 1, 4, 17])
def test_laguerre_fn_deriv_central_difference(alpha, k):
    x = np.linspace(0.2, 5.0, 13)
    h = 1e-5
    fd = (sf.laguerre_fn_table(k, alpha, x + h)[k] - sf.laguerre_fn_table(k, alpha, x - h)[k]) / (2 * h)
    scale = np.max(np.abs(sf.laguerre_fn_table(k, alpha, np.linspace(0.01, 8, 400))))
    assert_allclose(sf.laguerre_fn_deriv(k, alpha, x), fd, atol=1e-8 * max(scale, 1.0) * (k + 1))


def test_laguerre_fn_scalar_and_order_check():
    assert isinstance(sf.laguerre_fn(3, 0.5, 1.0), float)
    with pytest.raises(ValueError):
        sf.laguerre_fn_table(3, -1.0, 1.0)
    with pytest.raises(ValueError):
        sf.LaguerreOrder(-1.2)
    assert sf.LaguerreOrder(-0.7).valid_for_kernels is False
    assert sf.LaguerreOrder(-0.5).valid_for_kernels is True


@settings(max_examples=25, deadline=None)
@given(split=st.integers(0, 120), alpha=st.sampled_from([-0.5, 0.0, 3.2, 45.0]))
def test_projector_matches_table_any_extension_split(split, alpha):
    x = np.linspace(0.05, 9.0, 37)
    w = np.cos(3 * x)
    P = sf.LaguerreProjector([(alpha, x, w), (alpha + 1.0, x[:11], w[:11])])
    P.extend(split)
    got = P.extend(160)
    ref0 = sf.laguerre_fn_table(160, alpha, x) @ w
    ref1 = sf.laguerre_fn_table(160, alpha + 1.0, x[:11]) @ w[:11]
    assert got.shape == (161, 2)
    assert_allclose(got[:, 0], ref0, rtol=1e-11, atol=1e-12 * np.abs(ref0).max())
    assert_allclose(got[:, 1], ref1, rtol=1e-11, atol=1e-12 * np.abs(ref1).max())


def test_projector_validates_groups():
    with pytest.raises(ValueError):
        sf.LaguerreProjector([])
    with pytest.raises(ValueError):
        sf.LaguerreProjector([(0.0, np.ones(3), np.ones(2))])


# ---------------------------------------------------------------------------
# Hermite


@pytest.mark.parametrize("k,x", [(0, 0.0), (1, 0.7), (6, -2.2), (30, 4.0), (120, 10.0), (120, -15.0)])
def test_hermite_fn_matches_mpmath(k, x):
    assert_allclose(sf.hermite_fn(k, x), mp_hermite_fn(k, x, dps=60), rtol=1e-10, atol=1e-300)


def test_hermite_orthonormal_gauss_hermite():
    t, w = special.roots_hermite(60)
    tab = sf.hermite_fn_table(40, t) * np.exp(t * t / 2)
    assert_allclose((tab * w) @ tab.T, np.eye(41), atol=1e-12)


# ---------------------------------------------------------------------------
# quadrature


@pytest.mark.parametrize("alpha", [-0.5, 0.0, 0.25, 3.0, 20.0])
def test_pi_alpha_rule_mass_and_schlafli(alpha):
    rule = sf.make_pi_alpha_rule(alpha)
    assert rule.kind == "jacobi_pi_alpha"
    assert_allclose(rule.mass, sf.pi_alpha_mass(alpha), rtol=1e-13)
    for z in (0.3, 4.0, 25.0):
        with mp.workdps(30):
            ref = float(mp.besseli(alpha, z) * mp.mpf(z) ** (-alpha))
        assert_allclose(rule.integrate(np.exp(-z * rule.nodes)), ref, rtol=1e-12)


def test_pi_minus_half_is_two_atoms():
    rule = sf.make_pi_alpha_rule(-0.5)
    assert_allclose(rule.nodes, [-1.0, 1.0])
    assert_allclose(rule.weights, [0.5 * math.sqrt(2 / math.pi)] * 2)


def test_pi_alpha_rule_errors():
    with pytest.raises(ValueError):
        sf.make_pi_alpha_rule(-0.6)
    with pytest.raises(ValueError):
        sf.make_pi_alpha_rule(0.0, N=0)


@pytest.mark.parametrize("alpha", [-0.5, 0.0, 2.0])
def test_radial_rule_integrates_moments(alpha):
    b = 3.0
    rule = sf.make_radial_rule(alpha, (0.0, b))
    for q in (0, 1, 4):
        ref = b ** (2 * alpha + 2 + q) / (2 * alpha + 2 + q)
        assert_allclose(rule.integrate(rule.nodes**q), ref, rtol=1e-12)
    with pytest.raises(ValueError):
        sf.make_radial_rule(alpha, (2.0, 1.0))


def test_radial_window_covers_decay():
    lo, hi = sf.radial_window(20, 1.0)
    assert lo == 0.0
    assert abs(sf.laguerre_fn(20, 1.0, hi)) < 1e-10

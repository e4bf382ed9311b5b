import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from pouext import extend
from pouext.errors import InputError, NonIntegrableError
from pouext.extend import (
    SingularDistribution,
    bphz_correspondence,
    builtin_distribution,
    c_beta,
    extend_ir,
    extend_ir_homogeneous,
    extend_uv,
    extend_uv_alt,
    harmonic_number,
    scaling_order,
    uv_log_integral,
)
from pouext.testfunc import CompactBump, Srtf, SrtfParams

EULER_GAMMA = 0.57721566490153286061


@pytest.mark.parametrize("name, regime, k", [
    ("euclid_prop_d4", "uv", 1),  # 1/(X Lambda^2 + m^2) at d = 2
    ("inv_omega", "uv", 0),        # 1/omega_p at d = 1
    ("inv_x2", "ir", 1),
    ("inv_x", "ir", 0),
])
def test_scaling_order(name, regime, k):
    assert scaling_order(builtin_distribution(name), regime) == k


def test_scaling_order_rejects_unknown_regime():
    with pytest.raises(InputError):
        scaling_order(builtin_distribution("inv_x"), "sideways")


def test_harmonic_number_matches_digamma():
    from scipy.special import digamma
    for k in range(0, 9):
        assert harmonic_number(k) == pytest.approx(EULER_GAMMA + digamma(k + 1), abs=1e-13)


def test_c_beta_parity():
    T = builtin_distribution("inv_x")
    assert c_beta(T, 0) == 2.0
    assert c_beta(T, 1) == 0.0


@pytest.mark.parametrize("name, k", [("inv_x", 0), ("inv_x2", 1)])
def test_ir_extension_equals_source_away_from_origin(name, k):
    T = builtin_distribution(name)
    mu_tilde = 0.1
    X = np.geomspace(1e-3, 0.9 / mu_tilde, 25)
    ext = extend_ir(T, k, mu_tilde)
    np.testing.assert_allclose(ext(X), T(X), rtol=1e-9)
    hom, _ = extend_ir_homogeneous(T, k, mu_tilde)
    np.testing.assert_allclose(hom(X), ext(X), rtol=1e-9)


def test_homogeneous_delta_coefficient():
    # k = 0 gives H_0 = 0; k = 2 with T = X^-3 gives (-1)^2/2! H_2 C^beta
    T3 = SingularDistribution(lambda x: np.asarray(x, dtype=float) ** -3, 1, homogeneity=-3.0)
    _, delta = extend_ir_homogeneous(T3, 2, 0.2)
    assert delta == pytest.approx(0.5 * 1.5 * 2.0, rel=1e-14)
    _, delta0 = extend_ir_homogeneous(builtin_distribution("inv_x"), 0, 0.2)
    assert delta0 == 0.0


def test_homogeneous_rejects_wrong_degree():
    with pytest.raises(InputError):
        extend_ir_homogeneous(builtin_distribution("inv_x"), 1, 0.1)


@pytest.mark.parametrize("mu_tilde", [0.1, 0.2])
def test_ir_pairing_with_srtf_is_plain_integral(mu_tilde):
    # the SRTF kills every jet at 0, so <T~, f> = <T, f>
    f = Srtf(SrtfParams(mu2=2.0, alpha=0.5))
    ref, _ = integrate.quad(lambda x: f(x) / x, 0, 4, points=[0.5, 1.0], epsabs=1e-13, limit=200)
    assert extend_ir(builtin_distribution("inv_x"), 0, mu_tilde).pair(f) == pytest.approx(ref, rel=1e-9)


def test_ir_pairing_regular_distribution():
    T = SingularDistribution(lambda x: np.exp(-np.asarray(x, dtype=float)), 1)
    phi = CompactBump(1.0, 3.0)
    ref, _ = integrate.quad(lambda x: math.exp(-x) * phi(x), 1, 3, epsabs=1e-14)
    assert extend_ir(T, 0, 0.1).pair(phi, support=(1, 3)) == pytest.approx(ref, abs=1e-12)


def test_ir_pairing_rejects_support_outside_patch():
    with pytest.raises(InputError):
        extend_ir(builtin_distribution("inv_x"), 0, 0.5).pair(CompactBump(1.0, 3.0))


def test_ir_coarse_lower_bound_needs_mu2():
    with pytest.raises(InputError):
        extend_ir(builtin_distribution("inv_x"), 0, 0.1, lower_bound="coarse")


@pytest.mark.parametrize("mu2", [1.5, 2.0, 3.0, 4.0])
def test_uv_extension_closed_form(mu2):
    T = builtin_distribution("euclid_prop_d4")
    s = SrtfParams(mu2=mu2, alpha=0.5, alpha_limit=True)
    closed = mu2 - 1 - math.log(mu2)
    assert extend_uv(T, 1, s).pair() == pytest.approx(closed, rel=1e-8)
    assert extend_uv_alt(T, 1, None, mu2).pair() == pytest.approx(closed, rel=1e-8)


def test_uv_and_alt_share_the_constant_pairing():
    # different functions of X, same <T~, 1>
    T = builtin_distribution("euclid_prop_d4")
    s = SrtfParams(mu2=3.0, alpha=0.5, alpha_limit=True)
    uv, alt = extend_uv(T, 1, s), extend_uv_alt(T, 1, None, 3.0)
    assert abs(uv.pair() - alt.pair()) < 1e-6
    assert not np.allclose(uv(np.array([0.5, 2.0])), alt(np.array([0.5, 2.0])))


def test_alt_d2_is_pauli_villars_difference():
    T = builtin_distribution("euclid_prop_d2")
    X = np.geomspace(1e-2, 1e2, 30)
    alt = extend_uv_alt(T, 0, None, 3.0)
    np.testing.assert_allclose(alt(X), 1 / (X + 1) - 1 / (X + 3), atol=1e-10)
    assert alt.pair() == pytest.approx(math.log(3.0), rel=1e-10)


def test_alt_mu2_one_vanishes():
    alt = extend_uv_alt(builtin_distribution("euclid_prop_d2"), 0, None, 1.0)
    assert alt(2.0) == 0.0


def test_uv_alpha_sequence_converges():
    T = builtin_distribution("euclid_prop_d4")
    X = np.array([0.1, 1.0, 10.0])
    limit = extend_uv(T, 1, SrtfParams(mu2=3.0, alpha=0.5, alpha_limit=True))(X)
    gaps = [np.max(np.abs(extend_uv(T, 1, SrtfParams(mu2=3.0, alpha=a))(X) - limit))
            for a in (0.9, 0.99, 0.999)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 3e-3


def test_uv_under_subtraction_raises():
    s = SrtfParams(mu2=2.0, alpha=0.5, alpha_limit=True)
    with pytest.raises(NonIntegrableError):
        extend_uv(builtin_distribution("euclid_prop_d4"), 0, s)


@given(st.floats(1.0, 50.0), st.integers(0, 4))
def test_uv_log_integral_matches_quadrature(tmax, k):
    ref = float(mpmath.quad(lambda t: (1 - t) ** k / t, [1, tmax]))
    assert uv_log_integral(tmax, k) == pytest.approx(ref, rel=1e-9, abs=1e-11)


def test_uv_log_integral_below_one_is_zero():
    np.testing.assert_array_equal(uv_log_integral(np.array([0.2, 1.0]), 2), [0.0, 0.0])


def _gauss(x):
    return np.exp(-np.asarray(x, dtype=float) ** 2 / 2)


@pytest.mark.parametrize("k, q, p", [(0, 0.0, 1.3), (1, 0.0, 0.7), (2, 0.4, 1.1), (1, 0.3, -0.8)])
def test_bphz_pointwise(k, q, p):
    lhs, rhs = bphz_correspondence(_gauss, None, k, q, p)
    assert abs(lhs - rhs) < 1e-5


def test_bphz_exact_gaussian():
    # F[e^{-x^2/2}] = e^{-p^2/2}, so the k = 0, q = 0 remainder is e^{-p^2/2} - 1
    lhs, _ = bphz_correspondence(_gauss, None, 0, 0.0, 1.3)
    assert lhs == pytest.approx(math.exp(-1.3 ** 2 / 2) - 1, abs=1e-10)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_bphz_vanishes_at_q(k):
    lhs, rhs = bphz_correspondence(_gauss, None, k, 0.5, 0.5)
    assert abs(lhs) < 1e-5 and abs(rhs) < 1e-5


def test_bphz_pairing_inv_x():
    f = Srtf(SrtfParams(mu2=4.0, alpha=0.5))
    lhs, rhs = bphz_correspondence(builtin_distribution("inv_x"), f, 0)
    assert lhs == pytest.approx(rhs, rel=1e-5)


def test_bphz_pairing_mode_rejects_other_k():
    f = Srtf(SrtfParams(mu2=4.0, alpha=0.5))
    with pytest.raises(InputError):
        bphz_correspondence(builtin_distribution("inv_x"), f, 1)


def test_builtin_unknown_name():
    with pytest.raises(InputError):
        builtin_distribution("nope")
    assert set(extend.BUILTINS) >= {"inv_x", "euclid_prop_d4"}

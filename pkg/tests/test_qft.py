import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pouext import qft
from pouext.errors import DegenerateDecompositionError, InputError
from pouext.testfunc import CONVOLUTION, PartitionParams, SrtfParams

FOUR_PI_SQ = (4 * math.pi) ** 2


def srtf(mu2, variant=None, **kw):
    if variant is None:
        return SrtfParams(mu2=mu2, alpha=0.5, **kw)
    return SrtfParams(mu2=mu2, alpha=0.5, partition=PartitionParams(h=min(mu2 - 1, 0.5), variant=variant), **kw)


@pytest.mark.parametrize("mu2", [1.5, 2.0, 4.0])
def test_delta0_euclid_d4(mu2):
    res = qft.delta0_euclid(4, 1.0, srtf(mu2))
    assert res.closed_form == pytest.approx((mu2 - 1 - math.log(mu2)) / FOUR_PI_SQ, rel=1e-15)
    assert res.rel_deviation < 1e-5


@pytest.mark.parametrize("mu2", [1.5, 2.0, 4.0])
def test_delta0_euclid_d2(mu2):
    res = qft.delta0_euclid(2, 1.0, srtf(mu2))
    assert abs(res.value - math.log(mu2) / (4 * math.pi)) < 1e-6


def test_delta0_mass_scaling():
    a = qft.delta0_euclid(4, 1.0, srtf(2.0)).value
    b = qft.delta0_euclid(4, 3.0, srtf(2.0)).value
    assert b == pytest.approx(9 * a, rel=1e-6)


def test_delta0_near_mu2_one_vanishes():
    assert abs(qft.delta0_euclid(4, 1.0, srtf(1.0 + 1e-6)).value) < 1e-12
    assert abs(qft.delta0_euclid(2, 1.0, srtf(1.0 + 1e-6)).value) < 1e-6


def test_delta0_increasing_in_mu2():
    vals = [qft.delta0_euclid(4, 1.0, srtf(m)).value for m in (1.2, 1.5, 2.0, 3.0, 5.0)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_delta0_rejects_bad_input():
    with pytest.raises(InputError):
        qft.delta0_euclid(3, 1.0, srtf(2.0))
    with pytest.raises(InputError):
        qft.delta0_euclid(4, 0.0, srtf(2.0))


@pytest.mark.parametrize("sign", [1, -1])
@pytest.mark.parametrize("p", [0.0, 0.3, 2.0])
def test_pv_lemma_limit(sign, p):
    pv, pole = qft.pv_lemma_minkowski(p, 1.0, srtf(2.0), sign, return_parts=True)
    assert pv == 0.0
    assert abs(pole - sign * 1j * math.pi) < 1e-6  # f = 1 on the plateau


def test_pv_lemma_beyond_support():
    # finite alpha: X_max = 4, and (omega^2 + p^2) = 51 lies outside
    pv, pole = qft.pv_lemma_minkowski(5.0, 1.0, srtf(2.0), 1, return_parts=True, alpha_limit=False)
    assert pv == 0.0 and pole == 0.0


def test_pv_lemma_finite_alpha_keeps_pv_part():
    pv, _ = qft.pv_lemma_minkowski(0.3, 1.0, srtf(2.0), 1, return_parts=True, alpha_limit=False)
    assert abs(pv) > 0.1


def test_pv_lemma_rejects_sign():
    with pytest.raises(InputError):
        qft.pv_lemma_minkowski(0.3, 1.0, srtf(2.0), 0)


@pytest.mark.parametrize("mu2", [1.5, 2.0, 4.0])
def test_minkowski_d2(mu2):
    res = qft.delta0_minkowski(2, 1.0, srtf(mu2))
    assert abs(res.value - (-2j * math.pi * math.log(mu2))) < 1e-6
    assert abs(res.value - res.metadata["pv_difference_form"]) < 1e-8


def test_minkowski_d4_prefactor():
    res = qft.delta0_minkowski(4, 1.0, srtf(2.0))
    euclid = qft.delta0_euclid(4, 1.0, srtf(2.0)).value
    assert abs(res.value / euclid - (-1j) * (2 * math.pi) ** 4) / (2 * math.pi) ** 4 < 1e-4
    assert qft.MINKOWSKI_D4_PREFACTOR(1.0) == -2j * math.pi ** 2


def test_pv_difference_tail_slope():
    # 1/(p^2+m^2) - 1/(p^2+m^2 mu^4): the O(p^-2) parts cancel
    mu2 = 2.0
    p = np.array([1e3, 1e4])
    g = 1 / (p ** 2 + 1) - 1 / (p ** 2 + mu2 ** 2)
    slope = np.diff(np.log(g)) / np.diff(np.log(p))
    assert slope[0] == pytest.approx(-4.0, abs=1e-3)


def test_pv_decomposition_single_regulator():
    m, L, p2 = 1.0, 2.0, 0.7
    lhs, rhs = qft.pv_decomposition(m, [L], p2)
    assert lhs == pytest.approx(1 / (p2 + 1) - 1 / (p2 + 4), rel=1e-14)
    assert rhs == pytest.approx(lhs, rel=1e-14)


def _exact_product(m, lams, p2):
    m2, p2 = Fraction(m) ** 2, Fraction(p2)
    out = 1 / (p2 + m2)
    for L in lams:
        out *= (Fraction(L) ** 2 - m2) / (p2 + Fraction(L) ** 2)
    return out


def test_pv_decomposition_random_points():
    rng = random.Random(20241)
    for _ in range(100):
        m = rng.uniform(0.5, 2.0)
        lams = sorted(rng.uniform(m + 0.5, 10.0) for _ in range(2))
        if lams[1] - lams[0] < 0.2:
            lams[1] += 0.2
        p2 = rng.uniform(0.0, 50.0)
        lhs, rhs = qft.pv_decomposition(m, lams, p2)
        exact = float(_exact_product(m, lams, p2))
        assert abs(lhs - exact) <= 1e-10 * abs(exact)
        assert abs(rhs - exact) <= 1e-10 * abs(exact)


def test_pv_decomposition_log_slope():
    p = np.array([1e3, 1e4])
    vals = np.array([qft.pv_decomposition(1.0, [2.0, 3.0], x * x)[0] for x in p])
    slope = np.diff(np.log(vals)) / np.diff(np.log(p))
    assert slope[0] == pytest.approx(-6.0, abs=0.05)


def test_pv_decomposition_degenerate():
    with pytest.raises(DegenerateDecompositionError):
        qft.pv_decomposition(1.0, [2.0, 2.0], 1.0)
    with pytest.raises(InputError):
        qft.pv_decomposition(1.0, [], 1.0)


def test_pv_confluent_bracket():
    lhs, rhs = qft.pv_decomposition(1.0, [1.0, 1.0], 3.0)
    assert lhs == pytest.approx(rhs, rel=1e-12)


@given(st.floats(0.0, 1e3), st.floats(0.6, 2.0), st.floats(2.5, 4.0), st.floats(4.5, 8.0))
def test_pv_bracket_equals_rational(X, m, L1, L2):
    assert qft.pv_bracket(X, m, L1, L2) == pytest.approx(qft.pv_rational(X, m, L1, L2), rel=1e-9)


def test_one_loop_zero_momentum():
    res = qft.one_loop_I(0.0, 1.0, srtf(2.0))
    assert abs(res.value - math.log(2.0) / FOUR_PI_SQ) < 1e-6


@pytest.mark.parametrize("k2", [0.5, 1.0, 10.0])
def test_one_loop_closed_form(k2):
    assert qft.one_loop_I(k2, 1.0, srtf(2.0)).rel_deviation < 1e-5


def test_one_loop_closed_form_against_feynman_integral():
    from scipy import integrate
    for c in (0.5, 3.0):
        x_int, _ = integrate.quad(lambda x: math.log(c * x * (1 - x) + 1), 0, 1, epsabs=1e-14)
        assert qft.one_loop_closed_form(c, 1.0, 2.0) == pytest.approx((math.log(2.0) - x_int) / FOUR_PI_SQ,
                                                                      rel=1e-12)


def test_one_loop_large_k2_slope():
    a, b = (qft.one_loop_closed_form(k2, 1.0, 2.0) for k2 in (1e8, 1e9))
    assert (b - a) / math.log(10.0) == pytest.approx(-1 / FOUR_PI_SQ, rel=1e-6)


def test_one_loop_rejects_negative_k2():
    with pytest.raises(InputError):
        qft.one_loop_I(-1.0, 1.0, srtf(2.0))


def test_schwinger_matches_delta0():
    s = srtf(2.0)
    res = qft.schwinger_delta0(1.0, s)
    assert abs(res.value - qft.delta0_euclid(4, 1.0, s).value) < 1e-4
    assert res.rel_deviation < 1e-6


def test_schwinger_integrand_bounded_near_u_zero():
    u = np.geomspace(1e-12, 1.0, 50)
    vals = qft.schwinger_integrand(1.0, u, 1.5, 2.0)
    assert np.all(np.isfinite(vals)) and np.max(vals) < 1.0


def test_sunset_increasing_as_cutoff_shrinks():
    s = srtf(2.0)
    vals = [qft.sunset_qualitative(1.0, s, c).value for c in (1e-2, 1e-3, 1e-4)]
    assert all(np.isfinite(vals))
    assert vals[0] < vals[1] < vals[2]


def test_sunset_empty_domain():
    assert qft.sunset_qualitative(1.0, srtf(2.0), cutoff=50.0).value == 0.0
    assert qft.sunset_mass_slope(1.0, srtf(2.0), cutoff=50.0).value == 0.0


def test_sunset_mass_slope_is_derivative():
    c, h = 1 / 16, 1e-3

    def value(m):
        return qft.sunset_qualitative(m, srtf(16.0), cutoff=c, upper=40.0, rel_tol=1e-7).value

    fd = -(value(math.sqrt(1 + h)) - value(math.sqrt(1 - h))) / (2 * h)
    assert qft.sunset_mass_slope(1.0, srtf(16.0), rel_tol=1e-7).value == pytest.approx(fd, rel=1e-6)


def _r2(y, cols):
    A = np.vstack(cols).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return 1 - np.sum((y - A @ coef) ** 2) / np.sum((y - y.mean()) ** 2)


def test_sunset_log_squared_growth():
    mus = np.geomspace(2.0, 256.0, 12)
    L = np.log(mus)
    slope = np.array([qft.sunset_mass_slope(1.0, srtf(m)).value for m in mus])
    assert _r2(slope, [L ** 2, L, np.ones_like(L)]) > 0.99
    # a single log does not describe it
    assert _r2(slope, [L, np.ones_like(L)]) < 0.95


def test_rg_universality_across_variants():
    for mu2 in (1.5, 2.0, 4.0):
        a = qft.delta0_euclid(4, 1.0, srtf(mu2)).value
        b = qft.delta0_euclid(4, 1.0, srtf(mu2, CONVOLUTION)).value
        assert abs(a - b) <= 2e-5 * abs(a)
    a = qft.one_loop_I(1.0, 1.0, srtf(2.0)).value
    b = qft.one_loop_I(1.0, 1.0, srtf(2.0, CONVOLUTION)).value
    assert abs(a - b) <= 2e-5 * abs(a)


def test_result_to_dict_encodes_complex():
    d = qft.delta0_minkowski(2, 1.0, srtf(2.0)).to_dict()
    assert set(d["value"]) == {"re", "im"}

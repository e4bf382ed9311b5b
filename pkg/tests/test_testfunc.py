import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pouext.errors import InputError
from pouext.quadrature import differentiate, integrate_1d
from pouext.testfunc import (
    CONVOLUTION,
    NU_INTEGRAL,
    BumpStep,
    CompactBump,
    PartitionParams,
    Srtf,
    SrtfParams,
    complement_sum,
    elementary_u,
    fourier_gamma_j,
    mollifier_cdf,
    mollifier_rho,
    partition_sum,
    srtf_derivatives,
    srtf_f,
    t_max,
)

MOLLIFIER_NORM = 0.443993816168079437823048921171
# mpmath (20 digits) straight from the step-integral definition, nu = 1, h = 1
GAMMA_PI_NU = 0.57878244873754005

VARIANTS = [NU_INTEGRAL, CONVOLUTION]


class TestMollifier:
    def test_vanishes_at_edges(self):
        assert mollifier_rho(1.0) == 0.0 and mollifier_rho(-1.0) == 0.0

    def test_centre_value(self):
        assert mollifier_rho(0.0) == pytest.approx(math.exp(-1) / MOLLIFIER_NORM, rel=1e-12)

    def test_unit_mass(self):
        est = integrate_1d(mollifier_rho, -1.0, 1.0)
        assert est.value == pytest.approx(1.0, abs=1e-12)

    def test_cdf_matches_integral(self):
        est = integrate_1d(mollifier_rho, -1.0, 0.3)
        assert mollifier_cdf(0.3) == pytest.approx(est.value, abs=1e-12)


class TestBumpStep:
    def test_step_endpoints_and_symmetry(self):
        S = BumpStep()
        assert S(0.0) == 1.0 and S(1.0) == 0.0
        s = np.linspace(0, 1, 101)
        assert np.max(np.abs(S(s) + S(1 - s) - 1)) < 1e-15

    def test_rejects_nonpositive_constants(self):
        with pytest.raises(InputError):
            BumpStep(c=0.0)


class TestElementaryU:
    @pytest.mark.parametrize("variant", VARIANTS)
    def test_rising_edge_midpoint(self, variant):
        p = PartitionParams(h=1.0, variant=variant)
        mid = -0.5 if variant == NU_INTEGRAL else 0.0
        assert elementary_u(mid, p) == pytest.approx(0.5, abs=1e-14)

    @pytest.mark.parametrize("variant", VARIANTS)
    def test_outer_edge_flat(self, variant):
        p = PartitionParams(h=1.0, variant=variant)
        lo, hi = p.support
        assert elementary_u(hi, p) == 0.0 and elementary_u(lo, p) == 0.0
        for n in range(1, 5):
            d = differentiate(lambda x: elementary_u(x, p), hi - 1e-3, n, upper=hi)
            assert abs(d) < 1e-6

    @pytest.mark.parametrize("variant", VARIANTS)
    def test_complement_identity(self, variant):
        p = PartitionParams(h=0.7, variant=variant, j=2)
        x = np.linspace(2 * 0.7, 3 * 0.7, 100)
        assert np.max(np.abs(complement_sum(x, p) - 1.0)) < 1e-12

    def test_convolution_eps_bounds(self):
        with pytest.raises(InputError):
            PartitionParams(h=1.0, variant=CONVOLUTION, eps=0.6)


class TestPartitionSum:
    @pytest.mark.parametrize("variant", VARIANTS)
    def test_covered_region(self, variant):
        p = PartitionParams(h=0.5, variant=variant)
        x = np.linspace(-1.0, 3.0, 1000)
        assert np.max(np.abs(partition_sum(x, p, (-6, 10)) - 1.0)) < 1e-12

    @pytest.mark.parametrize("variant", VARIANTS)
    @pytest.mark.parametrize("n", [2, 3])
    def test_powers(self, variant, n):
        p = PartitionParams(h=1.0, variant=variant)
        x = np.linspace(-2.0, 5.0, 1000)
        assert np.max(np.abs(partition_sum(x, p, range(-5, 8)) ** n - 1.0)) < 1e-12

    def test_truncated_cover(self):
        p = PartitionParams(h=1.0)
        assert partition_sum(2.5, p, (0, 2)) < 1.0

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.1, 3.0), st.floats(-5.0, 5.0), st.sampled_from(VARIANTS))
    def test_partition_property(self, h, x, variant):
        p = PartitionParams(h=h, variant=variant)
        j0 = math.floor(x / h)
        assert abs(partition_sum(x, p, (j0 - 3, j0 + 3)) - 1.0) < 1e-12


class TestSrtf:
    def test_plateau(self):
        s = SrtfParams(mu2=2.0, alpha=0.5)
        assert np.all(srtf_f(np.linspace(0.51, 1.0, 20), s) == 1.0)

    def test_zero_beyond_x_max(self):
        s = SrtfParams(mu2=2.0, alpha=0.5)
        assert s.x_max == pytest.approx(4.0)
        assert srtf_f(4.0, s) == 0.0 and srtf_f(7.0, s) == 0.0

    def test_roll_off_monotone(self):
        s = SrtfParams(mu2=1.15, alpha=0.95)
        X = np.linspace(1.0, s.x_max, 1000)
        vals = srtf_f(X, s)
        assert np.all(np.diff(vals) <= 1e-15)
        half = srtf_f(0.5 * (1 + s.x_max), s)
        assert 0.0 < half < 1.0

    def test_alpha_limit_flat_tail(self):
        s = SrtfParams(mu2=2.0, alpha_limit=True)
        assert s.x_max == math.inf and srtf_f(1e6, s) == 1.0

    def test_negative_rejected(self):
        with pytest.raises(InputError):
            srtf_f(-0.1, SrtfParams())

    @pytest.mark.parametrize("variant", VARIANTS)
    def test_super_regular_at_edges(self, variant):
        part = PartitionParams(h=0.5, variant=variant)
        s = SrtfParams(mu2=2.0, alpha=0.5, partition=part)
        d0 = srtf_derivatives(np.array([1e-6, s.x_max - 1e-6, s.x_max]), s, 4)
        assert np.max(np.abs(d0)) < 1e-12

    def test_jets_match_finite_differences(self):
        f = Srtf(SrtfParams(mu2=2.0, alpha=0.5))
        for X in (0.3, 1.7, 3.2):
            for n in (1, 2):
                assert f.derivative(X, n) == pytest.approx(differentiate(f, X, n, lower=0.0), rel=1e-6, abs=1e-8)

    def test_mu2_must_exceed_one(self):
        with pytest.raises(InputError):
            SrtfParams(mu2=1.0)


class TestTMax:
    def test_at_one(self):
        assert t_max(1.0, SrtfParams(mu2=3.0)) == pytest.approx(3.0)

    def test_at_x_max(self):
        s = SrtfParams(mu2=3.0, alpha=0.5)
        assert t_max(s.x_max, s) == pytest.approx(1.0)

    def test_alpha_limit(self):
        s = SrtfParams(mu2=3.0, alpha_limit=True)
        assert np.all(t_max(np.array([0.1, 5.0, 1e4]), s) == 3.0)

    def test_alpha_sequence_approaches_limit(self):
        # t_max(X) = mu2 X^(alpha-1) -> mu2 linearly in (1 - alpha)
        X, mu2 = 5.0, 2.0
        gaps = [abs(t_max(X, SrtfParams(mu2=mu2, alpha=a)) - mu2) for a in (0.9, 0.99, 0.999)]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[1] / gaps[2] == pytest.approx(10.0, rel=0.02)


class TestFourierGamma:
    @pytest.mark.parametrize("variant", VARIANTS)
    def test_zero_frequency(self, variant):
        p = PartitionParams(h=0.8, variant=variant)
        assert fourier_gamma_j(0.0, 3, p) == pytest.approx(0.8, abs=1e-12)

    @pytest.mark.parametrize("variant", VARIANTS)
    @pytest.mark.parametrize("n", [1, 2])
    def test_harmonic_zeros(self, variant, n):
        p = PartitionParams(h=0.8, variant=variant)
        assert abs(fourier_gamma_j(2 * math.pi * n / 0.8, 1, p)) < 1e-12

    def test_half_frequency_regression(self):
        val = fourier_gamma_j(math.pi, 0, PartitionParams(h=1.0))
        assert val.real == pytest.approx(GAMMA_PI_NU, abs=1e-12)
        assert abs(val.imag) < 1e-14

    def test_convolution_half_frequency_nonzero(self):
        val = fourier_gamma_j(math.pi, 0, PartitionParams(h=1.0, variant=CONVOLUTION))
        # the cell is symmetric about h/2, so the shifted transform is real
        shifted = val * np.exp(1j * math.pi * 0.5)
        assert abs(shifted.imag) < 1e-12 and abs(val) > 0.1


class TestCompactBump:
    def test_support_and_derivatives(self):
        b = CompactBump(0.2, 0.6)
        assert b(0.2) == 0.0 and b(0.6) == 0.0 and b(0.4) > 0
        assert b.derivative(0.4, 1) == pytest.approx(0.0, abs=1e-12)

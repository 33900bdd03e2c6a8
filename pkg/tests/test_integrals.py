import math

import numpy as np
import pytest
from scipy import special, stats

from mgcp import integrals
from mgcp.gcp_core import MultiTime, RateMatrix
from mgcp.integrals import IntegralSpec
from mgcp.samplers import RngStream
from utils.error_handler import ContractViolationError, DomainError, ShapeError


def within_band(sample, target, band=4.0):
    sample = np.asarray(sample, dtype=float)
    return abs(sample.mean() - target) <= band * sample.std(ddof=1) / math.sqrt(sample.size)


class TestSpec:
    def test_riemann(self):
        spec = IntegralSpec.riemann([1.0, 2.0], nodes=50)
        assert spec.is_riemann
        assert spec.d == 2
        assert spec.quadrature_nodes == 50

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            IntegralSpec(orders=(1.0,), t=(1.0, 2.0))

    def test_non_positive_order(self):
        with pytest.raises(DomainError):
            IntegralSpec(orders=(0.0,), t=(1.0,))


class TestMoments:
    def test_riemann_single_axis(self):
        rates = RateMatrix.from_array([[2.0]])
        spec = IntegralSpec.riemann([3.0])
        assert integrals.integral_mean(rates, spec) == pytest.approx(9.0)
        assert integrals.integral_variance(rates, spec) == pytest.approx(18.0)

    def test_gaussian_params_match_riemann_moments(self, rates):
        t = MultiTime(t=(0.3, 0.6))
        m, v = integrals.gaussian_asymptotic_params(rates, t)
        spec = IntegralSpec.riemann(t.t)
        assert m == pytest.approx(integrals.integral_mean(rates, spec), rel=1e-14)
        assert v == pytest.approx(integrals.integral_variance(rates, spec), rel=1e-14)

    def test_riemann_liouville_single_axis(self):
        rates = RateMatrix.from_array([[1.0]])
        spec = IntegralSpec(orders=(0.5,), t=(2.0,))
        expected = 2.0 ** 1.5 / special.gamma(2.5)
        assert integrals.integral_mean(rates, spec) == pytest.approx(expected, rel=1e-14)

    def test_dimension_check(self, rates):
        with pytest.raises(ShapeError):
            integrals.integral_mean(rates, IntegralSpec.riemann([1.0]))


class TestWeights:
    @pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0, 1.7])
    def test_weights_integrate_linear_functions(self, alpha):
        t = 1.7
        mesh, weights = integrals.rl_weights(t, alpha, 200)
        assert mesh[0] == 0.0 and mesh[-1] == t
        assert weights.sum() == pytest.approx(t ** alpha / special.gamma(alpha + 1.0), rel=1e-12)
        assert weights @ mesh == pytest.approx(t ** (alpha + 1.0) / special.gamma(alpha + 2.0), rel=1e-12)

    def test_invalid_rule(self):
        with pytest.raises(DomainError):
            integrals.rl_weights(1.0, -0.5, 10)


class TestSamplers:
    def test_compound_needs_riemann(self, rates, rng):
        with pytest.raises(ContractViolationError):
            integrals.integral_sample_compound(rates, (1.0, 1.0), rng, 10, orders=(0.5, 1.0))

    def test_compound_moments(self, rates, rng):
        t = (0.8, 0.5)
        draws = integrals.integral_sample_compound(rates, t, rng, 20_000)
        assert within_band(draws, integrals.integral_mean(rates, IntegralSpec.riemann(t)))

    def test_scalar_draw(self, rates, rng):
        assert isinstance(integrals.integral_sample_compound(rates, (0.5, 0.5), rng), float)

    def test_quadrature_riemann_liouville_mean(self, rng):
        rates = RateMatrix.from_array([[1.0, 0.5], [0.5, 0.2]])
        spec = IntegralSpec(orders=(0.5, 0.8), t=(1.0, 1.2), quadrature_nodes=500)
        draws = integrals.integral_sample_quadrature(rates, spec, rng, 20_000)
        assert within_band(draws, integrals.integral_mean(rates, spec))

    @pytest.mark.slow
    def test_compound_and_quadrature_agree_in_law(self, rates):
        t = (0.7, 0.9)
        compound = integrals.integral_sample_compound(rates, t, RngStream(1), 50_000)
        quadrature = integrals.integral_sample_quadrature(rates, IntegralSpec.riemann(t), RngStream(2), 50_000)
        assert stats.ks_2samp(compound, quadrature).pvalue > 1e-3


class TestGaussianLimit:
    def test_remainder_bound_vanishes_at_zero(self, rates):
        assert integrals.gaussian_cf_remainder_bound(rates, (0.1, 0.1), 0.0) == 0.0

    def test_degenerate_gap(self):
        assert integrals.empirical_cf_gap(np.full(10, 2.0), 2.0, 0.0, 1.3) == pytest.approx(0.0, abs=1e-15)

    def test_small_t_characteristic_function(self, rates, rng):
        t = MultiTime.diagonal(0.1, 2)
        m, v = integrals.gaussian_asymptotic_params(rates, t)
        draws = integrals.integral_sample_compound(rates, t, rng, 40_000)
        eta = 1.0 / (rates.k * 0.01)
        gap = integrals.empirical_cf_gap(draws, m, v, eta)
        assert gap <= 4.0 / math.sqrt(draws.size) + integrals.gaussian_cf_remainder_bound(rates, t, eta)

import math

import numpy as np
import pytest
from scipy import special, stats

from mgcp import gcp_core, samplers
from mgcp.fractional_variants import FractionalOrders, VariantKind
from mgcp.gcp_core import MultiTime, RateMatrix
from mgcp.samplers import RngStream, SamplePath
from utils.error_handler import ContractViolationError, DomainError


def within_band(sample, target, band=4.0):
    sample = np.asarray(sample, dtype=float)
    return abs(sample.mean() - target) <= band * sample.std(ddof=1) / math.sqrt(sample.size)


class TestRngStream:
    def test_same_seed_same_draws(self):
        a = RngStream(7, 3).uniform(size=5)
        b = RngStream(7, 3).uniform(size=5)
        np.testing.assert_array_equal(a, b)

    def test_stream_ids_differ(self):
        a = RngStream(7, 0).uniform(size=5)
        b = RngStream(7).spawn(1).uniform(size=5)
        assert not np.array_equal(a, b)

    def test_negative_seed(self):
        with pytest.raises(DomainError):
            RngStream(-1)


class TestPoisson:
    def test_zero_mean(self, rng):
        assert samplers.sample_poisson(0.0, rng) == 0
        assert samplers.sample_poisson(0.0, rng, 4).tolist() == [0, 0, 0, 0]

    def test_negative_mean(self, rng):
        with pytest.raises(DomainError):
            samplers.sample_poisson(-1.0, rng)

    @pytest.mark.parametrize("mean", [0.3, 4.0, 45.0])
    def test_moments(self, rng, mean):
        draws = samplers.sample_poisson(mean, rng, 20_000)
        assert draws.dtype.kind == "i"
        assert within_band(draws, mean)

    def test_inversion_law(self, rng):
        draws = samplers.sample_poisson(2.5, rng, 20_000)
        observed = np.bincount(np.minimum(draws, 8), minlength=9)
        probs = stats.poisson.pmf(np.arange(8), 2.5)
        expected = np.append(probs, 1.0 - probs.sum()) * draws.size
        assert stats.chisquare(observed, expected).pvalue > 1e-3

    def test_astronomical_means_saturate(self, rng):
        draws = samplers.sample_poisson(np.array([1e16, 1e19, 1e30]), rng)
        assert draws.dtype == np.int64
        assert draws.min() >= 0
        assert draws[1] == draws[2] > 9e18


class TestMgcp:
    def test_scalar_draw(self, rates, point, rng):
        assert isinstance(samplers.sample_mgcp(rates, point, rng), int)

    def test_moments(self, rates, point, rng):
        draws = samplers.sample_mgcp(rates, point, rng, 20_000)
        assert within_band(draws, gcp_core.mean(rates, point))

    def test_paths_are_non_decreasing(self, rates, rng):
        grid = [MultiTime.diagonal(s, 2) for s in (0.2, 0.4, 0.9)]
        paths = samplers.sample_mgcp_paths(rates, grid, rng, 50)
        assert paths.shape == (50, 3)
        assert np.all(np.diff(paths, axis=1) >= 0)

    def test_single_path(self, rates, rng):
        path = samplers.sample_mgcp_path(rates, [(0.1, 0.1), (0.1, 0.5)], rng)
        assert isinstance(path, SamplePath)
        assert path.values.shape == (2,)

    def test_grid_must_increase(self, rates, rng):
        with pytest.raises(ContractViolationError):
            samplers.sample_mgcp_paths(rates, [(0.5, 0.5), (0.6, 0.4)], rng, 3)

    def test_sample_path_monotone(self):
        with pytest.raises(ContractViolationError):
            SamplePath(np.array([[0.1], [0.2]]), np.array([3, 2]))


class TestSubordinators:
    def test_index_domain(self, rng):
        with pytest.raises(DomainError):
            samplers.sample_stable(1.0, 1.0, rng)

    @pytest.mark.slow
    @pytest.mark.parametrize("w", [0.5, 1.0, 2.0])
    def test_stable_laplace_transform(self, rng, w):
        draws = samplers.sample_stable(0.6, 1.0, rng, 200_000)
        assert within_band(np.exp(-w * draws), math.exp(-w ** 0.6))

    def test_levy_median(self, rng):
        draws = samplers.sample_stable(0.5, 1.0, rng, 40_000)
        median = stats.levy(scale=0.5).median()
        hits = np.count_nonzero(draws <= median)
        assert abs(hits / draws.size - 0.5) <= 4.0 * math.sqrt(0.25 / draws.size)

    def test_stable_scaling(self):
        unit = samplers.sample_stable(0.7, 1.0, RngStream(3), 10)
        scaled = samplers.sample_stable(0.7, 2.0, RngStream(3), 10)
        np.testing.assert_allclose(scaled, 2.0 ** (1.0 / 0.7) * unit)

    def test_stable_path(self, rng):
        path = samplers.sample_stable_path(0.5, [0.5, 1.0, 1.0, 2.0], rng, 20)
        assert path.shape == (20, 4)
        assert np.all(np.diff(path, axis=1) >= 0)

    def test_inverse_stable_mean(self, rng):
        draws = samplers.sample_inverse_stable(0.7, 2.0, rng, 40_000)
        assert within_band(draws, 2.0 ** 0.7 / special.gamma(1.7))


class TestVariants:
    def test_time_variant_moments(self, rates, point, orders, rng):
        from mgcp.fractional_variants import time_frac_mean

        draws = samplers.sample_variant(rates, point, orders, "time", rng, 20_000)
        assert within_band(draws, time_frac_mean(rates, point, orders))

    def test_identity_orders_give_base_law(self, rates, point, rng):
        ones = FractionalOrders.uniform(1.0, 2)
        draws = samplers.sample_variant(rates, point, ones, VariantKind.SPACE_MULTIPARAMETER, rng, 20_000)
        assert within_band(draws, gcp_core.mean(rates, point))

    def test_multivariate_takes_scalar_time(self, rates, orders, rng):
        value = samplers.sample_variant(rates, 0.5, orders, VariantKind.TIME_MULTIVARIATE, rng)
        assert isinstance(value, int)

    @pytest.mark.parametrize("kind", list(VariantKind))
    def test_variant_paths_are_non_decreasing(self, rates, orders, rng, kind):
        grid = [MultiTime.diagonal(s, 2) for s in (0.25, 0.5, 1.0)]
        paths = samplers.sample_variant_paths(rates, grid, orders, kind, rng, 30)
        assert paths.shape == (30, 3)
        assert np.all(np.diff(paths, axis=1) >= 0)

    def test_space_zero_class(self, rates, point, orders, rng):
        draws = samplers.sample_variant(rates, point, orders, "space", rng, 40_000)
        target = math.exp(-float(np.sum(point.array * rates.column_sums ** orders.array)))
        freq = np.count_nonzero(draws == 0) / draws.size
        assert abs(freq - target) <= 4.0 * math.sqrt(target * (1 - target) / draws.size)

    def test_small_index_space_counts_stay_non_negative(self, rng):
        rates = RateMatrix.from_array([[1.0, 2.0]])
        orders = FractionalOrders.uniform(0.15, 2)
        draws = samplers.sample_variant(rates, (1.0, 1.0), orders, "space", rng, 100_000)
        assert draws.dtype.kind == "i"
        assert draws.min() >= 0

    def test_small_index_space_paths_stay_ordered(self, rates, rng):
        grid = [MultiTime.diagonal(s, 2) for s in (0.5, 1.0, 2.0)]
        orders = FractionalOrders.uniform(0.15, 2)
        paths = samplers.sample_variant_paths(rates, grid, orders, "space", rng, 20_000)
        assert paths.min() >= 0
        assert np.all(np.diff(paths, axis=1) >= 0)

    def test_zero_column_base_sampler(self, rng):
        rates = RateMatrix.from_array([[1.0, 0.0]])
        assert samplers.sample_mgcp(rates, (1.0, 5.0), rng, 10).shape == (10,)

import math

import numpy as np
import pytest
from scipy import special

from mgcp import fractional_variants as fv
from mgcp import gcp_core
from mgcp.fractional_variants import FractionalOrders, VariantKind
from mgcp.gcp_core import MultiTime, RateMatrix
from mgcp.special_functions import mittag_leffler
from utils.error_handler import DomainError, ShapeError


@pytest.fixture
def ones():
    return FractionalOrders.uniform(1.0, 2)


class TestTypes:
    def test_orders_domain(self):
        with pytest.raises(DomainError):
            FractionalOrders(alpha=(0.5, 1.5))
        with pytest.raises(DomainError):
            FractionalOrders(alpha=(0.0,))

    @pytest.mark.parametrize("tag,kind", [
        ("base", VariantKind.BASE),
        ("space", VariantKind.SPACE_MULTIPARAMETER),
        ("space-mv", VariantKind.SPACE_MULTIVARIATE),
        ("time", VariantKind.TIME_MULTIPARAMETER),
        ("time_multivariate", VariantKind.TIME_MULTIVARIATE),
    ])
    def test_variant_parse(self, tag, kind):
        assert VariantKind.parse(tag) is kind

    def test_unknown_variant(self):
        with pytest.raises(DomainError):
            VariantKind.parse("levy")

    def test_orders_must_match_d(self, rates, point):
        with pytest.raises(ShapeError):
            fv.time_frac_pmf(rates, point, FractionalOrders(alpha=(0.5,)), 0)


class TestReductions:
    def test_space_pmf_identity_time_change(self, rates, point, ones):
        for n in range(13):
            expected = gcp_core.pmf_direct(rates, point, n)
            assert abs(fv.space_frac_pmf(rates, point, ones, n).value - expected) < 1e-9

    def test_time_pmf_identity_time_change(self, rates, point, ones):
        for n in range(13):
            expected = gcp_core.pmf_direct(rates, point, n)
            assert abs(fv.time_frac_pmf(rates, point, ones, n) - expected) < 1e-9

    @pytest.mark.parametrize("u", [-1.0, -0.5, 0.0, 0.5, 0.9])
    def test_pgf_identity_time_change(self, rates, point, ones, u):
        base = gcp_core.pgf(rates, point, u)
        assert fv.space_frac_pgf(rates, point, ones, u) == pytest.approx(base, abs=1e-12)
        assert fv.time_frac_pgf(rates, point, ones, u) == pytest.approx(base, abs=1e-10)

    def test_time_moments_identity_time_change(self, rates, point, ones):
        assert fv.time_frac_mean(rates, point, ones) == pytest.approx(gcp_core.mean(rates, point), rel=1e-12)
        assert fv.time_frac_variance(rates, point, ones) == pytest.approx(gcp_core.variance(rates, point), rel=1e-12)


class TestSpaceFractional:
    def test_zero_class(self, rates, point, orders):
        expected = math.exp(-float(np.sum(point.array * rates.column_sums ** orders.array)))
        result = fv.space_frac_pmf(rates, point, orders, 0)
        assert result.value == pytest.approx(expected, rel=1e-10)
        assert result.tail_bound < 1e-12

    def test_pgf_matches_pmf_series(self, rates, point, orders):
        probs = fv.space_frac_pmf_table(rates, point, orders, 30).probs
        for u in (0.0, 0.5):
            series = math.fsum(probs * u ** np.arange(31))
            assert series == pytest.approx(fv.space_frac_pgf(rates, point, orders, u), abs=1e-7)

    def test_table_entries_are_probabilities(self, rates, point, orders):
        table = fv.space_frac_pmf_table(rates, point, orders, 15)
        assert np.all(table.probs >= 0)
        assert table.mass_accounted <= 1.0 + 1e-9

    def test_multivariate_is_diagonal_point(self, rates, orders):
        diagonal = MultiTime.diagonal(0.6, 2)
        assert fv.space_frac_pmf_multivariate(rates, 0.6, orders, 3) == fv.space_frac_pmf(rates, diagonal, orders, 3)
        assert fv.space_frac_pgf_multivariate(rates, 0.6, orders, 0.3) == fv.space_frac_pgf(
            rates, diagonal, orders, 0.3)

    def test_multivariate_rejects_vector_time(self, rates, orders):
        with pytest.raises(ShapeError):
            fv.space_frac_pmf_multivariate(rates, [0.5, 0.5], orders, 0)

    def test_laplace_transform(self, rates, orders):
        assert fv.space_frac_laplace_multivariate(rates, 0.4, orders, 0.0) == 1.0
        eta = 0.7
        expected = fv.space_frac_pgf_multivariate(rates, 0.4, orders, math.exp(-eta))
        assert fv.space_frac_laplace_multivariate(rates, 0.4, orders, eta) == expected
        with pytest.raises(DomainError):
            fv.space_frac_laplace_multivariate(rates, 0.4, orders, -1.0)

    def test_zero_column_is_rejected(self, orders):
        rates = RateMatrix.from_array([[1.0, 0.0]])
        with pytest.raises(DomainError):
            fv.space_frac_pmf(rates, (0.5, 0.5), orders, 0)


class TestTimeFractional:
    def test_summation_orders_agree(self, rates, point, orders):
        for n in range(13):
            omega = fv.time_frac_pmf(rates, point, orders, n, "omega")
            theta = fv.time_frac_pmf(rates, point, orders, n, "theta")
            assert abs(omega - theta) < 1e-10

    def test_unknown_summation_order(self, rates, point, orders):
        with pytest.raises(DomainError):
            fv.time_frac_pmf(rates, point, orders, 2, "lexicographic")

    def test_zero_class_is_product_of_mittag_leffler(self, rates, point, orders):
        expected = math.prod(
            mittag_leffler(a, -(t ** a) * mu)
            for a, t, mu in zip(orders.alpha, point.t, rates.column_sums)
        )
        assert fv.time_frac_pmf(rates, point, orders, 0) == pytest.approx(expected, rel=1e-12)

    def test_table_matches_pointwise(self, rates, point, orders):
        table = fv.time_frac_pmf_table(rates, point, orders, 8).probs
        pointwise = [fv.time_frac_pmf(rates, point, orders, n) for n in range(9)]
        np.testing.assert_allclose(table, pointwise, atol=1e-12)

    def test_pgf_matches_pmf_series(self, rates, point, orders):
        probs = fv.time_frac_pmf_table(rates, point, orders, 30).probs
        series = math.fsum(probs * 0.5 ** np.arange(31))
        assert series == pytest.approx(fv.time_frac_pgf(rates, point, orders, 0.5), abs=1e-7)

    def test_factorial_moments(self, rates, point, orders):
        m = fv.time_frac_mean(rates, point, orders)
        v = fv.time_frac_variance(rates, point, orders)
        assert fv.time_frac_factorial_moment(rates, point, orders, 0) == 1.0
        assert fv.time_frac_factorial_moment(rates, point, orders, 1) == pytest.approx(m, rel=1e-12)
        assert fv.time_frac_factorial_moment(rates, point, orders, 2) == pytest.approx(v + m * m - m, rel=1e-10)

    def test_mean_single_axis(self):
        rates = RateMatrix.from_array([[2.0]])
        orders = FractionalOrders.uniform(0.5, 1)
        assert fv.time_frac_mean(rates, 4.0, orders) == pytest.approx(2.0 * 2.0 / special.gamma(1.5))

    def test_overdispersion(self, rates, point, orders):
        assert fv.time_frac_variance(rates, point, orders) > fv.time_frac_mean(rates, point, orders)

    def test_multivariate_wrappers(self, rates, orders):
        diagonal = MultiTime.diagonal(0.8, 2)
        assert fv.time_frac_multivariate_pmf(rates, 0.8, orders, 2) == fv.time_frac_pmf(rates, diagonal, orders, 2)
        assert fv.time_frac_multivariate_pgf(rates, 0.8, orders, 0.2) == fv.time_frac_pgf(rates, diagonal, orders, 0.2)
        assert fv.time_frac_multivariate_mean(rates, 0.8, orders) == fv.time_frac_mean(rates, diagonal, orders)
        assert fv.time_frac_multivariate_variance(rates, 0.8, orders) == fv.time_frac_variance(
            rates, diagonal, orders)


class TestDispatch:
    def test_variant_time_shapes(self):
        assert fv.variant_time(VariantKind.TIME_MULTIVARIATE, 0.5, 3).t == (0.5, 0.5, 0.5)
        assert fv.variant_time(VariantKind.BASE, [0.1, 0.2], 2).t == (0.1, 0.2)

    def test_base_table(self, rates, point, orders):
        table = fv.variant_pmf_table(rates, point, orders, VariantKind.BASE, 10)
        np.testing.assert_array_equal(table.probs, gcp_core.pmf_convolution(rates, point, 10).probs)
        assert fv.variant_pgf(rates, point, orders, VariantKind.BASE, 0.3) == gcp_core.pgf(rates, point, 0.3)


class TestCaputo:
    def test_linear_function(self):
        assert fv.caputo_derivative(lambda s: s, 0.5, 1.0) == pytest.approx(1.0 / special.gamma(1.5), abs=1e-10)

    def test_constant_function(self):
        assert fv.caputo_derivative(lambda s: 3.0, 0.3, 2.0) == 0.0

    def test_quadratic_function(self):
        exact = 2.0 / special.gamma(2.5)
        assert fv.caputo_derivative(lambda s: s * s, 0.5, 1.0) == pytest.approx(exact, abs=1e-4)

    def test_order_one_is_derivative(self):
        assert fv.caputo_derivative(lambda s: s * s, 1.0, 1.0) == pytest.approx(2.0, abs=1e-6)
        assert fv.caputo_derivative(lambda s: s * s, 1.0, 0.0) == pytest.approx(0.0, abs=1e-6)

    def test_order_domain(self):
        with pytest.raises(DomainError):
            fv.caputo_derivative(lambda s: s, 1.2, 1.0)


class TestGoverningResidual:
    def test_base_forward_system(self, rates, point):
        for n in range(4):
            assert fv.governing_system_residual(rates, point, None, n, "base") < 1e-6

    def test_space_pgf_equation(self, rates, point, orders):
        assert fv.governing_system_residual(rates, point, orders, 0, "space") < 1e-6
        assert fv.governing_system_residual(rates, 0.6, orders, 0, "space-mv") < 1e-6

    @pytest.mark.slow
    def test_time_caputo_system(self):
        rates = RateMatrix.from_array([[1.0], [0.5]])
        orders = FractionalOrders.uniform(0.5, 1)
        for n in range(3):
            assert fv.governing_system_residual(rates, [1.0], orders, n, "time") < 1e-3

    def test_coordinate_out_of_range(self, rates, point):
        with pytest.raises(DomainError):
            fv.governing_system_residual(rates, point, None, 0, "base", coordinate=2)

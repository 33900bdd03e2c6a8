"""
Verification suites: every sampler against its closed-form law and every formula
against an independent one.

Each check owns an RngStream whose id is derived from the check name, so a report
depends only on the config and the seed, whatever the number of workers.
"""
from __future__ import annotations

import itertools
import math
import zlib
from typing import Callable

import numpy as np
from scipy import special, stats

from mgcp import fractional_variants as fv
from mgcp import gcp_core, integrals, samplers
from mgcp.fractional_variants import FractionalOrders, VariantKind
from mgcp.gcp_core import MultiTime, RateMatrix
from mgcp.integrals import IntegralSpec
from mgcp.samplers import RngStream
from mgcp.special_functions import mittag_leffler
from utils import logger
from utils.config import config
from utils.error_handler import AppError, UnknownSuiteError
from utils.worker_pool import CheckPool

from .experiment import ExperimentConfig
from .reporting import CheckResult, VerificationReport

log = logger.get_logger(__name__)

SUITE_ORDER = (
    "normalization", "equivalence", "moments", "reductions",
    "governing", "samplers", "integrals", "kernels",
)
KNOWN_SUITES = SUITE_ORDER + ("all",)

CLT_BAND = 4.0
SIGNIFICANCE = 1e-3
GOF_MAX_N = 10

_REGISTRY: dict[str, list[tuple[str, Callable]]] = {name: [] for name in SUITE_ORDER}


def check(suite, name):
    """Register a check function fn(cfg, rng) -> CheckResult | list[CheckResult]"""
    def decorator(func):
        _REGISTRY[suite].append((f"{suite}.{name}", func))
        return func
    return decorator


def stream_id(name) -> int:
    return zlib.crc32(name.encode("ascii"))


# ---------------------------------------------------------------------------
# Statistical helpers
# ---------------------------------------------------------------------------

def mean_band(name, sample, target, detail="") -> CheckResult:
    """|sample mean - target| in standard errors"""
    sample = np.asarray(sample, dtype=float)
    se = sample.std(ddof=1) / math.sqrt(sample.size)
    z = abs(sample.mean() - target) / se if se > 0 else (0.0 if sample.mean() == target else math.inf)
    return CheckResult.at_most(name, z, CLT_BAND, detail or f"mean {sample.mean():.6g} vs {target:.6g}")


def variance_band(name, sample, target, detail="") -> CheckResult:
    """|sample variance - target| in standard errors of the sample variance"""
    sample = np.asarray(sample, dtype=float)
    centred = sample - sample.mean()
    var = centred.var(ddof=1)
    se = math.sqrt(max(np.mean(centred ** 4) - var ** 2, 0.0) / sample.size)
    z = abs(var - target) / se if se > 0 else (0.0 if var == target else math.inf)
    return CheckResult.at_most(name, z, CLT_BAND, detail or f"variance {var:.6g} vs {target:.6g}")


def proportion_band(name, hits, total, target) -> CheckResult:
    se = math.sqrt(target * (1.0 - target) / total)
    z = abs(hits / total - target) / se if se > 0 else math.inf
    return CheckResult.at_most(name, z, CLT_BAND, f"frequency {hits / total:.6g} vs {target:.6g}")


def merged_bins(expected, observed, minimum=5.0):
    """Merge adjacent bins left to right until each expected count reaches minimum"""
    exp_out, obs_out = [], []
    acc_e, acc_o = 0.0, 0.0
    for e, o in zip(expected, observed):
        acc_e += e
        acc_o += o
        if acc_e >= minimum:
            exp_out.append(acc_e)
            obs_out.append(acc_o)
            acc_e, acc_o = 0.0, 0.0
    if acc_e > 0 or acc_o > 0:
        if exp_out:
            exp_out[-1] += acc_e
            obs_out[-1] += acc_o
        else:
            exp_out.append(acc_e)
            obs_out.append(acc_o)
    return np.asarray(exp_out), np.asarray(obs_out)


def chi_square_gof(name, draws, probs, max_n=GOF_MAX_N) -> CheckResult:
    """Chi-square test of draws against pmf values for n = 0..max_n plus a tail bin"""
    draws = np.asarray(draws)
    total = draws.size
    head = np.asarray(probs[:max_n + 1], dtype=float)
    tail = max(1.0 - math.fsum(head), 0.0)
    expected = np.append(head, tail) * total
    expected *= total / expected.sum()
    observed = np.append(np.bincount(np.minimum(draws, max_n + 1), minlength=max_n + 2)[:max_n + 1],
                         np.count_nonzero(draws > max_n))
    exp_bins, obs_bins = merged_bins(expected, observed)
    if exp_bins.size < 2:
        return CheckResult.at_least(name, 1.0, SIGNIFICANCE, "degenerate law, single bin", gating=False)
    p_value = stats.chisquare(obs_bins, exp_bins).pvalue
    return CheckResult.at_least(name, p_value, SIGNIFICANCE, f"{exp_bins.size} bins")


def skipped(name, reason) -> CheckResult:
    return CheckResult(name=name, statistic=0.0, tolerance=0.0, passed=True, gating=False,
                       detail=f"skipped: {reason}")


def instance_grid(seed, count=12):
    """Deterministic desk-scale parameter sets: rates in [0.1, 3], t in [0.2, 2], k, d in 1..3"""
    rng = RngStream(seed, stream_id("instance-grid")).generator
    shapes = list(itertools.product((1, 2, 3), repeat=2))
    out = []
    for idx in range(count):
        k, d = shapes[idx % len(shapes)]
        rates = RateMatrix.from_array(rng.uniform(0.1, 3.0, (k, d)))
        out.append((rates, MultiTime(t=tuple(rng.uniform(0.2, 2.0, d)))))
    return out


def fractional_orders(cfg: ExperimentConfig) -> FractionalOrders:
    """Config orders when some index is below 1, else alpha = 0.5 on every axis"""
    orders = cfg.orders()
    if all(a == 1.0 for a in orders.alpha):
        return FractionalOrders.uniform(0.5, cfg.d)
    return orders


def _positive_columns(rates: RateMatrix) -> bool:
    return bool(np.all(rates.column_sums > 0))


def _diagonal_time(cfg: ExperimentConfig) -> float:
    return float(np.mean(cfg.time_point().t))


def _kind_time(cfg, kind: VariantKind):
    return _diagonal_time(cfg) if kind.is_multivariate else cfg.time_point()


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------

@check("normalization", "base")
def _normalization_base(cfg, rng):
    rates, t = cfg.rate_matrix(), cfg.time_point()
    table = gcp_core.pmf_convolution(rates, t, gcp_core.truncation_index(rates, t))
    return CheckResult.at_most("normalization.base", 1.0 - table.mass_accounted,
                               cfg.tolerance("normalization", 1e-9), f"N*={table.n_max}")


@check("normalization", "grid")
def _normalization_grid(cfg, rng):
    worst = 0.0
    for rates, t in instance_grid(cfg.seed):
        table = gcp_core.pmf_convolution(rates, t, gcp_core.truncation_index(rates, t))
        worst = max(worst, 1.0 - table.mass_accounted)
    return CheckResult.at_most("normalization.grid", worst, cfg.tolerance("normalization", 1e-9), "12 instances")


@check("normalization", "time")
def _normalization_time(cfg, rng):
    rates, t = cfg.rate_matrix(), cfg.time_point()
    if not _positive_columns(rates):
        return skipped("normalization.time", "a column of rates sums to zero")
    orders = fractional_orders(cfg)
    m, v = fv.time_frac_mean(rates, t, orders), fv.time_frac_variance(rates, t, orders)
    n_max = int(math.ceil(m + 12.0 * math.sqrt(v) + 20.0))
    table = fv.time_frac_pmf_table(rates, t, orders, n_max)
    return CheckResult.at_most("normalization.time", 1.0 - table.mass_accounted,
                               cfg.tolerance("normalization", 1e-9), f"n_max={n_max}")


@check("normalization", "space_upper")
def _normalization_space(cfg, rng):
    rates, t = cfg.rate_matrix(), cfg.time_point()
    if not _positive_columns(rates):
        return skipped("normalization.space_upper", "a column of rates sums to zero")
    table = fv.space_frac_pmf_table(rates, t, fractional_orders(cfg), gcp_core.truncation_index(rates, t))
    return CheckResult.at_most("normalization.space_upper", table.mass_accounted - 1.0, 1e-9,
                               "heavy tail: only an upper bound on the mass")


# ---------------------------------------------------------------------------
# equivalence
# ---------------------------------------------------------------------------

@check("equivalence", "representations")
def _equivalence_representations(cfg, rng):
    n_max = 20
    worst = 0.0
    instances = [(cfg.rate_matrix(), cfg.time_point())] + instance_grid(cfg.seed)
    for rates, t in instances:
        conv = gcp_core.pmf_convolution(rates, t, n_max).probs
        sums = gcp_core.pmf_sum_of_gcps(rates, t, n_max).probs
        direct = np.array([gcp_core.pmf_direct(rates, t, n) for n in range(n_max + 1)])
        worst = max(worst, float(np.max(np.abs(direct - conv))), float(np.max(np.abs(sums - conv))))
    return CheckResult.at_most("equivalence.representations", worst,
                               cfg.tolerance("equivalence", 1e-12), f"{len(instances)} instances, n <= {n_max}")


@check("equivalence", "time_summation_orders")
def _equivalence_time_orders(cfg, rng):
    rates, t = cfg.rate_matrix(), cfg.time_point()
    if not _positive_columns(rates):
        return skipped("equivalence.time_summation_orders", "a column of rates sums to zero")
    orders = fractional_orders(cfg)
    worst = max(
        abs(fv.time_frac_pmf(rates, t, orders, n, "omega") - fv.time_frac_pmf(rates, t, orders, n, "theta"))
        for n in range(13)
    )
    return CheckResult.at_most("equivalence.time_summation_orders", worst, cfg.tolerance("dual_formula", 1e-10))


@check("equivalence", "pgf_series")
def _equivalence_pgf(cfg, rng):
    rates, t = cfg.rate_matrix(), cfg.time_point()
    orders = fractional_orders(cfg)
    results = []
    base_n = gcp_core.truncation_index(rates, t)
    base = gcp_core.pmf_convolution(rates, t, base_n).probs
    powers = np.arange(base_n + 1)
    worst = max(abs(math.fsum(base * u ** powers) - gcp_core.pgf(rates, t, u))
                for u in (-1.0, -0.5, 0.0, 0.5, 0.9))
    results.append(CheckResult.at_most("equivalence.pgf_series.base", worst, cfg.tolerance("pgf", 1e-9)))
    if not _positive_columns(rates):
        results.append(skipped("equivalence.pgf_series.fractional", "a column of rates sums to zero"))
        return results
    n_max = 30
    powers = np.arange(n_max + 1)
    for kind in (VariantKind.SPACE_MULTIPARAMETER, VariantKind.TIME_MULTIPARAMETER):
        probs = fv.variant_pmf_table(rates, t, orders, kind, n_max).probs
        worst = max(abs(math.fsum(probs * u ** powers) - fv.variant_pgf(rates, t, orders, kind, u))
                    for u in (0.0, 0.5))
        results.append(CheckResult.at_most(f"equivalence.pgf_series.{kind.value}", worst,
                                           cfg.tolerance("variant_pgf", 1e-7)))
    return results


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------

@check("moments", "base")
def _moments_base(cfg, rng):
    rates, t = cfg.rate_matrix(), cfg.time_point()
    draws = samplers.sample_mgcp(rates, t, rng, cfg.replicates)
    return [
        mean_band("moments.base.mean", draws, gcp_core.mean(rates, t)),
        variance_band("moments.base.variance", draws, gcp_core.variance(rates, t)),
    ]


@check("moments", "time")
def _moments_time(cfg, rng):
    rates, t = cfg.rate_matrix(), cfg.time_point()
    if not _positive_columns(rates):
        return skipped("moments.time", "a column of rates sums to zero")
    orders = fractional_orders(cfg)
    m, v = fv.time_frac_mean(rates, t, orders), fv.time_frac_variance(rates, t, orders)
    draws = samplers.sample_variant(rates, t, orders, VariantKind.TIME_MULTIPARAMETER, rng, cfg.replicates)
    first = fv.time_frac_factorial_moment(rates, t, orders, 1)
    second = fv.time_frac_factorial_moment(rates, t, orders, 2)
    return [
        mean_band("moments.time.mean", draws, m),
        variance_band("moments.time.variance", draws, v),
        CheckResult.at_most("moments.time.factorial_first", abs(first - m), 1e-9 * max(1.0, m)),
        CheckResult.at_most("moments.time.factorial_second", abs(second - (v + m * m - m)),
                            1e-9 * max(1.0, second)),
        CheckResult.at_most("moments.time.overdispersion", m / v if v > 0 else math.inf, 1.0 - 1e-12,
                            "mean / variance must stay below 1 for alpha < 1", gating=any(a < 1 for a in orders.alpha)),
    ]


@check("moments", "grid")
def _moments_grid(cfg, rng):
    results = []
    for idx, (rates, t) in enumerate(instance_grid(cfg.seed)[:6]):
        draws = samplers.sample_mgcp(rates, t, rng, cfg.replicates)
        results.append(mean_band(f"moments.grid.{idx}.mean", draws, gcp_core.mean(rates, t)))
        results.append(variance_band(f"moments.grid.{idx}.variance", draws, gcp_core.variance(rates, t)))
    return results


# ---------------------------------------------------------------------------
# reductions
# ---------------------------------------------------------------------------

@check("reductions", "identity_time_change")
def _reductions(cfg, rng):
    rates, t = cfg.rate_matrix(), cfg.time_point()
    if not _positive_columns(rates):
        return skipped("reductions.identity_time_change", "a column of rates sums to zero")
    ones = FractionalOrders.uniform(1.0, cfg.d)
    tol = cfg.tolerance("reductions", 1e-9)
    base = [gcp_core.pmf_direct(rates, t, n) for n in range(13)]
    space = max(abs(fv.space_frac_pmf(rates, t, ones, n).value - p) for n, p in enumerate(base))
    time = max(abs(fv.time_frac_pmf(rates, t, ones, n) - p) for n, p in enumerate(base))
    pgf = max(
        max(abs(fv.space_frac_pgf(rates, t, ones, u) - gcp_core.pgf(rates, t, u)),
            abs(fv.time_frac_pgf(rates, t, ones, u) - gcp_core.pgf(rates, t, u)))
        for u in (-1.0, -0.5, 0.0, 0.5, 0.9)
    )
    moments = max(abs(fv.time_frac_mean(rates, t, ones) - gcp_core.mean(rates, t)),
                  abs(fv.time_frac_variance(rates, t, ones) - gcp_core.variance(rates, t)))
    return [
        CheckResult.at_most("reductions.space_pmf", space, tol),
        CheckResult.at_most("reductions.time_pmf", time, tol),
        CheckResult.at_most("reductions.pgf", pgf, tol),
        CheckResult.at_most("reductions.time_moments", moments, tol),
    ]


# ---------------------------------------------------------------------------
# governing equations
# ---------------------------------------------------------------------------

@check("governing", "base")
def _governing_base(cfg, rng):
    rates, t = cfg.rate_matrix(), cfg.time_point()
    worst = max(fv.governing_system_residual(rates, t, None, n, VariantKind.BASE) for n in range(4))
    return CheckResult.at_most("governing.base", worst, cfg.tolerance("ode_residual", 1e-6))


@check("governing", "space")
def _governing_space(cfg, rng):
    rates = cfg.rate_matrix()
    if not _positive_columns(rates):
        return skipped("governing.space", "a column of rates sums to zero")
    orders = fractional_orders(cfg)
    tol = cfg.tolerance("pgf_residual", 1e-6)
    return [
        CheckResult.at_most("governing.space_multiparameter", fv.governing_system_residual(
            rates, cfg.time_point(), orders, 0, VariantKind.SPACE_MULTIPARAMETER), tol),
        CheckResult.at_most("governing.space_multivariate", fv.governing_system_residual(
            rates, _diagonal_time(cfg), orders, 0, VariantKind.SPACE_MULTIVARIATE), tol),
    ]


@check("governing", "time")
def _governing_time(cfg, rng):
    rates = cfg.rate_matrix()
    if not _positive_columns(rates):
        return skipped("governing.time", "a column of rates sums to zero")
    orders = fractional_orders(cfg)
    tol = cfg.tolerance("caputo_residual", 1e-3)
    multi = max(fv.governing_system_residual(rates, cfg.time_point(), orders, n, VariantKind.TIME_MULTIPARAMETER)
                for n in range(3))
    mv = max(fv.governing_system_residual(rates, _diagonal_time(cfg), orders, n, VariantKind.TIME_MULTIVARIATE)
             for n in range(3))
    return [
        CheckResult.at_most("governing.time_multiparameter", multi, tol),
        CheckResult.at_most("governing.time_multivariate", mv, tol),
    ]


@check("governing", "time_reference")
def _governing_time_reference(cfg, rng):
    """Caputo system on one axis with two jump sizes"""
    rates = RateMatrix.from_array([[1.0], [0.5]])
    tol = cfg.tolerance("caputo_residual", 1e-3)
    results = []
    for alpha in (0.5, 0.8):
        orders = FractionalOrders.uniform(alpha, 1)
        worst = max(fv.governing_system_residual(rates, [1.0], orders, n, VariantKind.TIME_MULTIPARAMETER)
                    for n in range(3))
        results.append(CheckResult.at_most(f"governing.time_reference.a{alpha:g}", worst, tol))
    return results


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

@check("samplers", "law")
def _samplers_law(cfg, rng):
    rates = cfg.rate_matrix()
    orders = fractional_orders(cfg)
    kinds = list(VariantKind) if _positive_columns(rates) else [VariantKind.BASE]
    results = []
    for kind in kinds:
        t = _kind_time(cfg, kind)
        probs = fv.variant_pmf_table(rates, t, orders, kind, GOF_MAX_N).probs
        draws = samplers.sample_variant(rates, t, orders, kind, rng, cfg.replicates)
        results.append(chi_square_gof(f"samplers.law.{kind.value}", draws, probs))
    return results


@check("samplers", "base_grid")
def _samplers_base_grid(cfg, rng):
    results = []
    for idx, (rates, t) in enumerate(instance_grid(cfg.seed)[:6]):
        probs = gcp_core.pmf_convolution(rates, t, GOF_MAX_N).probs
        draws = samplers.sample_mgcp(rates, t, rng, cfg.replicates)
        results.append(chi_square_gof(f"samplers.base_grid.{idx}", draws, probs))
    return results


TIME_LAW_RATES = {1: [[1.2]], 2: [[0.8], [0.5]]}


@check("samplers", "time_grid")
def _samplers_time_grid(cfg, rng):
    """k, d in {1, 2} and alpha in {0.5, 0.8} on the diagonal t = 1"""
    results = []
    for k, d, alpha in itertools.product((1, 2), (1, 2), (0.5, 0.8)):
        rates = RateMatrix.from_array(np.tile(np.asarray(TIME_LAW_RATES[k]), (1, d)))
        t = MultiTime.diagonal(1.0, d)
        orders = FractionalOrders.uniform(alpha, d)
        probs = fv.time_frac_pmf_table(rates, t, orders, GOF_MAX_N).probs
        draws = samplers.sample_variant(rates, t, orders, VariantKind.TIME_MULTIPARAMETER, rng, cfg.replicates)
        tag = f"samplers.time_grid.k{k}_d{d}_a{alpha:g}"
        results.append(chi_square_gof(tag, draws, probs))
        results.append(mean_band(f"{tag}.mean", draws, fv.time_frac_mean(rates, t, orders)))
        results.append(variance_band(f"{tag}.variance", draws, fv.time_frac_variance(rates, t, orders)))
    return results


@check("samplers", "space_zero_class")
def _samplers_space_zero(cfg, rng):
    rates, t = cfg.rate_matrix(), cfg.time_point()
    orders = fractional_orders(cfg)
    target = math.exp(-float(np.sum(t.array * rates.column_sums ** orders.array)))
    draws = samplers.sample_variant(rates, t, orders, VariantKind.SPACE_MULTIPARAMETER, rng, cfg.replicates)
    return proportion_band("samplers.space_zero_class", int(np.count_nonzero(draws == 0)), draws.size, target)


@check("samplers", "paths")
def _samplers_paths(cfg, rng):
    rates, t = cfg.rate_matrix(), cfg.time_point()
    grid = [t, MultiTime(t=tuple(2.0 * t.array))]
    paths = samplers.sample_mgcp_paths(rates, grid, rng, cfg.replicates)
    first, second = paths[:, 0], paths[:, 1] - paths[:, 0]
    table = gcp_core.pmf_convolution(rates, t, gcp_core.truncation_index(rates, t))
    survival = 1.0 - table.cumulative()
    cap = int(np.argmax(survival < 50.0 / cfg.replicates)) if np.any(survival < 50.0 / cfg.replicates) else table.n_max
    counts = np.vstack([np.bincount(np.minimum(x, cap), minlength=cap + 1) for x in (first, second)])
    counts = counts[:, counts.sum(axis=0) > 0]
    results = []
    if counts.shape[1] < 2:
        results.append(skipped("samplers.paths.stationarity", "increments are degenerate"))
    else:
        p_value = stats.chi2_contingency(counts).pvalue
        results.append(CheckResult.at_least("samplers.paths.stationarity", p_value, SIGNIFICANCE))
    corr = float(np.corrcoef(first, second)[0, 1]) if first.std() > 0 and second.std() > 0 else 0.0
    results.append(CheckResult.at_most("samplers.paths.independence", abs(corr), CLT_BAND / math.sqrt(cfg.replicates)))
    results.append(CheckResult.at_most("samplers.paths.monotone", float(np.count_nonzero(second < 0)), 0.0))
    return results


@check("samplers", "determinism")
def _samplers_determinism(cfg, rng):
    rates, t = cfg.rate_matrix(), cfg.time_point()
    orders = fractional_orders(cfg)
    a = samplers.sample_variant(rates, t, orders, VariantKind.TIME_MULTIPARAMETER, RngStream(cfg.seed, 7), 1000)
    b = samplers.sample_variant(rates, t, orders, VariantKind.TIME_MULTIPARAMETER, RngStream(cfg.seed, 7), 1000)
    return CheckResult.at_most("samplers.determinism", float(np.count_nonzero(a != b)), 0.0)


@check("samplers", "poisson")
def _samplers_poisson(cfg, rng):
    results = []
    for mean in (4.0, 45.0):
        draws = samplers.sample_poisson(mean, rng, cfg.replicates)
        results.append(mean_band(f"samplers.poisson.mean_{mean:g}", draws, mean))
        results.append(variance_band(f"samplers.poisson.variance_{mean:g}", draws, mean))
    return results


# ---------------------------------------------------------------------------
# integrals
# ---------------------------------------------------------------------------

@check("integrals", "compound")
def _integrals_compound(cfg, rng):
    rates, t = cfg.rate_matrix(), cfg.time_point()
    spec = IntegralSpec.riemann(t.t)
    draws = integrals.integral_sample_compound(rates, t, rng, cfg.replicates)
    return [
        mean_band("integrals.compound.mean", draws, integrals.integral_mean(rates, spec)),
        variance_band("integrals.compound.variance", draws, integrals.integral_variance(rates, spec)),
    ]


@check("integrals", "quadrature")
def _integrals_quadrature(cfg, rng):
    rates = cfg.rate_matrix()
    spec = cfg.integral_spec()
    draws = integrals.integral_sample_quadrature(rates, spec, rng, cfg.replicates)
    return [
        mean_band("integrals.quadrature.mean", draws, integrals.integral_mean(rates, spec)),
        variance_band("integrals.quadrature.variance", draws, integrals.integral_variance(rates, spec)),
    ]


@check("integrals", "compound_vs_quadrature")
def _integrals_ks(cfg, rng):
    """Two-sample KS on the configured instance and the grid instances with d <= 2"""
    cases = [("config", cfg.rate_matrix(), cfg.time_point())] if cfg.d <= 2 else []
    cases += [(str(idx), rates, t) for idx, (rates, t) in enumerate(instance_grid(cfg.seed)) if rates.d <= 2][:4]
    results = []
    for tag, rates, t in cases:
        spec = IntegralSpec.riemann(t.t, cfg.quadrature_nodes)
        compound = integrals.integral_sample_compound(rates, t, rng, cfg.replicates)
        quadrature = integrals.integral_sample_quadrature(rates, spec, rng, cfg.replicates)
        p_value = stats.ks_2samp(compound, quadrature).pvalue
        results.append(CheckResult.at_least(f"integrals.compound_vs_quadrature.{tag}", p_value, SIGNIFICANCE))
    return results


@check("integrals", "small_t_gaussian")
def _integrals_gaussian(cfg, rng):
    rates = cfg.rate_matrix()
    t = MultiTime.diagonal(0.1, cfg.d)
    m, v = integrals.gaussian_asymptotic_params(rates, t)
    draws = integrals.integral_sample_compound(rates, t, rng, cfg.replicates)
    # eta scaled so the largest mark c t_i is of order one
    scale = 1.0 / (rates.k * float(np.prod(t.array)))
    results = []
    for factor in (0.5, 1.0):
        eta = factor * scale
        gap = integrals.empirical_cf_gap(draws, m, v, eta)
        bound = CLT_BAND / math.sqrt(cfg.replicates) + integrals.gaussian_cf_remainder_bound(rates, t, eta)
        results.append(CheckResult.at_most(f"integrals.small_t_gaussian.cf_{factor:g}", gap, bound))
    if v > 0:
        ad = stats.anderson((draws - m) / math.sqrt(v), dist="norm")
        critical = float(ad.critical_values[-1])
        results.append(CheckResult.at_most("integrals.small_t_gaussian.anderson_darling", float(ad.statistic),
                                           critical, "diagnostic; the law has an atom at 0", gating=False))
    return results


@check("integrals", "rate_scaling")
def _integrals_scaling(cfg, rng):
    rates = cfg.rate_matrix()
    spec = cfg.integral_spec()
    base = integrals.integral_mean(rates, spec)
    scaled = integrals.integral_mean(rates.scaled(3.0), spec)
    return CheckResult.at_most("integrals.rate_scaling", abs(scaled - 3.0 * base), 1e-12 * max(1.0, scaled))


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

@check("kernels", "mittag_leffler")
def _kernels_mlf(cfg, rng):
    xs = np.linspace(-30.0, 5.0, 71)
    exp_err = max(abs(mittag_leffler(1.0, x) - math.exp(x)) / math.exp(x) for x in xs)
    erfc_err = max(abs(mittag_leffler(0.5, -x) - float(special.erfcx(x))) for x in np.linspace(0.0, 3.0, 31))
    return [
        CheckResult.at_most("kernels.mittag_leffler.exp", exp_err, 1e-10, "relative, x in [-30, 5]"),
        CheckResult.at_most("kernels.mittag_leffler.erfc", erfc_err, 1e-8, "E_1/2(-x) = exp(x^2) erfc(x)"),
    ]


def _stable_index(cfg) -> float:
    below = [a for a in cfg.orders().alpha if a < 1.0]
    return below[0] if below else 0.5


@check("kernels", "stable")
def _kernels_stable(cfg, rng):
    alpha = _stable_index(cfg)
    draws = samplers.sample_stable(alpha, 1.0, rng, 10 * cfg.replicates)
    results = [
        mean_band(f"kernels.stable.laplace_{w:g}", np.exp(-w * draws), math.exp(-w ** alpha))
        for w in (0.5, 1.0, 2.0)
    ]
    half = samplers.sample_stable(0.5, 1.0, rng, cfg.replicates)
    median = float(stats.levy(scale=0.5).median())
    results.append(proportion_band("kernels.stable.levy_median", int(np.count_nonzero(half <= median)),
                                   half.size, 0.5))
    return results


@check("kernels", "inverse_stable")
def _kernels_inverse_stable(cfg, rng):
    alpha = _stable_index(cfg)
    draws = samplers.sample_inverse_stable(alpha, 1.0, rng, cfg.replicates)
    return mean_band("kernels.inverse_stable.mean", draws, 1.0 / special.gamma(alpha + 1.0))


@check("kernels", "caputo")
def _kernels_caputo(cfg, rng):
    value = fv.caputo_derivative(lambda s: s, 0.5, 1.0)
    return CheckResult.at_most("kernels.caputo.linear", abs(value - 1.0 / special.gamma(1.5)), 1e-10)


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------

def _checks_for(suite):
    if suite == "all":
        return [entry for name in SUITE_ORDER for entry in _REGISTRY[name]]
    if suite not in _REGISTRY:
        raise UnknownSuiteError(suite, KNOWN_SUITES)
    return list(_REGISTRY[suite])


def _run_check(name, func, cfg):
    rng = RngStream(cfg.seed, stream_id(name))
    try:
        with logger.check_context(name):
            outcome = func(cfg, rng)
    except AppError as e:
        log.warning(f"check {name} raised {type(e).__name__}", extra={"check": name, "error_code": e.error_code})
        return [CheckResult(name=name, statistic=math.nan, tolerance=math.nan, passed=False,
                            detail=f"{e.error_code}: {e.message}")]
    return outcome if isinstance(outcome, list) else [outcome]


def run_suite(cfg: ExperimentConfig, suite: str, workers: int | None = None) -> VerificationReport:
    """
    Run a named suite and assemble its report.

    Raises:
        UnknownSuiteError: suite is not one of KNOWN_SUITES
    """
    checks = _checks_for(suite)
    workers = workers or config.sampling.workers
    log.info("running suite", extra={"suite": suite, "checks": len(checks), "workers": workers})
    tasks = [(name, lambda name=name, func=func: _run_check(name, func, cfg)) for name, func in checks]
    with CheckPool(workers) as pool:
        outcomes = pool.map_ordered(tasks)
    report = VerificationReport(suite=suite, seed=cfg.seed, checks=[c for group in outcomes for c in group])
    for failed in report.failed():
        log.warning("check failed", extra={"check": failed.name, "statistic": failed.statistic,
                                           "tolerance": failed.tolerance})
    log.info("suite finished", extra={"suite": suite, "overall": report.overall})
    return report

"""
Exact-in-law random generation for the multiparameter GCP and its time-changed variants.

All randomness flows through an RngStream; there is no module-level generator.
Every sampler accepts size=None (one draw, returned as a Python scalar) or an integer
number of replicates (returned as a numpy array).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from utils import logger
from utils.config import config
from utils.error_handler import ContractViolationError, DomainError, ShapeError

from .fractional_variants import FractionalOrders, VariantKind, variant_time
from .gcp_core import MultiTime, RateMatrix, as_multitime

log = logger.get_logger(__name__)

# largest float64 below 2**63, exact as an int64
_COUNT_CAP = float(np.nextafter(2.0 ** 63, 0.0))
# operational times are capped here; counts saturate long before
_TIME_CAP = 1e200


@dataclass
class RngStream:
    """
    Seeded random stream. Identical (seed, stream_id) pairs give identical draws;
    distinct stream ids give statistically independent streams.
    """
    seed: int
    stream_id: int = 0
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.seed < 0 or self.stream_id < 0:
            raise DomainError("seed and stream_id must be non-negative", "seed")
        sequence = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def spawn(self, stream_id) -> "RngStream":
        """A fresh stream with the same seed and another id"""
        return RngStream(self.seed, stream_id)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self.generator.uniform(low, high, size)

    def exponential(self, size=None):
        return self.generator.standard_exponential(size)


@dataclass(frozen=True)
class SamplePath:
    """Values of one realisation on a partially ordered grid"""
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if len(self.grid) != len(self.values):
            raise ShapeError("grid and values must have the same length", "values")
        if np.any(np.diff(self.values) < 0):
            raise ContractViolationError("sample path values must be non-decreasing along the grid")


def _check_mean(mean):
    mean = np.asarray(mean, dtype=float)
    if np.any(~np.isfinite(mean)) or np.any(mean < 0):
        raise DomainError("Poisson mean must be finite and non-negative", "mean")
    return mean


def _poisson_inversion(lam: np.ndarray, rng: RngStream) -> np.ndarray:
    """Sequential search of the Poisson cdf with one uniform per draw"""
    u = rng.generator.random(lam.shape)
    out = np.zeros(lam.shape, dtype=np.int64)
    p = np.exp(-lam)
    cdf = p.copy()
    active = u > cdf
    limit = lam + 20.0 * np.sqrt(lam) + 20.0
    k = 0
    while active.any():
        k += 1
        p = p * lam / k
        cdf = cdf + p
        out[active] = k
        active &= (u > cdf) & (k < limit) & (p > 0)
    return out


def sample_poisson(mean, rng: RngStream, size=None):
    """
    Poisson(mean) draws. Means below the inversion threshold use sequential search,
    larger ones numpy's transformed rejection, and astronomically large ones a
    rounded normal draw.
    """
    mean = _check_mean(mean)
    shape = np.broadcast_shapes(mean.shape, () if size is None else tuple(np.atleast_1d(size)))
    lam = np.broadcast_to(mean, shape).astype(float)
    out = np.zeros(shape, dtype=np.int64)
    settings = config.sampling
    small = (lam > 0) & (lam < settings.poisson_inversion_threshold)
    large = (lam >= settings.poisson_inversion_threshold) & (lam < settings.poisson_normal_threshold)
    huge = lam >= settings.poisson_normal_threshold
    if small.any():
        out[small] = _poisson_inversion(lam[small], rng)
    if large.any():
        out[large] = rng.generator.poisson(lam[large])
    if huge.any():
        log.warning("normal approximation for Poisson means above threshold",
                    extra={"threshold": settings.poisson_normal_threshold, "count": int(huge.sum())})
        draws = np.rint(rng.generator.normal(lam[huge], np.sqrt(lam[huge])))
        saturated = draws > _COUNT_CAP
        if saturated.any():
            log.warning("Poisson draws saturated at the int64 limit", extra={"count": int(saturated.sum())})
        out[huge] = np.clip(draws, 0.0, _COUNT_CAP).astype(np.int64)
    if size is None and out.ndim == 0:
        return int(out)
    return out


def _weighted_counts(means: np.ndarray, rng: RngStream, terms=1) -> np.ndarray:
    """sum_j j N_j for N_j ~ Poisson(means[..., j]); terms is how many of them a caller adds up"""
    counts = sample_poisson(means, rng)
    jumps = np.arange(1, means.shape[-1] + 1)
    counts = np.asarray(counts)
    # terms * sum_j j N_j <= terms * max_j N_j * sum_j j stays below the int64 limit
    limit = np.iinfo(np.int64).max // (int(jumps.sum()) * int(terms))
    if counts.size and counts.max() > limit:
        log.warning("weighted counts saturated at the int64 limit",
                    extra={"count": int(np.count_nonzero(counts > limit))})
        counts = np.minimum(counts, limit)
    return counts @ jumps


def sample_mgcp(rates: RateMatrix, t, rng: RngStream, size=None):
    """M(t) = sum_j j N_j with independent N_j ~ Poisson(Lambda_j . t)"""
    t = as_multitime(t, rates.d)
    means = rates.array @ t.array
    reps = 1 if size is None else int(size)
    draws = _weighted_counts(np.tile(means, (reps, 1)), rng)
    return int(draws[0]) if size is None else draws


def _as_grid(grid, d) -> np.ndarray:
    points = np.asarray([as_multitime(g, d).t for g in grid], dtype=float)
    if points.shape[0] == 0:
        raise ShapeError("grid must contain at least one point", "grid")
    if np.any(np.diff(points, axis=0) < 0):
        raise ContractViolationError("grid must be increasing in the component-wise partial order")
    return points


def sample_mgcp_paths(rates: RateMatrix, grid, rng: RngStream, paths: int) -> np.ndarray:
    """(paths, len(grid)) values from independent stationary increments along the grid"""
    points = _as_grid(grid, rates.d)
    steps = np.diff(np.vstack([np.zeros(rates.d), points]), axis=0)
    means = steps @ rates.array.T
    increments = _weighted_counts(np.broadcast_to(means, (int(paths),) + means.shape), rng, terms=points.shape[0])
    return np.cumsum(increments, axis=1)


def sample_mgcp_path(rates: RateMatrix, grid, rng: RngStream) -> SamplePath:
    points = _as_grid(grid, rates.d)
    values = sample_mgcp_paths(rates, points, rng, 1)[0]
    return SamplePath(points, values)


def _check_stable_index(alpha):
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"stable index must lie in (0, 1), got {alpha}", "alpha")


def _stable_unit(alpha, rng: RngStream, shape) -> np.ndarray:
    """D(1) with E exp(-w D(1)) = exp(-w^alpha), Chambers-Mallows-Stuck form"""
    u = rng.uniform(-math.pi / 2.0, math.pi / 2.0, shape)
    w = rng.exponential(shape)
    shifted = alpha * (u + math.pi / 2.0)
    return (np.sin(shifted) / np.cos(u) ** (1.0 / alpha)) * (np.cos(u - shifted) / w) ** ((1.0 - alpha) / alpha)


def sample_stable(alpha: float, t: float, rng: RngStream, size=None):
    """One-sided stable subordinator value D(t) = t^{1/alpha} D(1)"""
    _check_stable_index(alpha)
    if t < 0 or not math.isfinite(t):
        raise DomainError(f"t = {t} must be finite and non-negative", "t")
    shape = () if size is None else (int(size),)
    draws = t ** (1.0 / alpha) * _stable_unit(alpha, rng, shape)
    return float(draws) if size is None else draws


def sample_stable_path(alpha: float, times, rng: RngStream, paths: int) -> np.ndarray:
    """(paths, len(times)) subordinator values on a non-decreasing time grid"""
    _check_stable_index(alpha)
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ContractViolationError("stable path times must be non-negative and non-decreasing")
    steps = np.diff(np.concatenate(([0.0], times)))
    increments = steps ** (1.0 / alpha) * _stable_unit(alpha, rng, (int(paths), times.size))
    return np.cumsum(increments, axis=1)


def sample_inverse_stable(alpha: float, t: float, rng: RngStream, size=None):
    """Inverse stable subordinator value L(t) = (t / D(1))^alpha"""
    _check_stable_index(alpha)
    if t < 0 or not math.isfinite(t):
        raise DomainError(f"t = {t} must be finite and non-negative", "t")
    shape = () if size is None else (int(size),)
    draws = (t / _stable_unit(alpha, rng, shape)) ** alpha
    return float(draws) if size is None else draws


def _random_times(kind: VariantKind, point: MultiTime, orders: FractionalOrders, rng, reps) -> np.ndarray:
    """(reps, d) random operational times T_i, one independent subordinator per axis"""
    columns = []
    for a, t_i in zip(orders.alpha, point.t):
        if kind is VariantKind.BASE or a == 1.0:
            columns.append(np.full(reps, t_i))
        elif kind.is_space:
            columns.append(np.minimum(sample_stable(a, t_i, rng, reps), _TIME_CAP))
        else:
            columns.append(sample_inverse_stable(a, t_i, rng, reps))
    return np.column_stack(columns)


def _orders_for(rates, orders):
    if orders is None:
        return FractionalOrders.uniform(1.0, rates.d)
    if orders.d != rates.d:
        raise ShapeError(f"alpha has {orders.d} entries, rates have d={rates.d}", "alpha")
    return orders


def sample_variant(rates: RateMatrix, t, orders: FractionalOrders | None, kind, rng: RngStream, size=None):
    """
    Draw of a time-changed variant: subordinator values per axis, then Poisson counts
    with means sum_i lambda_ji T_i.
    """
    kind = VariantKind.parse(kind)
    orders = _orders_for(rates, orders)
    point = variant_time(kind, t, rates.d)
    reps = 1 if size is None else int(size)
    times = _random_times(kind, point, orders, rng, reps)
    draws = _weighted_counts(times @ rates.array.T, rng)
    return int(draws[0]) if size is None else draws


def sample_variant_paths(rates: RateMatrix, grid, orders: FractionalOrders | None, kind, rng: RngStream,
                         paths: int) -> np.ndarray:
    """
    (paths, len(grid)) values of a variant along an increasing grid.

    Base and space-fractional paths are exact (independent Poisson and stable increments).
    Time-fractional paths use L_i(s) = (s / D_i(1))^alpha_i with one D_i(1) per path: every
    grid value has the exact marginal law and paths are non-decreasing, but the dependence
    across grid points is not that of the inverse stable process.
    """
    kind = VariantKind.parse(kind)
    orders = _orders_for(rates, orders)
    points = _as_grid(grid, rates.d)
    paths = int(paths)
    if kind is VariantKind.BASE:
        return sample_mgcp_paths(rates, points, rng, paths)
    columns = []
    for i, a in enumerate(orders.alpha):
        axis = points[:, i]
        if a == 1.0:
            columns.append(np.broadcast_to(axis, (paths, axis.size)))
        elif kind.is_space:
            columns.append(np.minimum(sample_stable_path(a, axis, rng, paths), _TIME_CAP))
        else:
            unit = _stable_unit(a, rng, (paths, 1))
            columns.append((axis[None, :] / unit) ** a)
    times = np.stack(columns, axis=-1)
    steps = np.diff(np.concatenate([np.zeros((paths, 1, rates.d)), times], axis=1), axis=1)
    increments = _weighted_counts(steps @ rates.array.T, rng, terms=points.shape[0])
    return np.cumsum(increments, axis=1)

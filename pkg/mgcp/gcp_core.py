"""
Multiparameter generalized counting process (GCP).

M(t) is indexed by t in R^d_+, jumps by j in {1..k} and has rates Lambda_j = (l_j1..l_jd).
In law M(t) = sum_j j N_j(t) with independent Poisson N_j(t) of mean Lambda_j . t,
which gives three equivalent pmf evaluators:

    pmf_direct       sum over the weighted compositions Omega(k, n)
    pmf_convolution  k-fold convolution of j-dilated Poisson tables (production path)
    pmf_sum_of_gcps  sum over Theta(n, d) of products of one-parameter GCP pmfs
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import special, stats

from utils import logger
from utils.config import config
from utils.error_handler import (
    ContractViolationError,
    DomainError,
    EnumerationLimitError,
    NegativeRateError,
    ShapeError,
)

log = logger.get_logger(__name__)

# Element (x_1..x_k) of Omega(k, n): sum_j j x_j = n
Composition = tuple[int, ...]


class RateMatrix(BaseModel):
    """k x d transition rates, entry (j, i) is lambda_ji (jump size j+1, time axis i)"""
    model_config = ConfigDict(frozen=True)

    rates: tuple[tuple[float, ...], ...] = Field(
        ..., description="Row j holds Lambda_j = (lambda_j1, ..., lambda_jd), units 1/time."
    )

    @model_validator(mode="after")
    def _check_rates(self):
        if len(self.rates) == 0 or len(self.rates[0]) == 0:
            raise ShapeError("rates must be a non-empty k x d matrix", "rates")
        d = len(self.rates[0])
        for j, row in enumerate(self.rates):
            if len(row) != d:
                raise ShapeError(f"rates row {j} has {len(row)} entries, expected {d}", "rates")
            for i, value in enumerate(row):
                if not math.isfinite(value):
                    raise DomainError(f"rates[{j}][{i}] is not finite", "rates")
                if value < 0:
                    raise NegativeRateError(f"rates[{j}][{i}] = {value} is negative")
            if not any(value > 0 for value in row):
                raise DomainError(f"rates row {j} is identically zero", "rates")
            if config.enumeration.strict_positive_rates and not all(value > 0 for value in row):
                raise DomainError(f"rates row {j} has a zero entry (strict positive rates enabled)", "rates")
        return self

    @classmethod
    def from_array(cls, rates) -> "RateMatrix":
        arr = np.asarray(rates, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise ShapeError(f"rates must be two-dimensional, got {arr.ndim} dimensions", "rates")
        return cls(rates=tuple(tuple(float(v) for v in row) for row in arr))

    @property
    def k(self) -> int:
        return len(self.rates)

    @property
    def d(self) -> int:
        return len(self.rates[0])

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.rates, dtype=float)

    @property
    def column_sums(self) -> np.ndarray:
        """mu_i = sum_j lambda_ji"""
        return self.array.sum(axis=0)

    def column(self, i) -> "RateMatrix":
        """One-parameter rates (lambda_1i..lambda_ki) of time axis i"""
        return RateMatrix(rates=tuple((row[i],) for row in self.rates))

    def scaled(self, factor) -> "RateMatrix":
        return RateMatrix.from_array(self.array * factor)


class MultiTime(BaseModel):
    """Point t of R^d_+ under the component-wise partial order"""
    model_config = ConfigDict(frozen=True)

    t: tuple[float, ...] = Field(..., description="Time coordinates t_1..t_d, each >= 0.")

    @model_validator(mode="after")
    def _check_time(self):
        if len(self.t) == 0:
            raise ShapeError("time vector must not be empty", "t")
        for i, value in enumerate(self.t):
            if not math.isfinite(value) or value < 0:
                raise DomainError(f"t[{i}] = {value} must be finite and non-negative", "t")
        return self

    @classmethod
    def diagonal(cls, tau, d) -> "MultiTime":
        return cls(t=(float(tau),) * d)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.t, dtype=float)

    def precedes(self, other: "MultiTime") -> bool:
        """s <= t component-wise"""
        return all(a <= b for a, b in zip(self.t, other.t))

    def replace(self, i, value) -> "MultiTime":
        t = list(self.t)
        t[i] = float(value)
        return MultiTime(t=tuple(t))


def as_multitime(t, d) -> MultiTime:
    """Coerce a MultiTime, scalar (diagonal point) or sequence to a d-dimensional MultiTime"""
    if isinstance(t, MultiTime):
        point = t
    elif np.ndim(t) == 0:
        point = MultiTime.diagonal(float(t), d)
    else:
        point = MultiTime(t=tuple(float(v) for v in np.asarray(t, dtype=float).ravel()))
    if len(point.t) != d:
        raise ShapeError(f"time vector has {len(point.t)} components, rates have d={d}", "t")
    return point


@dataclass(frozen=True)
class PmfTable:
    """pmf values for n = 0..n_max with the total mass they account for"""
    probs: np.ndarray
    mass_accounted: float

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise ShapeError("pmf table must be a non-empty vector", "probs")
        if np.any(probs < 0) or np.any(probs > 1):
            raise DomainError("pmf table entries must lie in [0, 1]", "probs")
        if self.mass_accounted > 1 + 1e-12:
            raise DomainError(f"pmf table mass {self.mass_accounted!r} exceeds 1", "probs")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_probs(cls, probs) -> "PmfTable":
        probs = np.clip(np.asarray(probs, dtype=float), 0.0, 1.0)
        return cls(probs, min(math.fsum(probs), 1.0 + 1e-12))

    @property
    def n_max(self) -> int:
        return self.probs.size - 1

    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.probs)

    def rows(self):
        """(n, p, cumulative) rows for CSV output"""
        return [[n, float(p), float(c)] for n, (p, c) in enumerate(zip(self.probs, self.cumulative()))]


# ---------------------------------------------------------------------------
# Index sets
# ---------------------------------------------------------------------------

@lru_cache(maxsize=4096)
def _omega_ways(k, n):
    """ways[j][m]: number of solutions of sum_{l>=j} l x_l = m using parts j..k (1-based j)"""
    ways = [[0] * (n + 1) for _ in range(k + 2)]
    ways[k + 1][0] = 1
    for j in range(k, 0, -1):
        below, row = ways[j + 1], ways[j]
        for m in range(n + 1):
            row[m] = below[m] + (row[m - j] if m >= j else 0)
    return ways


def count_omega(k: int, n: int) -> int:
    """|Omega(k, n)|, the number of partitions of n into parts of size at most k"""
    _check_index_args(k, n)
    return _omega_ways(int(k), int(n))[1][int(n)]


def _check_index_args(k, n):
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k}", "k")
    if int(n) != n or n < 0:
        raise DomainError(f"n must be a non-negative integer, got {n}", "n")


def _check_cap(what, count):
    cap = config.enumeration.cap
    if count > cap:
        raise EnumerationLimitError(what, count, cap)


def enumerate_omega(k: int, n: int) -> list[Composition]:
    """
    All (x_1..x_k) >= 0 with sum_j j x_j = n, in descending lexicographic order.

    Raises:
        EnumerationLimitError: if |Omega(k, n)| exceeds the configured cap
    """
    count = count_omega(k, n)
    k, n = int(k), int(n)
    _check_cap(f"Omega({k},{n})", count)
    if count > 100_000:
        log.debug("large composition enumeration", extra={"k": k, "n": n, "count": count})
    ways = _omega_ways(k, n)
    out = []
    parts = [0] * k

    def fill(j, remaining):
        if j > k:
            out.append(tuple(parts))
            return
        for x in range(remaining // j, -1, -1):
            rest = remaining - j * x
            if ways[j + 1][rest]:
                parts[j - 1] = x
                fill(j + 1, rest)
        parts[j - 1] = 0

    fill(1, n)
    return out


def enumerate_theta(n: int, d: int) -> list[tuple[int, ...]]:
    """Weak compositions (n_1..n_d) of n, ascending lexicographic order"""
    if int(d) != d or d < 1:
        raise DomainError(f"d must be a positive integer, got {d}", "d")
    if int(n) != n or n < 0:
        raise DomainError(f"n must be a non-negative integer, got {n}", "n")
    n, d = int(n), int(d)
    _check_cap(f"Theta({n},{d})", math.comb(n + d - 1, d - 1))
    end = n + d - 1
    out = []
    # stars and bars: bar positions in ascending order
    for bars in itertools.combinations(range(end), d - 1):
        edges = (-1,) + bars + (end,)
        out.append(tuple(b - a - 1 for a, b in zip(edges, edges[1:])))
    return out


def enumerate_positive_compositions(m: int, r: int) -> Iterator[tuple[int, ...]]:
    """Ordered compositions of m into r positive parts"""
    if r == 0:
        if m == 0:
            yield ()
        return
    if m < r:
        return
    for cuts in itertools.combinations(range(1, m), r - 1):
        edges = (0,) + cuts + (m,)
        yield tuple(b - a for a, b in zip(edges, edges[1:]))


# ---------------------------------------------------------------------------
# pmf evaluators
# ---------------------------------------------------------------------------

def _poisson_means(rates: RateMatrix, t: MultiTime) -> np.ndarray:
    """Lambda_j . t for each jump size"""
    return rates.array @ t.array


def _omega_pmf(means: np.ndarray, n: int) -> float:
    """sum over Omega(k, n) of prod_j means_j^x_j e^{-means_j} / x_j!, each term in log space"""
    comps = np.asarray(enumerate_omega(len(means), n), dtype=float).reshape(-1, len(means))
    positive = means > 0
    # a zero mean only admits x_j = 0
    feasible = np.all(comps[:, ~positive] == 0, axis=1)
    comps = comps[feasible]
    if comps.shape[0] == 0:
        return 0.0
    log_means = np.log(means[positive])
    x = comps[:, positive]
    log_terms = x @ log_means - special.gammaln(x + 1.0).sum(axis=1) - means.sum()
    return math.fsum(np.exp(log_terms))


def pmf_direct(rates: RateMatrix, t, n: int) -> float:
    """P(M(t) = n) by direct summation over Omega(k, n)"""
    t = as_multitime(t, rates.d)
    _check_index_args(rates.k, n)
    return min(_omega_pmf(_poisson_means(rates, t), int(n)), 1.0)


def _weighted_poisson_table(means: np.ndarray, n_max: int) -> np.ndarray:
    """Table of sum_j j N_j, N_j ~ Poisson(means_j), truncated at n_max"""
    table = np.zeros(n_max + 1)
    table[0] = 1.0
    for j, mean in enumerate(means, start=1):
        if mean == 0:
            continue
        dilated = np.zeros(n_max + 1)
        dilated[::j] = stats.poisson.pmf(np.arange(n_max // j + 1), mean)
        table = np.convolve(table, dilated)[:n_max + 1]
    return table


def check_n_max(n_max):
    if int(n_max) != n_max or n_max < 0:
        raise DomainError(f"n_max must be a non-negative integer, got {n_max}", "n_max")
    return int(n_max)


def pmf_convolution(rates: RateMatrix, t, n_max: int) -> PmfTable:
    """pmf table of M(t) for n = 0..n_max by convolving j-dilated Poisson tables"""
    t = as_multitime(t, rates.d)
    n_max = check_n_max(n_max)
    return PmfTable.from_probs(_weighted_poisson_table(_poisson_means(rates, t), n_max))


def gcp_pmf_table(rates_column, t: float, n_max: int) -> PmfTable:
    """One-parameter GCP pmf with rates (lambda_1..lambda_k) at time t"""
    column = np.asarray(rates_column, dtype=float).ravel()
    if t < 0 or not math.isfinite(t):
        raise DomainError(f"t = {t} must be finite and non-negative", "t")
    return PmfTable.from_probs(_weighted_poisson_table(column * t, check_n_max(n_max)))


def pmf_sum_of_gcps(rates: RateMatrix, t, n_max: int) -> PmfTable:
    """
    pmf table of M(t) as sum over Theta(n, d) of prod_i P(M_i(t_i) = n_i), where M_i is the
    one-parameter GCP with rates column i, each factor summed over Omega(k, n_i).
    """
    t = as_multitime(t, rates.d)
    n_max = check_n_max(n_max)
    arr = rates.array
    factors = [
        [_omega_pmf(arr[:, i] * t.t[i], m) for m in range(n_max + 1)]
        for i in range(rates.d)
    ]
    probs = []
    for n in range(n_max + 1):
        terms = [math.prod(factors[i][n_i] for i, n_i in enumerate(theta)) for theta in enumerate_theta(n, rates.d)]
        probs.append(math.fsum(terms))
    return PmfTable.from_probs(probs)


def increment_pmf(rates: RateMatrix, s, t, n_max: int) -> PmfTable:
    """Law of M(t) - M(s) for s <= t, equal to the pmf at t - s"""
    s = as_multitime(s, rates.d)
    t = as_multitime(t, rates.d)
    if not s.precedes(t):
        raise ContractViolationError(f"increment needs s <= t component-wise, got s={s.t}, t={t.t}")
    return pmf_convolution(rates, MultiTime(t=tuple(t.array - s.array)), n_max)


# ---------------------------------------------------------------------------
# Transforms and moments
# ---------------------------------------------------------------------------

def _jump_sizes(rates: RateMatrix) -> np.ndarray:
    return np.arange(1, rates.k + 1, dtype=float)


def pgf(rates: RateMatrix, t, u: float) -> float:
    """E u^M(t) = exp(-sum_j Lambda_j . t (1 - u^j)), u in [-1, 1]"""
    t = as_multitime(t, rates.d)
    if not -1.0 <= u <= 1.0:
        raise DomainError(f"pgf argument must lie in [-1, 1], got {u}", "u")
    means = _poisson_means(rates, t)
    return math.exp(-float(np.sum(means * (1.0 - u ** _jump_sizes(rates)))))


def mgf(rates: RateMatrix, t, u: float) -> float:
    """E e^{u M(t)} = exp(-sum_j Lambda_j . t (1 - e^{u j}))"""
    t = as_multitime(t, rates.d)
    means = _poisson_means(rates, t)
    return float(np.exp(-np.sum(means * (1.0 - np.exp(u * _jump_sizes(rates))))))


def mean(rates: RateMatrix, t) -> float:
    """sum_j j Lambda_j . t"""
    t = as_multitime(t, rates.d)
    return float(_jump_sizes(rates) @ _poisson_means(rates, t))


def variance(rates: RateMatrix, t) -> float:
    """sum_j j^2 Lambda_j . t"""
    t = as_multitime(t, rates.d)
    return float((_jump_sizes(rates) ** 2) @ _poisson_means(rates, t))


def truncation_index(rates: RateMatrix, t) -> int:
    """N* = ceil(mean + 12 sqrt(variance) + 20)"""
    return int(math.ceil(mean(rates, t) + 12.0 * math.sqrt(variance(rates, t)) + 20.0))

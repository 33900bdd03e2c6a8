"""
Special-function kernels shared by the distribution and verification code.

Three-parameter Mittag-Leffler function E^g_{a,b}(x), log-gamma, generalized
binomial coefficients and the alternating shift series that appears in the
space-fractional pmfs.

Every series is summed with compensated summation. When the terms are large
compared to the sum (negative arguments), the summation is carried out in
mpmath with the working precision raised to cover the cancellation; results
are always returned as floats.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from mpmath.ctx_mp import MPContext
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import special

from utils import logger
from utils.config import config
from utils.error_handler import DomainError, SeriesConvergenceError

log = logger.get_logger(__name__)

_LN10 = math.log(10.0)
_EPS = np.finfo(float).eps
_GUARD_DIGITS = 20
# e^-80 is far below the relative stopping threshold
_TAIL_DROP = 80.0

_local = threading.local()


def _mp(dps):
    """Per-thread mpmath context; the global mpmath context is not thread safe"""
    ctx = getattr(_local, "ctx", None)
    if ctx is None:
        ctx = MPContext()
        _local.ctx = ctx
    ctx.dps = dps
    return ctx


class MlfParams(BaseModel):
    """Parameters (alpha, beta, gamma) of E^gamma_{alpha,beta}"""
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(..., description="Index alpha > 0.")
    beta: float = Field(1.0, description="Index beta > 0.")
    gamma: float = Field(1.0, description="Index gamma > 0.")

    @model_validator(mode="after")
    def _check_positive(self):
        for name in ("alpha", "beta", "gamma"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise DomainError(f"Mittag-Leffler {name} must be a positive number, got {value}", name)
        return self


@dataclass(frozen=True)
class SeriesResult:
    """Value of a truncated series and a bound on its truncation error"""
    value: float
    terms_used: int
    tail_bound: float

    def as_row(self):
        return [self.value, self.terms_used, self.tail_bound]


def log_gamma(x):
    """log Gamma(x) for x > 0"""
    x = float(x)
    if not math.isfinite(x) or x <= 0:
        raise DomainError(f"log_gamma is defined for x > 0, got {x}", "x")
    return float(special.gammaln(x))


def generalized_binomial(alpha, r):
    """alpha (alpha-1) ... (alpha-r+1) / r!"""
    r = int(r)
    if r < 0:
        raise DomainError(f"binomial lower index must be non-negative, got {r}", "r")
    alpha = float(alpha)
    if alpha.is_integer():
        n = int(alpha)
        if n >= 0:
            return float(math.comb(n, r)) if r <= n else 0.0
        # binom(-m, r) = (-1)^r binom(m + r - 1, r)
        return float((-1) ** r * math.comb(r - n - 1, r))
    return float(special.binom(alpha, r))


def falling_factorial(x, m):
    """(x)_m = x (x-1) ... (x-m+1), with (x)_0 = 1"""
    if m <= 0:
        return 1.0
    return float(np.prod(x - np.arange(m, dtype=float)))


def _mlf_log_terms(alpha, beta, gamma, x, budget):
    """log|term_j| for j = 0..budget-1; Pochhammer ratio by recurrence"""
    j = np.arange(budget, dtype=float)
    steps = np.log((j[1:] - 1.0 + gamma) / j[1:])
    log_poch = np.concatenate(([0.0], np.cumsum(steps)))
    return log_poch + j * math.log(abs(x)) - special.gammaln(j * alpha + beta)


def _mlf_scan(alpha, beta, gamma, x, budget):
    """Log-terms over a prefix long enough to reach the decaying tail (terms are unimodal in j)"""
    size = 256
    while True:
        size = min(size, budget)
        log_terms = _mlf_log_terms(alpha, beta, gamma, x, size)
        if size == budget or log_terms[-1] < log_terms.max() - _TAIL_DROP:
            return log_terms
        size *= 4


def _stop_index(magnitudes, partial, start, eps):
    """First j >= start with two consecutive terms below eps * max(1, |partial sum|)"""
    threshold = eps * np.maximum(1.0, np.abs(partial))
    small = magnitudes < threshold
    both = small[1:] & small[:-1]
    candidates = np.nonzero(both[max(start - 1, 0):])[0]
    if candidates.size == 0:
        return None
    return int(candidates[0]) + max(start - 1, 0) + 1


def _geometric_tail(last, previous):
    if previous == 0.0 or last == 0.0:
        return 0.0
    ratio = abs(last / previous)
    if ratio >= 1.0:
        return math.inf
    return abs(last) * ratio / (1.0 - ratio)


@lru_cache(maxsize=65536)
def _mlf3_cached(alpha, beta, gamma, x):
    settings = config.series
    if x == 0.0:
        return SeriesResult(float(special.rgamma(beta)), 1, 0.0)
    if abs(x) > settings.x_switch:
        raise SeriesConvergenceError(
            f"|x| = {abs(x):g} exceeds the series switch point {settings.x_switch:g}; "
            "rescale the argument or reject the parameter set",
            terms_used=0
        )

    budget = settings.term_budget
    log_terms = _mlf_scan(alpha, beta, gamma, x, budget)
    budget = log_terms.size
    j_peak = int(np.argmax(log_terms))
    peak = float(log_terms[j_peak])

    if x > 0 or peak <= settings.float_peak_limit:
        signs = np.where(np.arange(budget) % 2 == 1, -1.0, 1.0) if x < 0 else np.ones(budget)
        magnitudes = np.exp(log_terms)
        terms = signs * magnitudes
        stop = _stop_index(magnitudes, np.cumsum(terms), j_peak + 1, settings.rel_eps)
        if stop is None:
            raise SeriesConvergenceError(
                f"E^{gamma:g}_{alpha:g},{beta:g}({x:g}) did not converge within {budget} terms",
                terms_used=budget, last_term=float(terms[-1])
            )
        used = terms[:stop + 1]
        value = math.fsum(used)
        rounding = float(np.sum(np.abs(used) * (np.abs(log_terms[:stop + 1]) + 4.0))) * _EPS
        tail = _geometric_tail(float(terms[stop]), float(terms[stop - 1]))
        return SeriesResult(value, stop + 1, tail + rounding + abs(value) * _EPS)

    dps = _GUARD_DIGITS + int(math.ceil(2.0 * peak / _LN10))
    log.debug("extended precision Mittag-Leffler sum", extra={"x": x, "dps": dps, "peak": peak})
    ctx = _mp(dps)
    eps = settings.rel_eps
    xm = ctx.mpf(x)
    alpha_m, beta_m, gamma_m = ctx.mpf(alpha), ctx.mpf(beta), ctx.mpf(gamma)
    coef = ctx.mpf(1)
    total = ctx.mpf(0)
    previous = None
    previous_small = False
    for j in range(settings.term_budget):
        if j > 0:
            coef = coef * (j - 1 + gamma_m) / j * xm
        term = coef * ctx.rgamma(j * alpha_m + beta_m)
        total += term
        # relative to |S|; the guard digits cover tiny sums
        small = abs(term) < eps * (abs(total) if total else 1.0)
        if small and previous_small and j > j_peak:
            value = float(total)
            tail = _geometric_tail(float(term), float(previous))
            return SeriesResult(value, j + 1, tail + abs(value) * _EPS)
        previous_small = small
        previous = term
    raise SeriesConvergenceError(
        f"E^{gamma:g}_{alpha:g},{beta:g}({x:g}) did not converge within {settings.term_budget} terms",
        terms_used=settings.term_budget, last_term=float(previous)
    )


def mlf3(params: MlfParams, x: float) -> SeriesResult:
    """
    Three-parameter Mittag-Leffler function
    E^gamma_{alpha,beta}(x) = sum_j Gamma(j+gamma) x^j / (Gamma(gamma) j! Gamma(j alpha + beta)).

    Args:
        params: validated (alpha, beta, gamma)
        x: real argument, |x| <= the configured switch point

    Returns:
        SeriesResult with value, number of terms and truncation bound

    Raises:
        SeriesConvergenceError: argument beyond the switch point or term budget exhausted
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"Mittag-Leffler argument must be finite, got {x}", "x")
    return _mlf3_cached(params.alpha, params.beta, params.gamma, x)


def mittag_leffler(alpha, x, beta=1.0):
    """Two-parameter E_{alpha,beta}(x) as a float"""
    return mlf3(MlfParams(alpha=alpha, beta=beta, gamma=1.0), x).value


def _shift_log_terms(alpha, z, m, budget):
    r = np.arange(budget, dtype=float)
    return r * math.log(z) - special.gammaln(r + 1.0) + m * np.log(alpha * r + m + 1.0)


@lru_cache(maxsize=65536)
def _shift_series_cached(alpha, z, m):
    settings = config.series
    if z == 0.0:
        return SeriesResult(1.0 if m == 0 else 0.0, 1, 0.0)
    budget = settings.alternating_term_budget
    eps = settings.rel_eps
    # past the peak of z^r r^m / r! and past the zeros of (alpha r)_m
    start = int(math.ceil(max(z + m, (m - 1) / alpha))) + 1
    if start >= budget:
        raise SeriesConvergenceError(
            f"shift series with z={z:g}, m={m} needs more than {budget} terms",
            terms_used=0
        )
    peak = float(np.max(_shift_log_terms(alpha, z, m, min(budget, 4 * start + 16))))
    dps = _GUARD_DIGITS + int(math.ceil(2.0 * max(peak, 0.0) / _LN10))
    ctx = _mp(dps)
    zm = -ctx.mpf(z)
    alpha_m = ctx.mpf(alpha)
    power = ctx.mpf(1)
    total = ctx.mpf(0)
    previous_small = False
    for r in range(budget):
        if r > 0:
            power = power * zm / r
        ar = alpha_m * r
        ff = ctx.mpf(1)
        for i in range(m):
            ff *= ar - i
        term = power * ff
        total += term
        small = abs(term) < eps * max(1.0, abs(total))
        if small and previous_small and r >= start:
            # geometric majorant of z^r (alpha r)^m / r! beyond r
            rho = z / (r + 2) * ((r + 2) / (r + 1)) ** m
            if rho < 1.0:
                nxt = math.exp((r + 1) * math.log(z) + m * math.log(alpha * (r + 1)) - math.lgamma(r + 2))
                value = float(total)
                return SeriesResult(value, r + 1, nxt / (1.0 - rho) + abs(value) * _EPS)
        previous_small = small
    raise SeriesConvergenceError(
        f"shift series with alpha={alpha:g}, z={z:g}, m={m} did not converge within {budget} terms; "
        "the time argument is too large for the series regime",
        terms_used=budget
    )


def shift_series(alpha, z, m):
    """
    Alternating series sum_r (-z)^r Gamma(alpha r + 1) / (r! Gamma(alpha r + 1 - m)).

    Gamma(alpha r + 1)/Gamma(alpha r + 1 - m) is the falling factorial (alpha r)_m,
    so the poles of the denominator give exact zeros.
    """
    z = float(z)
    if z < 0 or not math.isfinite(z):
        raise DomainError(f"shift series argument must be finite and non-negative, got {z}", "z")
    if m < 0:
        raise DomainError(f"shift series order must be non-negative, got {m}", "m")
    return _shift_series_cached(float(alpha), z, int(m))

"""
Time-changed variants of the multiparameter GCP.

space_*  M(D_1(t_1), ..., D_d(t_d)) with independent stable subordinators D_i of index alpha_i
time_*   M(L_1(t_1), ..., L_d(t_d)) with independent inverse stable subordinators L_i

The multivariate variants use one scalar time for every coordinate and have the law
of the multiparameter variant at the diagonal point t.1. An order alpha_i = 1 stands
for the identity time change of coordinate i.
"""
from __future__ import annotations

import itertools
import math
from enum import Enum
from typing import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import special

from utils import logger
from utils.config import config
from utils.error_handler import DomainError, EnumerationLimitError, QuadratureError, ShapeError

from . import gcp_core
from .gcp_core import MultiTime, PmfTable, RateMatrix, as_multitime
from .special_functions import MlfParams, SeriesResult, falling_factorial, mittag_leffler, mlf3, shift_series

log = logger.get_logger(__name__)

PGF_RESIDUAL_POINTS = (-0.5, 0.0, 0.5, 0.9)


class FractionalOrders(BaseModel):
    """Subordinator indices alpha_1..alpha_d, each in (0, 1]"""
    model_config = ConfigDict(frozen=True)

    alpha: tuple[float, ...] = Field(..., description="Index alpha_i of the time change of axis i.")

    @model_validator(mode="after")
    def _check_orders(self):
        if len(self.alpha) == 0:
            raise ShapeError("alpha must not be empty", "alpha")
        for i, value in enumerate(self.alpha):
            if not math.isfinite(value) or not 0.0 < value <= 1.0:
                raise DomainError(f"alpha[{i}] = {value} must lie in (0, 1]", "alpha")
        return self

    @classmethod
    def uniform(cls, alpha, d) -> "FractionalOrders":
        return cls(alpha=(float(alpha),) * d)

    @property
    def d(self) -> int:
        return len(self.alpha)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.alpha, dtype=float)


class VariantKind(str, Enum):
    BASE = "base"
    SPACE_MULTIPARAMETER = "space_multiparameter"
    SPACE_MULTIVARIATE = "space_multivariate"
    TIME_MULTIPARAMETER = "time_multiparameter"
    TIME_MULTIVARIATE = "time_multivariate"

    @classmethod
    def parse(cls, tag) -> "VariantKind":
        """Accepts the enum values and the short command-line names"""
        if isinstance(tag, cls):
            return tag
        short = {"space": cls.SPACE_MULTIPARAMETER, "space-mv": cls.SPACE_MULTIVARIATE,
                 "time": cls.TIME_MULTIPARAMETER, "time-mv": cls.TIME_MULTIVARIATE}
        if tag in short:
            return short[tag]
        try:
            return cls(tag)
        except ValueError:
            known = ", ".join([k.value for k in cls] + list(short))
            raise DomainError(f"unknown variant '{tag}', expected one of {known}", "variant")

    @property
    def is_multivariate(self) -> bool:
        return self in (VariantKind.SPACE_MULTIVARIATE, VariantKind.TIME_MULTIVARIATE)

    @property
    def is_space(self) -> bool:
        return self in (VariantKind.SPACE_MULTIPARAMETER, VariantKind.SPACE_MULTIVARIATE)

    @property
    def is_time(self) -> bool:
        return self in (VariantKind.TIME_MULTIPARAMETER, VariantKind.TIME_MULTIVARIATE)


def _prepare(rates: RateMatrix, t, orders: FractionalOrders, need_positive_mu=True):
    if orders.d != rates.d:
        raise ShapeError(f"alpha has {orders.d} entries, rates have d={rates.d}", "alpha")
    t = as_multitime(t, rates.d)
    if need_positive_mu:
        mu = rates.column_sums
        if np.any(mu <= 0):
            raise DomainError("every column sum mu_i must be positive for fractional variants", "rates")
    return t


def _scalar_time(t):
    if np.ndim(t) != 0:
        raise ShapeError("multivariate variants take a scalar time", "t")
    t = float(t)
    if not math.isfinite(t) or t < 0:
        raise DomainError(f"t = {t} must be finite and non-negative", "t")
    return t


def _psi(rates: RateMatrix, u) -> np.ndarray:
    """psi_i(u) = sum_j lambda_ji (1 - u^j) per axis"""
    if not -1.0 <= u <= 1.0:
        raise DomainError(f"pgf argument must lie in [-1, 1], got {u}", "u")
    jumps = np.arange(1, rates.k + 1, dtype=float)
    return (1.0 - u ** jumps) @ rates.array


# ---------------------------------------------------------------------------
# Space-fractional variants
# ---------------------------------------------------------------------------

def space_frac_pgf(rates: RateMatrix, t, orders: FractionalOrders, u: float) -> float:
    """exp(-sum_i t_i psi_i(u)^alpha_i)"""
    t = _prepare(rates, t, orders, need_positive_mu=False)
    return math.exp(-float(np.sum(t.array * _psi(rates, u) ** orders.array)))


def space_frac_pgf_multivariate(rates: RateMatrix, t: float, orders: FractionalOrders, u: float) -> float:
    """exp(-t sum_i psi_i(u)^alpha_i)"""
    return space_frac_pgf(rates, MultiTime.diagonal(_scalar_time(t), rates.d), orders, u)


def space_frac_laplace_multivariate(rates: RateMatrix, t: float, orders: FractionalOrders, eta: float) -> float:
    """E exp(-eta M) = exp(-t sum_i (sum_j lambda_ji (1 - e^{-eta j}))^alpha_i), eta >= 0"""
    if eta < 0 or not math.isfinite(eta):
        raise DomainError(f"Laplace argument must be finite and non-negative, got {eta}", "eta")
    return space_frac_pgf_multivariate(rates, t, orders, math.exp(-eta))


def _space_axis_table(rates: RateMatrix, i, t_i, alpha_i, n_max):
    """
    pmf of the axis-i component for m = 0..n_max with error bounds:
    q_i(m) = sum over Omega(k, m) of prod_j (-lambda_ji/mu_i)^x_j / x_j! * S(alpha_i, mu_i^alpha_i t_i, sum_j x_j)
    """
    column = rates.array[:, i]
    mu = float(column.sum())
    z = mu ** alpha_i * t_i
    ratios = -column / mu
    values, bounds, terms = [], [], 0
    for m in range(n_max + 1):
        parts, errs = [], []
        for comp in gcp_core.enumerate_omega(rates.k, m):
            coef = math.prod(r ** x / math.factorial(x) for r, x in zip(ratios, comp))
            if coef == 0.0:
                continue
            series = shift_series(alpha_i, z, sum(comp))
            parts.append(coef * series.value)
            errs.append(abs(coef) * series.tail_bound)
            terms = max(terms, series.terms_used)
        values.append(math.fsum(parts))
        bounds.append(math.fsum(errs))
    return np.asarray(values), np.asarray(bounds), terms


def _convolve_axes(tables, bounds, n_max):
    """Theta(n, d) sum of axis products and a bound on its error from the axis bounds"""
    value = np.zeros(n_max + 1)
    value[0] = 1.0
    upper = value.copy()
    for table, bound in zip(tables, bounds):
        value = np.convolve(value, table)[:n_max + 1]
        upper = np.convolve(upper, np.abs(table) + bound)[:n_max + 1]
    return value, upper - np.abs(value)


def _space_tables(rates, t, orders, n_max):
    tables, bounds, terms = [], [], 0
    for i in range(rates.d):
        values, errs, used = _space_axis_table(rates, i, t.t[i], orders.alpha[i], n_max)
        tables.append(values)
        bounds.append(errs)
        terms = max(terms, used)
    value, bound = _convolve_axes(tables, bounds, n_max)
    return value, bound, terms


def space_frac_pmf(rates: RateMatrix, t, orders: FractionalOrders, n: int) -> SeriesResult:
    """
    P(M(D(t)) = n) from the alternating series of the stable time change.

    Raises:
        SeriesConvergenceError: the series needs more than the term budget (t too large)
    """
    t = _prepare(rates, t, orders)
    n = gcp_core.check_n_max(n)
    value, bound, terms = _space_tables(rates, t, orders, n)
    return SeriesResult(min(max(float(value[n]), 0.0), 1.0), terms, float(bound[n]))


def space_frac_pmf_multivariate(rates: RateMatrix, t: float, orders: FractionalOrders, n: int) -> SeriesResult:
    return space_frac_pmf(rates, MultiTime.diagonal(_scalar_time(t), rates.d), orders, n)


def space_frac_pmf_table(rates: RateMatrix, t, orders: FractionalOrders, n_max: int) -> PmfTable:
    t = _prepare(rates, t, orders)
    value, _, _ = _space_tables(rates, t, orders, gcp_core.check_n_max(n_max))
    return PmfTable.from_probs(value)


# ---------------------------------------------------------------------------
# Time-fractional variants
# ---------------------------------------------------------------------------

def time_frac_pgf(rates: RateMatrix, t, orders: FractionalOrders, u: float) -> float:
    """prod_i E_{alpha_i,1}(-t_i^alpha_i psi_i(u))"""
    t = _prepare(rates, t, orders, need_positive_mu=False)
    psi = _psi(rates, u)
    return math.prod(
        mittag_leffler(a, -(t_i ** a) * p) for a, t_i, p in zip(orders.alpha, t.t, psi)
    )


class _TimeKernel:
    """m! E^{m+1}_{alpha, alpha m + 1}(-t^alpha mu) per axis, cached by m"""

    def __init__(self, rates: RateMatrix, t: MultiTime, orders: FractionalOrders):
        self.alpha = orders.alpha
        self.scaled = [t_i ** a for a, t_i in zip(orders.alpha, t.t)]
        self.mu = rates.column_sums
        # a_ji = lambda_ji t_i^alpha_i
        self.weights = rates.array * np.asarray(self.scaled)
        self._cache = {}

    def __call__(self, i, m):
        key = (i, m)
        if key not in self._cache:
            a = self.alpha[i]
            params = MlfParams(alpha=a, beta=a * m + 1.0, gamma=m + 1.0)
            self._cache[key] = math.factorial(m) * mlf3(params, -self.scaled[i] * self.mu[i]).value
        return self._cache[key]


def _time_pmf_omega(rates, kernel, n):
    """Outer sum over Omega(k, n), split of each x_j over the d axes"""
    k, d = rates.k, rates.d
    cap = config.enumeration.cap
    comps = gcp_core.enumerate_omega(k, n)
    count = sum(math.prod(math.comb(x + d - 1, d - 1) for x in comp) for comp in comps)
    if count > cap:
        raise EnumerationLimitError(f"time-fractional terms for n={n}", count, cap)
    total = []
    for comp in comps:
        splits = [gcp_core.enumerate_theta(x, d) for x in comp]
        for choice in itertools.product(*splits):
            counts = np.asarray(choice, dtype=int).reshape(k, d)
            monomial = 1.0
            for (j, i), c in np.ndenumerate(counts):
                if c:
                    monomial *= kernel.weights[j, i] ** c / math.factorial(c)
            if monomial == 0.0:
                continue
            m = counts.sum(axis=0)
            total.append(monomial * math.prod(kernel(i, int(m[i])) for i in range(d)))
    return math.fsum(total)


def _time_axis_table(rates, kernel, i, n_max):
    """h_i(m) = sum over Omega(k, m) of prod_j a_ji^y_j / y_j! * kernel(i, sum_j y_j)"""
    out = []
    for m in range(n_max + 1):
        terms = []
        for comp in gcp_core.enumerate_omega(rates.k, m):
            monomial = math.prod(kernel.weights[j, i] ** y / math.factorial(y) for j, y in enumerate(comp))
            if monomial:
                terms.append(monomial * kernel(i, sum(comp)))
        out.append(math.fsum(terms))
    return out


def _time_pmf_theta(rates, kernel, n):
    """Outer sum over Theta(n, d) of products of axis pmfs"""
    tables = [_time_axis_table(rates, kernel, i, n) for i in range(rates.d)]
    return math.fsum(
        math.prod(tables[i][n_i] for i, n_i in enumerate(theta))
        for theta in gcp_core.enumerate_theta(n, rates.d)
    )


def time_frac_pmf(rates: RateMatrix, t, orders: FractionalOrders, n: int, order: str = "omega") -> float:
    """
    P(M(L(t)) = n) through three-parameter Mittag-Leffler functions.

    Args:
        order: "omega" sums jump-size compositions outermost, "theta" sums the axis split
            of n outermost; both give the same value

    Raises:
        EnumerationLimitError: too many terms
        SeriesConvergenceError: a Mittag-Leffler argument is beyond the series regime
    """
    t = _prepare(rates, t, orders)
    n = gcp_core.check_n_max(n)
    kernel = _TimeKernel(rates, t, orders)
    if order == "omega":
        value = _time_pmf_omega(rates, kernel, n)
    elif order == "theta":
        value = _time_pmf_theta(rates, kernel, n)
    else:
        raise DomainError(f"order must be 'omega' or 'theta', got '{order}'", "order")
    return min(max(value, 0.0), 1.0)


def time_frac_pmf_table(rates: RateMatrix, t, orders: FractionalOrders, n_max: int) -> PmfTable:
    t = _prepare(rates, t, orders)
    n_max = gcp_core.check_n_max(n_max)
    kernel = _TimeKernel(rates, t, orders)
    tables = [np.asarray(_time_axis_table(rates, kernel, i, n_max)) for i in range(rates.d)]
    value, _ = _convolve_axes(tables, [np.zeros(n_max + 1)] * rates.d, n_max)
    return PmfTable.from_probs(value)


def time_frac_factorial_moment(rates: RateMatrix, t, orders: FractionalOrders, n: int) -> float:
    """
    E[M (M-1) ... (M-n+1)] = n! sum over Theta(n, d) of prod_i c_i(n_i), where
    c_i(m) = sum_r t_i^{r alpha_i} / Gamma(r alpha_i + 1) sum over compositions (l_1..l_r) of m
    into r positive parts of prod_s sum_j lambda_ji (j)_{l_s} / l_s!, and c_i(0) = 1.
    """
    t = _prepare(rates, t, orders, need_positive_mu=False)
    n = gcp_core.check_n_max(n)
    arr = rates.array
    jumps = range(1, rates.k + 1)

    def block(i, length):
        return sum(arr[j - 1, i] * falling_factorial(j, length) for j in jumps) / math.factorial(length)

    def axis(i, m):
        a = orders.alpha[i]
        total = []
        for r in range(1, m + 1):
            inner = math.fsum(
                math.prod(block(i, length) for length in parts)
                for parts in gcp_core.enumerate_positive_compositions(m, r)
            )
            total.append(t.t[i] ** (r * a) / special.gamma(r * a + 1.0) * inner)
        return math.fsum(total) if m else 1.0

    coeffs = [[axis(i, m) for m in range(n + 1)] for i in range(rates.d)]
    return math.factorial(n) * math.fsum(
        math.prod(coeffs[i][n_i] for i, n_i in enumerate(theta))
        for theta in gcp_core.enumerate_theta(n, rates.d)
    )


def time_frac_mean(rates: RateMatrix, t, orders: FractionalOrders) -> float:
    """sum_i sum_j j lambda_ji t_i^alpha_i / Gamma(alpha_i + 1)"""
    t = _prepare(rates, t, orders, need_positive_mu=False)
    jumps = np.arange(1, rates.k + 1, dtype=float)
    a = orders.array
    return float(np.sum((jumps @ rates.array) * t.array ** a / special.gamma(a + 1.0)))


def time_frac_variance(rates: RateMatrix, t, orders: FractionalOrders) -> float:
    """
    sum_i [ sum_j j^2 lambda_ji t_i^a_i / Gamma(a_i+1)
            + (sum_j j lambda_ji t_i^a_i)^2 (2/Gamma(2a_i+1) - 1/Gamma(a_i+1)^2) ]
    """
    t = _prepare(rates, t, orders, need_positive_mu=False)
    jumps = np.arange(1, rates.k + 1, dtype=float)
    a = orders.array
    scaled = t.array ** a
    first = (jumps ** 2 @ rates.array) * scaled / special.gamma(a + 1.0)
    spread = 2.0 / special.gamma(2.0 * a + 1.0) - 1.0 / special.gamma(a + 1.0) ** 2
    second = ((jumps @ rates.array) * scaled) ** 2 * spread
    return float(np.sum(first + second))


def time_frac_multivariate_pmf(rates, t: float, orders, n: int, order: str = "omega") -> float:
    return time_frac_pmf(rates, MultiTime.diagonal(_scalar_time(t), rates.d), orders, n, order)


def time_frac_multivariate_pgf(rates, t: float, orders, u: float) -> float:
    return time_frac_pgf(rates, MultiTime.diagonal(_scalar_time(t), rates.d), orders, u)


def time_frac_multivariate_mean(rates, t: float, orders) -> float:
    return time_frac_mean(rates, MultiTime.diagonal(_scalar_time(t), rates.d), orders)


def time_frac_multivariate_variance(rates, t: float, orders) -> float:
    return time_frac_variance(rates, MultiTime.diagonal(_scalar_time(t), rates.d), orders)


# ---------------------------------------------------------------------------
# Dispatch by variant
# ---------------------------------------------------------------------------

def variant_time(kind: VariantKind, t, d) -> MultiTime:
    """The multiparameter time point at which a variant's law is evaluated"""
    if kind.is_multivariate:
        return MultiTime.diagonal(_scalar_time(t), d)
    return as_multitime(t, d)


def variant_pmf_table(rates: RateMatrix, t, orders: FractionalOrders, kind: VariantKind, n_max: int) -> PmfTable:
    point = variant_time(kind, t, rates.d)
    if kind is VariantKind.BASE:
        return gcp_core.pmf_convolution(rates, point, n_max)
    if kind.is_space:
        return space_frac_pmf_table(rates, point, orders, n_max)
    return time_frac_pmf_table(rates, point, orders, n_max)


def variant_pgf(rates: RateMatrix, t, orders: FractionalOrders, kind: VariantKind, u: float) -> float:
    point = variant_time(kind, t, rates.d)
    if kind is VariantKind.BASE:
        return gcp_core.pgf(rates, point, u)
    if kind.is_space:
        return space_frac_pgf(rates, point, orders, u)
    return time_frac_pgf(rates, point, orders, u)


# ---------------------------------------------------------------------------
# Fractional derivatives and governing equations
# ---------------------------------------------------------------------------

def caputo_derivative(f: Callable[[float], float], alpha: float, t: float, nodes: int | None = None) -> float:
    """
    Caputo derivative of order alpha in (0, 1] of f at t.

    For alpha < 1 the L1 scheme integrates the kernel (t - s)^{-alpha} exactly against the
    piecewise-linear interpolant of f on a mesh graded towards s = 0 (exact for linear f).
    alpha = 1 returns the central-difference derivative.

    Raises:
        QuadratureError: f produced a non-finite value
    """
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"Caputo order must lie in (0, 1], got {alpha}", "alpha")
    if t < 0 or not math.isfinite(t):
        raise DomainError(f"t = {t} must be finite and non-negative", "t")
    if alpha == 1.0:
        value = _finite_difference(f, t)
        if not math.isfinite(value):
            raise QuadratureError(f"non-finite derivative at t={t}")
        return float(value)
    if t == 0.0:
        return 0.0

    nodes = nodes or config.quadrature.caputo_nodes
    grading = min((2.0 - alpha) / alpha, 8.0)
    mesh = t * (np.arange(nodes + 1) / nodes) ** grading
    values = np.asarray([f(s) for s in mesh], dtype=float)
    if not np.all(np.isfinite(values)):
        raise QuadratureError(f"integrand is not finite on the Caputo mesh at t={t}")
    steps = np.diff(mesh)
    slopes = np.diff(values) / steps
    kernel = ((t - mesh[:-1]) ** (1.0 - alpha) - (t - mesh[1:]) ** (1.0 - alpha)) / special.gamma(2.0 - alpha)
    value = float(np.sum(slopes * kernel))
    if not math.isfinite(value):
        raise QuadratureError(f"Caputo quadrature diverged at t={t}")
    return value


def _ode_rhs(rates: RateMatrix, i, table, n):
    """-sum_j lambda_ji (p(n) - p(n-j)) on axis i"""
    column = rates.array[:, i]
    total = -column.sum() * table[n]
    for j in range(1, min(n, rates.k) + 1):
        total += column[j - 1] * table[n - j]
    return total


def _finite_difference(f, t):
    """Central difference, one-sided second order near t = 0"""
    h = config.quadrature.fd_step * max(1.0, t)
    if t >= h:
        return (f(t + h) - f(t - h)) / (2.0 * h)
    return (-3.0 * f(t) + 4.0 * f(t + h) - f(t + 2.0 * h)) / (2.0 * h)


def _coordinates(d, coordinate):
    if coordinate is None:
        return range(d)
    if not 0 <= coordinate < d:
        raise DomainError(f"coordinate must lie in 0..{d - 1}, got {coordinate}", "coordinate")
    return [coordinate]


def governing_system_residual(rates: RateMatrix, t, orders: FractionalOrders | None, n: int,
                              variant, coordinate: int | None = None) -> float:
    """
    max over axes i of |LHS - RHS| of the variant's governing equation at (n, t).

    base    d/dt_i p(n, t) = -sum_j lambda_ji (p(n, t) - p(n - j, t))
    time    the same system with the Caputo derivative of order alpha_i in t_i
    space   pgf form d/dt_i G(u, t) = -psi_i(u)^alpha_i G(u, t), checked at
            u in PGF_RESIDUAL_POINTS (n is not used)
    """
    kind = VariantKind.parse(variant)
    point = variant_time(kind, t, rates.d)
    n = gcp_core.check_n_max(n)
    if orders is None:
        orders = FractionalOrders.uniform(1.0, rates.d)
    _prepare(rates, point, orders, need_positive_mu=kind is not VariantKind.BASE)
    worst = 0.0
    for i in _coordinates(rates.d, coordinate):
        if kind is VariantKind.BASE:
            def p(s, i=i):
                return gcp_core.pmf_convolution(rates, point.replace(i, s), n).probs
            lhs = _finite_difference(lambda s: p(s)[n], point.t[i])
            residual = abs(lhs - _ode_rhs(rates, i, p(point.t[i]), n))
        elif kind.is_time:
            def p(s, i=i):
                return time_frac_pmf_table(rates, point.replace(i, s), orders, n).probs
            lhs = caputo_derivative(lambda s: p(s)[n], orders.alpha[i], point.t[i])
            residual = abs(lhs - _ode_rhs(rates, i, p(point.t[i]), n))
        else:
            residual = 0.0
            for u in PGF_RESIDUAL_POINTS:
                def g(s, i=i, u=u):
                    return space_frac_pgf(rates, point.replace(i, s), orders, u)
                psi = _psi(rates, u)[i]
                rhs = -(psi ** orders.alpha[i]) * g(point.t[i])
                residual = max(residual, abs(_finite_difference(g, point.t[i]) - rhs))
        log.debug("governing residual", extra={"variant": kind.value, "axis": i, "residual": residual})
        worst = max(worst, residual)
    return worst

"""Maxima of independent, heterogeneous normal variables.

Exact CDF and quantiles of the maximum, the derivative of a quantile under
a mean shift of one variable, dispersive-order checks, a log-concavity
certificate for f / Phi, and construction of fluctuation intervals of
width ``min sigma / sqrt(1 + log n)`` by exact-CDF search.

The CDF is evaluated as a sum of ``log Phi`` terms.  Identical specs are
grouped, so a million i.i.d. variables cost one evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import log_ndtr, logsumexp, ndtr

from .errors import InvalidParameter, WitnessNotFound

_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


@dataclass(frozen=True)
class NormalSpec:
    mean: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidParameter(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class FluctuationInterval:
    a_n: float
    b_n: float
    c: float
    lower_tail: float = float("nan")  # P(X <= a_n)
    upper_tail: float = float("nan")  # P(X >= b_n)

    def __post_init__(self):
        if self.a_n > self.b_n:
            raise InvalidParameter(f"a_n={self.a_n} exceeds b_n={self.b_n}")

    @property
    def width(self) -> float:
        return self.b_n - self.a_n


class MaxOfNormals:
    """Grouped representation of a list of NormalSpec."""

    def __init__(self, specs: Sequence[NormalSpec]):
        if len(specs) == 0:
            raise InvalidParameter("specs must be nonempty")
        arr = np.array([(s.mean, s.sigma) for s in specs], dtype=np.float64)
        uniq, counts = np.unique(arr, axis=0, return_counts=True)
        self.mu = uniq[:, 0]
        self.sigma = uniq[:, 1]
        self.count = counts.astype(np.float64)
        self.n = len(specs)

    @classmethod
    def iid(cls, n: int, mean: float = 0.0, sigma: float = 1.0) -> "MaxOfNormals":
        obj = cls([NormalSpec(mean, sigma)])
        obj.count[:] = n
        obj.n = n
        return obj

    def log_cdf(self, z: float) -> float:
        return float(np.sum(self.count * log_ndtr((z - self.mu) / self.sigma)))

    def cdf(self, z: float) -> float:
        return math.exp(self.log_cdf(z))

    def quantile(self, t: float) -> float:
        if not 0 < t < 1:
            raise InvalidParameter(f"t must lie in (0, 1), got {t}")
        target = math.log(t)
        f = lambda z: self.log_cdf(z) - target
        lo = float(np.min(self.mu - 8 * self.sigma))
        hi = float(np.max(self.mu + 8 * self.sigma))
        step = float(np.max(self.sigma))
        while f(lo) > 0:
            lo -= step
            step *= 2
        step = float(np.max(self.sigma))
        while f(hi) < 0:
            hi += step
            step *= 2
        return brentq(f, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=500)

    def log_hazard_terms(self, z: float) -> np.ndarray:
        """log(f_i(z) / F_i(z)) per group, computed without forming f or F."""
        u = (z - self.mu) / self.sigma
        return -0.5 * u * u - _LOG_SQRT_2PI - np.log(self.sigma) - log_ndtr(u)


def _as_max(specs) -> MaxOfNormals:
    return specs if isinstance(specs, MaxOfNormals) else MaxOfNormals(specs)


def phi(x):
    return np.exp(-0.5 * np.square(x)) / math.sqrt(2 * math.pi)


def Phi(x):
    return ndtr(x)


def logconcavity_certificate(grid) -> tuple[float, float]:
    """min over ``grid`` of F(x) = -x f(x) Phi(x) - f(x)^2 + Phi(x)^2, and its location."""
    x = np.asarray(grid, dtype=np.float64)
    if x.size == 0 or not np.all(np.isfinite(x)):
        raise InvalidParameter("grid must be a nonempty finite array")
    f = phi(x)
    F = ndtr(x)
    vals = -x * f * F - f * f + F * F
    k = int(np.argmin(vals))
    return float(vals[k]), float(x[k])


def certificate_value(x: float) -> float:
    f = float(phi(x))
    F = float(ndtr(x))
    return -x * f * F - f * f + F * F


def max_cdf(z: float, specs) -> float:
    """P(max_i Z_i <= z) = prod_i Phi((z - mean_i) / sigma_i)."""
    return _as_max(specs).cdf(z)


def max_quantile(t: float, specs) -> float:
    """The unique z with max_cdf(z) = t."""
    return _as_max(specs).quantile(t)


def quantile_shift_derivative(t: float, specs: Sequence[NormalSpec], shifted_index: int) -> float:
    """d/da of the t-quantile of max(Z_k + a, Z_j for j != k), at a = 0.

    Equals g_k(z) / sum_i g_i(z) with g_i = f_i / F_i and z the t-quantile;
    the ratio is evaluated in log space.
    """
    if not 0 < t < 1:
        raise InvalidParameter(f"t must lie in (0, 1), got {t}")
    specs = list(specs)
    if not 0 <= shifted_index < len(specs):
        raise InvalidParameter(f"shifted_index {shifted_index} out of range")
    z = max_quantile(t, specs)
    mu = np.array([s.mean for s in specs])
    sg = np.array([s.sigma for s in specs])
    u = (z - mu) / sg
    logg = -0.5 * u * u - _LOG_SQRT_2PI - np.log(sg) - log_ndtr(u)
    return float(np.exp(logg[shifted_index] - logsumexp(logg)))


@dataclass(frozen=True)
class DispersiveResult:
    holds: bool
    worst_margin: float
    worst_pair: tuple


def dispersive_check(q_X: Callable[[float], float], q_Y: Callable[[float], float], pairs, tol: float = 1e-9) -> DispersiveResult:
    """Is X less dispersed than Y on every (a, b)?  margin = gap_Y - gap_X."""
    worst = math.inf
    worst_pair = None
    for a, b in pairs:
        if not 0 < a <= b < 1:
            raise InvalidParameter(f"invalid probability pair {(a, b)}")
        m = (q_Y(b) - q_Y(a)) - (q_X(b) - q_X(a))
        if m < worst:
            worst, worst_pair = m, (a, b)
    return DispersiveResult(worst >= -tol, float(worst), worst_pair)


def quantile_grid(lo: float = 0.01, hi: float = 0.99, step: float = 0.005) -> np.ndarray:
    k = int(round((hi - lo) / step))
    return lo + step * np.arange(k + 1)


def _interval_at(mx: MaxOfNormals, t: float, width: float, c: float) -> FluctuationInterval:
    a = mx.quantile(t)
    if mx.cdf(a) < t:  # root tolerance may land a hair low
        a += 1e-13 * max(1.0, abs(a))
    while mx.cdf(a) < t:
        a = math.nextafter(a, math.inf)
    return FluctuationInterval(a, a + width, c, mx.cdf(a), -math.expm1(mx.log_cdf(a + width)))


def _width(mx: MaxOfNormals) -> float:
    return float(np.min(mx.sigma)) / math.sqrt(1 + math.log(mx.n))


def fluct_interval(specs, c_target: float, t_grid=None) -> FluctuationInterval:
    """Interval of width min sigma / sqrt(1 + log n) with both exact tails >= c_target.

    Left endpoints are the exact t-quantiles of the maximum, scanned upward
    from t = c_target over ``t_grid``; the first one whose upper tail also
    reaches c_target is returned.
    """
    if not 0 < c_target <= 0.5:
        raise InvalidParameter(f"c_target must lie in (0, 1/2], got {c_target}")
    mx = _as_max(specs)
    width = _width(mx)
    grid = quantile_grid() if t_grid is None else np.asarray(t_grid, dtype=np.float64)
    best = -1.0
    for t in [c_target, *sorted(float(t) for t in grid if c_target < t < 1)]:
        fi = _interval_at(mx, t, width, c_target)
        if fi.lower_tail >= c_target and fi.upper_tail >= c_target:
            return fi
        best = max(best, min(fi.lower_tail, fi.upper_tail))
    for t in grid:  # nothing feasible: report the best achievable level
        if 0 < t < c_target:
            fi = _interval_at(mx, float(t), width, c_target)
            best = max(best, min(fi.lower_tail, fi.upper_tail))
    raise WitnessNotFound(best)


def achievable_interval(specs, t_grid=None) -> FluctuationInterval:
    """The scanned interval maximising min(lower tail, upper tail); its c is that minimum."""
    mx = _as_max(specs)
    width = _width(mx)
    best = None
    for t in quantile_grid() if t_grid is None else t_grid:
        fi = _interval_at(mx, float(t), width, 0.5)
        score = min(fi.lower_tail, fi.upper_tail)
        if best is None or score > best.c:
            best = FluctuationInterval(fi.a_n, fi.b_n, score, fi.lower_tail, fi.upper_tail)
    return best

"""Sample statistics used by the experiments: spreads, fits, moments."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidParameter
from ..gaussmax import FluctuationInterval


def fluctuation_estimate(samples, c: float = 0.2) -> FluctuationInterval:
    """Empirical (a_n, b_n) with P(X <= a_n) > c and P(X >= b_n) > c.

    a_n is the order statistic of rank floor(cN) + 1 and b_n the one of rank
    ceil((1 - c) N); under the empirical law both tails then exceed c strictly.
    """
    x = np.sort(np.asarray(samples, dtype=np.float64))
    N = x.size
    if N < 100:
        raise InvalidParameter(f"need at least 100 samples, got {N}")
    if not 0 < c < 0.5:
        raise InvalidParameter(f"c must lie in (0, 1/2), got {c}")
    lo = int(math.floor(c * N))
    hi = int(math.ceil((1 - c) * N)) - 1
    a, b = float(x[lo]), float(x[max(hi, lo)])
    lower = np.count_nonzero(x <= a) / N
    upper = np.count_nonzero(x >= b) / N
    return FluctuationInterval(a, b, c, lower, upper)


@dataclass(frozen=True)
class PowerFit:
    slope: float
    intercept: float
    r2: float
    residuals: np.ndarray
    n: np.ndarray
    spread: np.ndarray


def exponent_fit(rows) -> PowerFit:
    """Least squares of log(spread) on log(n)."""
    arr = np.array([(float(n), float(s)) for n, s in rows], dtype=np.float64).reshape(-1, 2)
    keep = arr[:, 1] > 0
    if not np.all(keep):
        warnings.warn(f"dropping {np.count_nonzero(~keep)} rows with nonpositive spread", RuntimeWarning, stacklevel=2)
    arr = arr[keep]
    if arr.shape[0] == 0:
        raise InvalidParameter("no rows with positive spread")
    if arr.shape[0] < 3 or np.unique(arr[:, 0]).size < arr.shape[0]:
        raise InvalidParameter("need at least 3 rows with distinct n")
    lx, ly = np.log(arr[:, 0]), np.log(arr[:, 1])
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return PowerFit(float(slope), float(intercept), r2, resid, arr[:, 0], arr[:, 1])


def spread(samples, c: float = 0.2) -> float:
    return fluctuation_estimate(samples, c).width


def bootstrap_slope_ci(samples_by_n: dict, c: float = 0.2, n_boot: int = 1000, level: float = 0.95, rng=None):
    """Percentile bootstrap interval for the spread exponent, resampling replicas within each n."""
    rng = np.random.default_rng(rng)
    ns = sorted(samples_by_n)
    data = [np.sort(np.asarray(samples_by_n[n])) for n in ns]
    slopes = np.empty(n_boot)
    for b in range(n_boot):
        rows = []
        for n, x in zip(ns, data):
            xb = x[rng.integers(0, x.size, x.size)]
            rows.append((n, spread(xb, c)))
        slopes[b] = exponent_fit(rows).slope
    alpha = (1 - level) / 2
    return float(np.quantile(slopes, alpha)), float(np.quantile(slopes, 1 - alpha)), slopes


def central_moment(x, k: float) -> float:
    x = np.asarray(x, dtype=np.float64)
    return float(np.mean(np.abs(x - x.mean()) ** k))


def central_moment_se(x, k: float, n_boot: int = 200, rng=None) -> float:
    rng = np.random.default_rng(rng)
    x = np.asarray(x, dtype=np.float64)
    vals = [central_moment(x[rng.integers(0, x.size, x.size)], k) for _ in range(n_boot)]
    return float(np.std(vals, ddof=1))

"""Entropy values, the entropic-CLT total-variation bound, and a binned TV estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import ndtr

from .errors import InvalidParameter

POINCARE_EXP1 = 0.25


@dataclass(frozen=True)
class TVBoundInput:
    d: Sequence[int]
    c_poincare: float = POINCARE_EXP1

    def __post_init__(self):
        if len(self.d) == 0:
            raise InvalidParameter("d must be nonempty")
        if min(self.d) < 1:
            raise InvalidParameter("all d_i must be >= 1")
        if not self.c_poincare > 0:
            raise InvalidParameter("Poincare constant must be positive")


def entropy_exponential(lam: float) -> float:
    """Differential entropy of Exp(rate lam): 1 - log lam."""
    if not lam > 0:
        raise InvalidParameter(f"rate must be positive, got {lam}")
    return 1.0 - math.log(lam)


def entropy_gaussian() -> float:
    """Differential entropy of N(0, 1)."""
    return (math.log(2 * math.pi) + 1) / 2


def standardized_coefficients(d) -> np.ndarray:
    """a_i = d_i^{-1} / sqrt(sum d_j^{-2}), so that sum a_i^2 = 1."""
    d = np.asarray(d, dtype=np.float64)
    if d.size == 0:
        raise InvalidParameter("d must be nonempty")
    inv = 1.0 / d
    return inv / np.sqrt(np.sum(inv * inv))


def tv_bound(inp: TVBoundInput) -> float:
    """Square root of 2 s4 / (c/2 + (1 - c/2) s4) * (Ent(Z) - Ent(Exp(1))), s4 = sum a_i^4."""
    a = standardized_coefficients(inp.d)
    s4 = float(np.sum(a**4))
    c = inp.c_poincare
    gap = entropy_gaussian() - entropy_exponential(1.0)
    return math.sqrt(2 * s4 / (c / 2 + (1 - c / 2) * s4) * gap)


def coupling_bound(n: int, K: int, a_hat: float) -> float:
    """sqrt((log 2 pi - 1) 2^15 / (a^8 n (K + 1)))."""
    if n <= 0 or K < 0 or a_hat <= 0:
        raise InvalidParameter(f"need n > 0, K >= 0, a_hat > 0; got n={n}, K={K}, a_hat={a_hat}")
    return math.sqrt((math.log(2 * math.pi) - 1) * 2**15 / (a_hat**8 * n * (K + 1)))


def empirical_tv(samples, bins: int = 100, lo: float = -6.0, hi: float = 6.0) -> float:
    """Half the L1 distance between binned empirical and N(0,1) masses.

    Two extra bins hold the tails beyond [lo, hi].  Binning can only merge
    mass, so this is a lower bound on the true total-variation distance up
    to sampling error.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 10_000:
        raise InvalidParameter(f"need at least 10^4 samples, got {x.size}")
    if bins < 50:
        raise InvalidParameter(f"need at least 50 bins, got {bins}")
    edges = np.linspace(lo, hi, bins + 1)
    counts = np.bincount(np.searchsorted(edges, x, side="right"), minlength=bins + 2)
    emp = counts / x.size
    cdf = np.concatenate(([0.0], ndtr(edges), [1.0]))
    ref = np.diff(cdf)
    return 0.5 * float(np.sum(np.abs(emp - ref)))

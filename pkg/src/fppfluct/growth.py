"""Richardson-type growth representation of cylinder passage times.

The cluster starts as the left column of [0, n] x [0, K] and absorbs one
uniformly chosen boundary edge per step.  Recording the boundary sizes
``b_i`` up to the first step ``N`` that reaches the right column, the
cylinder time has the law of a sum of independent exponentials with means
``1 / b_i``.  Sampling is two-stage: the trace first, then fresh
exponentials given the trace.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels
from .env import Environment, Vertex
from .errors import InvalidParameter
from .passage import cylinder_arrival_times, cylinder_time


@dataclass(frozen=True)
class GrowthTrace:
    n: int
    K: int
    b: np.ndarray          # b[i-1] = #B_{i-1}
    N: int                 # hitting index (1-based)
    absorbed: tuple        # y_1, y_2, ... as Vertex
    inside: tuple          # x_1, x_2, ...: cluster endpoint of the chosen edge

    @property
    def b_hit(self) -> np.ndarray:
        return self.b[: self.N]

    def moments(self) -> "CylinderMoments":
        return cylinder_moments(self)

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "K": self.K, "N": self.N, "b": [int(v) for v in self.b_hit]})


@dataclass(frozen=True)
class CylinderMoments:
    mu: float
    sigma: float


@dataclass(frozen=True)
class AdmissibilityParams:
    a_hat: float

    def __post_init__(self):
        if not 0 < self.a_hat < 1:
            raise InvalidParameter(f"a_hat must lie in (0, 1), got {self.a_hat}")


def _check_nK(n, K):
    if int(n) != n or n < 1:
        raise InvalidParameter(f"n must be a positive integer, got {n!r}")
    if int(K) != K or not 0 <= K <= n - 1:
        raise InvalidParameter(f"K must satisfy 0 <= K <= n-1, got K={K!r}, n={n}")


def grow(n: int, K: int, rng: np.random.Generator, full: bool = False) -> GrowthTrace:
    """Run the growth until the right column is hit (or to exhaustion if ``full``)."""
    _check_nK(n, K)
    u = rng.random(n * (K + 1))
    b, inside, absorbed, hit = _kernels.grow_cylinder(int(n), int(K), u, bool(full))
    m = K + 1

    def verts(idx):
        return tuple(Vertex(int(v) // m, int(v) % m) for v in idx)

    return GrowthTrace(int(n), int(K), b, int(hit), verts(absorbed), verts(inside))


def grow_fast(n: int, K: int, rng: np.random.Generator) -> np.ndarray:
    """Boundary sizes b_1..b_N only; skips building vertex tuples."""
    b, _, _, hit = _kernels.grow_cylinder(int(n), int(K), rng.random(n * (K + 1)), False)
    return b[:hit]


def cylinder_moments(trace_or_b) -> CylinderMoments:
    b = trace_or_b.b_hit if isinstance(trace_or_b, GrowthTrace) else np.asarray(trace_or_b)
    inv = 1.0 / b.astype(np.float64)
    return CylinderMoments(float(inv.sum()), float(np.sqrt(np.sum(inv * inv))))


def sample_time(trace, rng: np.random.Generator, size=None):
    """X_1 + ... + X_N with X_i ~ Exp(mean 1/b_i), fresh given the trace."""
    b = trace.b_hit if isinstance(trace, GrowthTrace) else np.asarray(trace)
    scale = 1.0 / b.astype(np.float64)
    if size is None:
        return float(np.sum(rng.exponential(scale)))
    out = np.empty(size)
    chunk = max(1, 2_000_000 // len(scale))
    for start in range(0, size, chunk):
        stop = min(size, start + chunk)
        out[start:stop] = (rng.exponential(1.0, (stop - start, len(scale))) * scale).sum(axis=1)
    return out


def sample_growth_times(n: int, K: int, rng: np.random.Generator, count: int) -> np.ndarray:
    """Joint sampler: fresh trace and fresh exponentials per draw."""
    _check_nK(n, K)
    out = np.empty(count)
    for r in range(count):
        b = grow_fast(n, K, rng)
        out[r] = np.sum(rng.exponential(1.0, len(b)) / b)
    return out


def hitting_count_check(env: Environment, n: int, K: int, y_offset: int = 0) -> int:
    """#{y in C_{n,K} : 0 < T_{n,K}(y) <= T_{n,K}} from one full Dijkstra pass."""
    times = cylinder_arrival_times(env, n, K, y_offset)
    t_cross = times[n, :].min()
    return int(np.count_nonzero((times > 0) & (times <= t_cross)))


def upsilon_check(trace, params: AdmissibilityParams) -> tuple[bool, int | None]:
    """Admissibility of (b, N) with a = a_hat; returns (verdict, first failed condition)."""
    if isinstance(trace, GrowthTrace):
        n, K, d, M = trace.n, trace.K, trace.b_hit, trace.N
    else:
        n, K, d = trace["n"], trace["K"], np.asarray(trace["b"])
        M = len(d)
    a = params.a_hat
    if not (a * n * K / 2 <= M <= n * (K + 1)):
        return False, 1
    if np.any(d < K + 1):
        return False, 2
    if np.count_nonzero(d <= 4 * K / a) < a * M / 2:
        return False, 3
    return True, None


def estimate_a_hat(
    n: int,
    K: int,
    replicas: int = 10_000,
    quantile_level: float = 1e-3,
    seed=0,
    sampler: str = "growth",
    mode: str = "iid",
) -> float:
    """Empirical ``quantile_level`` quantile of T_{n,K}, divided by n.

    A calibration stand-in for Kesten's linear-growth constant, not an
    estimate of it.  ``sampler="dijkstra"`` draws cylinder times from
    environments of the given ``mode`` (``"unit"`` gives exactly 1).
    """
    _check_nK(n, K)
    if replicas < 1000:
        raise InvalidParameter(f"need at least 1000 replicas, got {replicas}")
    if not 0 <= quantile_level < 1:
        raise InvalidParameter(f"quantile_level must lie in [0, 1), got {quantile_level}")
    from .harness.seeds import replica_rng, replica_seed
    from .env import sample_environment

    if sampler == "growth" and mode == "iid":
        times = np.array([sample_growth_times(n, K, replica_rng(seed, r, n, K), 1)[0] for r in range(replicas)])
    elif sampler in ("dijkstra", "growth"):
        times = np.array([
            cylinder_time(sample_environment(mode, n, replica_seed(seed, r, n, K)), n, K).time
            for r in range(replicas)
        ])
    else:
        raise InvalidParameter(f"unknown sampler {sampler!r}")
    return float(np.quantile(times, quantile_level, method="inverted_cdf")) / n


def boundary_from_scratch(cluster: Iterable, n: int, K: int) -> set:
    """Boundary edge set recomputed directly from a cluster (used to audit ``grow``)."""
    cl = set(map(tuple, cluster))
    out = set()
    for x, y in cl:
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            z = (x + dx, y + dy)
            if 0 <= z[0] <= n and 0 <= z[1] <= K and z not in cl:
                out.add(frozenset(((x, y), z)))
    return out

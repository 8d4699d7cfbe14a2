"""Monte Carlo experiments.

Replicas are cut into fixed-size chunks and farmed out to a process pool;
each replica draws its environment from ``replica_seed(master, r, n, ...)``
and chunks come back in index order, so a report never depends on the
worker count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from scipy.stats import ks_2samp

from ..cltbounds import coupling_bound, empirical_tv, standardized_coefficients, tv_bound, TVBoundInput
from ..env import couple, sample_environment
from ..errors import InvalidParameter
from ..gaussmax import (
    MaxOfNormals,
    NormalSpec,
    achievable_interval,
    certificate_value,
    dispersive_check,
    fluct_interval,
    logconcavity_certificate,
    max_quantile,
    quantile_shift_derivative,
)
from ..growth import AdmissibilityParams, estimate_a_hat, grow, grow_fast, upsilon_check
from ..passage import (
    cylinder_arrival_times,
    cylinder_time,
    restricted_square_time,
    square_time,
    torus_time,
    tube_time,
    vertical_span,
)
from .config import ExperimentConfig
from .report import ExperimentReport, version_string
from .seeds import replica_rng, replica_seed
from .stats import central_moment, central_moment_se, fluctuation_estimate

CHUNK = 128
REL_TOL = 1e-12  # identical paths sum identically; this only absorbs summation order


def _leq(a, b):
    return a <= b + REL_TOL * max(1.0, abs(b))


def partition_heights(n: int, alpha2: float) -> list[int]:
    """Heights K^(j) summing to n, each in [n^alpha2, 2 n^alpha2].

    Uses the largest block count r whose even split (floor/ceil of n/r)
    fits the window, which keeps the blocks as thin as allowed.
    """
    if n < 1 or not 0 < alpha2 < 1:
        raise InvalidParameter(f"need n >= 1 and 0 < alpha2 < 1, got n={n}, alpha2={alpha2}")
    lo, hi = n**alpha2, 2 * n**alpha2
    for r in range(n, 0, -1):
        q, rem = divmod(n, r)
        if q >= lo and q + (rem > 0) <= hi:
            return [q + 1] * rem + [q] * (r - rem)
    raise InvalidParameter(f"no partition of n={n} into blocks within [{lo:.3g}, {hi:.3g}]")


def _mode(cfg, periodic):
    if cfg.get("unit"):
        return "unit"
    return "periodic" if periodic else "iid"


def _one(kind, seed, n, r, p):
    """One replica of experiment ``kind``; returns a tuple of floats."""
    if kind == "growth":
        K = p["K"]
        env = sample_environment("iid", n, replica_seed(seed, r, n, K, 0))
        times = cylinder_arrival_times(env, n, K)
        t_cross = times[n, :].min()
        count = np.count_nonzero((times > 0) & (times <= t_cross))
        rng = replica_rng(seed, r, n, K, 1)
        b = grow_fast(n, K, rng)
        return (t_cross, count, float(np.sum(rng.exponential(1.0, b.size) / b)), b.size)

    if kind == "cylinder":
        env = sample_environment(_mode(p, False), n, replica_seed(seed, r, n, p["K"]))
        return (cylinder_time(env, n, p["K"]).time,)

    seed_r = replica_seed(seed, r, n)
    if kind == "square":
        return (square_time(sample_environment(_mode(p, False), n, seed_r), n).time,)
    if kind == "tube":
        return (tube_time(sample_environment(_mode(p, True), n, seed_r), n).time,)
    if kind == "torus":
        env = sample_environment(_mode(p, True), n, seed_r)
        return (torus_time(env, n, p["window_factor"]).time,)
    if kind == "span":
        g = tube_time(sample_environment(_mode(p, True), n, seed_r), n)
        return (g.time, vertical_span(g).vertical_span)
    if kind == "mincyl":
        pair = couple(n, seed_r)
        env = sample_environment("unit", n) if p.get("unit") else pair.periodic
        starts = np.concatenate(([0], np.cumsum(p["heights"])[:-1]))
        stack = min(cylinder_time(env, n, K - 1, s).time for K, s in zip(p["heights"], starts))
        shifted = min(cylinder_time(env, n, K - 1, s + p["shift"]).time for K, s in zip(p["heights"], starts))
        tube = tube_time(env, n).time
        extra = (math.nan,) * 5
        if p.get("orderings"):
            iid = sample_environment("unit", n) if p.get("unit") else pair.iid
            extra = (
                torus_time(env, n, p["window_factor"]).time,
                square_time(iid, n).time,
                *(restricted_square_time(iid, n, v).time for v in (1, 2, 3)),
            )
        return (stack, shifted, min(stack, shifted), tube, *extra)
    raise InvalidParameter(f"unknown replica kind {kind!r}")


def _chunk(args):
    kind, seed, n, lo, hi, p = args
    return np.array([_one(kind, seed, n, r, p) for r in range(lo, hi)], dtype=np.float64)


def run_replicas(kind: str, seed: int, n: int, replicas: int, params: dict, workers: int = 1) -> np.ndarray:
    """(replicas, m) array of per-replica outputs, rows in replica order."""
    jobs = [(kind, seed, n, lo, min(lo + CHUNK, replicas), params) for lo in range(0, replicas, CHUNK)]
    if workers <= 1 or len(jobs) == 1:
        parts = [_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk, jobs))
    return np.concatenate(parts, axis=0)


def _quantile_cols(x, c, prefix=""):
    if x.size < 100:
        nan = math.nan
        return {f"{prefix}q_c": nan, f"{prefix}q_1mc": nan, f"{prefix}spread": nan}
    fi = fluctuation_estimate(x, c)
    return {f"{prefix}q_c": fi.a_n, f"{prefix}q_1mc": fi.b_n, f"{prefix}spread": fi.width}


def _metadata(cfg: ExperimentConfig, t0: float, **extra) -> dict:
    return {"config": cfg.echo(), "seed": cfg.seed, "version": version_string(),
            "wall_time_s": time.perf_counter() - t0, **extra}


def _params(cfg: ExperimentConfig, **kw) -> dict:
    return {"unit": cfg.unit_weights, "window_factor": cfg.window_factor, **kw}


def simulate(cfg: ExperimentConfig) -> ExperimentReport:
    """Passage-time samples for one geometry; one row per n."""
    t0 = time.perf_counter()
    if cfg.replicas < 100:
        raise InvalidParameter("spread estimation needs at least 100 replicas")
    if cfg.geometry == "cylinder" and cfg.K is None:
        raise InvalidParameter("cylinder geometry needs K")
    rows, samples = [], {}
    for n in cfg.n:
        x = run_replicas(cfg.geometry, cfg.seed, n, cfg.replicas, _params(cfg, K=cfg.K), cfg.workers)[:, 0]
        fi = fluctuation_estimate(x, cfg.c)
        samples[n] = x
        rows.append({"n": n, "samples": x.size, "mean": x.mean(), "sd": x.std(ddof=1), "q_c": fi.a_n,
                     "q_1mc": fi.b_n, "spread": fi.width, "lower_tail": fi.lower_tail, "upper_tail": fi.upper_tail})
    cols = ["n", "samples", "mean", "sd", "q_c", "q_1mc", "spread", "lower_tail", "upper_tail"]
    return ExperimentReport(cols, rows, _metadata(cfg, t0, geometry=cfg.geometry), samples)


def confinement_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Frequency of vertical_span(tube geodesic) <= n^alpha, per (n, alpha)."""
    t0 = time.perf_counter()
    if any(not 0.75 < a < 1 for a in cfg.alpha):
        raise InvalidParameter("confinement needs every alpha in (3/4, 1)")
    rows, samples = [], {}
    for n in cfg.n:
        out = run_replicas("span", cfg.seed, n, cfg.replicas, _params(cfg), cfg.workers)
        span = out[:, 1]
        samples[n] = out
        for a in cfg.alpha:
            p = float(np.mean(span <= n**a))
            rows.append({"n": n, "alpha": a, "samples": span.size, "threshold": n**a, "frequency": p,
                         "stderr": math.sqrt(p * (1 - p) / span.size), "mean_span": span.mean(),
                         "max_span": span.max()})
    cols = ["n", "alpha", "samples", "threshold", "frequency", "stderr", "mean_span", "max_span"]
    return ExperimentReport(cols, rows, _metadata(cfg, t0), samples)


def nondecreasing_within(freqs, stderrs, k: float = 2.0) -> bool:
    """Each step may drop by at most k combined standard errors."""
    return all(f1 >= f0 - k * math.hypot(s0, s1) for f0, f1, s0, s1 in zip(freqs, freqs[1:], stderrs, stderrs[1:]))


def min_cylinder_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Stacked and shifted cylinder minima against the tube time on one periodic environment."""
    t0 = time.perf_counter()
    rows, samples = [], {}
    for n in cfg.n:
        heights = partition_heights(n, cfg.alpha2)
        shift = int(math.floor(n**cfg.alpha2 / 2))
        p = _params(cfg, heights=heights, shift=shift, orderings=cfg.check_orderings)
        out = run_replicas("mincyl", cfg.seed, n, cfg.replicas, p, cfg.workers)
        samples[n] = out
        stack, shifted, both, tube = out[:, 0], out[:, 1], out[:, 2], out[:, 3]
        tube_le = np.array([_leq(t, s) for t, s in zip(tube, both)])
        equal = np.array([abs(t - s) <= REL_TOL * max(1.0, s) for t, s in zip(tube, both)])
        row = {"n": n, "samples": out.shape[0], "r": len(heights), "K_min": min(heights), "K_max": max(heights),
               "shift": shift, "equal_frequency": equal.mean(), "tube_gt_min_violations": int(np.sum(~tube_le)),
               "ks_stack_vs_shifted": ks_2samp(stack, shifted).statistic if out.shape[0] > 1 else math.nan,
               "sum_inv_sqrt_K": sum(k**-0.5 for k in heights) / math.sqrt(n)}
        for name, x in (("stack_", stack), ("shifted_", shifted), ("min_", both), ("tube_", tube)):
            row.update(_quantile_cols(x, cfg.c, name))
        if cfg.check_orderings:
            tor, sq, r1, r2, r3 = out[:, 4], out[:, 5], out[:, 6], out[:, 7], out[:, 8]
            rmin = np.minimum(np.minimum(r1, r2), r3)
            row["torus_lt_tube_violations"] = int(sum(not _leq(t, s) for t, s in zip(tube, tor)))
            row["restricted_gt_square_violations"] = int(sum(not _leq(a, b) for a, b in zip(rmin, sq)))
            row["restricted1_lt_tube_violations"] = int(sum(not _leq(t, a) for t, a in zip(tube, r1)))
        rows.append(row)
    cols = ["n", "samples", "r", "K_min", "K_max", "shift", "equal_frequency", "tube_gt_min_violations",
            "ks_stack_vs_shifted", "sum_inv_sqrt_K"]
    cols += [f"{v}_{q}" for v in ("stack", "shifted", "min", "tube") for q in ("q_c", "q_1mc", "spread")]
    if cfg.check_orderings:
        cols += ["torus_lt_tube_violations", "restricted_gt_square_violations", "restricted1_lt_tube_violations"]
    return ExperimentReport(cols, rows, _metadata(cfg, t0), samples)


def torus_moment_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Central moments E|T - ET|^k of the torus time with bootstrap standard errors."""
    t0 = time.perf_counter()
    if not cfg.k:
        raise InvalidParameter("torus moments need a nonempty k list")
    rows, samples = [], {}
    for n in cfg.n:
        x = run_replicas("torus", cfg.seed, n, cfg.replicas, _params(cfg), cfg.workers)[:, 0]
        samples[n] = x
        for k in cfg.k:
            m = central_moment(x, k)
            se = central_moment_se(x, k, rng=replica_rng(cfg.seed, n, k, 7)) if x.size > 1 else math.nan
            rows.append({"n": n, "k": k, "samples": x.size, "moment": m, "stderr": se,
                         "log_moment": math.log(m) if m > 0 else -math.inf})
    return ExperimentReport(["n", "k", "samples", "moment", "stderr", "log_moment"], rows, _metadata(cfg, t0), samples)


def growth_vs_dijkstra(cfg: ExperimentConfig) -> ExperimentReport:
    """KS comparison of cylinder times and hitting counts: Dijkstra against the growth representation."""
    t0 = time.perf_counter()
    if cfg.K is None:
        raise InvalidParameter("growth-check needs K")
    rows, samples = [], {}
    for n in cfg.n:
        out = run_replicas("growth", cfg.seed, n, cfg.replicas, {"K": cfg.K}, cfg.workers)
        samples[n] = out
        td, cd, tg, cg = out.T
        se = math.sqrt(td.var(ddof=1) / td.size + tg.var(ddof=1) / tg.size) if td.size > 1 else math.nan
        ks_t, ks_c = ks_2samp(td, tg), ks_2samp(cd, cg)
        rows.append({"n": n, "K": cfg.K, "samples": td.size, "ks_time": ks_t.statistic, "p_time": ks_t.pvalue,
                     "ks_count": ks_c.statistic, "p_count": ks_c.pvalue, "mean_dijkstra": td.mean(),
                     "mean_growth": tg.mean(), "mean_diff_in_se": abs(td.mean() - tg.mean()) / se if se > 0 else 0.0,
                     "mean_count_dijkstra": cd.mean(), "mean_count_growth": cg.mean()})
    cols = ["n", "K", "samples", "ks_time", "p_time", "ks_count", "p_count", "mean_dijkstra", "mean_growth",
            "mean_diff_in_se", "mean_count_dijkstra", "mean_count_growth"]
    return ExperimentReport(cols, rows, _metadata(cfg, t0), samples)


def calibrate_a(cfg: ExperimentConfig) -> ExperimentReport:
    """a_hat per n at the configured K and quantile level."""
    t0 = time.perf_counter()
    if cfg.K is None:
        raise InvalidParameter("calibrate-a needs K")
    rows = []
    for n in cfg.n:
        a = estimate_a_hat(n, cfg.K, cfg.replicas, cfg.quantile_level, cfg.seed,
                           mode="unit" if cfg.unit_weights else "iid")
        rows.append({"n": n, "K": cfg.K, "samples": cfg.replicas, "quantile_level": cfg.quantile_level, "a_hat": a})
    return ExperimentReport(["n", "K", "samples", "quantile_level", "a_hat"], rows, _metadata(cfg, t0))


def tv_dominance(n: int, K: int, a_hat: float, traces: int, seed=0, draws: int = 100_000, bins: int = 100):
    """Per Upsilon-passing trace: empirical TV, tv_bound and coupling_bound.

    The standardized conditional sum is sum_i a_i (E_i - 1) with E_i ~ Exp(1)
    and a_i from ``standardized_coefficients(b)``.
    """
    params = AdmissibilityParams(a_hat)
    cb = coupling_bound(n, K, a_hat)
    out, tried = [], 0
    while len(out) < traces:
        rng = replica_rng(seed, tried, n, K, 2)
        tried += 1
        tr = grow(n, K, rng)
        ok, _ = upsilon_check(tr, params)
        if not ok:
            continue
        a = standardized_coefficients(tr.b_hit)
        z = np.zeros(draws)
        for start in range(0, a.size, 64):
            blk = a[start:start + 64]
            z += (rng.exponential(1.0, (draws, blk.size)) - 1.0) @ blk
        out.append({"trace": tried - 1, "N": tr.N, "empirical_tv": empirical_tv(z, bins),
                    "tv_bound": tv_bound(TVBoundInput(tr.b_hit)), "coupling_bound": cb})
    return out, tried


def gauss_check(seed=0) -> dict:
    """Certificates for the Gaussian-maximum toolkit."""
    grid = np.linspace(-10, 10, 20001)
    lc_min, lc_at = logconcavity_certificate(grid)
    rng = replica_rng(seed, 0)
    deriv_err = 0.0
    for _ in range(20):
        m = int(rng.integers(1, 7))
        specs = [NormalSpec(float(rng.normal()), float(rng.uniform(0.5, 2))) for _ in range(m)]
        t, k, h = float(rng.uniform(0.05, 0.95)), int(rng.integers(m)), 1e-5
        up = [NormalSpec(s.mean + (h if i == k else 0), s.sigma) for i, s in enumerate(specs)]
        dn = [NormalSpec(s.mean - (h if i == k else 0), s.sigma) for i, s in enumerate(specs)]
        fd = (max_quantile(t, up) - max_quantile(t, dn)) / (2 * h)
        deriv_err = max(deriv_err, abs(fd - quantile_shift_derivative(t, specs, k)))
    pairs = [(a, b) for a, b in zip(np.linspace(0.02, 0.5, 50), np.linspace(0.5, 0.98, 50))]
    worst = math.inf
    for _ in range(20):
        base = [NormalSpec(0.0, 1.0)] * 4
        shifted = [NormalSpec(float(s), 1.0) for s in rng.uniform(0, 3, 4)]
        res = dispersive_check(MaxOfNormals(base).quantile, MaxOfNormals(shifted).quantile, pairs)
        worst = min(worst, res.worst_margin)
    intervals = {}
    for n in (10, 1000, 10**6):
        fi = fluct_interval(MaxOfNormals.iid(n), 0.05)
        intervals[str(n)] = {"a_n": fi.a_n, "b_n": fi.b_n, "lower_tail": fi.lower_tail, "upper_tail": fi.upper_tail,
                             "achievable_c": achievable_interval(MaxOfNormals.iid(n)).c}
    return {"logconcavity_min": lc_min, "logconcavity_argmin": lc_at, "F_at_0": certificate_value(0.0),
            "F_at_0_expected": 0.25 - 1 / (2 * math.pi), "derivative_max_abs_error": deriv_err,
            "dispersive_worst_margin": worst, "fluct_intervals": intervals}


EXPERIMENTS = {
    "simulate": simulate,
    "confinement": confinement_experiment,
    "min-cyl": min_cylinder_experiment,
    "torus-moments": torus_moment_experiment,
    "growth-check": growth_vs_dijkstra,
    "calibrate-a": calibrate_a,
}

import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from fppfluct.errors import InvalidParameter
from fppfluct.harness import (
    ExperimentConfig,
    ExperimentReport,
    bootstrap_slope_ci,
    central_moment,
    confinement_experiment,
    exponent_fit,
    fluctuation_estimate,
    gauss_check,
    growth_vs_dijkstra,
    load_config,
    min_cylinder_experiment,
    partition_heights,
    replica_seed,
    run_replicas,
    simulate,
    torus_moment_experiment,
)
from fppfluct.harness.experiments import nondecreasing_within, tv_dominance
from fppfluct.harness.stats import central_moment_se


def cfg(**kw):
    return ExperimentConfig(**kw).validate()


# ---- fluctuation estimates -----------------------------------------------

def test_constant_samples_zero_spread():
    assert fluctuation_estimate(np.full(500, 3.0), 0.2).width == 0.0


def test_normal_spread():
    x = np.random.default_rng(0).standard_normal(10**6)
    assert fluctuation_estimate(x, 0.2).width == pytest.approx(2 * norm.ppf(0.8), abs=0.01)


def test_exponential_spread():
    x = np.random.default_rng(1).exponential(1.0, 10**6)
    assert fluctuation_estimate(x, 0.2).width == pytest.approx(math.log(5) - math.log(5 / 4), abs=0.01)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=100, max_size=400), st.floats(0.01, 0.49))
def test_tail_conditions_hold_strictly(xs, c):
    x = np.array(xs, dtype=float)
    fi = fluctuation_estimate(x, c)
    assert np.mean(x <= fi.a_n) > c
    assert np.mean(x >= fi.b_n) > c
    assert fi.a_n <= fi.b_n


def test_fluctuation_estimate_errors():
    with pytest.raises(InvalidParameter):
        fluctuation_estimate(np.zeros(99))
    for c in (0.0, 0.5):
        with pytest.raises(InvalidParameter):
            fluctuation_estimate(np.zeros(100), c)


# ---- partitions ----------------------------------------------------------

def test_partition_examples():
    assert partition_heights(100, 0.8) == [50, 50]
    assert partition_heights(8, 0.9) == [8]
    with pytest.raises(InvalidParameter):
        partition_heights(0, 0.9)


@settings(max_examples=300)
@given(st.integers(1, 5000), st.floats(0.76, 0.99))
def test_partition_properties(n, alpha2):
    try:
        ks = partition_heights(n, alpha2)
    except InvalidParameter:
        # infeasible only if no r gives floor/ceil(n/r) inside the window
        lo, hi = n**alpha2, 2 * n**alpha2
        assert not any(n // r >= lo and -(-n // r) <= hi for r in range(1, n + 1))
        return
    assert sum(ks) == n
    assert all(n**alpha2 <= k <= 2 * n**alpha2 for k in ks)
    assert max(ks) - min(ks) <= 1


# ---- exponent fits -------------------------------------------------------

def test_fit_exact_power():
    ns = [16, 32, 64, 128, 256]
    fit = exponent_fit([(n, n ** (1 / 3)) for n in ns])
    assert fit.slope == pytest.approx(1 / 3, abs=1e-9)
    assert fit.r2 == pytest.approx(1.0)
    assert np.max(np.abs(fit.residuals)) < 1e-12


def test_fit_constant():
    fit = exponent_fit([(n, 2.5) for n in (4, 8, 16, 32)])
    assert fit.slope == pytest.approx(0.0, abs=1e-12)


def test_fit_drops_nonpositive_with_warning():
    with pytest.warns(RuntimeWarning):
        fit = exponent_fit([(4, 0.0), (8, 2.0), (16, 4.0), (32, 8.0)])
    assert fit.slope == pytest.approx(1.0)
    with pytest.raises(InvalidParameter), warnings.catch_warnings():
        warnings.simplefilter("ignore")
        exponent_fit([(4, 0.0), (8, -1.0), (16, 0.0)])


def test_fit_needs_three_distinct():
    with pytest.raises(InvalidParameter):
        exponent_fit([(4, 1.0), (8, 2.0)])
    with pytest.raises(InvalidParameter):
        exponent_fit([(4, 1.0), (4, 2.0), (8, 3.0)])


def test_bootstrap_ci_covers_truth():
    rng = np.random.default_rng(2)
    samples = {n: rng.standard_normal(4000) * n**0.5 for n in (8, 16, 32, 64)}
    lo, hi, slopes = bootstrap_slope_ci(samples, 0.2, 300, rng=3)
    assert lo < 0.5 < hi and slopes.size == 300


# ---- moments -------------------------------------------------------------

def test_second_moment_is_variance():
    x = np.random.default_rng(4).gamma(2.0, size=5000)
    assert central_moment(x, 2) == pytest.approx(np.var(x), rel=1e-12)


@settings(max_examples=100)
@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=50))
def test_moment_jensen(xs):
    x = np.array(xs)
    assert central_moment(x, 2) ** 0.5 <= central_moment(x, 4) ** 0.25 * (1 + 1e-9) + 1e-12


def test_moment_se_positive():
    x = np.random.default_rng(5).standard_normal(500)
    assert 0 < central_moment_se(x, 2, rng=1) < 0.2


# ---- config --------------------------------------------------------------

def test_config_validation():
    cfg(n=[8])
    for kw in ({"replicas": 0}, {"c": 0.5}, {"c": 0.0}, {"alpha1": 0.9, "alpha2": 0.85}, {"alpha1": 0.7},
               {"alpha2": 1.0}, {"kind": "plot"}, {"geometry": "sphere"}, {"n": [0]}, {"workers": 0},
               {"alpha": [1.2]}, {"window_factor": 0}):
        with pytest.raises(InvalidParameter):
            ExperimentConfig(**{"n": [8], **kw}).validate()


def test_config_sorts_n_and_parses_seed():
    c = cfg(n=[32, 8, 16], seed="0xff")
    assert c.n == [8, 16, 32] and c.seed == 255
    assert "workers" not in c.echo()


def test_load_config(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"kind": "simulate", "n": [8], "seed": "12"}))
    assert load_config(p)["n"] == [8]
    p.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(InvalidParameter):
        load_config(p)
    p.write_text("[1, 2]")
    with pytest.raises(InvalidParameter):
        load_config(p)


# ---- seeds and replica runner --------------------------------------------

def test_replica_seeds_distinct_and_stable():
    seeds = {replica_seed(7, r, 16) for r in range(2000)}
    assert len(seeds) == 2000
    assert replica_seed(7, 3, 16) == replica_seed(7, 3, 16)
    assert replica_seed(7, 3, 16) != replica_seed(8, 3, 16)
    assert replica_seed(7, 3, 16) != replica_seed(7, 16, 3)


def test_runner_independent_of_workers():
    a = run_replicas("tube", 5, 12, 300, {"window_factor": 2.0}, workers=1)
    b = run_replicas("tube", 5, 12, 300, {"window_factor": 2.0}, workers=4)
    assert a.shape == (300, 1) and np.array_equal(a, b)


def test_runner_unknown_kind():
    with pytest.raises(InvalidParameter):
        run_replicas("hexagon", 0, 4, 3, {})


# ---- experiments ---------------------------------------------------------

def test_simulate_rows_and_samples():
    rep = simulate(cfg(n=[16, 8], replicas=150, seed=3, geometry="square"))
    assert [r["n"] for r in rep.rows] == [8, 16]
    for r in rep.rows:
        assert r["spread"] == r["q_1mc"] - r["q_c"] >= 0
        assert r["lower_tail"] > 0.2 and r["upper_tail"] > 0.2
    assert set(rep.samples) == {8, 16}
    with pytest.raises(InvalidParameter):
        simulate(cfg(n=[8], replicas=99))
    with pytest.raises(InvalidParameter):
        simulate(cfg(n=[8], replicas=100, geometry="cylinder"))


def test_simulate_cylinder_and_torus():
    rep = simulate(cfg(n=[6], replicas=100, geometry="cylinder", K=2))
    assert rep.rows[0]["mean"] > 0
    rep = simulate(cfg(n=[4], replicas=100, geometry="torus"))
    assert rep.rows[0]["samples"] == 100


def test_confinement_unit_and_alpha_monotone():
    rep = confinement_experiment(cfg(n=[8, 16], replicas=20, unit_weights=True))
    assert all(r["frequency"] == 1.0 and r["max_span"] == 0 for r in rep.rows)
    rep = confinement_experiment(cfg(n=[16, 32], replicas=200, alpha=[0.8, 0.99], seed=2))
    by = {(r["n"], r["alpha"]): r["frequency"] for r in rep.rows}
    for n in (16, 32):
        assert by[(n, 0.99)] >= by[(n, 0.8)]
    with pytest.raises(InvalidParameter):
        confinement_experiment(cfg(n=[8], replicas=5, alpha=[0.5]))


def test_nondecreasing_within():
    assert nondecreasing_within([0.9, 0.95, 1.0], [0.01, 0.01, 0.0])
    assert nondecreasing_within([0.95, 0.94], [0.01, 0.01])
    assert not nondecreasing_within([0.95, 0.8], [0.01, 0.01])


def test_min_cylinder_unit_weights():
    rep = min_cylinder_experiment(cfg(n=[8, 16], replicas=10, unit_weights=True, check_orderings=True))
    for r in rep.rows:
        assert r["equal_frequency"] == 1.0
        assert r["tube_gt_min_violations"] == 0 and r["torus_lt_tube_violations"] == 0


def test_min_cylinder_orderings_random():
    rep = min_cylinder_experiment(cfg(n=[8], replicas=200, seed=9, check_orderings=True))
    r = rep.rows[0]
    assert r["tube_gt_min_violations"] == 0
    assert r["torus_lt_tube_violations"] == 0
    assert r["restricted_gt_square_violations"] == 0
    assert r["restricted1_lt_tube_violations"] == 0
    assert 0.5 < r["equal_frequency"] <= 1
    assert r["sum_inv_sqrt_K"] == pytest.approx(8**-0.5 / 8**0.5)


def test_min_cylinder_stack_shift_have_same_law():
    rep = min_cylinder_experiment(cfg(n=[40], replicas=1000, seed=4, alpha1=0.78, alpha2=0.8))
    r = rep.rows[0]
    assert r["r"] == 2 and r["K_min"] == r["K_max"] == 20 and r["shift"] == 9
    assert r["ks_stack_vs_shifted"] < 0.07


def test_torus_moments():
    rep = torus_moment_experiment(cfg(n=[4], replicas=30, k=[2, 4], unit_weights=True))
    assert all(r["moment"] == 0 for r in rep.rows)
    rep = torus_moment_experiment(cfg(n=[4, 6], replicas=200, k=[2, 4, 8], seed=1))
    for n in (4, 6):
        m = {r["k"]: r["moment"] for r in rep.rows if r["n"] == n}
        assert m[2] == pytest.approx(np.var(rep.samples[n]), rel=1e-12)
        assert m[2] ** 0.5 <= m[4] ** 0.25 <= m[8] ** 0.125


def test_growth_check_single_edge():
    rep = growth_vs_dijkstra(cfg(n=[1], K=0, replicas=100_000, seed=2))
    r = rep.rows[0]
    assert r["ks_time"] < 0.01
    assert r["ks_count"] == 0.0 and r["mean_count_dijkstra"] == 1.0
    with pytest.raises(InvalidParameter):
        growth_vs_dijkstra(cfg(n=[4], replicas=10))


def test_tv_dominance_small():
    rows, tried = tv_dominance(32, 4, 0.3, 3, seed=1, draws=20_000)
    assert len(rows) == 3 and tried >= 3
    for r in rows:
        assert r["empirical_tv"] <= r["tv_bound"] <= r["coupling_bound"]


def test_gauss_check_certificates():
    c = gauss_check()
    assert c["logconcavity_min"] >= -1e-12
    assert c["F_at_0"] == pytest.approx(c["F_at_0_expected"], abs=1e-12)
    assert c["derivative_max_abs_error"] < 1e-4
    assert c["dispersive_worst_margin"] >= -1e-9
    assert all(v["lower_tail"] >= 0.05 and v["upper_tail"] >= 0.05 for v in c["fluct_intervals"].values())


# ---- reports -------------------------------------------------------------

def test_report_csv_json(tmp_path):
    rows = [{"n": 16, "spread": 0.1, "flag": True}, {"n": 8, "spread": 1 / 3, "flag": False}]
    rep = ExperimentReport(["n", "spread", "flag"], rows, {"seed": 1, "x": np.float64(2.0)}, {8: np.zeros(3)})
    lines = rep.csv_text().splitlines()
    assert lines[0] == "n,spread,flag"
    assert lines[1] == "8,0.33333333333333331,0"
    assert lines[2] == "16,0.10000000000000001,1"
    assert float(lines[1].split(",")[1]) == 1 / 3
    csv_path, json_path = rep.write(tmp_path / "sub" / "out.csv")
    assert csv_path.read_text() == rep.csv_text()
    obj = json.loads(json_path.read_text())
    assert obj["columns"] == ["n", "spread", "flag"]
    assert [r["n"] for r in obj["rows"]] == [8, 16]
    assert obj["metadata"]["x"] == 2.0
    assert "samples" not in obj

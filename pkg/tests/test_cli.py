import json
import subprocess
import sys

import pytest

from fppfluct.cli import main

SIM = ["simulate", "--geometry", "tube", "--n", "32", "--replicas", "100", "--seed", "7", "--c", "0.2"]


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_simulate_one_row_deterministic(capsys):
    code, out1, _ = run(SIM, capsys)
    assert code == 0
    lines = out1.strip().splitlines()
    assert len(lines) == 2 and lines[0].startswith("n,samples,")
    assert lines[1].startswith("32,100,")
    _, out2, _ = run(SIM, capsys)
    assert out1 == out2


def test_hex_seed_and_workers_do_not_change_output(capsys):
    _, a, _ = run(SIM, capsys)
    _, b, _ = run(SIM[:-4] + ["--seed", "0x7", "--c", "0.2", "--workers", "3"], capsys)
    assert a == b


def test_missing_n_exits_1_with_usage(capsys):
    code, _, err = run(["simulate", "--replicas", "100"], capsys)
    assert code == 1
    assert "usage:" in err and "--n" in err


def test_argparse_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--n", "x"])
    assert info.value.code == 1
    assert "usage:" in capsys.readouterr().err
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 1


def test_invalid_config_exit_1(capsys):
    code, _, err = run(["simulate", "--n", "8", "--c", "0.7"], capsys)
    assert code == 1 and "invalid configuration" in err
    code, _, _ = run(["min-cyl", "--n", "8", "--alpha1", "0.95"], capsys)
    assert code == 1
    code, _, _ = run(["simulate", "--n", "8", "--config", "/nonexistent.json"], capsys)
    assert code == 1


def test_window_overflow_exit_2(capsys):
    code, _, err = run(["torus-moments", "--n", "32", "--replicas", "1", "--window-factor", "0.0001"], capsys)
    # four doublings from w=1 stop at w=16, well short of what n=32 needs
    assert code == 2 and "overflow" in err


def test_gauss_check_json(capsys):
    code, out, _ = run(["gauss-check"], capsys)
    assert code == 0
    cert = json.loads(out)
    assert cert["logconcavity_min"] >= -1e-12


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": [8], "replicas": 100, "seed": 7, "geometry": "square"}))
    code, out, _ = run(["simulate", "--config", str(cfg)], capsys)
    assert code == 0 and out.splitlines()[1].startswith("8,100,")
    code, out2, _ = run(["simulate", "--config", str(cfg), "--n", "12"], capsys)
    assert code == 0 and out2.splitlines()[1].startswith("12,100,")


def test_out_prefix_writes_csv_and_json(tmp_path, capsys):
    prefix = tmp_path / "res" / "conf"
    code, out, _ = run(["confinement", "--n", "8", "16", "--replicas", "20", "--out", str(prefix)], capsys)
    assert code == 0
    csv_text = (tmp_path / "res" / "conf.csv").read_text()
    assert csv_text == out
    meta = json.loads((tmp_path / "res" / "conf.json").read_text())["metadata"]
    assert meta["seed"] == 0 and meta["config"]["kind"] == "confinement" and meta["wall_time_s"] >= 0
    assert "version" in meta


def test_exponent_fit_from_csv(tmp_path, capsys):
    src = tmp_path / "spreads.csv"
    src.write_text("n,spread\n16,2.0\n32,2.5198420997897464\n64,3.1748021039363987\n")
    code, out, _ = run(["exponent-fit", "--input", str(src)], capsys)
    assert code == 0
    row = dict(zip(out.splitlines()[0].split(","), out.splitlines()[1].split(",")))
    assert float(row["slope"]) == pytest.approx(1 / 3, abs=1e-9)


def test_exponent_fit_needs_input_or_n(capsys):
    code, _, _ = run(["exponent-fit"], capsys)
    assert code == 1


@pytest.mark.parametrize("argv", [
    ["growth-check", "--n", "4", "--K", "1", "--replicas", "50"],
    ["calibrate-a", "--n", "6", "--K", "2", "--replicas", "1000"],
    ["min-cyl", "--n", "8", "--replicas", "10", "--check-orderings"],
    ["torus-moments", "--n", "4", "--replicas", "10", "--k", "2", "4"],
    ["exponent-fit", "--n", "6", "8", "10", "--replicas", "100", "--n-boot", "20"],
])
def test_subcommands_run(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 0, err
    assert out.count("\n") >= 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "fppfluct", "simulate", "--n", "4", "--replicas", "100"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("n,samples")

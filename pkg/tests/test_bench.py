import json
import os

import pytest

import bench

from src.reporting import TRACE_HEADER, read_json, read_trace

SMALL = ["--n", "20", "--m", "5", "--seed", "0"]

def test_gen_is_reproducible(tmp_path, capsys):

    for name in ["one", "two"]:
        assert bench.main(["gen"] + SMALL + ["--out", str(tmp_path / name)]) == bench.EXIT_OK

    assert "L_Q=" in capsys.readouterr().out

    for name in os.listdir(str(tmp_path / "one")):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()

def test_gen_refuses_existing_directory(tmp_path):

    out = str(tmp_path / "inst")

    assert bench.main(["gen"] + SMALL + ["--out", out]) == bench.EXIT_OK
    assert bench.main(["gen"] + SMALL + ["--out", out]) == bench.EXIT_CONFIG
    assert bench.main(["gen"] + SMALL + ["--out", out, "--force"]) == bench.EXIT_OK

def test_solve_writes_trace_and_summary(tmp_path):

    out = tmp_path / "run"

    code = bench.main(["solve"] + SMALL + ["--max-iters", "10", "--record-every", "1", "--out", str(out)])

    assert code == bench.EXIT_MAX_ITERS

    lines = (out / "trace_pplag.csv").read_text().splitlines()
    assert lines[0] == ",".join(TRACE_HEADER)
    assert len(lines) == 11

    summary = read_json(str(out / "summary_pplag.json"))
    assert summary["reason"] == "max_iters"
    assert summary["iterations"] == 10
    assert summary["params"]["alpha"] == 1e3
    assert summary["schema_version"] == 1
    assert (out / "instance" / "meta.json").exists()

def test_solve_trace_is_reproducible(tmp_path):

    for name in ["one", "two"]:
        bench.main(["solve"] + SMALL + ["--max-iters", "50", "--no-wallclock", "--out", str(tmp_path / name)])

    assert (tmp_path / "one" / "trace_pplag.csv").read_bytes() == (tmp_path / "two" / "trace_pplag.csv").read_bytes()

def test_solve_baseline_leaves_columns_empty(tmp_path):

    out = tmp_path / "run"

    bench.main(["solve"] + SMALL + ["--solver", "sproxalm", "--max-iters", "5", "--out", str(out)])

    rows = read_trace(str(out / "trace_sproxalm.csv"))

    assert len(rows) == 5
    assert all(row["d_norm"] == "" and row["dual_mu"] == "" and row["descent_ok"] == "" for row in rows)
    assert all(row["wallclock_ns"] != "" for row in rows)

def test_solve_from_instance_directory(tmp_path):

    inst = str(tmp_path / "inst")
    bench.main(["gen"] + SMALL + ["--out", inst])

    assert bench.main(["solve", "--instance", inst, "--max-iters", "3", "--out", str(tmp_path / "run")]) == bench.EXIT_MAX_ITERS
    assert not (tmp_path / "run" / "instance").exists()

    assert bench.main(["solve", "--instance", inst, "--n", "20", "--out", str(tmp_path / "bad")]) == bench.EXIT_CONFIG

def test_compare_report(tmp_path, capsys):

    out = tmp_path / "cmp"

    code = bench.main(["compare"] + SMALL + ["--max-iters", "20", "--out", str(out)])

    assert code == bench.EXIT_MAX_ITERS

    report = read_json(str(out / "report.json"))
    pplag_params = report["solvers"]["pplag"]["params"]

    assert report["gamma"] == report["solvers"]["sproxalm"]["params"]["gamma"]
    assert report["gamma"] == pytest.approx(2 * report["solvers"]["sproxalm"]["L_f"])
    assert pplag_params["alpha"] == 1e3 and pplag_params["beta"] == 0.5 and pplag_params["delta0"] == 0.5
    assert report["solvers"]["pplag"]["stop"] == report["solvers"]["sproxalm"]["stop"]
    assert (out / "trace_pplag.csv").exists() and (out / "trace_sproxalm.csv").exists()
    assert "gamma" in capsys.readouterr().out

def test_sweep_single_alpha(tmp_path):

    out = tmp_path / "sweep"

    code = bench.main(["sweep-alpha"] + SMALL + ["--alphas", "1e3", "--max-iters", "10", "--out", str(out)])

    assert code == bench.EXIT_MAX_ITERS

    report = read_json(str(out / "sweep_report.json"))
    assert report["alphas"] == [1e3]
    assert report["runs"][0]["alpha"] == 1e3
    assert (out / "trace_pplag_alpha1000.csv").exists()

def test_sweep_in_worker_processes(tmp_path):

    out = tmp_path / "sweep"

    code = bench.main(["sweep-alpha"] + SMALL + ["--alphas", "1e3", "1e5", "--max-iters", "5", "--workers", "2", "--out", str(out)])

    assert code == bench.EXIT_MAX_ITERS

    runs = read_json(str(out / "sweep_report.json"))["runs"]
    assert [run["alpha"] for run in runs] == [1e3, 1e5]
    assert runs[0]["params"]["eta"] > runs[1]["params"]["eta"]

def test_config_file_and_flag_precedence(tmp_path):

    config = tmp_path / "config.json"
    config.write_text(json.dumps({"max_iters": 5, "record_every": 1, "n": 20, "m": 5}))

    bench.main(["solve", "--config", str(config), "--out", str(tmp_path / "file")])
    bench.main(["solve", "--config", str(config), "--max-iters", "7", "--out", str(tmp_path / "flag")])

    assert len(read_trace(str(tmp_path / "file" / "trace_pplag.csv"))) == 5
    assert len(read_trace(str(tmp_path / "flag" / "trace_pplag.csv"))) == 7

@pytest.mark.parametrize("argv", [[], ["solve", "--alpha", "big"], ["solve", "--solver", "ipopt"], ["frobnicate"]])
def test_configuration_errors(argv, tmp_path):

    assert bench.main(argv) == bench.EXIT_CONFIG

def test_unknown_config_key(tmp_path):

    config = tmp_path / "config.json"
    config.write_text(json.dumps({"max_iter": 5}))

    assert bench.main(["solve", "--config", str(config), "--out", str(tmp_path / "run")]) == bench.EXIT_CONFIG

def test_invalid_parameter_is_a_configuration_error(tmp_path):

    assert bench.main(["solve"] + SMALL + ["--beta", "2", "--max-iters", "2", "--out", str(tmp_path / "run")]) == bench.EXIT_CONFIG

def test_output_root_from_environment(tmp_path, monkeypatch):

    monkeypatch.setenv(bench.OUTPUT_ENV, str(tmp_path))

    assert bench.main(["gen"] + SMALL + ["--out", "relative"]) == bench.EXIT_OK
    assert (tmp_path / "relative" / "meta.json").exists()

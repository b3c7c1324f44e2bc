import csv
import io
import json
import subprocess
import sys

import pytest

from ffsieve import __version__
from ffsieve.cli import (CSV_COLUMNS, EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_VIOLATION, CliError,
                         ExperimentConfig, emit_report, grid_points, main, parse_config, run_experiment, to_json)

REPORT_KEYS = {"config", "suites", "bounds", "timing", "version", "s_q_hash"}


@pytest.fixture(autouse=True)
def single_worker(monkeypatch):
    monkeypatch.setenv("FFSIEVE_THREADS", "1")


def _run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_parse_defaults():
    cfg, extra = parse_config(["--p", "2", "--n", "1", "--N", "2", "--Q", "1", "--suite", "all"])
    assert (cfg.p, cfg.n, cfg.N, cfg.Q, cfg.suite) == (2, 1, 2, 1, "all")
    assert (cfg.m, cfg.family, cfg.k, cfg.trials, cfg.seed, cfg.format) == (1, "full", 1, 32, 0, "json")
    assert extra == {"farey_csv": None}


def test_parse_kpower():
    cfg, _ = parse_config(["--p", "2", "--k", "2", "--family", "kpower"])
    assert cfg.family == "kpower" and cfg.k == 2


@pytest.mark.parametrize("argv,code", [
    (["--p", "4"], EXIT_VALIDATION),
    (["--p", "2", "--N", "-1"], EXIT_VALIDATION),
    (["--p", "2", "--k", "0"], EXIT_VALIDATION),
    (["--p", "2", "--trials", "-1"], EXIT_VALIDATION),
    (["--p", "2", "--seed", str(2**64)], EXIT_VALIDATION),
    (["--p", "2", "--grid", "Q=3..1"], EXIT_VALIDATION),
    (["--p", "2", "--grid", "z=0..1"], EXIT_VALIDATION),
    (["--bogus"], EXIT_USAGE),
    (["--p", "two"], EXIT_USAGE),
    (["--family", "odd"], EXIT_USAGE),
    (["--grid", "Q0..1"], EXIT_USAGE),
    (["--suite", "everything"], EXIT_USAGE),
])
def test_parse_errors_have_distinct_codes(argv, code, capsys):
    with pytest.raises(CliError) as info:
        parse_config(argv)
    assert info.value.code == code
    assert _run(argv, capsys)[0] == code


def test_config_file_and_flag_override(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# sweep\np = 3\nN=2\nQ=1\nfamily=kpower\nk=2\ngrid=Q=0..1\n")
    cfg, _ = parse_config(["--config", str(path), "--N", "1"])
    assert (cfg.p, cfg.N, cfg.Q, cfg.family, cfg.k) == (3, 1, 1, "kpower", 2)
    assert cfg.grid == (("Q", 0, 1),)
    path.write_text("color=blue\n")
    with pytest.raises(CliError) as info:
        parse_config(["--config", str(path)])
    assert info.value.code == EXIT_USAGE
    with pytest.raises(CliError) as info:
        parse_config(["--config", str(tmp_path / "missing.cfg")])
    assert info.value.code == EXIT_IO


@pytest.mark.parametrize("cfg", [
    ExperimentConfig(),
    ExperimentConfig(p=2, m=2, h=(1, 1, 1), n=2, N=0, Q=2, trials=4, seed=99, suite="count", format="csv"),
    ExperimentConfig(p=3, family="kpower", k=3, grid=(("Q", 0, 2), ("N", 1, 1)), wall_clock=True, out="r.json"),
    ExperimentConfig(family="explicit", family_path="mods.txt"),
])
def test_config_round_trip(cfg, tmp_path):
    path = tmp_path / "echo.cfg"
    path.write_text(cfg.to_text())
    back, _ = parse_config(["--config", str(path)])
    assert back == cfg


def test_grid_points_order():
    cfg = ExperimentConfig(grid=(("Q", 0, 1), ("N", 2, 3)))
    assert [(c.Q, c.N) for c in grid_points(cfg)] == [(0, 2), (0, 3), (1, 2), (1, 3)]
    assert all(c.grid == () for c in grid_points(cfg))


def test_count_suite_report(capsys):
    code, out, _ = _run(["--p", "2", "--n", "1", "--Q", "2", "--N", "2", "--suite", "count"], capsys)
    assert code == EXIT_OK
    rep = json.loads(out)
    assert set(rep) == REPORT_KEYS
    (count,) = rep["suites"]
    assert count["suite"] == "count" and count["s_q"] == 11 and count["phi_sum"] == 11
    # M(2, d) for d = 0..4
    assert count["m_table"] == [11, 11, 6, 4, 2]
    assert rep["bounds"] == [] and rep["version"] == __version__
    assert len(rep["s_q_hash"]) == 64


@pytest.mark.parametrize("p,n,N", [(2, 1, 2), (3, 2, 1)])
def test_duality_at_q0(p, n, N, capsys):
    code, out, _ = _run(["--p", str(p), "--n", str(n), "--N", str(N), "--Q", "0", "--suite", "duality"], capsys)
    assert code == EXIT_OK
    (d,) = json.loads(out)["suites"]
    top = p ** (n * (N + 1))
    assert d["delta_row"] == pytest.approx(top, rel=1e-10)
    assert d["delta_col"] == pytest.approx(top, rel=1e-10)
    assert d["violations"] == []


def test_bound_grid_reports(capsys):
    code, out, _ = _run(["--p", "2", "--suite", "bound", "--grid", "Q=0..2", "--grid", "N=0..2"], capsys)
    rep = json.loads(out)
    assert len(rep["bounds"]) == 9
    for b in rep["bounds"]:
        assert b["ratios"]["tineq"] <= 1 + 1e-9
        assert set(b["bounds"]) >= {"tineq", "general", "dim1", "kth", "power"}
    assert code == (EXIT_VIOLATION if any(s["violations"] for s in rep["suites"]) else EXIT_OK)


def test_violation_exit_code(capsys):
    # the general bound undershoots the optimum at this point
    code, out, _ = _run(["--p", "2", "--Q", "2", "--N", "1", "--suite", "bound"], capsys)
    rep = json.loads(out)
    assert code == EXIT_VIOLATION
    assert {v["bound"] for v in rep["suites"][0]["violations"]} >= {"general"}


def test_verify_suite_passes(capsys):
    code, out, _ = _run(["--p", "3", "--n", "2", "--Q", "1", "--N", "1", "--suite", "verify"], capsys)
    assert code == EXIT_OK
    names = [s["suite"] for s in json.loads(out)["suites"]]
    assert names == ["algebra", "orthogonality"]


def test_all_suite_order_and_byte_determinism(tmp_path):
    argv = ["--p", "3", "--Q", "1", "--N", "1", "--suite", "all", "--seed", "7"]
    path = tmp_path / "r.json"  # the output path is part of the config echo
    outs = []
    for _ in range(2):
        main(argv + ["--out", str(path)])
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    rep = json.loads(outs[0])
    assert [s["suite"] for s in rep["suites"]] == ["algebra", "orthogonality", "duality", "count", "bound"]
    assert "seconds" not in rep["timing"]["points"][0]


def test_wall_clock_is_opt_in(capsys):
    _, out, _ = _run(["--p", "2", "--Q", "1", "--suite", "count", "--wall-clock"], capsys)
    assert "count" in json.loads(out)["timing"]["points"][0]["seconds"]


def test_parallel_matches_serial(monkeypatch):
    cfg, _ = parse_config(["--p", "2", "--suite", "all", "--grid", "Q=0..1", "--grid", "N=0..1"])
    serial = to_json(run_experiment(cfg))
    monkeypatch.setenv("FFSIEVE_THREADS", "3")
    assert to_json(run_experiment(cfg)) == serial
    monkeypatch.setenv("FFSIEVE_THREADS", "0")
    with pytest.raises(CliError):
        run_experiment(cfg)


def test_csv_rows(capsys):
    code, out, _ = _run(["--p", "2", "--suite", "all", "--grid", "Q=0..1", "--grid", "N=1..2", "--format", "csv"],
                        capsys)
    rows = list(csv.reader(io.StringIO(out)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) - 1 == 4 * 5
    assert {r[0] for r in rows[1:]} == {"algebra", "orthogonality", "duality", "count", "bound"}
    assert code in (EXIT_OK, EXIT_VIOLATION)


def test_skipped_point_is_reported(capsys):
    code, out, _ = _run(["--p", "3", "--n", "2", "--N", "5", "--Q", "0"], capsys)
    (s,) = json.loads(out)["suites"]
    assert s["suite"] == "skipped" and "ball size" in s["reason"]
    assert code == EXIT_OK


def test_empty_report_serializes():
    rep = {"config": ExperimentConfig().echo(), "suites": [], "bounds": [], "timing": {}, "version": __version__,
           "s_q_hash": ""}
    data = emit_report(rep, "json")
    assert json.loads(data)["suites"] == [] and data == emit_report(rep, "json")
    with pytest.raises(ValueError):
        emit_report(rep, "xml")


def test_float_formatting():
    assert to_json({"b": 0.1, "a": 1.0, "c": float("nan")}) == '{"a":1.0,"b":0.10000000000000001,"c":null}\n'


def test_explicit_family_file(tmp_path, capsys):
    mods = tmp_path / "mods.txt"
    mods.write_text("# t and t + 1\n0 1\n1 1\n1 0 1\n")
    code, out, _ = _run(["--p", "2", "--Q", "2", "--N", "1", "--family", f"explicit:{mods}", "--suite", "count"],
                        capsys)
    assert code == EXIT_OK
    (count,) = json.loads(out)["suites"]
    assert count["moduli"] == 3 and count["s_q"] == 1 + 1 + 2
    mods.write_text("0 5\n")
    assert _run(["--p", "2", "--family", f"explicit:{mods}", "--suite", "count"], capsys)[0] == EXIT_VALIDATION
    assert _run(["--family", f"explicit:{tmp_path / 'nope'}", "--suite", "count"], capsys)[0] == EXIT_IO


def test_io_error_on_output(tmp_path, capsys):
    code, _, err = _run(["--suite", "count", "--out", str(tmp_path / "no" / "such" / "dir.json")], capsys)
    assert code == EXIT_IO and "cannot write" in err


def test_farey_csv_output(tmp_path, capsys):
    path = tmp_path / "farey.csv"
    code, _, _ = _run(["--p", "2", "--Q", "2", "--N", "0", "--suite", "count", "--farey-csv", str(path)], capsys)
    assert code == EXIT_OK
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["index", "f", "r", "lcm_degree", "count"] and len(rows) == 12
    # counts at depth N + 2 = 2 peak at M(2, 2) = 6
    assert max(int(r[4]) for r in rows[1:]) == 6


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ffsieve.cli", "--p", "4"], capture_output=True, text=True)
    assert proc.returncode == EXIT_VALIDATION and "not prime" in proc.stderr

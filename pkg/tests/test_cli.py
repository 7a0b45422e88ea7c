import json

import pytest

from sedvlf.cli import SWEEP_COLUMNS, parse_k, run


def test_stats_output(capsys):
    assert run(["stats", "--p0", "0.03", "--p1", "0.22"]) == 0
    out = capsys.readouterr().out
    assert "C1=3.1954" in out and "C2=4.7004" in out and "C=0.4998" in out


def test_stats_json(capsys):
    assert run(["stats", "--p0", "0.11", "--p1", "0.11", "--format", "json"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["pi0_star"] == 0.5 and d["relabel"] == "none"


def test_parse_k():
    assert parse_k("1..4") == (1, 2, 3, 4)
    assert parse_k("4,8,12") == (4, 8, 12)
    assert parse_k("7") == (7,)


@pytest.mark.parametrize("argv", [
    [], ["bogus"], ["stats", "--p0", "0.1"], ["sweep", "--p0", "0.1", "--p1", "0.1", "--k", "a..b"],
    ["simulate", "--p0", "0.1", "--p1", "0.1", "--k", "2", "--trials", "0"],
    ["sweep", "--p0", "0.1", "--p1", "0.1", "--k", "0"],
])
def test_usage_errors(argv, capsys):
    assert run(argv) == 2


@pytest.mark.parametrize("argv", [
    ["stats", "--p0", "0.5", "--p1", "0.5"],
    ["stats", "--p0", "1.2", "--p1", "0.1"],
    ["bounds", "--p0", "0.1", "--p1", "0.1", "--k", "3", "--epsilon", "0.7"],
    ["firstpassage", "--n", "3", "--p", "0.6", "--delta0", "5"],
])
def test_domain_errors(argv, capsys):
    assert run(argv) == 3
    assert "domain error" in capsys.readouterr().err


def test_firstpassage(capsys):
    assert run(["firstpassage", "--n", "3", "--p", "0.1", "--delta0", "5", "--trials", "20000"]) == 0
    lines = capsys.readouterr().out.splitlines()
    row = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert row["closed_form"] == row["node_solve"] == "4.09328"
    mc, se = float(row["monte_carlo"]), float(row["mc_stderr"])
    assert abs(mc - 4.09328) < 3 * se


def test_bounds_thm6_blank_for_bac(capsys):
    assert run(["bounds", "--p0", "0.03", "--p1", "0.22", "--k", "2"]) == 0
    header, row = capsys.readouterr().out.splitlines()
    cells = dict(zip(header.split(","), row.split(",")))
    assert cells["bound_thm6"] == ""


def test_sweep_csv_format(tmp_path):
    out = tmp_path / "s.csv"
    argv = ["sweep", "--p0", "0.11", "--p1", "0.11", "--k", "1..3", "--trials", "300",
            "--seed", "7", "--workers", "1", "-o", str(out)]
    assert run(argv) == 0
    raw = out.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode("utf-8").splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert len(lines) == 4
    first = dict(zip(SWEEP_COLUMNS, lines[1].split(",")))
    assert first["k"] == "1" and first["epsilon"] == "0.001"
    assert float(first["runtime_s"]) >= 0
    # 6 significant digits
    assert len(first["avg_tau"].replace(".", "").lstrip("0")) <= 6


def test_sweep_reproducible_bytes(tmp_path):
    base = ["sweep", "--p0", "0.03", "--p1", "0.22", "--k", "1..3", "--trials", "400",
            "--seed", "3", "--reproducible"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(base + ["--workers", "1", "-o", str(a)]) == 0
    assert run(base + ["--workers", "2", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    row = a.read_text().splitlines()[1].split(",")
    assert row[SWEEP_COLUMNS.index("bound_thm6")] == ""
    assert row[-1] == ""


def test_sweep_json(capsys):
    assert run(["sweep", "--p0", "0.11", "--p1", "0.11", "--k", "2", "--trials", "50",
                "--format", "json", "--reproducible", "--workers", "1"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert list(rows[0]) == SWEEP_COLUMNS
    assert rows[0]["runtime_s"] is None


def test_simulate(capsys):
    assert run(["simulate", "--p0", "0.11", "--p1", "0.11", "--k", "3", "--trials", "100",
                "--workers", "1"]) == 0
    header, row = capsys.readouterr().out.splitlines()
    assert header.startswith("k,M,trials,avg_tau")


def test_anomaly_exit(monkeypatch, capsys):
    import sedvlf.session_sim as sim
    monkeypatch.setattr(sim, "default_max_steps", lambda *a: 1)
    assert run(["simulate", "--p0", "0.11", "--p1", "0.11", "--k", "4", "--trials", "5",
                "--workers", "1"]) == 4
    assert run(["sweep", "--p0", "0.11", "--p1", "0.11", "--k", "4", "--trials", "5",
                "--workers", "1"]) == 4

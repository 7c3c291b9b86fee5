import json
from pathlib import Path

import pytest

from tfcalc.cli import ConfigError, main, parse_range

CANDIDATES = Path(__file__).resolve().parents[1] / "scripts" / "candidates"


def records(path):
    lines = Path(path).read_text().splitlines()
    return [json.loads(l) for l in lines[:-1]], json.loads(lines[-1])


def test_parse_range():
    assert parse_range("3..5", "dims") == (3, 5)
    assert parse_range("4", "dims") == (4, 4)
    for bad in ("5..3", "a..b", "3..", ""):
        with pytest.raises(ConfigError):
            parse_range(bad, "dims")


@pytest.mark.parametrize("argv", [
    ["algebra", "--dims", "5..3"],
    ["algebra", "--dims", "2..4"],
    ["algebra", "--dims", "3..13"],
    ["algebra", "--ranks", "1..9"],
    ["algebra", "--dims", "3..9", "--exact"],
    ["algebra", "--ranks", "1..7", "--exact"],
    ["algebra", "--trials", "-1"],
    ["chart", "--fixture", "cone"],
    ["chart", "--fixture", "flat", "--step", "0"],
    ["solution", "--input", "/does/not/exist.json"],
    ["construct", "graph-poly"],
    ["construct", "graph-poly", "--edges", "/does/not/exist.txt"],
])
def test_config_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_usage_error_exit_2():
    with pytest.raises(SystemExit) as e:
        main(["algebra", "--bogus"])
    assert e.value.code == 2


def test_zero_trials(tmp_path, capsys):
    out = tmp_path / "r.ndjson"
    assert main(["algebra", "--trials", "0", "--out", str(out)]) == 0
    recs, summary = records(out)
    assert recs == [] and summary["total"] == 0 and summary["exit"] == 0


def test_algebra_report(tmp_path, capsys):
    out = tmp_path / "r.ndjson"
    assert main(["algebra", "--dims", "3..4", "--ranks", "1..3", "--trials", "3", "--seed", "7",
                 "--out", str(out)]) == 0
    recs, summary = records(out)
    assert summary["passed"] == summary["total"] == len(recs) > 0
    assert [r["check"] for r in recs] == sorted(r["check"] for r in recs)
    assert all(set(r) >= {"check", "residual", "tol", "pass", "notes"} for r in recs)
    table = capsys.readouterr().out
    assert "passed" in table and "check" in table.splitlines()[0]


def test_algebra_exact(tmp_path, capsys):
    out = tmp_path / "r.ndjson"
    assert main(["algebra", "--dims", "3", "--ranks", "1..2", "--trials", "1", "--exact", "--out", str(out)]) == 0
    recs, _ = records(out)
    assert all(r["residual"] == 0 for r in recs)


def test_determinism_across_jobs(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["algebra", "--dims", "3..4", "--ranks", "1..2", "--trials", "2", "--seed", "11"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--jobs", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_jobs_from_environment(monkeypatch, tmp_path, capsys):
    monkeypatch.setenv("TFCALC_THREADS", "2")
    out = tmp_path / "r"
    assert main(["algebra", "--dims", "3", "--ranks", "1", "--trials", "1", "--out", str(out)]) == 0


def test_chart_sphere(tmp_path, capsys):
    out = tmp_path / "c"
    assert main(["chart", "--fixture", "sphere", "--step", "1e-3", "--trials", "1", "--out", str(out)]) == 0
    recs, summary = records(out)
    names = {r["check"] for r in recs}
    assert "chart/sphere/curvature_closed_form" in names
    assert summary["failed"] == 0


def test_construct_graph_poly(tmp_path, capsys):
    edges = tmp_path / "k4.txt"
    edges.write_text("1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n")
    art = tmp_path / "k4.json"
    assert main(["construct", "graph-poly", "--edges", str(edges), "--artifact", str(art)]) == 0
    data = json.loads(art.read_text())
    cert = data["certificate"]
    assert cert["pass"] and cert["values"]["sigma_over_h"] == 4 and cert["values"]["kappa"] == -24
    assert data["tensor"]["rank"] == 3 and data["tensor"]["dim"] == 6


def test_construct_low_degree_fails(tmp_path, capsys):
    edges = tmp_path / "c4.txt"
    edges.write_text("1 2\n2 3\n3 4\n4 1\n")
    assert main(["construct", "graph-poly", "--edges", str(edges)]) == 2
    assert main(["construct", "graph-poly", "--edges", str(edges), "--allow-low-degree"]) == 1


@pytest.mark.parametrize("target", ["cartan-cubic", "su3-cubic"])
def test_construct_other(target, capsys):
    assert main(["construct", target]) == 0


@pytest.mark.parametrize("name", sorted(p.name for p in CANDIDATES.glob("*.json")))
def test_candidate_files(name, tmp_path, capsys):
    out = tmp_path / "s"
    assert main(["solution", "--input", str(CANDIDATES / name), "--out", str(out)]) == 0


def test_solution_failure_and_parse_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "flat-algebraic", "polynomial": {"dim": 3, "terms": [[[2, 0, 0], 1]]}}')
    assert main(["solution", "--input", str(bad)]) == 1
    bad.write_text('{"kind": "flat-algebraic", "polynomial": {"dim": 3, "terms": [[[2, 0], 1]]}}')
    assert main(["solution", "--input", str(bad)]) == 2
    bad.write_text("{not json")
    assert main(["solution", "--input", str(bad)]) == 2
    bad.write_text('{"kind": "wormhole"}')
    assert main(["solution", "--input", str(bad)]) == 2


def test_solution_clifford_reports_higgs(tmp_path, capsys):
    out = tmp_path / "s"
    assert main(["solution", "--input", str(CANDIDATES / "clifford.json"), "--out", str(out)]) == 0
    recs, _ = records(out)
    assert recs[0]["values"]["higgs"] < 1e-4 and recs[0]["values"]["kappa"] == 2


def test_chart_candidate_with_user_expressions(tmp_path, capsys):
    cand = tmp_path / "c.json"
    cand.write_text(json.dumps({
        "kind": "chart", "fixture": "torus", "dim": 3, "count": 2,
        "tensors": [{"coef": 1, "class": "codazzi", "rank": 2,
                     "components": {"12": "0.1*sin(x3)", "13": "0.1*cos(x2)"}}]}))
    # a non-constant trace-free field on the flat torus does not solve the coupled equation
    assert main(["solution", "--input", str(cand)]) == 1


def test_documented_algebra_run(tmp_path, capsys):
    out = tmp_path / "r"
    assert main(["algebra", "--dims", "3..5", "--ranks", "1..4", "--trials", "100", "--seed", "7",
                 "--out", str(out)]) == 0
    _, summary = records(out)
    assert summary["failed"] == 0 and summary["total"] == 3 * 4 * 13

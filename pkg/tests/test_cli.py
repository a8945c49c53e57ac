import csv
import io
import json

import pytest

from ndsl.cli import EXIT_NUMERICAL, EXIT_PRECONDITION, EXIT_PROBLEM, main
from ndsl.fixtures import fixture_path


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_example_a(capsys):
    code, out, err = run_cli(capsys, "solve", fixture_path("exampleA"), "--real-window", -60, 60,
                             "--complex-box", -10, 10, -10, 10)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    nonreal = [r for r in rows if float(r["im_lambda"]) != 0]
    assert len(nonreal) == 2
    for r in nonreal:
        assert abs(float(r["re_lambda"])) <= 1e-6 and abs(abs(float(r["im_lambda"])) - 4.3) <= 0.1
    assert "real_window=-60 60" in err and "tol_lambda=1e-10" in err
    assert "box -10 10 1e-06 10 count=1 depth=0" in err


def test_solve_deterministic(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert main(["solve", str(fixture_path("exampleB")), "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_indices(capsys):
    code, out, _ = run_cli(capsys, "indices", fixture_path("exampleB"))
    assert code == 0 and "n_R=2" in out and "n_H=3" in out
    assert "complex_box=-20 20 -20 20" in out


def test_classify(capsys):
    code, out, _ = run_cli(capsys, "classify", fixture_path("trivial"))
    assert code == 0 and "right_definite" in out


def test_precondition_exit(capsys):
    code, _, err = run_cli(capsys, "indices", fixture_path("exampleA_q0"))
    assert code == EXIT_PRECONDITION and "[precondition]" in err
    code, _, _ = run_cli(capsys, "eigenfunction", fixture_path("trivial"))
    assert code == EXIT_PRECONDITION


def test_invalid_problem(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"interval": [0, 1], "p": [{"to": 1, "expr": "-1"}],
                               "q": [{"to": 1, "expr": "0"}], "r": [{"to": 1, "expr": "1"}]}))
    code, _, err = run_cli(capsys, "solve", bad)
    assert code == EXIT_PROBLEM and "p not positive" in err
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert run_cli(capsys, "solve", broken)[0] == EXIT_PROBLEM
    syntax = tmp_path / "syntax.json"
    syntax.write_text(json.dumps({"interval": [0, 1], "p": [{"to": 1, "expr": "2*"}],
                                  "q": [{"to": 1, "expr": "0"}], "r": [{"to": 1, "expr": "1"}]}))
    assert run_cli(capsys, "solve", syntax)[0] == EXIT_PROBLEM
    assert run_cli(capsys, "solve", tmp_path / "missing.json")[0] == EXIT_PROBLEM
    assert run_cli(capsys, "solve", fixture_path("trivial"), "--real-window", 5, 1)[0] == EXIT_PROBLEM
    assert run_cli(capsys, "solve", fixture_path("trivial"), "--tol-f", -1)[0] == EXIT_PROBLEM


def test_numerical_failure_exit(capsys, monkeypatch):
    import ndsl.cli as cli
    from ndsl.errors import NumericalError

    def boom(*a, **k):
        raise NumericalError("budget exhausted", "winding")
    monkeypatch.setattr(cli, "complex_spectrum", boom)
    code, _, err = run_cli(capsys, "solve", fixture_path("trivial"))
    assert code == EXIT_NUMERICAL and "[winding] budget exhausted" in err


def test_eigenfunction(tmp_path, capsys):
    out = tmp_path / "ef.csv"
    plots = tmp_path / "plots"
    code, _, err = run_cli(capsys, "eigenfunction", fixture_path("exampleA"), "--lambda", 0, 4.3,
                           "--out", out, "--emit-plot", plots)
    assert code == 0
    assert out.read_text().splitlines()[0] == "x,re_u,im_u,re_v,im_v"
    assert "interlacing=pass" in err and "complex_ghost_nondegenerate" in err
    assert (plots / "eigenfunction_plot.csv").read_text().startswith("x,u,v,abs_y")


def test_asymptotics_and_scan(capsys, tmp_path):
    code, out, err = run_cli(capsys, "asymptotics", fixture_path("trivial"), "--n-max", 3,
                             "--emit-plot", tmp_path)
    assert code == 0
    assert out.splitlines() == ["side,n,lambda,ratio", "+,1,4.00000000000014,4.00000000000014", "+,2,9,2.25",
                                "+,3,16.0000000000001,1.77777777777779"] or out.startswith("side,n,lambda,ratio")
    assert "side -:" in err
    assert (tmp_path / "asymptotics_plot.csv").exists()
    code, out, _ = run_cli(capsys, "scan", fixture_path("trivial"), "--real-window", 0, 2, "--points", 3)
    assert out.splitlines()[0] == "re_lambda,im_lambda,re_F,im_F" and len(out.splitlines()) == 4
    code, out, _ = run_cli(capsys, "scan", fixture_path("trivial"), "--complex-box", -1, 1, -1, 1,
                           "--points", 3)
    assert len(out.splitlines()) == 10


def test_oracle(capsys):
    code, out, _ = run_cli(capsys, "oracle", fixture_path("exampleA"), "--real-window", -50, 50,
                           "--oracle-n", 400)
    assert code == 0
    worst = float(out.strip().splitlines()[-1].split("=")[1])
    assert worst <= 0.01

import json
import subprocess
import sys

import pytest

from substruct.cli import main
from substruct.experiments import CSV_COLUMNS, read_results_csv


def test_solve_flags_to_stdout(capsys):
    assert main(["solve", "--problem", "elasticity", "--precond", "b1", "--n", "2",
                 "--m", "2", "--quiet"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == ",".join(CSV_COLUMNS)
    (row,) = read_results_csv(out)
    assert row.converged and row.n == 2


def test_solve_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"problem": "maxwell", "preconditioner": "b2", "n": [2],
                               "m": [2, 4]}))
    out = tmp_path / "r.csv"
    assert main(["solve", "--config", str(cfg), "--out", str(out)]) == 0
    err = capsys.readouterr().err
    assert err.count("iterations") == 2
    assert [r.m for r in read_results_csv(out)] == [2, 4]


def test_report_pivot(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert main(["solve", "--problem", "elasticity", "--n", "2,3", "--m", "2",
                 "--out", str(out), "--quiet"]) == 0
    assert main(["report", "--in", str(out)]) == 0
    text = capsys.readouterr().out
    assert "| m \\ n | 2 | 3 |" in text


@pytest.mark.parametrize("argv", [
    ["solve"],
    ["solve", "--problem", "elasticity", "--m", "3"],
    ["solve", "--problem", "elasticity", "--jump", "choice1", "--n", "2"],
    ["table13", "--problem", "maxwell", "--h", "3"],
    ["coarsening", "--problem", "maxwell", "--m", "x"],
    ["report", "--in", "/nonexistent.csv"],
])
def test_config_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_config_conflicts_with_flags(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"problem": "maxwell"}))
    assert main(["solve", "--config", str(cfg), "--n", "2"]) == 2


def test_report_rejects_mixed(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text(",".join(CSV_COLUMNS) + "\n"
                 "elasticity,b1,2,2,none,1.0,5,true,1e-7,81,0.1,0.1\n"
                 "elasticity,b2,2,2,none,1.0,5,true,1e-7,81,0.1,0.1\n")
    assert main(["report", "--in", str(p)]) == 2
    assert main(["report", "--in", str(p), "--layout", "flat-csv"]) == 0


def test_coarsening_and_two_cube_commands(tmp_path, capsys):
    assert main(["coarsening", "--problem", "elasticity", "--m", "8"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "problem,m,solver,kind,kept,full,ratio" and len(lines) == 3
    out = tmp_path / "t.csv"
    assert main(["table13", "--problem", "elasticity", "--h", "8", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[1].startswith("elasticity,1/8,")


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "substruct", "--version"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "kernels:" in res.stdout
    res = subprocess.run([sys.executable, "-m", "substruct", "solve", "--problem", "x"],
                         capture_output=True, text=True)
    assert res.returncode == 2

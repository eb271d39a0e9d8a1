import os
import subprocess
import sys

import pytest

from eprsat.cli import main

DATA = os.path.join(os.path.dirname(__file__), "data")


def test_sat_exit_code(tmp_path):
    p = tmp_path / "p.p"
    p.write_text("domain a b .\nP(X) .\n")
    assert main(["--input", str(p)]) == 10


def test_unsat_exit_code(tmp_path):
    p = tmp_path / "p.p"
    p.write_text("domain a .\nfalse .\n")
    assert main(["--input", str(p)]) == 20


def test_parse_error_exit_code(tmp_path, capsys):
    p = tmp_path / "p.p"
    p.write_text("P(X) .\n")  # no domain declaration
    assert main(["--input", str(p)]) == 1
    assert "error" in capsys.readouterr().err


def test_missing_input_exit_code(capsys):
    assert main([]) == 1


def test_step_cap_exit_code(tmp_path, capsys):
    assert main(["--input", os.path.join(DATA, "ex33.p"),
                 "--max-steps", "3"]) == 1
    assert "step cap" in capsys.readouterr().err


def test_trace_and_model_files(tmp_path):
    trace = tmp_path / "t.txt"
    model = tmp_path / "m.txt"
    code = main(["--input", os.path.join(DATA, "ex33.p"),
                 "--script", os.path.join(DATA, "ex33.dec"),
                 "--trace", str(trace), "--model", str(model)])
    assert code == 10
    golden = open(os.path.join(DATA, "ex33.trace.golden")).read()
    assert trace.read_text() == golden
    assert model.read_text().startswith("% model\n")


def test_check_mode_agrees(tmp_path):
    p = tmp_path / "p.p"
    p.write_text("domain a b .\nP(X) | Q(X) .\n-P(a) .\n")
    assert main(["--input", str(p), "--check"]) == 10


def test_check_mode_unsat(tmp_path):
    p = tmp_path / "p.p"
    p.write_text("domain a .\nP(a) .\n-P(a) .\n")
    assert main(["--input", str(p), "--check"]) == 20


def test_bench_flag_with_check():
    assert main(["--bench", "3,3", "--check"]) == 10


def test_bench_bad_format(capsys):
    assert main(["--bench", "oops"]) == 1


def test_no_index_and_seed_flags(tmp_path):
    assert main(["--input", os.path.join(DATA, "ex33.p"),
                 "--seed", "5", "--no-index"]) == 10
    assert main(["--input", os.path.join(DATA, "ex33.p"),
                 "--seed", "5", "--index"]) == 10


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "eprsat.cli", "--bench", "2,2"],
        capture_output=True,
    )
    assert proc.returncode == 10

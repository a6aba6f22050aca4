import subprocess
import sys

import numpy as np
import pytest

from symvmf import cli, orient
from symvmf.io import parse_fit_report, read_quaternions, write_quaternions
from symvmf.vmf import VmfParams, sample


@pytest.fixture
def samples(tmp_path):
    X = sample(VmfParams(orient.random_quaternions(1, 0)[0], 15.0), 300, seed=1)
    p = tmp_path / "x.csv"
    write_quaternions(p, X)
    return p


def run(capsys, *argv):
    code = cli.run([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_group_check(capsys):
    code, out, _ = run(capsys, "group", "check", "cubic_m3m")
    assert code == 0 and "M=24" in out and "axioms=ok" in out
    code, out, _ = run(capsys, "group", "check", "cubic_m3m", "--antipodal")
    assert "M=48" in out


def test_group_check_violation(capsys, tmp_path):
    p = tmp_path / "g.csv"
    p.write_text("1,0,0,0\n0.7071067811865476,0.7071067811865476,0,0\n")
    code, _, err = run(capsys, "group", "check", p)
    assert code == 2 and "elements 1 and 1" in err


@pytest.mark.parametrize(
    "argv", [["bogus"], ["group", "check", "cubic_m3m", "--bogus"], [], ["estimate", "--method", "x", "--input", "f"]]
)
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 1


def test_missing_input(capsys, tmp_path):
    assert run(capsys, "estimate", "--input", tmp_path / "none.csv")[0] == 2
    assert run(capsys, "group", "check", "nonexistent_group")[0] == 2


def test_trivial_em_matches_naive(capsys, samples):
    _, em, _ = run(capsys, "estimate", "--input", samples, "--method", "em", "--group", "trivial")
    _, naive, _ = run(capsys, "estimate", "--input", samples, "--method", "naive", "--group", "trivial")
    a, b = parse_fit_report(em), parse_fit_report(naive)
    mu_a = np.array(a["mean_raw"].split(","), float)
    mu_b = np.array(b["mean_raw"].split(","), float)
    np.testing.assert_allclose(mu_a, mu_b, atol=1e-10)
    assert float(a["kappa"]) == pytest.approx(float(b["kappa"]), abs=1e-10)


def test_estimate_writes_report(capsys, samples, tmp_path):
    code, out, _ = run(capsys, "estimate", "--input", samples, "--out", tmp_path / "o", "--seed", "3")
    assert code == 0
    assert (tmp_path / "o" / "fit.txt").read_text() == out
    fields = parse_fit_report(out)
    assert set(fields) >= {"mean", "kappa", "iterations", "converged", "log_likelihood"}


def test_numerical_failure_exit_code(capsys, tmp_path):
    p = tmp_path / "x.csv"
    write_quaternions(p, np.array([[1.0, 0, 0, 0], [-1.0, 0, 0, 0]]))
    assert run(capsys, "estimate", "--input", p, "--method", "naive")[0] == 3


def test_bad_sample_file(capsys, tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("q1,q2,q3,q4\n1,0,0,0\n2,0,0,0\n")
    assert run(capsys, "estimate", "--input", p)[0] == 2


def test_fz_map(capsys, samples, tmp_path):
    code, out, _ = run(capsys, "fz", "map", "--input", samples, "--out", tmp_path / "fz")
    assert code == 0
    lines = (tmp_path / "fz" / "fz.csv").read_text().splitlines()
    assert lines[0] == "q1,q2,q3,q4,element" and len(lines) == 301


def test_simulate(capsys, tmp_path):
    argv = ["simulate", "--kappas", "10,50", "--trials", "2", "--n", "100", "--threads", "2"]
    code, _, _ = run(capsys, *argv, "--out", tmp_path / "a")
    assert code == 0
    run(capsys, *argv, "--out", tmp_path / "b")
    a = (tmp_path / "a" / "sweep.csv").read_bytes()
    assert a == (tmp_path / "b" / "sweep.csv").read_bytes()
    assert len(a.splitlines()) == 1 + 2 * 3
    assert run(capsys, "simulate", "--estimators", "", "--out", tmp_path / "c")[0] == 2
    assert not (tmp_path / "c" / "sweep.csv").exists()


def test_ebsd_pipeline(capsys, tmp_path):
    m = tmp_path / "maps" / "m.csv"
    code, _, _ = run(capsys, "ebsd", "synth", "--grains", "3", "--size", "16x12", "--kappa", "500", "--seed", "1",
                     "--out", m)
    assert code == 0 and m.exists() and (tmp_path / "maps" / "m_truth.csv").exists()
    code, out, _ = run(capsys, "ebsd", "index", "--input", m, "--out", tmp_path / "idx", "--threads", "1")
    assert code == 0
    assert len((tmp_path / "idx" / "grains.csv").read_text().splitlines()) == 4
    assert run(capsys, "ebsd", "synth", "--size", "16by12", "--out", m)[0] == 1


def test_help_lists_formats():
    for sub in (["simulate"], ["estimate"], ["fz", "map"], ["group", "check"], ["ebsd", "index"], ["ebsd", "synth"]):
        proc = subprocess.run([sys.executable, "-m", "symvmf", *sub, "--help"], capture_output=True, text=True)
        assert proc.returncode == 0 and "--" in proc.stdout


def test_read_quaternions_round_trip(tmp_path):
    X = orient.random_quaternions(5, 0)
    write_quaternions(tmp_path / "q.csv", X)
    np.testing.assert_allclose(read_quaternions(tmp_path / "q.csv"), X, atol=1e-15)

import io

import pytest

from otk import formats
from otk.cli import main


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def parse_fields(text):
    lines = text.strip().split("\n")
    assert lines[0] == "field,value"
    return dict(line.rsplit(",", 1) for line in lines[1:])


def test_recover_success_and_trace(tmp_path):
    trace = tmp_path / "t.csv"
    code, out, _ = run("recover", "--algo", "rotp", "--n", "50", "--k", "3", "--m", "45",
                       "--seed", "7", "--trace-out", str(trace))
    assert code == 0
    assert "rel_error" in out and "iterations" in out
    lines = trace.read_text().split("\n")
    assert lines[0] == "p,rel_error,residual_norm,qp_iters,qp_converged"


def test_recover_under_measured_fails():
    code, out, _ = run("recover", "--algo", "rot", "--m", "4", "--n", "50", "--k", "3")
    assert code == 1
    assert "success = false" in out


@pytest.mark.parametrize("argv", [
    ("recover", "--k", "60", "--n", "50"),
    ("recover", "--algo", "omp"),
    ("recover", "--eps", "0"),
    ("recover", "--trace-out", "/nonexistent-dir/t.csv"),
    ("bogus",),
])
def test_recover_usage_errors(argv):
    code, _, err = run(*argv)
    assert code == 2
    assert err


def test_phase_single_cell(tmp_path):
    out_csv, pgm = tmp_path / "g.csv", tmp_path / "g.pgm"
    code, _, _ = run("phase", "--n", "20", "--k", "2", "--m-values", "12", "--p-values", "5",
                     "--trials", "1", "--out-csv", str(out_csv), "--out-heatmap", str(pgm),
                     "--workers", "1")
    assert code == 0
    assert len(out_csv.read_text().strip().split("\n")) == 2
    assert formats.read_pgm(pgm).size == 1


def test_phase_default_config_rows_and_determinism(tmp_path, monkeypatch):
    monkeypatch.setenv("OTK_WORKERS", "1")
    cfg = tmp_path / "grid.cfg"
    cfg.write_text("# default grid, two trials\ntrials = 2\nalgorithm = rotp\nmaster_seed = 5\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("phase", "--config", str(cfg), "--out-csv", str(a))[0] == 0
    assert run("phase", "--config", str(cfg), "--out-csv", str(b), "--workers", "3")[0] == 0
    assert len(a.read_text().strip().split("\n")) == 1 + 24 * 18
    assert a.read_bytes() == b.read_bytes()


def test_phase_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("OTK_WORKERS", "2")
    a = tmp_path / "a.csv"
    code, _, _ = run("phase", "--n", "20", "--k", "2", "--m-values", "8,12", "--p-values", "1,5",
                     "--trials", "4", "--out-csv", str(a), "--workers", "1")
    assert code == 0


@pytest.mark.parametrize("content", ["workers = 3\n", "trials = many\n"])
def test_phase_bad_config(tmp_path, content):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(content)
    code, _, err = run("phase", "--config", str(cfg), "--out-csv", str(tmp_path / "x.csv"))
    assert code == 2 and err


def test_phase_unwritable(tmp_path):
    code, _, _ = run("phase", "--trials", "1", "--out-csv", "/nonexistent-dir/g.csv")
    assert code == 2


def test_theory_scan():
    code, out, _ = run("theory", "--n", "50", "--k", "3", "--gamma-samples", "2000")
    assert code == 0
    f = parse_fields(out)
    assert float(f["transition_order"]) == pytest.approx(11.44, abs=0.01)
    assert f["c_prime_ok"] == "true" and f["c_dprime_ok"] == "true"
    assert int(f["m_transition_rot"]) <= int(f["m_closed_rot"])


def test_theory_zero_ck2():
    code, out, _ = run("theory", "--n", "50", "--k", "3", "--ck2", "0", "--m", "9",
                       "--gamma-samples", "500")
    assert code == 0
    f = parse_fields(out)
    assert float(f["rho1"]) == 0.0
    assert f["rot_converges"] == "true"


def test_theory_point_below_threshold():
    code, out, _ = run("theory", "--m", "4", "--n", "50", "--k", "3", "--ck2", "1",
                       "--gamma-samples", "500")
    assert code == 0
    assert parse_fields(out)["rot_converges"] == "false"


def test_theory_step_hypothesis():
    code, _, err = run("theory", "--n", "50", "--k", "3", "--m", "10", "--eta", "0.5")
    assert code == 2
    assert "eta * m <= 1" in err


def test_gamma_report():
    code, out, _ = run("gamma", "--n", "20", "--k", "2", "--samples", "5000", "--seed", "1")
    assert code == 0
    f = parse_fields(out)
    assert sum(v == "pass" for v in f.values()) == 5


def test_gamma_skips_large_k():
    code, out, err = run("gamma", "--n", "5", "--k", "3", "--samples", "500")
    assert code == 0
    assert "skipping" in err
    assert "gamma_hat" in out

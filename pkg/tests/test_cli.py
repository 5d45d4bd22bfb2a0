import subprocess
import sys

import numpy as np
import pytest

from entlab import cli

LINE = "x\n0\n0.3\n0.6\n1.0\n"


@pytest.fixture
def points(tmp_path):
    p = tmp_path / "points.csv"
    p.write_text(LINE)
    return p


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    lines = text.strip().splitlines()
    assert lines[0].startswith("# config-hash: ")
    return [ln.split(",") for ln in lines[1:]]


def test_cover_exact(capsys, points):
    code, out, _ = run(capsys, "cover", "--input", points, "--eps", "0.35", "--method", "exact")
    assert code == 0
    assert rows(out) == [["epsilon", "count", "kind"], ["0.35", "2", "EXACT"]]


def test_oracle_p1(capsys):
    code, out, _ = run(capsys, "oracle", "--table", "TH04", "--p", "2", "--tau", "0.25", "--beta", "0", "--gamma", "0")
    assert code == 0
    header, row = rows(out)
    assert [float(x) for x in row[:4]] == [1, 0.75, 0, 0] and row[4] == "P1"


def test_operator_sv_fit(capsys):
    code, out, _ = run(capsys, "operator", "rl", "--alpha", "0.5", "--grid", "256", "sv", "--fit")
    assert code == 0
    header, row = rows(out)
    assert header[:2] == ["C", "p0"]
    assert abs(float(row[1]) - 0.5) <= 0.05


def test_deterministic(tmp_path, points):
    argv = ["operator", "kernel", "--tau", "0.25", "--grid", "65", "shift", "--trials", "3"]
    a = subprocess.run([sys.executable, "-m", "entlab", *argv], capture_output=True, check=True).stdout
    b = subprocess.run([sys.executable, "-m", "entlab", *argv], capture_output=True, check=True).stdout
    assert a == b and a.startswith(b"# config-hash: ")


def test_seed_changes_hash(capsys):
    _, a, _ = run(capsys, "operator", "kernel", "--grid", "65", "shift", "--trials", "1", "--seed", "0")
    _, b, _ = run(capsys, "operator", "kernel", "--grid", "65", "shift", "--trials", "1", "--seed", "1")
    assert a.splitlines()[0] != b.splitlines()[0]
    assert a.splitlines()[2] != b.splitlines()[2]


def test_out_file(capsys, tmp_path, points):
    out = tmp_path / "o.csv"
    code, text, _ = run(capsys, "cover", "--input", points, "--eps", "0.1,0.35", "--out", out)
    assert code == 0 and text == ""
    assert len(rows(out.read_text())) == 3


def test_config_file_and_override(capsys, tmp_path, points):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# greedy run\nmethod = greedy\neps = 0.35\n")
    _, out, _ = run(capsys, "cover", "--config", cfg, "--input", points)
    assert rows(out)[1] == ["0.35", "3", "UPPER_GREEDY"]
    _, out, _ = run(capsys, "cover", "--config", cfg, "--input", points, "--method", "exact")
    assert rows(out)[1] == ["0.35", "2", "EXACT"]


def test_config_matches_flags(capsys, tmp_path, points):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("eps = 0.35\n")
    _, a, _ = run(capsys, "cover", "--config", cfg, "--input", points)
    _, b, _ = run(capsys, "cover", "--input", points, "--eps", "0.35")
    assert a == b


@pytest.mark.parametrize("body,msg", [("nope = 1\n", "unknown key 'nope'"), ("method = fast\n", "method must be one of"),
                                      ("eps\n", "expected key=value"), ("eps = x\n", "eps")])
def test_config_errors(capsys, tmp_path, points, body, msg):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(body)
    code, _, err = run(capsys, "cover", "--config", cfg, "--input", points)
    assert code == 2 and msg in err and "bad.cfg:1" in err


def test_bad_flag(capsys, points):
    code, _, err = run(capsys, "cover", "--input", points, "--bogus")
    assert code == 2 and "unrecognized" in err


def test_missing_file(capsys):
    assert run(capsys, "cover", "--input", "/nonexistent.csv", "--eps", "1")[0] == 2


def test_regime_error(capsys):
    code, _, err = run(capsys, "oracle", "--table", "TH04", "--p", "2", "--tau", "0.9")
    assert code == 2 and "nearest" in err


def test_size_cap(capsys, tmp_path):
    p = tmp_path / "big.csv"
    np.savetxt(p, np.random.default_rng(0).random((40, 2)), delimiter=",")
    code, _, err = run(capsys, "cover", "--input", p, "--eps", "0.01", "--solver", "bnb")
    assert code == 4 and "entlab.metricspace" in err


def test_numeric_failure_names_module(capsys, monkeypatch):
    def broken(*a, **k):
        raise np.linalg.LinAlgError("did not converge")

    monkeypatch.setattr(np.linalg, "svd", broken)
    code, _, err = run(capsys, "operator", "rl", "--grid", "32", "sv")
    assert code == 3 and "entlab.operator" in err


def test_bad_threads(capsys, monkeypatch, points):
    monkeypatch.setenv("ENTLAB_THREADS", "zero")
    assert run(capsys, "cover", "--input", points, "--eps", "1")[0] == 2


def test_verify_exit_codes(capsys):
    code, out, err = run(capsys, "verify", "--only", "1,9")
    assert code == 0 and "PASS criterion  1" in err
    assert [r[2] for r in rows(out)[1:]] == ["true", "true"]
    code, _, err = run(capsys, "verify", "--only", "8")
    assert code == 1 and "FAIL criterion  8" in err


def test_plot_script(capsys, tmp_path):
    script = tmp_path / "sv_plot.py"
    code, _, _ = run(capsys, "operator", "rl", "--grid", "64", "sv", "--plot", script)
    assert code == 0
    text = script.read_text()
    assert "RL03 rate" in text and "DATA = json.loads" in text
    pytest.importorskip("matplotlib")
    subprocess.run([sys.executable, str(script)], check=True, cwd=tmp_path)
    assert script.with_suffix(".png").exists()


@pytest.mark.parametrize("argv", [
    ["hull", "bounds", "--dim", "3", "--n-max", "3", "--mesh", "0.25"],
    ["hull", "l02", "--n-max", "3"],
    ["kernel", "integral", "--r", "1,0.25"],
    ["kernel", "rate", "--tau", "0.25"],
    ["kernel", "metric", "--grid", "3"],
    ["operator", "rl", "--alpha", "1", "semigroup", "--beta", "1", "--coeffs", "0,1", "--grid", "64"],
    ["operator", "rl", "--alpha", "0.75", "nets", "--net", "means", "--m", "4"],
    ["operator", "rl", "--alpha", "1", "--grid", "64", "rieli", "--n-max", "4"],
    ["hardy", "--check", "lh2", "--N", "50"],
    ["hardy", "--check", "lh1", "--N", "50", "--s", "1"],
])
def test_subcommands_run(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    assert len(rows(out)) >= 2


def test_kernel_integral_value(capsys):
    _, out, _ = run(capsys, "kernel", "integral", "--tau", "0.25", "--q", "2", "--r", "0.25")
    assert float(rows(out)[1][1]) == pytest.approx(1.0)


def test_fit_command(capsys, tmp_path):
    p = tmp_path / "s.csv"
    np.savetxt(p, np.arange(1, 257) ** -0.75)
    _, out, _ = run(capsys, "fit", "--input", p, "--no-log")
    assert float(rows(out)[1][1]) == pytest.approx(0.75, abs=1e-9)


def test_steinwart_command(capsys, tmp_path):
    p = tmp_path / "e.csv"
    np.savetxt(p, 1.0 / np.arange(1, 65))
    _, out, _ = run(capsys, "hull", "steinwart", "--input", p, "--p", "2", "--t", "1", "--alphas", "1,2")
    assert rows(out)[1][0] == "15"


def test_apply_command(capsys, tmp_path):
    p = tmp_path / "f.csv"
    np.savetxt(p, np.ones(65))
    _, out, _ = run(capsys, "operator", "rl", "--alpha", "1", "apply", "--input", p)
    last = rows(out)[-1]
    assert float(last[0]) == 1.0 and float(last[1]) == pytest.approx(1.0, abs=1e-10)

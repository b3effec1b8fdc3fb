import csv
import io

import numpy as np
import pytest

from qdecay import cli
from qdecay.kinematics import gamma


def run_cli(tmp_path, command, text, *extra, name="run"):
    cfg = tmp_path / f"{name}.cfg"
    cfg.write_text(text, encoding="utf-8")
    out = tmp_path / f"{name}.csv"
    code = cli.main([command, "--config", str(cfg), "--out", str(out), *extra])
    return code, out


def table(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# qdecay ")
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_parse_errors_are_line_precise():
    with pytest.raises(cli.ConfigError, match=r"x:3: Gamma: must be positive"):
        cli.build_config(cli.parse_config_text("M = 1\n# c\nGamma = -1\n", "x"), "x")
    with pytest.raises(cli.ConfigError, match=r"x:1: bogus: unknown key"):
        cli.parse_config_text("bogus = 1\n", "x")
    with pytest.raises(cli.ConfigError, match=r"x:2: M: given more than once"):
        cli.build_config(cli.parse_config_text("M = 1\nM = 2\n", "x"), "x")
    with pytest.raises(cli.ConfigError, match=r"x:1: u: need 0 <= u < 1"):
        cli.build_config(cli.parse_config_text("u = 1\n", "x"), "x")
    with pytest.raises(cli.ConfigError, match="width"):
        cli.build_config(cli.parse_config_text("kind = boosted\n", "x"), "x")


def test_survival_analytic(tmp_path):
    code, out = run_cli(tmp_path, "survival", "shape = analytic\nGamma = 0.1\nt_grid = 0, 50, 11\n")
    assert code == 0
    rows = table(out)
    assert list(rows[0]) == cli.HEADERS["survival"]
    t = np.array([float(r["t"]) for r in rows])
    P = np.array([float(r["P"]) for r in rows])
    np.testing.assert_allclose(P, np.exp(-0.1 * t), atol=1e-6)
    assert np.all(np.diff(t) > 0) and rows[0]["xi"] == ""


def test_survival_wavepacket_t0(tmp_path):
    code, out = run_cli(tmp_path, "survival", "kind = wavepacket\nwidth = 0.1\nk = 0\nk = 1\nt = 0\nt = 5\n")
    assert code == 0
    rows = table(out)
    assert [float(r["t"]) for r in rows] == [0.0, 0.0, 5.0, 5.0]
    for r in rows[:2]:
        assert abs(float(r["P"]) - 1) < 1e-6


def test_lifetime_columns(tmp_path):
    code, out = run_cli(tmp_path, "lifetime", "k = 0\nk = 1\nu = 0\nu = 0.6\n")
    assert code == 0
    rows = table(out)
    for r in rows:
        if float(r["u"]) == 0:
            np.testing.assert_allclose(float(r["T_timedomain"]), float(r["T_closed"]), rtol=1e-2)
        else:
            assert r["T_timedomain"] == ""
        assert r["T_halfintegral"] == ""
    T0 = float(rows[0]["T_closed"])
    # k = 1 at u = 0.6: classical column composes the two velocities
    v = (1 / np.sqrt(2) + 0.6) / (1 + 0.6 / np.sqrt(2))
    np.testing.assert_allclose(float(rows[3]["T_classical"]), T0 / np.sqrt(1 - v * v), rtol=1e-12)


def test_lifetime_even_packet_ratio(tmp_path):
    code, out = run_cli(tmp_path, "lifetime", "width = 0.1\nk0 = 0, 0, 0\nu = 0\nu = 0.3\nu = 0.8\n")
    assert code == 0
    for r in table(out):
        np.testing.assert_allclose(float(r["ratio"]), gamma((0, 0, float(r["u"]))), rtol=1e-10)


def test_dilation_scan(tmp_path):
    code, out = run_cli(tmp_path, "dilation-scan", "Gamma = 0.001\nGamma = 0.3\nk = 2\nu = 0\nu = 0.3\nu = 0.6\n")
    assert code == 0
    rows = table(out)
    assert list(rows[0]) == cli.HEADERS["dilation-scan"]
    narrow = [r for r in rows if float(r["Gamma"]) == 0.001]
    for r in narrow:
        assert abs(float(r["ratio"]) - 1) < 1e-3
    # boost axis is the slower one in the factorial product, so pick by Gamma
    broad = [float(r["ratio"]) for r in rows if float(r["Gamma"]) == 0.3]
    assert np.all(np.diff(broad) > 0) or np.all(np.diff(broad) < 0)
    assert abs(broad[0] - 1) > 1e-3


def test_tail(tmp_path):
    code, out = run_cli(tmp_path, "tail", "alpha = 0.5\nalpha = 1\nseed = 5\n")
    assert code == 0
    for r in table(out):
        assert float(r["abs_err"]) < 0.2
        assert float(r["expected_slope"]) == -2 * (1 + float(r["alpha"]))


def test_tail_rejects_analytic(tmp_path):
    code, _ = run_cli(tmp_path, "tail", "shape = analytic\n")
    assert code == 2


def test_exit_codes(tmp_path, capsys):
    code, out = run_cli(tmp_path, "survival", "Gamma = 0\nt = 1\n")
    assert code == 2 and not out.exists()
    assert "run.cfg:1: Gamma" in capsys.readouterr().err
    code, out = run_cli(tmp_path, "lifetime", "k = 0\n", "--tol", "1e-300", name="num")
    assert code == 3 and out.exists()
    assert "numerical error" in (tmp_path / "num.csv.err").read_text()
    code, out = run_cli(tmp_path, "lifetime", "k = 0\n", name="num")
    assert code == 0 and not (tmp_path / "num.csv.err").exists()
    assert cli.main(["nonsense"]) == 2


def test_threads_do_not_change_output(tmp_path, monkeypatch):
    text = "k = 0\nk = 0.5\nk = 1\nk = 2\nu = 0.2\n"
    _, a = run_cli(tmp_path, "dilation-scan", text, "--threads", "1", name="a")
    monkeypatch.setenv("QDECAY_THREADS", "3")
    _, b = run_cli(tmp_path, "dilation-scan", text, name="b")
    assert a.read_bytes() == b.read_bytes()


def test_hbar_scales_time_columns_only(tmp_path):
    base = "k = 0.5\nu = 0.3\n"
    _, a = run_cli(tmp_path, "lifetime", base, name="a")
    _, b = run_cli(tmp_path, "lifetime", base + "hbar = 0.5\n", name="b")
    ra, rb = table(a)[0], table(b)[0]
    for col in cli.HEADERS["lifetime"]:
        if ra[col] in ("",):
            continue
        f = 0.5 if col in cli.TIME_COLUMNS["lifetime"] else 1.0
        np.testing.assert_allclose(float(rb[col]), f * float(ra[col]), rtol=1e-15)
    assert "hbar=0.5" in b.read_text().splitlines()[0]

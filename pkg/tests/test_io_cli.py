import json

import numpy as np
import pytest

from vmtorus.cli import main, parse_grid, UsageError
from vmtorus.io import (
    TableError,
    format_fit_report,
    params_from_report,
    read_angle_table,
    read_fit_report,
    write_angle_table,
)
from vmtorus.wle import WleConfig, mle_fit, wle_fit


def run(*argv):
    return main([str(a) for a in argv])


def test_table_roundtrip_exact(tmp_path):
    X = np.random.default_rng(0).uniform(0, 2 * np.pi, (20, 3))
    mask = np.arange(20) % 4 == 0
    path = tmp_path / "t.csv"
    write_angle_table(path, X, mask=mask)
    Y, m, cols = read_angle_table(path)
    assert np.array_equal(X, Y) and np.array_equal(mask, m)
    assert cols == ["theta1", "theta2", "theta3"]


def test_table_headerless_and_wrap(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("-1.0,7.0\n0.5,0.25\n")
    X, mask, _ = read_angle_table(path)
    assert mask is None
    np.testing.assert_allclose(X[0], [2 * np.pi - 1, 7 - 2 * np.pi])


def test_table_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(TableError):
        read_angle_table(empty)
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,x\n")
    with pytest.raises(TableError):
        read_angle_table(bad)
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("1,2\n3\n")
    with pytest.raises(TableError):
        read_angle_table(ragged)


def test_report_roundtrip():
    rng = np.random.default_rng(1)
    X = rng.vonmises(0, 8, (80, 2))
    result = wle_fit(X, WleConfig(n_starts=4))
    text = format_fit_report(result, "wle", 80, config=WleConfig(n_starts=4), seed=0)
    fields, w, r = read_fit_report(text)
    params = params_from_report(fields)
    assert np.array_equal(params.kappa, result.params.kappa)
    assert np.array_equal(params.lam, result.params.lam)
    assert np.array_equal(params.mu, result.params.mu)
    assert np.array_equal(w, result.weights) and np.array_equal(r, result.residuals)
    assert fields["pd_flag"] == result.pd_flag and fields["seed"] == 0
    assert fields["config.raf"] == "SCHI"
    assert "# down-weighting level:" in text


def test_simulate_example(tmp_path):
    out = tmp_path / "sim.csv"
    assert run("simulate", "--kappa", "10,20", "--lambda", "15", "-n", 250, "--outliers", 50, "-o", out) == 0
    X, mask, _ = read_angle_table(out)
    assert X.shape == (300, 2) and mask.sum() == 50


def test_simulate_deterministic_and_default_seed(tmp_path):
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    args = ["simulate", "--kappa", "5,10", "--lambda", "5", "-n", 40, "--burn-in", 20]
    run(*args, "-o", a)
    run(*args, "--seed", 0, "-o", b)
    run(*args, "--seed", 1, "-o", c)
    assert a.read_bytes() == b.read_bytes() != c.read_bytes()


def test_simulate_empty(tmp_path):
    out = tmp_path / "e.csv"
    assert run("simulate", "--kappa", "1,2", "-n", 0, "-o", out) == 0
    assert out.read_text() == "theta1,theta2,outlier\n"


def test_simulate_bad_params(tmp_path):
    assert run("simulate", "--kappa", "1,-2", "-n", 5) == 1
    assert run("simulate", "--kappa", "1,2", "--lambda", "1,2", "-n", 5) == 1


def test_fit_cli_and_degrees(tmp_path):
    X = np.random.default_rng(2).vonmises(0.5, 6, (60, 2))
    rad, deg = tmp_path / "r.csv", tmp_path / "d.csv"
    write_angle_table(rad, X)
    write_angle_table(deg, X, degrees=True)
    ra, rb = tmp_path / "a.txt", tmp_path / "b.txt"
    assert run("fit", rad, "--method", "mle", "-o", ra) == 0
    assert run("fit", deg, "--method", "mle", "--degrees", "-o", rb) == 0
    fa, _, _ = read_fit_report(ra)
    fb, _, _ = read_fit_report(rb)
    assert fa["kappa[0]"] == pytest.approx(fb["kappa[0]"], rel=1e-12)
    expected = mle_fit(X).params.kappa[0]
    assert fa["kappa[0]"] == expected


def test_fit_cli_errors(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert run("fit", empty) == 2
    assert run("fit", tmp_path / "missing.csv") == 2
    same = tmp_path / "same.csv"
    write_angle_table(same, np.ones((20, 2)))
    assert run("fit", same, "--method", "mle") == 3
    assert "estimation failed" in capsys.readouterr().err
    assert run("fit", same, "--method", "bogus") == 1


def test_mc_cli(tmp_path):
    scen = tmp_path / "s.json"
    scen.write_text(json.dumps({"kappa": [5, 10], "lambda": [5], "n": 40,
                                "gibbs": {"burn_in": 30}, "wle": {"n_starts": 3}}))
    out, summ = tmp_path / "t.csv", tmp_path / "s.out.json"
    assert run("mc", scen, "--trials", 10, "-o", out, "--summary", summ) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 31
    rows = [l.split(",") for l in lines[1:]]
    for t in range(10):
        mle, mle0 = rows[3 * t], rows[3 * t + 1]
        assert mle[2:] == mle0[2:]
    assert set(json.loads(summ.read_text())) == {"MLE", "MLE0", "WLE"}
    assert run("mc", tmp_path / "nope.json") != 0


def test_mc_scenario_presets(tmp_path):
    from vmtorus.cli import load_scenario

    scen = tmp_path / "p.json"
    scen.write_text(json.dumps({"preset": "five_dim", "contamination": {"n_outliers": 50}}))
    sc, cfg = load_scenario(scen)
    assert sc.p == 5 and sc.contamination.n_outliers == 50
    scen.write_text(json.dumps({"kappa": [10, 20], "lambda": [15], "n": 250,
                                "contamination": {"n_outliers": 50, "shift": {"minor_axis": 2.0}}}))
    sc, _ = load_scenario(scen)
    assert np.linalg.norm(sc.contamination.shift) == pytest.approx(2.0)


def test_parse_grid():
    np.testing.assert_allclose(parse_grid("1:10:1"), np.arange(1, 11))
    np.testing.assert_allclose(parse_grid("0.5,2,8"), [0.5, 2, 8])
    for bad in ("1:10", "a:b:c", "3,1", "1:10:0", "0:5:1"):
        with pytest.raises(UsageError):
            parse_grid(bad)


def test_monitor_cli(tmp_path):
    X = np.random.default_rng(3).vonmises(0, 8, (60, 2))
    data = tmp_path / "x.csv"
    write_angle_table(data, X)
    assert run("monitor", data, "--grid", "1:x", "--n-starts", 3) == 1
    out = tmp_path / "m.csv"
    assert run("monitor", data, "--grid", "4", "--n-starts", 3, "-o", out) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 2
    head, row = lines[0].split(","), lines[1].split(",")
    rep = tmp_path / "r.txt"
    run("fit", data, "--kstar", 4, "--n-starts", 3, "-o", rep)
    fields, _, _ = read_fit_report(rep)
    assert float(row[head.index("kappa0")]) == fields["kappa[0]"]
    assert float(row[head.index("downweighting_level")]) == fields["downweighting_level"]


def test_density_grid_cli(tmp_path):
    out = tmp_path / "g.csv"
    assert run("density-grid", "--kappa", "5,10", "--lambda", "5", "--resolution", 128, "-o", out) == 0
    g = np.loadtxt(out, delimiter=",", skiprows=1)
    assert g.shape == (16384, 3)
    assert g[:, 2].sum() * (2 * np.pi / 128) ** 2 == pytest.approx(1.0, abs=1e-2)
    assert g[:, :2].min() == pytest.approx(-np.pi) and g[:, :2].max() < np.pi
    assert run("density-grid", "--kappa", "5,10", "--resolution", 8) == 1
    assert run("density-grid", "--kappa", "5,10,3", "--pair", "0,5") == 1


def test_density_grid_symmetry_and_report(tmp_path):
    out = tmp_path / "g.csv"
    run("density-grid", "--kappa", "2,4,3", "--lambda", "0,1,1", "--pair", "0,1", "--resolution", 32, "-o", out)
    g = np.loadtxt(out, delimiter=",", skiprows=1)[:, 2].reshape(32, 32)
    # theta_1 -> -theta_1 about mu_1 = 0; on this grid index i maps to (32 - i) mod 32
    np.testing.assert_allclose(g[1:], g[1:][::-1], rtol=1e-12)
    X = np.random.default_rng(4).vonmises(0, 8, (60, 2))
    data, rep = tmp_path / "x.csv", tmp_path / "r.txt"
    write_angle_table(data, X)
    run("fit", data, "--method", "mle", "-o", rep)
    assert run("density-grid", "--report", rep, "--resolution", 16, "-o", out) == 0

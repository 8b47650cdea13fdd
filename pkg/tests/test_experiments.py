import io

import numpy as np
import pytest

from vmtorus.experiments import (
    ScenarioSpec,
    TrialRecord,
    angle_separation,
    bivariate_scenario,
    five_dim_scenario,
    minor_axis_shift,
    rmse,
    run_trials,
    summarize,
    write_trials_csv,
)
from vmtorus.model import SineModelParams, precision_from_params
from vmtorus.sampling import GibbsConfig
from vmtorus.wle import WleConfig

TINY = WleConfig(n_starts=3)


def test_angle_separation_examples():
    assert angle_separation([1.0, 2.0], [1.0, 2.0]) == 0
    assert angle_separation([np.pi, np.pi], [0.0, 0.0]) == pytest.approx(2.0)
    assert angle_separation([np.pi / 2, 0.0], [0.0, 0.0]) == pytest.approx(0.5)


def test_rmse_examples():
    assert rmse([1.0, 2.0], [1.0, 2.0]) == 0
    assert rmse(5.0, 2.0) == 3
    assert rmse([3.0, 4.0], [0.0, 0.0]) == pytest.approx(5.0)
    with pytest.raises(ValueError):
        rmse([1.0], [1.0, 2.0])


def test_minor_axis_shift():
    params = SineModelParams.bivariate(10, 20, 15)
    shift = np.array(minor_axis_shift(params, (0, 1), 2.0))
    assert np.linalg.norm(shift) == pytest.approx(2.0)
    P, _ = precision_from_params(params)
    vals = np.linalg.eigvalsh(P)
    assert shift @ P @ shift / 4 == pytest.approx(vals.max())
    assert shift[0] > 0


def test_scenario_validation():
    params = SineModelParams.bivariate(1, 2, 0.5)
    with pytest.raises(ValueError):
        ScenarioSpec(params, n=0)
    with pytest.raises(ValueError):
        ScenarioSpec(params, n=10, blocks=(SineModelParams([0.0], [1.0], [[0.0]]),))


def test_five_dim_scenario_structure():
    sc = five_dim_scenario()
    assert sc.p == 5 and sc.n == 300
    assert sc.true_params.kappa.tolist() == [5, 10, 10, 20, 30]
    upper = sc.true_params.lam_upper()
    assert sorted(upper[upper != 0].tolist()) == [5, 15] and upper.size == 10
    assert sc.contamination.mode == "replace"
    assert tuple(sc.contamination.contaminated_dims) == (0, 1)
    X = sc.sample(3)
    assert X.shape == (300, 5)


def test_run_trials_empty():
    assert run_trials(bivariate_scenario(5, 10, 5, n=30), TINY, n_trials=0) == []


def test_clean_scenario_mle_equals_mle0():
    sc = bivariate_scenario(5, 10, 5, n=60, n_outliers=0)
    recs = run_trials(sc, TINY, n_trials=3, seed=4)
    assert [r.estimator for r in recs[:3]] == ["MLE", "MLE0", "WLE"]
    for t in range(3):
        mle, mle0 = recs[3 * t], recs[3 * t + 1]
        assert (mle.AS_mu, mle.rmse_kappa, mle.rmse_lambda) == (mle0.AS_mu, mle0.rmse_kappa, mle0.rmse_lambda)


def test_failures_recorded_not_raised():
    sc = bivariate_scenario(5, 10, 5, n=8, n_outliers=0)
    recs = run_trials(sc, WleConfig(n_starts=2, subsample_size=10), n_trials=2, seed=0)
    wle = [r for r in recs if r.estimator == "WLE"]
    assert all(r.failed and "subsample_size" in r.error for r in wle)
    assert not any(r.failed for r in recs if r.estimator == "MLE")
    summary = summarize(recs)
    assert summary["WLE"] == {"n_ok": 0, "n_failed": 2}


def test_run_trials_independent_of_jobs():
    sc = ScenarioSpec(SineModelParams.bivariate(5, 10, 5), n=40, gibbs=GibbsConfig(burn_in=50))
    a = run_trials(sc, TINY, n_trials=2, seed=7, n_jobs=1)
    b = run_trials(sc, TINY, n_trials=2, seed=7, n_jobs=2)
    assert a == b


def _rec(v, tag="MLE", trial=0):
    return TrialRecord(trial, tag, v, v, v, 0)


def test_summarize_examples():
    assert summarize([]) == {}
    one = summarize([_rec(0.3)])["MLE"]["AS_mu"]
    assert set(one.values()) == {0.3}
    three = [_rec(1.0, trial=0), _rec(2.0, trial=1), _rec(3.0, trial=2)]
    assert summarize(three)["MLE"]["rmse_kappa"]["median"] == 2.0
    assert summarize(three[::-1]) == summarize(three)


def test_write_trials_csv():
    buf = io.StringIO()
    write_trials_csv([_rec(0.5), TrialRecord(1, "WLE", np.nan, np.nan, np.nan, 0, True, "x")], buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "trial,estimator,AS_mu,rmse_kappa,rmse_lambda,failed"
    assert lines[1] == "0,MLE,0.5,0.5,0.5,0"
    assert lines[2].endswith(",1")

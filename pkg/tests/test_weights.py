import numpy as np
import pytest

from vmtorus.kde import TorusKDE
from vmtorus.model import SineModelParams, log_density
from vmtorus.sampling import GibbsConfig, sample_sine_model
from vmtorus.weights import (
    RafSpec,
    pearson_residual,
    raf_value,
    residual_report,
    residuals_from_log_densities,
    weight,
)

SPECS = [RafSpec("SCHI"), RafSpec("GKL", tau=0.25), RafSpec("GKL", tau=0.5), RafSpec("GKL"),
         RafSpec("PWD", lambda_exp=0.5), RafSpec("PWD", lambda_exp=1.0)]
GRID = [-1, -0.5, 0, 0.5, 1, 2, 5, 10, 100]


def test_pearson_residual_examples():
    assert pearson_residual(2.0, 2.0) == 0
    assert pearson_residual(4.0, 2.0) == pytest.approx(1.0)
    assert pearson_residual(0.2, 2.0) == pytest.approx(-0.9)
    with pytest.raises(ValueError):
        pearson_residual(1.0, 0.0)


def test_residuals_from_logs_match_ratio():
    lf, lm = np.log([0.3, 2.0]), np.log([0.6, 0.5])
    np.testing.assert_allclose(residuals_from_log_densities(lf, lm), [-0.5, 3.0], rtol=1e-14)


def test_raf_examples():
    for spec in SPECS:
        assert raf_value(spec, 0.0) == 0.0
    assert raf_value(RafSpec("SCHI"), 2.0) == pytest.approx(0.75)
    assert raf_value(RafSpec("GKL", tau=1.0), np.e - 1) == pytest.approx(1.0)


def test_weight_examples():
    assert weight(RafSpec("SCHI"), -0.5) == 1.0
    assert weight(RafSpec("SCHI"), 2.0) == pytest.approx(1.75 / 3)
    assert weight(RafSpec("GKL"), np.e - 1) == pytest.approx(2 / np.e)


@pytest.mark.parametrize("spec", SPECS, ids=repr)
def test_weight_grid_properties(spec):
    w = spec.weights(np.array(GRID, dtype=float))
    assert np.all((w >= 0) & (w <= 1))
    assert np.all(w[:3] == 1.0)
    assert spec.weights(1e-7) == pytest.approx(1.0, abs=1e-5)


@pytest.mark.parametrize("spec", SPECS, ids=repr)
def test_finite_difference_slope(spec):
    h = 1e-6
    slope = (spec.adjust(h) - spec.adjust(-h)) / (2 * h)
    assert abs(slope - 1) < 1e-4


@pytest.mark.parametrize("spec", [RafSpec("SCHI"), RafSpec("GKL", tau=0.5)], ids=repr)
def test_tail_monotone_and_vanishing(spec):
    d = np.linspace(1, 100, 200)
    assert np.all(np.diff(spec.weights(d)) <= 0)
    assert spec.weights(1e12) < 1e-3


def test_huge_residuals():
    w = RafSpec("SCHI").weights(np.array([1e300, np.inf]))
    assert np.all(np.isfinite(w)) and np.all(w <= 1e-3)


def test_rafspec_validation():
    with pytest.raises(ValueError):
        RafSpec("HD")
    with pytest.raises(ValueError):
        RafSpec("GKL", tau=0.0)
    with pytest.raises(ValueError):
        RafSpec("PWD", lambda_exp=-1)
    assert RafSpec("schi").kind == "SCHI"
    with pytest.raises(ValueError):
        RafSpec().weights(-1.5)


def test_weights_relabel_invariant():
    d = np.array([-0.3, 0.4, 7.0, 0.0, 2.5])
    perm = np.array([3, 0, 4, 2, 1])
    spec = RafSpec("GKL", tau=0.5)
    assert np.array_equal(spec.weights(d)[perm], spec.weights(d[perm]))


def test_constant_scaling_preserves_residual_order():
    rng = np.random.default_rng(0)
    lf, lm = rng.normal(size=20), rng.normal(size=20)
    a = residuals_from_log_densities(lf, lm)
    b = residuals_from_log_densities(lf, lm + np.log(3.0))
    np.testing.assert_allclose(b + 1, (a + 1) / 3, rtol=1e-12)
    assert np.array_equal(np.argsort(a), np.argsort(b))


def test_planted_outlier_downweighted():
    params = SineModelParams.bivariate(10, 20, 15)
    X = sample_sine_model(params, 300, GibbsConfig(burn_in=100, seed=3))
    X = np.vstack([X, [[np.pi, np.pi]]])
    rep = residual_report(X, params, TorusKDE(10).fit(X))
    assert rep.residuals[-1] > 100
    assert rep.weights[-1] < 0.2
    assert rep.weights.shape == (301,)
    assert np.all(rep.weights[rep.residuals <= 0] == 1)


def test_report_uses_given_constant():
    params = SineModelParams.bivariate(2, 3, 1)
    X = sample_sine_model(params, 50, GibbsConfig(burn_in=20, seed=1))
    kde = TorusKDE(5).fit(X)
    rep = residual_report(X, params, kde)
    expected = np.exp(kde.score_samples(X) - log_density(X, params)) - 1
    np.testing.assert_allclose(rep.residuals, expected, rtol=1e-10)
    assert rep.downweighting_level == pytest.approx(1 - rep.weights.mean())

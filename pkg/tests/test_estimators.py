import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from vmtorus import SineMLE, SineWLE
from vmtorus.experiments import bivariate_scenario
from vmtorus.sampling import contaminate


@pytest.fixture(scope="module")
def data():
    sc = bivariate_scenario(10, 20, 15)
    X, mask = contaminate(sc.sample(2), sc.contamination, seed=3, mu=[0, 0])
    return X, mask


def test_params_roundtrip():
    est = SineWLE(kstar=5, raf="GKL", n_starts=7)
    params = est.get_params()
    assert params["kstar"] == 5 and params["raf"] == "GKL"
    assert clone(est).get_params() == params


def test_not_fitted():
    with pytest.raises(NotFittedError):
        SineMLE().score_samples([[0.0, 0.0]])


def test_mle_attributes(data):
    X, _ = data
    est = SineMLE().fit(X)
    assert est.mu_.shape == (2,) and est.kappa_.shape == (2,) and est.lambda_.shape == (2, 2)
    assert est.n_features_in_ == 2
    assert np.isfinite(est.score(X))


def test_wle_fit_predict_transform(data):
    X, mask = data
    est = SineWLE(kstar=5, raf="GKL", n_starts=15).fit(X)
    assert est.weights_.shape == (300,)
    np.testing.assert_allclose(est.transform(X), est.weights_, atol=1e-12)
    labels = est.predict(X)
    assert set(np.unique(labels)) <= {-1, 1}
    assert np.mean(labels[mask] == -1) >= 0.8
    assert np.mean(labels[~mask] == 1) >= 0.9
    assert est.downweighting_level_ == pytest.approx(1 - est.weights_.mean())
    np.testing.assert_allclose(est.pearson_residuals(X), est.residuals_, rtol=1e-10, atol=1e-12)


def test_score_samples_is_normalized(data):
    X, _ = data
    est = SineMLE().fit(X)
    m = 256
    x = 2 * np.pi * np.arange(m) / m
    a, b = np.meshgrid(x, x, indexing="ij")
    total = np.exp(est.score_samples(np.column_stack([a.ravel(), b.ravel()]))).sum() * (2 * np.pi / m) ** 2
    assert total == pytest.approx(1.0, abs=1e-6)


def test_sample_shape(data):
    X, _ = data
    draws = SineMLE().fit(X).sample(20, random_state=1)
    assert draws.shape == (20, 2)


def test_input_validation():
    with pytest.raises(ValueError):
        SineMLE().fit([[0.0, np.nan], [1.0, 2.0], [0.5, 0.1]])

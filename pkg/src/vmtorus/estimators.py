"""scikit-learn style estimators for the sine model."""

import numpy as np
from sklearn.base import BaseEstimator, OutlierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_angles
from .kde import TorusKDE
from .model import log_density, log_norm_const
from .sampling import GibbsConfig, sample_sine_model
from .weights import RafSpec, residuals_from_log_densities
from .wle import WleConfig, mle_fit, wle_fit

__all__ = ["SineMLE", "SineWLE"]


class _SineModelMixin:
    """Density evaluation and sampling shared by the fitted estimators."""

    def _store(self, result, n_features):
        self.result_ = result
        self.params_ = result.params
        self.mu_ = result.params.mu
        self.kappa_ = result.params.kappa
        self.lambda_ = result.params.lam
        self.sigma_ = result.sigma_hat.sigma
        self.pd_flag_ = result.pd_flag
        self.n_features_in_ = n_features
        self.log_norm_const_ = log_norm_const(result.params)

    def score_samples(self, X):
        """Log density of the fitted model at each row of ``X``."""
        check_is_fitted(self, "params_")
        X = check_angles(X)
        return log_density(X, self.params_, log_const=self.log_norm_const_)

    def score(self, X, y=None):
        """Average log density."""
        return float(np.mean(self.score_samples(X)))

    def sample(self, n_samples=1, random_state=0):
        check_is_fitted(self, "params_")
        return sample_sine_model(self.params_, n_samples, GibbsConfig(seed=random_state))


class SineMLE(_SineModelMixin, BaseEstimator):
    """Approximate maximum likelihood fit of the sine model.

    Attributes
    ----------
    mu_, kappa_, lambda_ : ndarray
        Location, concentrations and interaction matrix.
    sigma_ : ndarray of shape (p, p)
        Moment matrix whose inverse gives ``kappa_`` and ``lambda_``.
    pd_flag_ : bool
    result_ : FitResult
    """

    def fit(self, X, y=None):
        X = check_angles(X)
        self._store(mle_fit(X), X.shape[1])
        return self


class SineWLE(_SineModelMixin, OutlierMixin, BaseEstimator):
    """Weighted likelihood fit of the sine model.

    Observations the model cannot explain (large Pearson residuals) are
    down-weighted; :meth:`predict` labels points with weight at most
    ``outlier_weight`` as outliers (-1).

    Parameters
    ----------
    kstar : float, default=10.0
        Concentration of the von Mises kernels in the density estimate.
    raf : {"SCHI", "GKL", "PWD"}, default="SCHI"
    tau : float, default=1.0
        GKL parameter.
    lambda_exp : float, default=0.5
        Power divergence exponent.
    max_iter, tol, n_starts, subsample_size, root_threshold :
        See :class:`~vmtorus.wle.WleConfig`.
    random_state : int, default=0
    normalization : NormalizationStrategy or None
    outlier_weight : float, default=0.2

    Attributes
    ----------
    weights_, residuals_ : ndarray of shape (n,)
    downweighting_level_ : float
        ``1 - sum(weights_) / n``.
    kde_ : TorusKDE
    """

    def __init__(
        self,
        kstar=10.0,
        raf="SCHI",
        tau=1.0,
        lambda_exp=0.5,
        max_iter=200,
        tol=1e-6,
        n_starts=100,
        subsample_size=10,
        root_threshold=-0.9,
        random_state=0,
        normalization=None,
        outlier_weight=0.2,
    ):
        self.kstar = kstar
        self.raf = raf
        self.tau = tau
        self.lambda_exp = lambda_exp
        self.max_iter = max_iter
        self.tol = tol
        self.n_starts = n_starts
        self.subsample_size = subsample_size
        self.root_threshold = root_threshold
        self.random_state = random_state
        self.normalization = normalization
        self.outlier_weight = outlier_weight

    def _config(self):
        return WleConfig(
            kstar=self.kstar,
            raf=RafSpec(self.raf, tau=self.tau, lambda_exp=self.lambda_exp),
            max_iter=self.max_iter,
            tol=self.tol,
            n_starts=self.n_starts,
            subsample_size=self.subsample_size,
            root_threshold=self.root_threshold,
            seed=self.random_state,
            normalization=self.normalization,
        )

    def fit(self, X, y=None):
        X = check_angles(X)
        config = self._config()
        result = wle_fit(X, config)
        self._store(result, X.shape[1])
        self.config_ = config
        self.weights_ = result.weights
        self.residuals_ = result.residuals
        self.downweighting_level_ = result.downweighting_level
        self.kde_ = TorusKDE(self.kstar).fit(X)
        return self

    def pearson_residuals(self, X):
        """Residuals of new points against the training density estimate."""
        check_is_fitted(self, "params_")
        X = check_angles(X)
        return residuals_from_log_densities(self.kde_.score_samples(X), self.score_samples(X))

    def transform(self, X):
        """Weights of the rows of ``X`` under the fitted model."""
        return self.config_.raf.weights(self.pearson_residuals(X))

    def predict(self, X):
        """+1 for inliers, -1 for points with weight <= ``outlier_weight``."""
        return np.where(self.transform(X) > self.outlier_weight, 1, -1)

"""The multivariate von Mises sine density on the p-torus.

The density is proportional to

    exp( kappa' cos(theta - mu) + 1/2 sin(theta - mu)' Lambda sin(theta - mu) )

with ``kappa > 0`` and ``Lambda`` symmetric with zero diagonal; for p = 2 the
interaction term is ``lambda sin(theta_1 - mu_1) sin(theta_2 - mu_2)``. The
matrix with diagonal ``kappa`` and off-diagonal ``-Lambda`` is called the
precision form here: expanding around ``mu`` shows it is the precision of the
Gaussian approximation, and its inverse plays the role of a covariance for
concentrated data.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from ._bessel import log_i0
from ._validation import TWO_PI, check_points, wrap
from ._vonmises import vonmises_rvs
from .exceptions import StrategyError

__all__ = [
    "SineModelParams",
    "PrecisionForm",
    "NormalizationStrategy",
    "params_from_precision",
    "precision_from_params",
    "default_strategy",
    "log_unnormalized_density",
    "log_norm_const",
    "log_density",
]

LOG_2PI = np.log(TWO_PI)


@dataclass(frozen=True, eq=False)
class SineModelParams:
    """Location ``mu``, concentrations ``kappa`` and interaction matrix ``lam``."""

    mu: np.ndarray
    kappa: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        kappa = np.atleast_1d(np.asarray(self.kappa, dtype=float)).copy()
        p = kappa.shape[0]
        if kappa.ndim != 1 or p < 1:
            raise ValueError("kappa must be a non-empty vector")
        if not np.all(np.isfinite(kappa)) or np.any(kappa <= 0):
            raise ValueError(f"kappa must be strictly positive, got {kappa}")
        mu = np.atleast_1d(wrap(np.asarray(self.mu, dtype=float))).copy()
        if mu.shape != (p,):
            raise ValueError(f"mu must have length {p}")
        lam = np.asarray(self.lam, dtype=float).reshape(p, p).copy()
        if not np.all(np.isfinite(lam)):
            raise ValueError("lambda must be finite")
        if not np.array_equal(lam, lam.T):
            raise ValueError("lambda must be exactly symmetric")
        if np.any(np.diag(lam) != 0):
            raise ValueError("lambda must have a zero diagonal")
        for name, arr in (("mu", mu), ("kappa", kappa), ("lam", lam)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def p(self):
        return self.kappa.shape[0]

    @classmethod
    def bivariate(cls, kappa1, kappa2, lam, mu=(0.0, 0.0)):
        return cls(mu=mu, kappa=[kappa1, kappa2], lam=[[0.0, lam], [lam, 0.0]])

    @classmethod
    def from_upper(cls, mu, kappa, lam_upper):
        """Build from the strict upper triangle of Lambda in row-major order."""
        p = len(kappa)
        lam = np.zeros((p, p))
        iu = np.triu_indices(p, k=1)
        lam[iu] = lam_upper
        lam = lam + lam.T
        return cls(mu=mu, kappa=kappa, lam=lam)

    def lam_upper(self):
        """Strict upper triangle of Lambda, row-major."""
        return self.lam[np.triu_indices(self.p, k=1)]

    def shifted(self, c):
        return SineModelParams(mu=self.mu + np.asarray(c, dtype=float), kappa=self.kappa, lam=self.lam)

    def submodel(self, dims):
        """Parameters restricted to the coordinates in ``dims``."""
        dims = list(dims)
        return SineModelParams(
            mu=self.mu[dims], kappa=self.kappa[dims], lam=self.lam[np.ix_(dims, dims)]
        )

    def __repr__(self):
        return (
            f"SineModelParams(mu={self.mu.tolist()}, kappa={self.kappa.tolist()}, "
            f"lam_upper={self.lam_upper().tolist()})"
        )


@dataclass(frozen=True, eq=False)
class PrecisionForm:
    """Matrix ``sigma`` whose inverse has diagonal kappa and off-diagonal -lambda."""

    sigma: np.ndarray
    pd_flag: bool = field(init=False)
    condition_number: float = field(init=False)

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=float)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
            raise ValueError("sigma must be square")
        if not np.allclose(sigma, sigma.T, rtol=1e-10, atol=1e-14):
            raise ValueError("sigma must be symmetric")
        sigma = 0.5 * (sigma + sigma.T)
        eig = np.linalg.eigvalsh(sigma)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "pd_flag", bool(np.all(eig > 0)))
        cond = np.inf if np.min(np.abs(eig)) == 0 else float(np.max(np.abs(eig)) / np.min(np.abs(eig)))
        object.__setattr__(self, "condition_number", cond)

    @classmethod
    def from_params(cls, params):
        P, _ = precision_from_params(params)
        return cls(np.linalg.inv(P))


def params_from_precision(P, mu=None):
    """Read ``kappa = diag(P)`` and ``lambda_ij = -P_ij`` off a precision matrix.

    Raises
    ------
    ValueError
        If ``P`` is not symmetric or has a non-positive diagonal entry.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if P.shape[0] != P.shape[1]:
        raise ValueError("precision matrix must be square")
    if not np.allclose(P, P.T, rtol=1e-10, atol=1e-12):
        raise ValueError("precision matrix must be symmetric")
    P = 0.5 * (P + P.T)
    kappa = np.diag(P).copy()
    if np.any(kappa <= 0):
        raise ValueError(f"precision diagonal must be positive, got {kappa}")
    lam = -P
    np.fill_diagonal(lam, 0.0)
    lam = lam + 0.0  # normalize -0.0
    if mu is None:
        mu = np.zeros(P.shape[0])
    return SineModelParams(mu=mu, kappa=kappa, lam=lam)


def precision_from_params(params):
    """Return the precision matrix and whether it is positive definite."""
    P = -params.lam.copy()
    np.fill_diagonal(P, params.kappa)
    P = P + 0.0
    pd = bool(np.all(np.linalg.eigvalsh(P) > 0))
    return P, pd


@dataclass(frozen=True)
class NormalizationStrategy:
    """How the normalizing constant is obtained.

    kind : {"quadrature", "concentrated", "importance"}
        ``quadrature`` is exact up to grid error and only valid for p <= 2,
        ``concentrated`` is the large-concentration Gaussian approximation,
        ``importance`` averages over draws from a product von Mises proposal.
    proposal_scale : float
        Importance proposal concentrations are ``proposal_scale * kappa``;
        a flatter proposal covers the off-centre modes of strongly
        interacting models.
    """

    kind: str = "quadrature"
    resolution: int = 512
    n_draws: int = 200_000
    seed: int = 0
    proposal_scale: float = 0.5

    KINDS = ("quadrature", "concentrated", "importance")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown normalization kind {self.kind!r}; expected one of {self.KINDS}")
        if self.resolution < 2 or self.n_draws < 1:
            raise ValueError("resolution and n_draws must be positive")
        if not 0 < self.proposal_scale <= 1:
            raise ValueError("proposal_scale must lie in (0, 1]")


def default_strategy(params):
    """Quadrature for p <= 2, the concentrated approximation for positive
    definite higher-dimensional models and importance sampling otherwise."""
    if params.p <= 2:
        return NormalizationStrategy("quadrature")
    _, pd = precision_from_params(params)
    return NormalizationStrategy("concentrated" if pd else "importance")


def _quadratic_form(s, lam):
    # 1/2 s' Lam s for each row of s
    return 0.5 * np.einsum("ij,jk,ik->i", s, lam, s)


def log_unnormalized_density(theta, params):
    """Exponent of the sine density at one point or an ``(m, p)`` batch."""
    theta = np.asarray(theta, dtype=float)
    single = theta.ndim <= 1
    pts = check_points(theta.reshape(1, -1) if single else theta, params.p)
    d = pts - params.mu
    out = np.cos(d) @ params.kappa + _quadratic_form(np.sin(d), params.lam)
    return float(out[0]) if single else out


def _log_const_quadrature(params, resolution):
    if params.p == 1:
        return LOG_2PI + log_i0(params.kappa[0])
    if params.p != 2:
        raise StrategyError("exact quadrature is only available for p <= 2")
    # The inner integral over the second angle is 2*pi*I0(sqrt(k2^2 + (lam sin x1)^2)),
    # leaving a periodic one-dimensional integral (rectangle rule, spectrally exact).
    k1, k2 = params.kappa
    lam = params.lam[0, 1]
    x = TWO_PI * np.arange(resolution) / resolution
    inner = LOG_2PI + log_i0(np.hypot(k2, lam * np.sin(x)))
    return float(np.log(TWO_PI / resolution) + logsumexp(k1 * np.cos(x) + inner))


def _log_const_concentrated(params):
    P, pd = precision_from_params(params)
    if not pd:
        raise StrategyError(
            "concentrated approximation requires a positive definite precision matrix"
        )
    _, logdet_p = np.linalg.slogdet(P)
    return float(0.5 * params.p * LOG_2PI - 0.5 * logdet_p + params.kappa.sum())


def _log_const_importance(params, n_draws, seed, scale):
    rng = np.random.default_rng(seed)
    # Proposal: independent von Mises(mu_j, scale * kappa_j).
    eta = scale * params.kappa
    draws = vonmises_rvs(params.mu, eta, rng, size=(n_draws, params.p))
    d = draws - params.mu
    log_ratio = np.cos(d) @ (params.kappa - eta) + _quadratic_form(np.sin(d), params.lam)
    base = params.p * LOG_2PI + np.sum(log_i0(eta))
    return float(base + logsumexp(log_ratio) - np.log(n_draws))


def log_norm_const(params, strategy=None):
    """Logarithm of the normalizing constant.

    Parameters
    ----------
    params : SineModelParams
    strategy : NormalizationStrategy, optional
        Defaults to :func:`default_strategy`.

    Raises
    ------
    StrategyError
        Quadrature requested for p > 2, or the concentrated approximation
        requested for a precision matrix that is not positive definite.
    """
    if strategy is None:
        strategy = default_strategy(params)
    if strategy.kind == "quadrature":
        return _log_const_quadrature(params, strategy.resolution)
    if strategy.kind == "concentrated":
        return _log_const_concentrated(params)
    return _log_const_importance(params, strategy.n_draws, strategy.seed, strategy.proposal_scale)


def log_density(theta, params, strategy=None, log_const=None):
    """Normalized log density at a point or batch of points.

    ``log_const`` may be passed to reuse a constant computed beforehand.
    """
    if log_const is None:
        log_const = log_norm_const(params, strategy)
    return log_unnormalized_density(theta, params) - log_const

"""Pearson residuals, residual adjustment functions (RAFs) and weights.

A residual compares a kernel density estimate with the model density at an
observation, ``delta = fhat / m - 1``. The weight attached to it is

    w(delta) = min(1, [A(delta) + 1]^+ / (delta + 1))

for ``delta > 0`` and exactly 1 on ``[-1, 0]`` (inliers are not penalized).
"""

from dataclasses import dataclass

import numpy as np

from .model import log_density

__all__ = [
    "RafSpec",
    "ResidualReport",
    "pearson_residual",
    "residuals_from_log_densities",
    "raf_value",
    "weight",
    "residual_report",
]

RAF_KINDS = ("SCHI", "GKL", "PWD")
_DELTA_CAP = 1e300
_FD_STEP = 1e-6


def _schi(delta):
    # delta (delta + 4) / (delta + 2)^2 written as 1 - 4 / (delta + 2)^2
    with np.errstate(over="ignore"):
        return 1.0 - 4.0 / (delta + 2.0) ** 2


def _gkl(delta, tau):
    arg = tau * delta
    if np.any(arg <= -1):
        raise ValueError("GKL residual adjustment undefined for tau * delta <= -1")
    return np.log1p(arg) / tau


def _pwd(delta, lam):
    with np.errstate(over="ignore"):
        return np.expm1(lam * np.log1p(delta)) / lam


@dataclass(frozen=True)
class RafSpec:
    """Residual adjustment function family and its tuning constant.

    Parameters
    ----------
    kind : {"SCHI", "GKL", "PWD"}
        Symmetric chi-squared, generalized Kullback-Leibler or power divergence.
    tau : float, default=1.0
        GKL parameter in ``(0, 1]``.
    lambda_exp : float, default=0.5
        Power divergence exponent, ``> 0``.

    The defining properties ``A(0) = 0``, ``A'(0) = 1`` and monotonicity are
    checked numerically on construction.
    """

    kind: str = "SCHI"
    tau: float = 1.0
    lambda_exp: float = 0.5

    def __post_init__(self):
        kind = str(self.kind).upper()
        object.__setattr__(self, "kind", kind)
        if kind not in RAF_KINDS:
            raise ValueError(f"unknown RAF {self.kind!r}; expected one of {RAF_KINDS}")
        if kind == "GKL" and not 0 < self.tau <= 1:
            raise ValueError("GKL tau must lie in (0, 1]")
        if kind == "PWD" and not self.lambda_exp > 0:
            raise ValueError("PWD exponent must be positive")
        self._check_axioms()

    def _check_axioms(self):
        if self.adjust(0.0) != 0.0:
            raise ValueError(f"{self}: A(0) != 0")
        slope = (self.adjust(_FD_STEP) - self.adjust(-_FD_STEP)) / (2 * _FD_STEP)
        if abs(slope - 1.0) > 1e-4:
            raise ValueError(f"{self}: A'(0) = {slope}, expected 1")
        grid = np.linspace(-0.99, 100.0, 200)
        if np.any(np.diff(self.adjust(grid)) < 0):
            raise ValueError(f"{self}: A is not increasing")

    def adjust(self, delta):
        """Raw residual adjustment ``A(delta)``."""
        delta = np.asarray(delta, dtype=float)
        if self.kind == "SCHI":
            out = _schi(delta)
        elif self.kind == "GKL":
            out = _gkl(delta, self.tau)
        else:
            out = _pwd(delta, self.lambda_exp)
        return out if out.ndim else float(out)

    def weights(self, delta):
        """Unit-capped weights, equal to 1 on ``[-1, 0]``."""
        delta = np.asarray(delta, dtype=float)
        if np.any(delta < -1) or np.any(np.isnan(delta)):
            raise ValueError("Pearson residuals must be >= -1")
        d = np.minimum(delta, _DELTA_CAP)
        pos = d > 0
        out = np.ones_like(d)
        if np.any(pos):
            dp = d[pos]
            with np.errstate(over="ignore", invalid="ignore"):
                ratio = np.maximum(np.asarray(self.adjust(dp)) + 1.0, 0.0) / (dp + 1.0)
            out[pos] = np.clip(np.nan_to_num(ratio, nan=1.0, posinf=1.0), 0.0, 1.0)
        return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class ResidualReport:
    residuals: np.ndarray
    weights: np.ndarray

    @property
    def sum_weights(self):
        return float(np.sum(self.weights))

    @property
    def downweighting_level(self):
        return 1.0 - self.sum_weights / len(self.weights)


def pearson_residual(fhat, m):
    """``fhat / m - 1`` for strictly positive densities."""
    fhat = np.asarray(fhat, dtype=float)
    m = np.asarray(m, dtype=float)
    if np.any(~(fhat > 0)) or np.any(~(m > 0)):
        raise ValueError("densities must be strictly positive")
    out = fhat / m - 1.0
    return out if out.ndim else float(out)


def residuals_from_log_densities(log_fhat, log_m):
    """Pearson residuals computed from log densities (overflow becomes inf)."""
    with np.errstate(over="ignore"):
        return np.expm1(np.asarray(log_fhat) - np.asarray(log_m))


def raf_value(spec, delta):
    return spec.adjust(delta)


def weight(spec, delta):
    return spec.weights(delta)


def residual_report(X, params, kde, strategy=None, spec=None, log_const=None):
    """Residuals and weights of every observation under ``params``.

    Parameters
    ----------
    X : ndarray of shape (n, p)
    params : SineModelParams
    kde : fitted TorusKDE
    strategy : NormalizationStrategy, optional
    spec : RafSpec, optional
        Defaults to SCHI.
    log_const : float, optional
        Precomputed log normalizing constant.
    """
    spec = spec or RafSpec()
    log_f = kde.score_samples(X)
    log_m = log_density(X, params, strategy, log_const=log_const)
    delta = residuals_from_log_densities(log_f, log_m)
    return ResidualReport(residuals=delta, weights=spec.weights(delta))

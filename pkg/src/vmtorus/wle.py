"""Approximate maximum likelihood and weighted likelihood fitting.

Both estimators solve moment-type equations that are exact for the
concentrated (Gaussian-like) version of the sine model:

* location: circular mean of the (weighted) data,
* ``Sigma`` off-diagonals: (weighted) mean cross products of ``sin(theta - mu)``,
* ``Sigma`` diagonal: twice the (weighted) mean of ``1 - cos(theta - mu)``,

after which ``kappa`` and ``Lambda`` are read off ``Sigma^{-1}``. The weighted
version is iterated to a fixed point from many subsample-based starts.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from ._validation import angular_difference, check_angles, wrap
from .circular import circular_correlation, mean_direction, mean_resultant_length
from .exceptions import (
    DegenerateCorrelationError,
    DegenerateDirectionError,
    DegenerateSubsampleError,
    EstimationError,
    StepFailure,
    StrategyError,
)
from .kde import TorusKDE
from .model import (
    NormalizationStrategy,
    PrecisionForm,
    default_strategy,
    log_density,
    log_norm_const,
    params_from_precision,
    precision_from_params,
)
from .weights import RafSpec, ResidualReport, residuals_from_log_densities

__all__ = [
    "FitResult",
    "WleConfig",
    "MonitorResult",
    "mle_fit",
    "wle_step",
    "wle_fit",
    "init_from_subsample",
    "monitor",
    "weighted_sigma",
]

logger = logging.getLogger(__name__)

ROOT_DEDUP_TOL = 1e-3
_MAX_DAMPING = 10
_MAX_REDRAWS = 20


@dataclass(frozen=True, eq=False)
class FitResult:
    """Outcome of a fit.

    ``residuals`` is all-NaN for maximum likelihood fits, which do not
    involve a density estimate; ``root_score`` is NaN there as well.
    """

    params: object
    sigma_hat: PrecisionForm
    weights: np.ndarray
    residuals: np.ndarray
    iterations: int
    converged: bool
    sum_weights: float
    pd_flag: bool
    root_score: float
    method: str = "mle"
    n_roots: int = 1
    diagnostics: dict = field(default_factory=dict)

    @property
    def downweighting_level(self):
        return 1.0 - self.sum_weights / len(self.weights)

    @property
    def mean_weight(self):
        return float(np.mean(self.weights))


@dataclass(frozen=True)
class WleConfig:
    """Tuning of :func:`wle_fit`.

    Parameters
    ----------
    kstar : float
        Kernel concentration of the density estimate.
    raf : RafSpec
    max_iter, tol :
        Fixed-point iteration limit and convergence tolerance.
    n_starts, subsample_size :
        Number of subsample-based starting points and their size.
    root_threshold : float
        Residuals at or below this value count as "small" in root selection.
    seed : int
    normalization : NormalizationStrategy or None
        ``None`` picks :func:`~vmtorus.model.default_strategy` at every step.
    init_offdiag : {"corrected", "literal"}
        Off-diagonal rule for the starting ``Sigma``: correlation times
        ``sqrt(Sigma_rr Sigma_ss)`` or the plain product ``Sigma_rr Sigma_ss``.
    """

    kstar: float = 10.0
    raf: RafSpec = field(default_factory=RafSpec)
    max_iter: int = 200
    tol: float = 1e-6
    n_starts: int = 100
    subsample_size: int = 10
    root_threshold: float = -0.9
    seed: int = 0
    normalization: NormalizationStrategy | None = None
    init_offdiag: str = "corrected"

    def __post_init__(self):
        if not self.kstar > 0:
            raise ValueError("kstar must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1 or self.n_starts < 1:
            raise ValueError("max_iter and n_starts must be >= 1")
        if not -1 < self.root_threshold < 0:
            raise ValueError("root_threshold must lie in (-1, 0)")
        if self.init_offdiag not in ("corrected", "literal"):
            raise ValueError("init_offdiag must be 'corrected' or 'literal'")


def weighted_sigma(X, weights=None, mu=None):
    """Location and ``Sigma`` from (weighted) trigonometric moments.

    Returns
    -------
    mu : ndarray of shape (p,)
    sigma : ndarray of shape (p, p)
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if mu is None:
        mu = mean_direction(X, None if weights is None else w)
    total = w.sum()
    d = X - mu
    s = np.sin(d)
    sigma = (s * w[:, None]).T @ s / total
    np.fill_diagonal(sigma, 2.0 * (w @ (1.0 - np.cos(d))) / total)
    return mu, sigma


def _params_from_sigma(sigma, mu):
    try:
        P = np.linalg.inv(sigma)
    except np.linalg.LinAlgError as exc:
        raise EstimationError("estimated Sigma is singular", {"sigma": sigma}) from exc
    if not np.all(np.isfinite(P)) or np.linalg.cond(sigma) > 1e14:
        raise EstimationError("estimated Sigma is singular", {"sigma": sigma})
    P = 0.5 * (P + P.T)
    if np.any(np.diag(P) <= 0):
        raise EstimationError(
            "inverse of estimated Sigma has a non-positive diagonal", {"sigma": sigma}
        )
    return params_from_precision(P, mu=mu)


def _make_result(params, sigma, weights, residuals, **kw):
    _, pd = precision_from_params(params)
    return FitResult(
        params=params,
        sigma_hat=PrecisionForm(sigma),
        weights=np.asarray(weights, dtype=float),
        residuals=np.asarray(residuals, dtype=float),
        sum_weights=float(np.sum(weights)),
        pd_flag=pd,
        **kw,
    )


def mle_fit(X):
    """Approximate maximum likelihood fit (all weights equal to one).

    Raises
    ------
    EstimationError
        Too few observations, degenerate directions or a singular ``Sigma``.
    """
    X = check_angles(X)
    n, p = X.shape
    if n < p + 1:
        raise EstimationError(f"need at least {p + 1} observations, got {n}")
    try:
        mu, sigma = weighted_sigma(X)
    except DegenerateDirectionError as exc:
        raise EstimationError(str(exc)) from exc
    params = _params_from_sigma(sigma, mu)
    return _make_result(
        params,
        sigma,
        np.ones(n),
        np.full(n, np.nan),
        iterations=0,
        converged=True,
        root_score=np.nan,
        method="mle",
    )


def init_from_subsample(sub, offdiag="corrected"):
    """Starting parameters from a small subsample.

    The location is the circular mean, ``Sigma_rr = -2 log(rho_r)`` with
    ``rho_r`` the mean resultant length, and off-diagonals come from circular
    correlations. Off-diagonals are halved until ``Sigma^{-1}`` has a positive
    diagonal.

    Raises
    ------
    DegenerateSubsampleError
        If some column has resultant length 0 or 1, or no usable correlation.
    """
    sub = check_angles(sub)
    p = sub.shape[1]
    rho = mean_resultant_length(sub)
    if np.any(rho <= 1e-12) or np.any(rho >= 1.0 - 1e-15):
        raise DegenerateSubsampleError(f"resultant lengths {rho} outside (0, 1)")
    mu = mean_direction(sub)
    diag = -2.0 * np.log(rho)
    sigma = np.diag(diag)
    for r in range(p):
        for s in range(r + 1, p):
            try:
                rc = circular_correlation(sub[:, r], sub[:, s])
            except DegenerateCorrelationError as exc:
                raise DegenerateSubsampleError(str(exc)) from exc
            if offdiag == "corrected":
                value = rc * np.sqrt(diag[r] * diag[s])
            else:
                value = rc * diag[r] * diag[s]
            sigma[r, s] = sigma[s, r] = value
    for _ in range(60):
        try:
            return _params_from_sigma(sigma, mu)
        except EstimationError:
            off = sigma - np.diag(diag)
            sigma = np.diag(diag) + 0.5 * off
    raise DegenerateSubsampleError("could not obtain a valid starting Sigma")


def _log_const(params, strategy):
    strat = strategy if strategy is not None else default_strategy(params)
    try:
        return log_norm_const(params, strat)
    except StrategyError:
        if strat.kind != "concentrated":
            raise
        return log_norm_const(params, replace(strat, kind="importance"))


def _report(X, params, log_f, raf, strategy):
    log_m = log_density(X, params, log_const=_log_const(params, strategy))
    delta = residuals_from_log_densities(log_f, log_m)
    return ResidualReport(residuals=delta, weights=raf.weights(delta))


def wle_step(X, params, kde, strategy=None, raf=None, log_f=None, prev_sigma=None):
    """One reweighting update.

    Weights are computed under ``params``; the weighted moment equations then
    give the next location and ``Sigma``.

    Returns
    -------
    new_params : SineModelParams
    new_sigma : ndarray
    report : ResidualReport
        Residuals and weights under the *input* ``params``.

    Raises
    ------
    StepFailure
        Effective sample size ``sum(w) <= p + 1`` or no valid ``Sigma`` after
        damping.
    """
    raf = raf or RafSpec()
    X = np.asarray(X, dtype=float)
    p = X.shape[1]
    if log_f is None:
        log_f = kde.score_samples(X)
    report = _report(X, params, log_f, raf, strategy)
    if report.sum_weights <= p + 1:
        raise StepFailure(f"effective sample size collapsed (sum of weights {report.sum_weights:.3g})")
    try:
        mu, sigma = weighted_sigma(X, report.weights)
    except DegenerateDirectionError as exc:
        raise StepFailure(str(exc)) from exc
    if prev_sigma is None:
        prev_sigma = np.linalg.inv(precision_from_params(params)[0])
    for _ in range(_MAX_DAMPING + 1):
        try:
            return _params_from_sigma(sigma, mu), sigma, report
        except EstimationError:
            sigma = 0.5 * (sigma + prev_sigma)
    raise StepFailure("no valid Sigma after damping")


def _param_change(a, b):
    ang = np.max(1.0 - np.cos(a.mu - b.mu))
    return max(ang, np.max(np.abs(a.kappa - b.kappa)), np.max(np.abs(a.lam - b.lam)))


def _param_distance(a, b):
    ang = np.max(np.abs(angular_difference(a.mu, b.mu)))
    return max(ang, np.max(np.abs(a.kappa - b.kappa)), np.max(np.abs(a.lam - b.lam)))


def _run_chain(X, params, log_f, config):
    sigma = np.linalg.inv(precision_from_params(params)[0])
    for it in range(1, config.max_iter + 1):
        new, sigma, _ = wle_step(
            X, params, None, config.normalization, config.raf, log_f=log_f, prev_sigma=sigma
        )
        done = _param_change(new, params) < config.tol
        params = new
        if done:
            return params, sigma, it, True
    return params, sigma, config.max_iter, False


def _draw_start(X, order, rng, config):
    n = X.shape[0]
    last = None
    for _ in range(_MAX_REDRAWS):
        idx = order[np.sort(rng.choice(n, size=config.subsample_size, replace=False))]
        try:
            return init_from_subsample(X[idx], offdiag=config.init_offdiag)
        except DegenerateSubsampleError as exc:
            last = exc
    raise DegenerateSubsampleError(f"{_MAX_REDRAWS} degenerate subsamples in a row: {last}")


def _canonical_order(X):
    # Rows sorted lexicographically after centring at the overall mean
    # direction, so subsample draws ignore both row order and rotations.
    try:
        centred = wrap(X - mean_direction(X))
    except DegenerateDirectionError:
        centred = X
    return np.lexsort(centred.T[::-1])


def wle_fit(X, config=None):
    """Weighted likelihood fit with multi-start root selection.

    The kernel density estimate is computed once. Every start draws a
    subsample, initializes with :func:`init_from_subsample` and iterates
    :func:`wle_step` until the largest parameter change (``1 - cos`` for
    angles) drops below ``tol``. Distinct roots are scored by the fraction of
    observations whose residual is at most ``root_threshold``; the lowest
    score wins, ties going to the root with the larger total weight.

    Raises
    ------
    EstimationError
        If every start fails; ``diagnostics["causes"]`` lists them.
    """
    config = config or WleConfig()
    X = check_angles(X)
    n, p = X.shape
    if config.subsample_size < p + 1:
        raise ValueError(f"subsample_size must be >= p + 1 = {p + 1}")
    if config.subsample_size > n:
        raise ValueError(f"subsample_size {config.subsample_size} exceeds sample size {n}")

    kde = TorusKDE(config.kstar).fit(X)
    log_f = kde.score_samples(X)
    order = _canonical_order(X)

    roots, causes = [], []
    for start in range(config.n_starts):
        rng = np.random.default_rng([config.seed, start])
        try:
            init = _draw_start(X, order, rng, config)
            params, sigma, iters, converged = _run_chain(X, init, log_f, config)
            report = _report(X, params, log_f, config.raf, config.normalization)
        except (StepFailure, DegenerateSubsampleError, EstimationError, StrategyError) as exc:
            causes.append((start, f"{type(exc).__name__}: {exc}"))
            continue
        score = float(np.mean(report.residuals <= config.root_threshold))
        roots.append((params, sigma, iters, converged, report, score, start))

    if not roots:
        raise EstimationError("all starts failed", {"causes": causes})
    pool = [r for r in roots if r[3]] or roots
    distinct = []
    for cand in pool:
        if not any(_param_distance(cand[0], d[0]) < ROOT_DEDUP_TOL for d in distinct):
            distinct.append(cand)
    best = min(distinct, key=lambda r: (r[5], -r[4].sum_weights, r[6]))
    params, sigma, iters, converged, report, score, start = best
    logger.debug("selected root from start %d of %d distinct roots", start, len(distinct))
    return _make_result(
        params,
        sigma,
        report.weights,
        report.residuals,
        iterations=iters,
        converged=converged,
        root_score=score,
        method="wle",
        n_roots=len(distinct),
        diagnostics={"failed_starts": causes, "selected_start": start},
    )


@dataclass(frozen=True, eq=False)
class MonitorResult:
    """Fits over a grid of kernel concentrations (``None`` where a fit failed)."""

    grid: np.ndarray
    fits: list
    errors: dict

    def rows(self):
        """One summary dict per grid value."""
        out = []
        for k, fit in zip(self.grid, self.fits):
            row = {"kstar": float(k), "failed": fit is None}
            if fit is not None:
                row.update(
                    mu=fit.params.mu.tolist(),
                    kappa=fit.params.kappa.tolist(),
                    lam=fit.params.lam_upper().tolist(),
                    mean_weight=fit.mean_weight,
                    downweighting_level=fit.downweighting_level,
                )
            out.append(row)
        return out


def monitor(X, kstar_grid, base_config=None):
    """Refit over an increasing grid of ``kstar`` with a shared seed."""
    grid = np.asarray(kstar_grid, dtype=float).ravel()
    if grid.size == 0:
        raise ValueError("kstar grid is empty")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("kstar grid must be strictly increasing")
    base_config = base_config or WleConfig()
    fits, errors = [], {}
    for k in grid:
        try:
            fits.append(wle_fit(X, replace(base_config, kstar=float(k))))
        except (EstimationError, ValueError) as exc:
            fits.append(None)
            errors[float(k)] = str(exc)
    return MonitorResult(grid=grid, fits=fits, errors=errors)

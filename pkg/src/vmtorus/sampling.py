"""Random generation from the sine model and clustered contamination."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_angles, wrap
from ._vonmises import vonmises_rvs
from .circular import mean_direction

__all__ = [
    "GibbsConfig",
    "ContaminationSpec",
    "sample_univariate_vm",
    "conditional_params",
    "sample_sine_model",
    "contaminate",
]


@dataclass(frozen=True)
class GibbsConfig:
    """Settings of the Gibbs sampler.

    Chains run side by side in vectorized form. Each chain is burnt in, then
    contributes draws ``thinning`` sweeps apart. ``n_chains=None`` runs one
    chain per requested draw.
    """

    burn_in: int = 1000
    thinning: int = 10
    seed: int = 0
    n_chains: int | None = None

    def __post_init__(self):
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.thinning < 1:
            raise ValueError("thinning must be >= 1")
        if self.n_chains is not None and self.n_chains < 1:
            raise ValueError("n_chains must be >= 1")


@dataclass(frozen=True)
class ContaminationSpec:
    """Clustered outliers placed at ``mu + shift`` in ``contaminated_dims``.

    mode : {"append", "replace"}
        ``append`` adds ``n_outliers`` rows, ``replace`` overwrites the
        contaminated coordinates of the last ``n_outliers`` rows.
    """

    n_outliers: int = 50
    shift: tuple | None = None
    contaminated_dims: tuple | None = None
    outlier_concentration: tuple | float = 20.0
    mode: str = "append"

    def __post_init__(self):
        if self.n_outliers < 0:
            raise ValueError("n_outliers must be >= 0")
        if self.mode not in ("append", "replace"):
            raise ValueError("mode must be 'append' or 'replace'")
        if self.contaminated_dims is not None and len(self.contaminated_dims) == 0:
            raise ValueError("contaminated_dims must be non-empty")
        if np.any(np.asarray(self.outlier_concentration, dtype=float) <= 0):
            raise ValueError("outlier concentration must be positive")

    def resolve(self, p):
        """Return ``(dims, shift, concentration)`` as arrays for dimension p."""
        dims = np.arange(p) if self.contaminated_dims is None else np.asarray(self.contaminated_dims, int)
        if np.any(dims < 0) or np.any(dims >= p):
            raise ValueError(f"contaminated_dims must lie in [0, {p})")
        shift = np.full(dims.size, np.pi) if self.shift is None else np.asarray(self.shift, float)
        conc = np.broadcast_to(np.asarray(self.outlier_concentration, float), dims.shape)
        if shift.shape != dims.shape:
            raise ValueError("shift must have one entry per contaminated dimension")
        return dims, shift, conc


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_univariate_vm(mu, kappa, n, seed=None):
    """``n`` i.i.d. von Mises draws; ``kappa = 0`` is uniform on the circle."""
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    return vonmises_rvs(mu, kappa, _rng(seed), size=(n,))


def conditional_params(theta, j, params):
    """Location and concentration of ``theta_j`` given the other coordinates.

    The full conditional is von Mises with concentration ``hypot(kappa_j, b)``
    and location ``mu_j + atan2(b, kappa_j)``, where
    ``b = sum_{l != j} lambda_jl sin(theta_l - mu_l)``.
    Works on a single point or on rows of an ``(m, p)`` array.
    """
    theta = np.asarray(theta, dtype=float)
    s = np.sin(theta - params.mu)
    b = s @ params.lam[j]  # lam[j, j] == 0
    kappa_j = params.kappa[j]
    return wrap(params.mu[j] + np.arctan2(b, kappa_j)), np.hypot(kappa_j, b)


def sample_sine_model(params, n, config=None):
    """Draw ``n`` points from the sine model by Gibbs sampling.

    Returns
    -------
    ndarray of shape (n, p)
    """
    config = config or GibbsConfig()
    if n < 0:
        raise ValueError("n must be >= 0")
    p = params.p
    if n == 0:
        return np.empty((0, p))
    rng = np.random.default_rng(config.seed)
    m = n if config.n_chains is None else min(config.n_chains, n)
    per_chain = -(-n // m)
    state = vonmises_rvs(params.mu, params.kappa, rng, size=(m, p))
    if not np.any(params.lam):
        # independent coordinates: the chain mixes in one sweep
        burn, thin = 0, 1
    else:
        burn, thin = config.burn_in, config.thinning

    def sweep():
        for j in range(p):
            loc, conc = conditional_params(state, j, params)
            state[:, j] = vonmises_rvs(loc, conc, rng)

    for _ in range(burn):
        sweep()
    draws = np.empty((per_chain, m, p))
    for t in range(per_chain):
        for _ in range(thin):
            sweep()
        draws[t] = state
    return draws.reshape(-1, p)[:n].copy()


def contaminate(X, spec, seed=None, mu=None):
    """Add a tight cluster of outliers to a sample.

    Outliers are drawn from independent von Mises laws centred at
    ``mu + shift`` in the contaminated coordinates. In ``append`` mode the
    remaining coordinates of new rows are copied from randomly chosen
    genuine rows.

    Parameters
    ----------
    X : array-like of shape (n, p)
    spec : ContaminationSpec
    seed : int or Generator, optional
    mu : array-like of shape (p,), optional
        Centre of the genuine data; defaults to the sample mean direction.

    Returns
    -------
    X_out : ndarray
    mask : ndarray of bool, True for outlier rows
    """
    X = check_angles(X, min_samples=0)
    n, p = X.shape
    if spec.n_outliers == 0:
        return X.copy(), np.zeros(n, dtype=bool)
    dims, shift, conc = spec.resolve(p)
    rng = _rng(seed)
    centre = mean_direction(X) if mu is None else np.asarray(mu, float)
    k = spec.n_outliers
    cluster = vonmises_rvs(centre[dims] + shift, conc, rng, size=(k, dims.size))
    if spec.mode == "append":
        if n == 0 and dims.size < p:
            raise ValueError("append mode needs genuine rows to fill untouched coordinates")
        new = X[rng.integers(0, n, size=k)] if n else np.zeros((k, p))
        new[:, dims] = cluster
        out = np.vstack([X, wrap(new)])
        mask = np.r_[np.zeros(n, bool), np.ones(k, bool)]
    else:
        if k > n:
            raise ValueError(f"cannot replace {k} rows in a sample of size {n}")
        out = X.copy()
        rows = np.arange(n - k, n)
        out[np.ix_(rows, dims)] = cluster
        mask = np.zeros(n, bool)
        mask[rows] = True
    return out, mask

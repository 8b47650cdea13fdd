"""Vectorized Best-Fisher rejection sampler for the von Mises law."""

import numpy as np

from ._validation import wrap

_UNIFORM_KAPPA = 1e-8


def vonmises_rvs(mu, kappa, rng, size=None):
    """Draw von Mises variates with per-element location and concentration.

    ``mu`` and ``kappa`` broadcast against each other (and ``size``).
    Elements with ``kappa`` below ``1e-8`` are drawn uniformly.
    """
    mu, kappa = np.broadcast_arrays(np.asarray(mu, dtype=float), np.asarray(kappa, dtype=float))
    if size is not None:
        mu = np.broadcast_to(mu, size)
        kappa = np.broadcast_to(kappa, size)
    shape = mu.shape
    mu = mu.ravel()
    kappa = kappa.ravel()
    if np.any(kappa < 0):
        raise ValueError("kappa must be non-negative")
    out = np.empty(mu.size)

    flat = kappa < _UNIFORM_KAPPA
    out[flat] = rng.uniform(0.0, 2.0 * np.pi, size=int(flat.sum()))

    idx = np.flatnonzero(~flat)
    k = kappa[idx]
    root = np.sqrt(1.0 + 4.0 * k * k)
    tau = 1.0 + root
    # tau - sqrt(2 tau) rewritten to avoid cancellation at small kappa
    rho = tau * (4.0 * k * k / (root + 1.0)) / (tau + np.sqrt(2.0 * tau)) / (2.0 * k)
    r = (1.0 + rho * rho) / (2.0 * rho)
    while idx.size:
        u1 = rng.uniform(size=idx.size)
        u2 = rng.uniform(size=idx.size)
        u3 = rng.uniform(size=idx.size)
        z = np.cos(np.pi * u1)
        f = (1.0 + r * z) / (r + z)
        c = k * (r - f)
        accept = (c * (2.0 - c) - u2 > 0) | (np.log(c / u2) + 1.0 - c >= 0)
        hit = idx[accept]
        out[hit] = mu[hit] + np.sign(u3[accept] - 0.5) * np.arccos(np.clip(f[accept], -1.0, 1.0))
        keep = ~accept
        idx, k, r = idx[keep], k[keep], r[keep]
    return wrap(out).reshape(shape)

"""Modified Bessel functions of the first kind, orders 0 and 1.

Power series for ``x <= 15`` and the exponentially scaled asymptotic
expansion beyond. Only non-negative arguments are needed by the package
(concentrations), negative ones are handled through parity.
"""

import numpy as np

_SERIES_LIMIT = 15.0
_N_SERIES = 90
_N_ASYMPTOTIC = 30


def _series_scaled(x, order):
    # sum_k (x/2)^(2k+order) / (k! (k+order)!) times exp(-x)
    q = 0.25 * x * x
    term = np.where(order == 0, np.ones_like(x), 0.5 * x)
    total = term.copy()
    for k in range(1, _N_SERIES):
        term = term * q / (k * (k + order))
        total = total + term
    return total * np.exp(-x)


def _asymptotic_scaled(x, order):
    mu = 4.0 * order * order
    term = np.ones_like(x)
    total = term.copy()
    for k in range(1, _N_ASYMPTOTIC):
        term = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        total = total + term
    return total / np.sqrt(2.0 * np.pi * x)


def _scaled(x, order):
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.empty_like(ax)
    small = ax <= _SERIES_LIMIT
    if np.any(small):
        out[small] = _series_scaled(ax[small], order)
    if np.any(~small):
        out[~small] = _asymptotic_scaled(ax[~small], order)
    if order == 1:
        out = np.where(x < 0, -out, out)
    return out


def i0e(x):
    """Exponentially scaled ``I0(x) * exp(-|x|)``."""
    out = _scaled(x, 0)
    return out if out.ndim else float(out)


def i1e(x):
    """Exponentially scaled ``I1(x) * exp(-|x|)``."""
    out = _scaled(x, 1)
    return out if out.ndim else float(out)


def i0(x):
    x = np.asarray(x, dtype=float)
    out = _scaled(x, 0) * np.exp(np.abs(x))
    return out if out.ndim else float(out)


def i1(x):
    x = np.asarray(x, dtype=float)
    out = _scaled(x, 1) * np.exp(np.abs(x))
    return out if out.ndim else float(out)


def log_i0(x):
    """``log I0(x)`` without overflow for large arguments."""
    x = np.asarray(x, dtype=float)
    out = np.log(_scaled(x, 0)) + np.abs(x)
    return out if out.ndim else float(out)


def bessel_ratio(kappa):
    """Mean resultant length ``I1(kappa) / I0(kappa)`` of a von Mises law."""
    kappa = np.asarray(kappa, dtype=float)
    out = _scaled(kappa, 1) / _scaled(kappa, 0)
    return out if out.ndim else float(out)

"""Angle arithmetic and classical circular summaries.

All functions operate column-wise on ``(n, p)`` arrays of angles in radians.
"""

import numpy as np

from ._validation import check_angles, wrap
from .exceptions import DegenerateCorrelationError, DegenerateDirectionError

__all__ = [
    "wrap",
    "mean_direction",
    "mean_resultant_length",
    "circular_correlation",
    "weighted_trig_moments",
]

RESULTANT_TOL = 1e-12


def weighted_trig_moments(X, weights=None):
    """Weighted means of ``cos`` and ``sin`` per column.

    Returns
    -------
    c_bar, s_bar : ndarray of shape (p,)
    """
    X = np.asarray(X, dtype=float)
    if weights is None:
        return np.cos(X).mean(axis=0), np.sin(X).mean(axis=0)
    w = np.asarray(weights, dtype=float)
    total = w.sum()
    return w @ np.cos(X) / total, w @ np.sin(X) / total


def _direction_from_moments(c_bar, s_bar):
    r = np.hypot(c_bar, s_bar)
    bad = np.flatnonzero(r < RESULTANT_TOL)
    if bad.size:
        raise DegenerateDirectionError(
            f"mean direction undefined in dimension(s) {bad.tolist()}: resultant length ~ 0"
        )
    return wrap(np.arctan2(s_bar, c_bar))


def mean_direction(X, weights=None):
    """Circular mean of each column, ``atan2(mean sin, mean cos)``.

    Parameters
    ----------
    X : array-like of shape (n, p) or (n,)
        Angles in radians.
    weights : array-like of shape (n,), optional
        Non-negative observation weights.

    Returns
    -------
    ndarray of shape (p,)
        Mean directions in ``[0, 2*pi)``.

    Raises
    ------
    DegenerateDirectionError
        When the resultant length of some column is below ``1e-12``.
    """
    X = _as_columns(X)
    return np.atleast_1d(_direction_from_moments(*weighted_trig_moments(X, weights)))


def mean_resultant_length(X, weights=None):
    """Length of the average unit vector per column, in ``[0, 1]``."""
    X = _as_columns(X)
    c_bar, s_bar = weighted_trig_moments(X, weights)
    return np.minimum(np.hypot(c_bar, s_bar), 1.0)


def circular_correlation(a, b):
    """Jammalamadaka-SenGupta circular correlation of two angle columns.

    Raises
    ------
    DegenerateCorrelationError
        If either column has no sine deviation about its mean direction.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError("columns must have equal length")
    if a.size < 2:
        raise ValueError("circular correlation needs at least two observations")
    try:
        mu_a = mean_direction(a[:, None])[0]
        mu_b = mean_direction(b[:, None])[0]
    except DegenerateDirectionError as exc:
        raise DegenerateCorrelationError(str(exc)) from exc
    sa = np.sin(a - mu_a)
    sb = np.sin(b - mu_b)
    ssa, ssb = np.sum(sa * sa), np.sum(sb * sb)
    # rounding in the mean direction leaves ~1e-16 residue for constant columns
    if min(ssa, ssb) <= a.size * RESULTANT_TOL**2:
        raise DegenerateCorrelationError("zero sine deviation in a column")
    return float(np.clip(np.sum(sa * sb) / np.sqrt(ssa * ssb), -1.0, 1.0))


def _as_columns(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return check_angles(X)

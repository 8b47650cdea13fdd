"""Input validation helpers shared by the public API."""

import numpy as np
from sklearn.utils import check_array

TWO_PI = 2.0 * np.pi


def wrap(x):
    """Map radians onto the canonical interval ``[0, 2*pi)``.

    Raises
    ------
    ValueError
        If any input is NaN or infinite.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("angles must be finite")
    out = np.mod(arr, TWO_PI)
    # np.mod can round up to exactly 2*pi for tiny negative inputs
    out = np.where(out >= TWO_PI, 0.0, out)
    return out if out.ndim else float(out)


def check_angles(X, *, min_samples=1, ensure_2d=True, name="X"):
    """Validate an ``(n, p)`` array of angles and wrap it to ``[0, 2*pi)``."""
    arr = check_array(
        X,
        dtype=np.float64,
        ensure_2d=ensure_2d,
        ensure_min_samples=min_samples,
        ensure_all_finite=True,
        input_name=name,
    )
    return wrap(arr)


def check_point(theta, p):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.ndim != 1 or theta.shape[0] != p:
        raise ValueError(f"expected a point with {p} coordinates, got shape {theta.shape}")
    return wrap(theta)


def check_points(points, p):
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, p) if p > 1 else points[:, None]
    if points.ndim != 2 or points.shape[1] != p:
        raise ValueError(f"expected points of dimension {p}, got shape {points.shape}")
    return np.atleast_2d(wrap(points))


def angular_difference(a, b):
    """Signed difference ``a - b`` mapped to ``[-pi, pi)``."""
    return np.mod(np.asarray(a) - np.asarray(b) + np.pi, TWO_PI) - np.pi

"""CSV angle tables and plain-text fit reports.

Angle table: comma separated, optional single header row, one numeric column
per dimension (radians). A column named ``outlier`` holds a 0/1 mask and is
not part of the data.

Fit report: ``key = value`` lines with values printed at 17 significant
digits, followed by a ``[weights]`` CSV block (index, weight, residual).
Lines starting with ``#`` are comments (a rounded summary is written there).
"""

import csv
import math

import numpy as np

from ._validation import wrap
from .model import SineModelParams

__all__ = [
    "TableError",
    "read_angle_table",
    "write_angle_table",
    "format_fit_report",
    "read_fit_report",
    "params_from_report",
]

MASK_COLUMN = "outlier"


class TableError(ValueError):
    """Malformed angle table."""


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_angle_table(path, degrees=False):
    """Load an angle table.

    Returns
    -------
    X : ndarray of shape (n, p)
        Angles wrapped to ``[0, 2*pi)``.
    mask : ndarray of bool or None
        Contents of the ``outlier`` column when present.
    columns : list of str
        Data column names (generated when the file has no header).
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise TableError(f"{path}: empty table")
    first = [c.strip() for c in rows[0]]
    if all(_is_number(c) for c in first):
        header = None
        body = rows
    else:
        header = first
        body = rows[1:]
    width = len(header) if header else len(first)
    mask_idx = None
    if header and MASK_COLUMN in header:
        mask_idx = header.index(MASK_COLUMN)
    data, mask = [], []
    for lineno, row in enumerate(body, start=2 if header else 1):
        if len(row) != width:
            raise TableError(f"{path}:{lineno}: expected {width} cells, got {len(row)}")
        try:
            values = [float(c) for c in row]
        except ValueError as exc:
            raise TableError(f"{path}:{lineno}: non-numeric cell ({exc})") from None
        if not all(math.isfinite(v) for v in values):
            raise TableError(f"{path}:{lineno}: non-finite value")
        if mask_idx is not None:
            mask.append(bool(values.pop(mask_idx)))
        data.append(values)
    p = width - (mask_idx is not None)
    if p < 1:
        raise TableError(f"{path}: no data columns")
    X = np.asarray(data, dtype=float).reshape(len(data), p)
    if degrees:
        X = np.deg2rad(X)
    columns = [c for c in header if c != MASK_COLUMN] if header else [f"theta{j + 1}" for j in range(p)]
    return wrap(X), (np.asarray(mask, bool) if mask_idx is not None else None), columns


def write_angle_table(path_or_file, X, mask=None, columns=None, degrees=False):
    """Write angles (and an optional outlier mask) at full precision."""
    X = np.asarray(X, dtype=float).reshape(len(X), -1) if len(X) else np.asarray(X, float)
    p = X.shape[1] if X.ndim == 2 else len(columns or [])
    columns = list(columns) if columns else [f"theta{j + 1}" for j in range(p)]
    values = np.rad2deg(X) if degrees else X

    def _write(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns + ([MASK_COLUMN] if mask is not None else []))
        for i, row in enumerate(values):
            cells = [repr(float(v)) for v in row]
            if mask is not None:
                cells.append(str(int(mask[i])))
            writer.writerow(cells)

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write(fh)


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def format_fit_report(result, method, n, config=None, seed=None, columns=None):
    """Render a :class:`~vmtorus.wle.FitResult` as report text."""
    params = result.params
    p = params.p
    lines = ["# vmtorus fit report"]
    summary = [f"{m:.2f}" for m in params.mu] + [f"{k:.2f}" for k in params.kappa]
    summary += [f"{v:.2f}" for v in params.lam_upper()]
    lines.append("# summary (mu, kappa, lambda upper): " + " ".join(summary))
    if result.method == "wle":
        lines.append(f"# down-weighting level: {result.downweighting_level:.2f}")
    items = [("method", method), ("p", p), ("n", n)]
    if columns:
        items.append(("columns", ",".join(columns)))
    items += [(f"mu[{j}]", params.mu[j]) for j in range(p)]
    items += [(f"kappa[{j}]", params.kappa[j]) for j in range(p)]
    items += [(f"lambda[{i},{j}]", params.lam[i, j]) for i in range(p) for j in range(i + 1, p)]
    sigma = result.sigma_hat.sigma
    items += [(f"sigma[{i},{j}]", sigma[i, j]) for i in range(p) for j in range(i, p)]
    items += [
        ("pd_flag", result.pd_flag),
        ("converged", result.converged),
        ("iterations", result.iterations),
        ("sum_weights", result.sum_weights),
        ("downweighting_level", result.downweighting_level),
        ("root_score", result.root_score),
        ("n_roots", result.n_roots),
    ]
    if config is not None:
        items += [
            ("config.kstar", config.kstar),
            ("config.raf", config.raf.kind),
            ("config.tau", config.raf.tau),
            ("config.lambda_exp", config.raf.lambda_exp),
            ("config.max_iter", config.max_iter),
            ("config.tol", config.tol),
            ("config.n_starts", config.n_starts),
            ("config.subsample_size", config.subsample_size),
            ("config.root_threshold", config.root_threshold),
        ]
    if seed is not None:
        items.append(("seed", seed))
    lines += [f"{k} = {_fmt(v)}" for k, v in items]
    lines.append("[weights]")
    lines.append("index,weight,residual")
    for i, (w, r) in enumerate(zip(result.weights, result.residuals)):
        lines.append(f"{i},{_fmt(w)},{_fmt(r)}")
    return "\n".join(lines) + "\n"


def _parse_value(text):
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_fit_report(path_or_text):
    """Parse a fit report back into ``(fields, weights, residuals)``."""
    if "\n" in str(path_or_text):
        text = path_or_text
    else:
        with open(path_or_text) as fh:
            text = fh.read()
    fields, weights, residuals = {}, [], []
    in_weights = False
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line == "[weights]":
            in_weights = True
            continue
        if in_weights:
            if line.startswith("index"):
                continue
            _, w, r = line.split(",")
            weights.append(float(w))
            residuals.append(float(r))
            continue
        key, _, value = line.partition("=")
        fields[key.strip()] = _parse_value(value.strip())
    if "p" not in fields:
        raise ValueError("not a fit report: missing 'p'")
    return fields, np.asarray(weights), np.asarray(residuals)


def params_from_report(fields):
    """Rebuild :class:`SineModelParams` from parsed report fields."""
    p = int(fields["p"])
    mu = [fields[f"mu[{j}]"] for j in range(p)]
    kappa = [fields[f"kappa[{j}]"] for j in range(p)]
    upper = [fields[f"lambda[{i},{j}]"] for i in range(p) for j in range(i + 1, p)]
    return SineModelParams.from_upper(mu, kappa, upper)

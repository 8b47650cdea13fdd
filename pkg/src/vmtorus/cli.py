"""Command line interface: ``vmtorus {fit,simulate,mc,monitor,density-grid}``.

Exit codes: 0 success, 1 usage error, 2 I/O or parse error, 3 estimation failure.
"""

import argparse
import csv
import json
import logging
import sys
from contextlib import contextmanager

import numpy as np

from . import __version__
from ._validation import TWO_PI
from .exceptions import EstimationError, VMTorusError
from .experiments import (
    ScenarioSpec,
    bivariate_scenario,
    five_dim_scenario,
    minor_axis_shift,
    run_trials,
    summarize,
    write_trials_csv,
)
from .io import (
    TableError,
    format_fit_report,
    params_from_report,
    read_angle_table,
    read_fit_report,
    write_angle_table,
)
from .model import NormalizationStrategy, SineModelParams, log_density, log_norm_const
from .sampling import ContaminationSpec, GibbsConfig, contaminate, sample_sine_model
from .weights import RafSpec
from .wle import WleConfig, mle_fit, monitor, wle_fit

logger = logging.getLogger("vmtorus")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_ESTIMATION = 0, 1, 2, 3
DEFAULT_SEED = 0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None


def parse_grid(spec):
    """``start:stop:step`` (inclusive) or a comma separated list."""
    try:
        if ":" in spec:
            parts = [float(x) for x in spec.split(":")]
            if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
                raise ValueError
            start, stop, step = parts
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            grid = start + step * np.arange(count)
        else:
            grid = np.asarray([float(x) for x in spec.split(",")])
    except ValueError:
        raise UsageError(f"malformed k* grid {spec!r}; use start:stop:step or a comma list") from None
    if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise UsageError("k* grid must be positive and strictly increasing")
    return grid


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _wle_config(args):
    return WleConfig(
        kstar=args.kstar,
        raf=RafSpec(args.raf, tau=args.tau, lambda_exp=args.lambda_exp),
        max_iter=args.max_iter,
        tol=args.tol,
        n_starts=args.n_starts,
        subsample_size=args.subsample_size,
        root_threshold=args.root_threshold,
        seed=args.seed,
    )


def _params_from_flags(args):
    kappa = args.kappa
    p = len(kappa)
    mu = args.mu if args.mu is not None else [0.0] * p
    upper = args.lam if args.lam is not None else [0.0] * (p * (p - 1) // 2)
    if len(mu) != p:
        raise UsageError(f"--mu needs {p} values")
    if len(upper) != p * (p - 1) // 2:
        raise UsageError(f"--lambda needs {p * (p - 1) // 2} values (upper triangle, row-major)")
    try:
        return SineModelParams.from_upper(mu, kappa, upper)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_fit(args):
    X, _, columns = read_angle_table(args.input, degrees=args.degrees)
    config = None
    if args.method == "mle":
        result = mle_fit(X)
    else:
        config = _wle_config(args)
        result = wle_fit(X, config)
    text = format_fit_report(result, args.method, len(X), config=config, seed=args.seed, columns=columns)
    with _output(args.output) as fh:
        fh.write(text)
    return EXIT_OK


def cmd_simulate(args):
    params = _params_from_flags(args)
    gibbs = GibbsConfig(burn_in=args.burn_in, thinning=args.thinning, seed=args.seed)
    X = sample_sine_model(params, args.n, gibbs)
    mask = np.zeros(len(X), bool)
    if args.outliers:
        dims = tuple(args.outlier_dims) if args.outlier_dims else None
        shift = tuple(args.outlier_shift) if args.outlier_shift else None
        spec = ContaminationSpec(
            n_outliers=args.outliers,
            shift=shift,
            contaminated_dims=dims,
            outlier_concentration=args.outlier_concentration,
            mode=args.mode,
        )
        try:
            spec.resolve(params.p)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        cont_seed = np.random.SeedSequence([args.seed, 1]).generate_state(1)[0]
        X, mask = contaminate(X, spec, seed=int(cont_seed), mu=params.mu)
    with _output(args.output) as fh:
        write_angle_table(fh, X if len(X) else np.empty((0, params.p)), mask=mask, degrees=args.degrees)
    return EXIT_OK


def load_scenario(path):
    """Build a scenario and WLE config from a JSON file (see README)."""
    with open(path) as fh:
        doc = json.load(fh)
    wle = doc.get("wle", {})
    raf = RafSpec(wle.get("raf", "SCHI"), tau=wle.get("tau", 1.0), lambda_exp=wle.get("lambda_exp", 0.5))
    config = WleConfig(
        kstar=wle.get("kstar", 10.0),
        raf=raf,
        max_iter=wle.get("max_iter", 200),
        tol=wle.get("tol", 1e-6),
        n_starts=wle.get("n_starts", 100),
        subsample_size=wle.get("subsample_size", 10),
        root_threshold=wle.get("root_threshold", -0.9),
    )
    preset = doc.get("preset")
    cont = doc.get("contamination")
    if preset == "five_dim":
        n_out = cont.get("n_outliers", 50) if cont else 0
        return five_dim_scenario(n=doc.get("n", 300), n_outliers=n_out), config
    if preset == "bivariate":
        kappa, lam = doc["kappa"], doc["lambda"]
        lam = lam[0] if isinstance(lam, list) else lam
        n_out = cont.get("n_outliers", 50) if cont else 0
        return bivariate_scenario(kappa[0], kappa[1], lam, n=doc.get("n", 250), n_outliers=n_out), config
    if preset is not None:
        raise UsageError(f"unknown scenario preset {preset!r}")

    p = len(doc["kappa"])
    params = SineModelParams.from_upper(doc.get("mu", [0.0] * p), doc["kappa"], doc.get("lambda", [0.0] * (p * (p - 1) // 2)))
    blocks = None
    if doc.get("blocks"):
        blocks = tuple(
            SineModelParams.from_upper(
                b.get("mu", [0.0] * len(b["kappa"])), b["kappa"], b.get("lambda", [])
            )
            for b in doc["blocks"]
        )
    spec = None
    if cont and cont.get("n_outliers", 0) > 0:
        dims = tuple(cont["dims"]) if "dims" in cont else None
        shift = cont.get("shift")
        if isinstance(shift, dict) and "minor_axis" in shift:
            shift = minor_axis_shift(params, dims if dims else range(p), shift["minor_axis"])
        spec = ContaminationSpec(
            n_outliers=cont["n_outliers"],
            shift=tuple(shift) if shift is not None else None,
            contaminated_dims=dims,
            outlier_concentration=cont.get("concentration", 20.0),
            mode=cont.get("mode", "append"),
        )
    gibbs = GibbsConfig(**doc.get("gibbs", {}))
    scenario = ScenarioSpec(true_params=params, n=doc["n"], contamination=spec, blocks=blocks, gibbs=gibbs)
    return scenario, config


def _format_summary(summary):
    lines = []
    for tag, entry in summary.items():
        lines.append(f"{tag}: ok={entry['n_ok']} failed={entry['n_failed']}")
        for metric in ("AS_mu", "rmse_kappa", "rmse_lambda"):
            if metric in entry:
                q = entry[metric]
                lines.append(
                    f"  {metric:<12} min={q['min']:.4g} q1={q['q1']:.4g} "
                    f"median={q['median']:.4g} q3={q['q3']:.4g} max={q['max']:.4g}"
                )
    return "\n".join(lines) + "\n"


def cmd_mc(args):
    try:
        scenario, config = load_scenario(args.scenario)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, json.JSONDecodeError):
            raise TableError(f"{args.scenario}: invalid JSON ({exc})") from None
        raise UsageError(f"invalid scenario: {exc}") from None
    records = run_trials(scenario, config, n_trials=args.trials, seed=args.seed, n_jobs=args.n_jobs)
    with _output(args.output) as fh:
        write_trials_csv(records, fh)
    summary = summarize(records)
    if args.summary:
        with open(args.summary, "w") as fh:
            json.dump(summary, fh, indent=2)
    sys.stderr.write(_format_summary(summary))
    return EXIT_OK


def cmd_monitor(args):
    grid = parse_grid(args.grid)
    X, _, _ = read_angle_table(args.input, degrees=args.degrees)
    result = monitor(X, grid, _wle_config(args))
    p = X.shape[1]
    header = ["kstar", "failed", "mean_weight", "downweighting_level"]
    header += [f"mu{j}" for j in range(p)] + [f"kappa{j}" for j in range(p)]
    header += [f"lambda{i}{j}" for i in range(p) for j in range(i + 1, p)] + ["error"]
    with _output(args.output) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in result.rows():
            if row["failed"]:
                cells = [repr(row["kstar"]), 1] + [""] * (len(header) - 3)
                cells.append(result.errors.get(row["kstar"], ""))
            else:
                values = [row["mean_weight"], row["downweighting_level"], *row["mu"], *row["kappa"], *row["lam"]]
                cells = [repr(row["kstar"]), 0] + [repr(float(v)) for v in values] + [""]
            writer.writerow(cells)
    return EXIT_OK


def density_grid(params, resolution, pair=(0, 1)):
    """Bivariate sine density of the selected coordinate pair on ``[-pi, pi)^2``.

    For p > 2 the pair's own ``(mu, kappa, lambda)`` entries define the
    bivariate model; this approximates (does not equal) the true marginal.

    Returns
    -------
    ndarray of shape (resolution**2, 3)
        Columns theta_i, theta_j, density; theta_i varies slowest.
    """
    i, j = pair
    if params.p < 2:
        raise UsageError("density grid needs p >= 2")
    if resolution < 16:
        raise UsageError("resolution must be >= 16")
    if i == j or not (0 <= i < params.p and 0 <= j < params.p):
        raise UsageError(f"invalid pair {pair} for p = {params.p}")
    sub = params.submodel([i, j])
    axis = -np.pi + TWO_PI * np.arange(resolution) / resolution
    a, b = np.meshgrid(axis, axis, indexing="ij")
    pts = np.column_stack([a.ravel(), b.ravel()])
    const = log_norm_const(sub, NormalizationStrategy("quadrature"))
    dens = np.exp(log_density(pts, sub, log_const=const))
    return np.column_stack([pts, dens])


def cmd_density_grid(args):
    if args.report:
        fields, _, _ = read_fit_report(args.report)
        params = params_from_report(fields)
    elif args.kappa:
        params = _params_from_flags(args)
    else:
        raise UsageError("give either --report or --kappa")
    grid = density_grid(params, args.resolution, tuple(args.pair))
    if args.degrees:
        grid[:, :2] = np.rad2deg(grid[:, :2])
    with _output(args.output) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["theta1", "theta2", "density"])
        for row in grid:
            writer.writerow([repr(float(v)) for v in row])
    return EXIT_OK


def _add_wle_flags(p):
    p.add_argument("--kstar", type=float, default=10.0, help="kernel concentration (default 10)")
    p.add_argument("--raf", choices=["SCHI", "GKL", "PWD"], default="SCHI")
    p.add_argument("--tau", type=float, default=1.0, help="GKL parameter")
    p.add_argument("--lambda-exp", type=float, default=0.5, help="power divergence exponent")
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--n-starts", type=int, default=100)
    p.add_argument("--subsample-size", type=int, default=10)
    p.add_argument("--root-threshold", type=float, default=-0.9)


def _add_param_flags(p, required):
    p.add_argument("--kappa", type=_floats, required=required, help="concentrations, comma separated")
    p.add_argument("--lambda", dest="lam", type=_floats, help="upper triangle of Lambda, row-major")
    p.add_argument("--mu", type=_floats, help="location (radians), default zeros")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"random seed (default {DEFAULT_SEED})")
    common.add_argument("--degrees", action="store_true", help="read/write angles in degrees")
    common.add_argument("-o", "--output", help="output file (default stdout)")

    parser = _Parser(prog="vmtorus", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", parents=[common], help="fit MLE or WLE to an angle table")
    p.add_argument("input")
    p.add_argument("--method", choices=["mle", "wle"], default="wle")
    _add_wle_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", parents=[common], help="sample from the sine model")
    _add_param_flags(p, required=True)
    p.add_argument("-n", "--n", type=int, required=True)
    p.add_argument("--outliers", type=int, default=0)
    p.add_argument("--outlier-shift", type=_floats, help="offset from mu per contaminated dim (default pi)")
    p.add_argument("--outlier-dims", type=_ints)
    p.add_argument("--outlier-concentration", type=float, default=20.0)
    p.add_argument("--mode", choices=["append", "replace"], default="append")
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--thinning", type=int, default=10)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mc", parents=[common], help="Monte Carlo comparison of MLE, MLE0 and WLE")
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--n-jobs", type=int, default=1)
    p.add_argument("--summary", help="write the summary as JSON here")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("monitor", parents=[common], help="refit over a grid of k*")
    p.add_argument("input")
    p.add_argument("--grid", required=True, help="start:stop:step or comma list")
    _add_wle_flags(p)
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("density-grid", parents=[common], help="export a bivariate density grid")
    p.add_argument("--report", help="fit report to take parameters from")
    _add_param_flags(p, required=False)
    p.add_argument("--pair", type=_ints, default=[0, 1])
    p.add_argument("--resolution", type=int, default=128)
    p.set_defaults(func=cmd_density_grid)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return exc.code
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"vmtorus: usage error: {exc}\n")
        return EXIT_USAGE
    except (OSError, TableError) as exc:
        sys.stderr.write(f"vmtorus: {exc}\n")
        return EXIT_IO
    except (EstimationError, VMTorusError) as exc:
        sys.stderr.write(f"vmtorus: estimation failed: {exc}\n")
        diag = getattr(exc, "diagnostics", None)
        if diag:
            for key, value in diag.items():
                sys.stderr.write(f"  {key}: {value}\n")
        return EXIT_ESTIMATION
    except ValueError as exc:
        sys.stderr.write(f"vmtorus: invalid input: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

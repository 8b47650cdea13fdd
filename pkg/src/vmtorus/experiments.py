"""Monte Carlo comparison of MLE, MLE on genuine data only (MLE0) and WLE."""

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import block_diag

from .exceptions import VMTorusError
from .model import SineModelParams, precision_from_params
from .sampling import ContaminationSpec, GibbsConfig, contaminate, sample_sine_model
from .wle import WleConfig, mle_fit, wle_fit

__all__ = [
    "ScenarioSpec",
    "TrialRecord",
    "angle_separation",
    "rmse",
    "bivariate_scenario",
    "five_dim_scenario",
    "minor_axis_shift",
    "run_trials",
    "summarize",
    "write_trials_csv",
]

logger = logging.getLogger(__name__)

ESTIMATORS = ("MLE", "MLE0", "WLE")
OUTLIER_DISTANCE = 2.0
METRICS = ("AS_mu", "rmse_kappa", "rmse_lambda")


def angle_separation(mu_hat, mu_true):
    """Mean of ``1 - cos(mu_hat_j - mu_true_j)``, in ``[0, 2]``."""
    mu_hat = np.asarray(mu_hat, dtype=float)
    mu_true = np.asarray(mu_true, dtype=float)
    if mu_hat.shape != mu_true.shape:
        raise ValueError("location vectors must have equal length")
    return float(np.mean(1.0 - np.cos(mu_hat - mu_true)))


def rmse(v_hat, v_true):
    """Euclidean norm of the estimation error."""
    v_hat = np.atleast_1d(np.asarray(v_hat, dtype=float))
    v_true = np.atleast_1d(np.asarray(v_true, dtype=float))
    if v_hat.shape != v_true.shape:
        raise ValueError("vectors must have equal length")
    return float(np.linalg.norm(v_hat - v_true))


@dataclass(frozen=True)
class ScenarioSpec:
    """Data generating design of a Monte Carlo study.

    ``blocks`` lists independent sub-models whose dimensions add up to
    ``p``; genuine data are sampled block by block and concatenated.
    """

    true_params: SineModelParams
    n: int
    contamination: ContaminationSpec | None = None
    blocks: tuple | None = None
    gibbs: GibbsConfig = GibbsConfig()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.blocks is not None:
            if sum(b.p for b in self.blocks) != self.p:
                raise ValueError("block dimensions must add up to p")
            joined = _join_blocks(self.blocks)
            if not (
                np.allclose(joined.kappa, self.true_params.kappa)
                and np.allclose(joined.lam, self.true_params.lam)
            ):
                raise ValueError("true_params disagree with the block structure")

    @property
    def p(self):
        return self.true_params.p

    def sample(self, seed):
        """Genuine data for one trial."""
        if self.blocks is None:
            return sample_sine_model(self.true_params, self.n, replace(self.gibbs, seed=seed))
        seeds = np.random.SeedSequence(seed).generate_state(len(self.blocks))
        parts = [
            sample_sine_model(b, self.n, replace(self.gibbs, seed=int(s)))
            for b, s in zip(self.blocks, seeds)
        ]
        return np.hstack(parts)


def _join_blocks(blocks):
    return SineModelParams(
        mu=np.concatenate([b.mu for b in blocks]),
        kappa=np.concatenate([b.kappa for b in blocks]),
        lam=block_diag(*[b.lam for b in blocks]),
    )


def minor_axis_shift(params, dims, distance=OUTLIER_DISTANCE):
    """Offset of length ``distance`` along the least dispersed direction.

    The direction is the eigenvector of the precision matrix (restricted to
    ``dims``) with the largest eigenvalue, signed so its first entry is
    positive. Outliers placed there are clearly separated from the genuine
    cloud yet pull the circular mean, unlike an antipodal cluster.
    """
    P, _ = precision_from_params(params.submodel(dims))
    vals, vecs = np.linalg.eigh(P)
    v = vecs[:, np.argmax(vals)]
    v = v if v[0] >= 0 else -v
    return tuple(float(x) for x in distance * v)


def bivariate_scenario(kappa1, kappa2, lam, n=250, n_outliers=50, outlier_distance=OUTLIER_DISTANCE):
    """Bivariate design: ``n`` genuine points plus an appended outlier cluster."""
    params = SineModelParams.bivariate(kappa1, kappa2, lam)
    cont = None
    if n_outliers:
        shift = minor_axis_shift(params, (0, 1), outlier_distance)
        cont = ContaminationSpec(n_outliers=n_outliers, shift=shift, mode="append")
    return ScenarioSpec(true_params=params, n=n, contamination=cont)


def five_dim_scenario(n=300, n_outliers=50, outlier_distance=OUTLIER_DISTANCE):
    """Five dimensions from two independent bivariate blocks and a univariate
    von Mises (kappa 30); outliers replace the first two coordinates of the
    last ``n_outliers`` rows."""
    blocks = (
        SineModelParams.bivariate(5, 10, 5),
        SineModelParams.bivariate(10, 20, 15),
        SineModelParams(mu=[0.0], kappa=[30.0], lam=[[0.0]]),
    )
    params = _join_blocks(blocks)
    cont = None
    if n_outliers:
        shift = minor_axis_shift(params, (0, 1), outlier_distance)
        cont = ContaminationSpec(
            n_outliers=n_outliers, shift=shift, contaminated_dims=(0, 1), mode="replace"
        )
    return ScenarioSpec(true_params=params, n=n, contamination=cont, blocks=blocks)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    estimator: str
    AS_mu: float
    rmse_kappa: float
    rmse_lambda: float
    seed: int
    failed: bool = False
    error: str = ""


def _record(trial, tag, fit, truth, seed):
    return TrialRecord(
        trial=trial,
        estimator=tag,
        AS_mu=angle_separation(fit.params.mu, truth.mu),
        rmse_kappa=rmse(fit.params.kappa, truth.kappa),
        rmse_lambda=rmse(fit.params.lam_upper(), truth.lam_upper()),
        seed=seed,
    )


def _failed(trial, tag, seed, exc):
    nan = float("nan")
    return TrialRecord(trial, tag, nan, nan, nan, seed, True, f"{type(exc).__name__}: {exc}")


def _trial_seeds(master, trial):
    data, cont, fit = np.random.SeedSequence([master, trial]).generate_state(3)
    return int(data), int(cont), int(fit)


def run_one_trial(scenario, config, trial, master_seed):
    """All three estimators on one simulated data set."""
    data_seed, cont_seed, fit_seed = _trial_seeds(master_seed, trial)
    truth = scenario.true_params
    genuine = scenario.sample(data_seed)
    if scenario.contamination is not None:
        data, _ = contaminate(genuine, scenario.contamination, seed=cont_seed, mu=truth.mu)
    else:
        data = genuine

    fits = {
        "MLE": lambda: mle_fit(data),
        "MLE0": lambda: mle_fit(genuine),
        "WLE": lambda: wle_fit(data, replace(config, seed=fit_seed)),
    }
    out = []
    for tag in ESTIMATORS:
        try:
            out.append(_record(trial, tag, fits[tag](), truth, data_seed))
        except (VMTorusError, ValueError, np.linalg.LinAlgError) as exc:
            logger.info("trial %d: %s failed: %s", trial, tag, exc)
            out.append(_failed(trial, tag, data_seed, exc))
    return out


def _run_star(args):
    return run_one_trial(*args)


def run_trials(scenario, config=None, n_trials=50, seed=0, n_jobs=1):
    """Simulate ``n_trials`` data sets and fit MLE, MLE0 and WLE on each.

    Per-trial seeds come from ``(seed, trial index)``, so the records do not
    depend on ``n_jobs``. Records are ordered by trial, then estimator.
    """
    config = config or WleConfig()
    if n_trials <= 0:
        return []
    jobs = [(scenario, config, t, seed) for t in range(n_trials)]
    if n_jobs == 1:
        chunks = [_run_star(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            chunks = list(pool.map(_run_star, jobs))
    return [rec for chunk in chunks for rec in chunk]


def summarize(records):
    """Five-number summaries per estimator and metric over successful trials.

    Returns
    -------
    dict
        ``{estimator: {"n_ok": int, "n_failed": int, metric: {"min", "q1",
        "median", "q3", "max"}}}``.
    """
    out = {}
    for tag in sorted({r.estimator for r in records}):
        rows = [r for r in records if r.estimator == tag]
        ok = [r for r in rows if not r.failed]
        entry = {"n_ok": len(ok), "n_failed": len(rows) - len(ok)}
        for metric in METRICS:
            if not ok:
                continue
            vals = np.sort([getattr(r, metric) for r in ok])
            q = np.quantile(vals, [0.0, 0.25, 0.5, 0.75, 1.0])
            entry[metric] = dict(zip(("min", "q1", "median", "q3", "max"), map(float, q)))
        out[tag] = entry
    return out


def write_trials_csv(records, path_or_file):
    """Trial table with columns trial, estimator, AS_mu, rmse_kappa, rmse_lambda, failed."""
    fields = ["trial", "estimator", *METRICS, "failed"]

    def _write(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fields)
        for r in records:
            writer.writerow(
                [r.trial, r.estimator, *(repr(float(getattr(r, m))) for m in METRICS), int(r.failed)]
            )

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write(fh)

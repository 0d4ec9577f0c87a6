"""Evaluation protocol: logistic score mapping, PCC/SROCC/RMSE, split harness.

Predicted scores are passed through a fitted 4-parameter monotone logistic
before computing the linear correlation and the error; rank correlation is
computed on the raw scores. The harness repeats a content-exclusive 80/20
train/test split, retrains the full stack each trial, and reports medians.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .boost import TrainingSet, train_ssqp
from .svr import SvrHyperparams

__all__ = [
    "LogisticFit",
    "fit_logistic",
    "pcc",
    "srocc",
    "rmse",
    "average_ranks",
    "TrialResult",
    "EvalReport",
    "split_protocol",
]


@dataclass(frozen=True, eq=False)
class LogisticFit:
    """Monotone 4-parameter logistic mapping from raw scores to MOS scale."""

    beta: np.ndarray
    converged: bool
    final_mse: float

    def apply(self, scores):
        return _logistic(np.asarray(scores, dtype=np.float64), self.beta)


def _logistic(s, beta):
    b1, b2, b3, b4 = beta
    return (b1 - b2) * expit((s - b3) / max(abs(b4), 1e-12)) + b2


def fit_logistic(scores, mos, max_iter: int = 5000) -> LogisticFit:
    """Least-squares logistic fit by Nelder-Mead simplex.

    Starts from asymptotes at the MOS extremes, midpoint at the mean score
    and a spread-scaled slope.
    """
    scores = np.asarray(scores, dtype=np.float64)
    mos = np.asarray(mos, dtype=np.float64)
    if scores.shape != mos.shape or scores.ndim != 1 or scores.shape[0] < 5:
        raise ValueError("need at least 5 paired points")
    if np.ptp(scores) == 0.0:
        raise ValueError("scores are all identical; mapping is degenerate")

    x0 = np.array([mos.max(), mos.min(), scores.mean(), max(scores.std() / 4.0, 1e-6)])

    def objective(beta):
        return float(np.mean((_logistic(scores, beta) - mos) ** 2))

    res = minimize(
        objective, x0, method="Nelder-Mead",
        options={"maxiter": max_iter, "maxfev": 4 * max_iter, "xatol": 1e-9, "fatol": 1e-9},
    )
    return LogisticFit(beta=res.x.copy(), converged=bool(res.success), final_mse=float(res.fun))


def pcc(a, b) -> float:
    """Sample Pearson correlation; errors out on zero variance."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.shape[0] < 2:
        raise ValueError("need two equal-length samples of size >= 2")
    da = a - a.mean()
    db = b - b.mean()
    denom = np.sqrt((da * da).sum() * (db * db).sum())
    if denom == 0.0:
        raise ValueError("zero variance in at least one sample")
    return float((da * db).sum() / denom)


def average_ranks(x) -> np.ndarray:
    """1-based ranks with ties assigned their average rank."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.shape[0], dtype=np.float64)
    sx = x[order]
    i = 0
    while i < len(sx):
        j = i
        while j + 1 < len(sx) and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def srocc(a, b) -> float:
    """Spearman rank-order correlation: Pearson over average ranks."""
    return pcc(average_ranks(a), average_ranks(b))


def rmse(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("shape mismatch")
    return float(np.sqrt(np.mean((a - b) ** 2)))


@dataclass(frozen=True)
class TrialResult:
    pcc: float
    srocc: float
    rmse: float
    n_test: int
    test_contents: tuple


@dataclass(frozen=True, eq=False)
class EvalReport:
    """Median metrics over repeated content-exclusive splits."""

    pcc: float
    srocc: float
    rmse: float
    n_trials: int
    aggregation: str = "median"
    per_trial: tuple = field(default=(), repr=False)


def _split_contents(contents, frac_train, rng):
    n = len(contents)
    n_train = int(np.floor(frac_train * n))
    n_train = min(max(n_train, 1), n - 1)  # at least one content on each side
    perm = rng.permutation(n)
    train = [contents[i] for i in sorted(perm[:n_train])]
    test = [contents[i] for i in sorted(perm[n_train:])]
    return train, test


def split_protocol(data: TrainingSet, hyper: SvrHyperparams = None,
                   frac_train: float = 0.8, n_trials: int = 50, seed: int = 0,
                   stacking: str = "in_sample", jobs: int = 1) -> EvalReport:
    """Repeated random content-exclusive splits with full retraining.

    Each trial splits content ids (never rows) train/test, trains the stack
    on the training rows, predicts the held-out rows, fits the logistic on
    the held-out predictions and records (PCC on mapped scores, SROCC on
    raw scores, RMSE on mapped scores). Degenerate trials (constant
    predictions or a constant test MOS) yield NaN entries and are skipped
    by the median. Trial seeds derive from the master seed, so results are
    identical regardless of scheduling or the number of workers.
    """
    hyper = hyper or SvrHyperparams()
    contents = data.content_ids()
    if len(contents) < 2:
        raise ValueError("need at least 2 content_ids to form a content-exclusive split")
    if not 0.0 < frac_train < 1.0:
        raise ValueError("frac_train must lie in (0, 1)")
    if n_trials < 1:
        raise ValueError("n_trials must be positive")

    args = [(data, contents, hyper, frac_train, seed, t, stacking) for t in range(n_trials)]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            trials = list(pool.map(_trial_worker, args))
    else:
        trials = [_trial_worker(a) for a in args]

    per = {m: np.array([getattr(tr, m) for tr in trials]) for m in ("pcc", "srocc", "rmse")}
    return EvalReport(
        pcc=_finite_median(per["pcc"]),
        srocc=_finite_median(per["srocc"]),
        rmse=_finite_median(per["rmse"]),
        n_trials=n_trials,
        per_trial=tuple(trials),
    )


def _finite_median(vals):
    finite = vals[np.isfinite(vals)]
    return float(np.median(finite)) if finite.size else float("nan")


def _trial_worker(args):
    return _run_trial(*args)


def _run_trial(data, contents, hyper, frac_train, seed, t, stacking):
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 7_000_000 + t]))
    train_ids, test_ids = _split_contents(contents, frac_train, rng)
    train_set = data.subset(train_ids)
    test_set = data.subset(test_ids)
    model = train_ssqp(
        train_set, hyper, seed=int(rng.integers(0, 2**31 - 1)), stacking=stacking,
    )
    scores = np.array([model.predict_from_features(r.features) for r in test_set.rows])
    mos = np.array([r.mos for r in test_set.rows])
    try:
        fit = fit_logistic(scores, mos)
        mapped = fit.apply(scores)
        res = (pcc(mapped, mos), srocc(scores, mos), rmse(mapped, mos))
    except ValueError:
        res = (np.nan, np.nan, np.nan)
    return TrialResult(
        pcc=res[0], srocc=res[1], rmse=res[2],
        n_test=len(test_set), test_contents=tuple(test_ids),
    )

"""Purged walk-forward folds, randomized hyperparameter search, and metrics.

Folds are calendar intervals: an expanding training window, a purge strip
(the trailing days deleted from the training window), and a test month that
always lies strictly after it. The search scores one sampled point as its
mean test log-loss across folds and returns the argmin, with the full trial
log retained.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

logger = logging.getLogger(__name__)

DEFAULT_PURGE = pd.Timedelta(days=7)


# ---------------------------------------------------------------------------
# fold construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FoldBoundary:
    """Nominal (pre-purge) calendar limits of one fold."""

    train_start: pd.Timestamp
    train_end: pd.Timestamp
    test_start: pd.Timestamp
    test_end: pd.Timestamp

    def __post_init__(self):
        if not (self.train_start <= self.train_end < self.test_start <= self.test_end):
            raise ValueError(f"fold boundaries out of order: {self}")


@dataclass(frozen=True)
class Fold:
    """Effective (post-purge) date ranges of one walk-forward fold."""

    train_range: tuple[pd.Timestamp, pd.Timestamp]
    purge_range: tuple[pd.Timestamp, pd.Timestamp] | None
    test_range: tuple[pd.Timestamp, pd.Timestamp]

    def train_mask(self, index: pd.DatetimeIndex) -> np.ndarray:
        lo, hi = self.train_range
        return np.asarray((index >= lo) & (index <= hi))

    def test_mask(self, index: pd.DatetimeIndex) -> np.ndarray:
        lo, hi = self.test_range
        return np.asarray((index >= lo) & (index <= hi))

    def to_dict(self) -> dict:
        rng = lambda r: None if r is None else [str(r[0].date()), str(r[1].date())]
        return {
            "train": rng(self.train_range),
            "purge": rng(self.purge_range),
            "test": rng(self.test_range),
        }


@dataclass(frozen=True)
class FoldPlan:
    folds: list[Fold]
    purge: pd.Timedelta

    def __len__(self):
        return len(self.folds)

    def to_dict(self) -> dict:
        return {
            "purge_days": int(self.purge / pd.Timedelta(days=1)),
            "folds": [f.to_dict() for f in self.folds],
        }


def expanding_monthly_folds(
    train_start, first_test_month, n_folds: int
) -> list[FoldBoundary]:
    """Expanding-window monthly boundaries: each fold tests one calendar month
    and trains on everything from ``train_start`` up to the day before it."""
    train_start = pd.Timestamp(train_start)
    first = pd.Period(first_test_month, freq="M")
    out = []
    for k in range(n_folds):
        month = first + k
        test_start = month.to_timestamp(how="start")
        test_end = month.to_timestamp(how="end").normalize()
        out.append(
            FoldBoundary(
                train_start=train_start,
                train_end=test_start - pd.Timedelta(days=1),
                test_start=test_start,
                test_end=test_end,
            )
        )
    return out


def build_purged_folds(
    index: pd.DatetimeIndex,
    boundaries: list[FoldBoundary],
    purge: pd.Timedelta = DEFAULT_PURGE,
) -> FoldPlan:
    """Delete the trailing ``purge`` days of every training window and check
    the non-interference invariants against the actual index."""
    if purge < pd.Timedelta(0):
        raise ValueError("purge must be nonnegative")
    if not len(boundaries):
        raise ValueError("no fold boundaries given")
    boundaries = sorted(boundaries, key=lambda b: b.test_start)

    folds = []
    for b in boundaries:
        train_hi = b.train_end - purge
        train_rows = index[(index >= b.train_start) & (index <= train_hi)]
        purge_rows = index[(index > train_hi) & (index <= b.train_end)]
        test_rows = index[(index >= b.test_start) & (index <= b.test_end)]
        if len(train_rows) == 0:
            raise ValueError(f"fold has an empty training window after purging: {b}")
        if len(test_rows) == 0:
            raise ValueError(f"fold has an empty test window: {b}")
        fold = Fold(
            train_range=(train_rows[0], train_rows[-1]),
            purge_range=(purge_rows[0], purge_rows[-1]) if len(purge_rows) else None,
            test_range=(test_rows[0], test_rows[-1]),
        )
        if fold.purge_range is not None:
            if not (
                fold.train_range[1]
                < fold.purge_range[0]
                <= fold.purge_range[1]
                < fold.test_range[0]
            ):
                raise ValueError(f"fold ranges interleave: {fold}")
        elif not fold.train_range[1] < fold.test_range[0]:
            raise ValueError(f"training overlaps test: {fold}")
        folds.append(fold)

    for prev, nxt in zip(folds, folds[1:]):
        if nxt.test_range[0] <= prev.test_range[1]:
            raise ValueError("test ranges overlap across folds")
    return FoldPlan(folds=folds, purge=purge)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


LOG_LOSS_EPS = 1e-15


@dataclass(frozen=True)
class MetricsReport:
    auc: float | None
    accuracy: float
    precision: float
    recall: float
    f1: float
    log_loss: float
    window_id: str = ""

    def to_dict(self) -> dict:
        return {
            "window_id": self.window_id,
            "auc": self.auc,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "log_loss": self.log_loss,
        }


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def roc_auc(y_true: np.ndarray, scores: np.ndarray) -> float | None:
    """Rank-statistic AUC over all positive/negative pairs; ties count 1/2.

    Returns None when only one class is present.
    """
    y_true = np.asarray(y_true)
    scores = np.asarray(scores, dtype=np.float64)
    n_pos = int((y_true == 1).sum())
    n_neg = len(y_true) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = _average_ranks(scores)
    pos_rank_sum = ranks[y_true == 1].sum()
    return float((pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def log_loss(y_true: np.ndarray, proba: np.ndarray) -> float:
    p = np.clip(np.asarray(proba, dtype=np.float64), LOG_LOSS_EPS, 1.0 - LOG_LOSS_EPS)
    y = np.asarray(y_true, dtype=np.float64)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def evaluate(pred_proba, pred_label, y_true, window_id: str = "") -> MetricsReport:
    """Score one prediction set: rank AUC plus 0.5-threshold confusion metrics."""
    proba = np.asarray(pred_proba, dtype=np.float64)
    label = np.asarray(pred_label)
    y = np.asarray(y_true)
    if not (len(proba) == len(label) == len(y)) or len(y) == 0:
        raise ValueError("predictions and labels must be aligned and nonempty")

    tp = int(((label == 1) & (y == 1)).sum())
    fp = int(((label == 1) & (y == 0)).sum())
    fn = int(((label == 0) & (y == 1)).sum())
    tn = int(((label == 0) & (y == 0)).sum())
    accuracy = (tp + tn) / len(y)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return MetricsReport(
        auc=roc_auc(y, proba),
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        log_loss=log_loss(y, proba),
        window_id=window_id,
    )


# ---------------------------------------------------------------------------
# randomized hyperparameter search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialResult:
    index: int
    params: dict
    fold_losses: list
    score: float | None
    errors: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "trial": self.index,
            "params": {k: (v if not isinstance(v, np.generic) else v.item()) for k, v in self.params.items()},
            "fold_losses": self.fold_losses,
            "score": self.score,
            "errors": self.errors,
        }


@dataclass(frozen=True)
class SearchResult:
    best_params: dict
    best_score: float
    best_index: int
    trials: list[TrialResult]


def _trial_seed(seed: int, trial: int, fold: int) -> int:
    return int(np.random.SeedSequence([seed, trial, fold]).generate_state(1)[0])


def random_search(
    make_model,
    space,
    plan: FoldPlan,
    X: pd.DataFrame,
    y: pd.Series,
    n_iter: int = 100,
    seed: int = 0,
    n_jobs: int = 1,
) -> SearchResult:
    """Sample ``n_iter`` points, score each as mean fold test log-loss, argmin.

    ``make_model(params, seed)`` builds a fresh estimator. Per-trial RNG and
    per-(trial, fold) model seeds derive from the master seed alone, so the
    winner does not depend on evaluation order or parallel schedule. A failing
    fold is logged and skipped; a trial with no surviving folds is recorded as
    failed but is not fatal unless every trial fails.
    """
    if n_iter < 1:
        raise ValueError("n_iter must be >= 1")

    index = X.index
    masks = [(f.train_mask(index), f.test_mask(index)) for f in plan.folds]

    def run_trial(t: int) -> TrialResult:
        rng = np.random.default_rng([seed, t])
        params = space.sample(rng)
        losses, errors = [], []
        for f, (train_mask, test_mask) in enumerate(masks):
            try:
                model = make_model(params, seed=_trial_seed(seed, t, f))
                model.fit(X.loc[train_mask], y.loc[train_mask].to_numpy())
                proba = model.predict_proba(X.loc[test_mask])
                losses.append(log_loss(y.loc[test_mask].to_numpy(), proba))
            except Exception as exc:  # a bad sample must not kill the search
                losses.append(None)
                errors.append(f"fold {f}: {exc}")
        usable = [v for v in losses if v is not None]
        score = float(np.mean(usable)) if usable else None
        return TrialResult(index=t, params=params, fold_losses=losses, score=score, errors=errors)

    if n_jobs == 1:
        trials = [run_trial(t) for t in range(n_iter)]
    else:
        trials = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(run_trial)(t) for t in range(n_iter)
        )
    trials = sorted(trials, key=lambda tr: tr.index)

    scored = [tr for tr in trials if tr.score is not None]
    if not scored:
        raise RuntimeError("every search trial failed; see trial errors")
    failed = len(trials) - len(scored)
    if failed:
        logger.warning("random_search: %d/%d trials failed and were skipped", failed, len(trials))
    best = min(scored, key=lambda tr: (tr.score, tr.index))
    return SearchResult(
        best_params=best.params, best_score=best.score, best_index=best.index, trials=trials
    )

"""Partial-dependence feature importance, including the two-level combined
score for a stacked model.

A feature's partial dependence is the mean predicted probability as that
feature is forced to each grid value across all background rows. Importance
is the sample standard deviation of the PDP values for continuous features
and (max - min) / 4 for categorical ones (0/1 indicator columns count as
categorical). For a stack, the meta-learner's PDP over each level-1 column
scores every generalizer, those scores normalize into weights, and the
combined per-feature importance is the weight-averaged base-model importance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd

from stackcast.stacking import LevelOneData, MetaLearner


@dataclass(frozen=True)
class PartialDependence:
    feature: str
    grid: np.ndarray
    values: np.ndarray
    n_background: int
    kind: str  # "continuous" | "categorical"
    flagged: bool = False  # degenerate single-point grid

    def __post_init__(self):
        if ((self.values < 0) | (self.values > 1)).any():
            raise ValueError("PDP values must be probabilities")
        if len(self.grid) > 1 and not (np.diff(self.grid) > 0).all():
            raise ValueError("grid must be strictly increasing")


@dataclass(frozen=True)
class ImportanceScore:
    feature: str
    score: float
    kind: str
    model_id: str
    flagged: bool = False


def infer_kind(column: np.ndarray) -> str:
    values = np.unique(column)
    return "categorical" if np.isin(values, (0.0, 1.0)).all() else "continuous"


def partial_dependence(
    model,
    X: pd.DataFrame,
    feature: str,
    grid_size: int = 20,
    kind: str | None = None,
) -> PartialDependence:
    """Average model probability with ``feature`` forced to each grid value.

    Continuous grids are the distinct values of ``grid_size`` equally spaced
    quantiles of the observed column; categorical grids are the observed
    distinct values. A constant column degenerates to a flagged single-point
    grid.
    """
    if feature not in X.columns:
        raise KeyError(f"unknown feature {feature!r}")
    col = X[feature].to_numpy(dtype=np.float64)
    kind = kind or infer_kind(col)
    if kind == "categorical":
        grid = np.unique(col)
    else:
        grid = np.unique(np.quantile(col, np.linspace(0.0, 1.0, grid_size)))
    flagged = len(grid) == 1

    values = np.empty(len(grid))
    work = X.copy()
    for i, v in enumerate(grid):
        work[feature] = v
        values[i] = float(np.mean(model.predict_proba(work)))
    return PartialDependence(
        feature=feature, grid=grid, values=values, n_background=len(X),
        kind=kind, flagged=flagged,
    )


def importance_from_pdp(pdp: PartialDependence, kind: str | None = None) -> ImportanceScore:
    """Collapse a PDP curve to one nonnegative variability score."""
    kind = kind or pdp.kind
    if len(pdp.values) <= 1:
        return ImportanceScore(pdp.feature, 0.0, kind, model_id="", flagged=True)
    if kind == "categorical":
        score = float((pdp.values.max() - pdp.values.min()) / 4.0)
    else:
        score = float(np.std(pdp.values, ddof=1))
    return ImportanceScore(pdp.feature, score, kind, model_id="", flagged=pdp.flagged)


@dataclass(frozen=True)
class ImportanceReport:
    """Model weights plus per-model and combined per-feature scores."""

    generalizer_scores: dict
    weights: dict
    per_model: dict  # model name -> {feature -> score}
    combined: dict  # feature -> score

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for name in self.generalizer_scores:
            rows.append(
                {
                    "model": "stacked",
                    "feature": name,
                    "score": self.generalizer_scores[name],
                    "weight": self.weights[name],
                }
            )
        for name, scores in self.per_model.items():
            for feature, score in scores.items():
                rows.append(
                    {"model": name, "feature": feature, "score": score, "weight": self.weights[name]}
                )
        for feature, score in self.combined.items():
            rows.append({"model": "combined", "feature": feature, "score": score, "weight": 1.0})
        return pd.DataFrame(rows, columns=["model", "feature", "score", "weight"])

    @staticmethod
    def from_frame(frame: pd.DataFrame) -> "ImportanceReport":
        stacked = frame[frame["model"] == "stacked"]
        generalizer_scores = dict(zip(stacked["feature"], stacked["score"]))
        weights = dict(zip(stacked["feature"], stacked["weight"]))
        per_model = {}
        for name in weights:
            sub = frame[frame["model"] == name]
            per_model[name] = dict(zip(sub["feature"], sub["score"]))
        comb = frame[frame["model"] == "combined"]
        return ImportanceReport(
            generalizer_scores=generalizer_scores,
            weights=weights,
            per_model=per_model,
            combined=dict(zip(comb["feature"], comb["score"])),
        )


def model_weights(generalizer_scores: dict) -> dict:
    """Normalize generalizer scores into stack weights (uniform if all zero)."""
    total = float(sum(generalizer_scores.values()))
    if total <= 0.0:
        warnings.warn(
            "all generalizer importances are zero; falling back to uniform weights",
            stacklevel=2,
        )
        k = len(generalizer_scores)
        return {name: 1.0 / k for name in generalizer_scores}
    return {name: score / total for name, score in generalizer_scores.items()}


def combine_importances(weights: dict, per_model: dict) -> dict:
    """Weight-average per-model feature scores into the combined score."""
    features = None
    for scores in per_model.values():
        names = list(scores)
        if features is None:
            features = names
        elif set(names) != set(features):
            raise ValueError("per-model importances cover different features")
    combined = {}
    for feature in features or []:
        combined[feature] = float(
            sum(weights[name] * per_model[name][feature] for name in per_model)
        )
    return combined


def stacked_importance(
    meta: MetaLearner | None,
    models: list,
    level_one: LevelOneData | None,
    background: pd.DataFrame,
    names: list[str] | None = None,
    grid_size: int = 20,
) -> ImportanceReport:
    """The full two-level procedure.

    1. Score each generalizer by the meta-learner's PDP over its level-1
       column (categorical rule for hard 0/1 columns).
    2. Normalize those scores into weights.
    3. Score every frame feature per base model by PDP importance over the
       background rows.
    4. Combine: weighted average of the base-model scores.

    A single-model "stack" (no meta-learner) degenerates to weight 1 on that
    model, so the combined importance equals its importance exactly.
    """
    names = names if names is not None else [m.family for m in models]
    if len(names) != len(models) or len(set(names)) != len(models):
        raise ValueError("need one unique name per model")

    if len(models) == 1:
        generalizer_scores = {names[0]: 1.0}
        weights = {names[0]: 1.0}
    else:
        if meta is None or level_one is None:
            raise ValueError("a fitted meta-learner and level-1 data are required for K >= 2")
        if list(level_one.generalizer_names) != list(names):
            raise ValueError("level-1 columns do not match the model list")
        z_frame = level_one.to_frame().drop(columns="label")
        generalizer_scores = {}
        for name in names:
            pdp = partial_dependence(meta, z_frame, name, grid_size=grid_size)
            generalizer_scores[name] = importance_from_pdp(pdp).score
        weights = model_weights(generalizer_scores)

    per_model = {}
    for name, model in zip(names, models):
        scores = {}
        for feature in background.columns:
            pdp = partial_dependence(model, background, feature, grid_size=grid_size)
            scores[feature] = importance_from_pdp(pdp).score
        per_model[name] = scores

    combined = combine_importances(weights, per_model)
    return ImportanceReport(
        generalizer_scores=generalizer_scores,
        weights=weights,
        per_model=per_model,
        combined=combined,
    )

"""Shared estimator plumbing: input validation, thresholding, scaling."""

from __future__ import annotations

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator


class NotFittedError(RuntimeError):
    pass


class ConvergenceError(RuntimeError):
    """An iterative solver hit its cap without meeting its tolerance."""


def check_X_y(X, y):
    """Validate a training pair: finite 2-D X, binary y with both classes."""
    names = list(X.columns) if isinstance(X, pd.DataFrame) else None
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be 2-dimensional")
    y = np.asarray(y)
    if y.ndim != 1 or len(y) != len(X):
        raise ValueError("y must be 1-dimensional and aligned with X")
    if not np.isfinite(X).all():
        raise ValueError("X contains non-finite values")
    uniq = np.unique(y)
    if not np.isin(uniq, [0, 1]).all():
        raise ValueError("y must contain only 0/1 labels")
    if len(uniq) < 2:
        raise ValueError("training data must contain both classes")
    return X, y.astype(np.int64), names


class BinaryClassifierBase(BaseEstimator):
    """Binary classifiers: fit/predict_proba/predict with the 0.5 tie-to-1 rule.

    ``predict_proba`` returns the probability of the positive class as a 1-D
    array; ``predict`` is 1 exactly when that probability is >= 0.5.
    """

    family = ""

    def _start_fit(self, X, y):
        X, y, names = check_X_y(X, y)
        self.feature_names_in_ = names
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.array([0, 1])
        return X, y

    def _check_X(self, X):
        if not hasattr(self, "n_features_in_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted")
        if isinstance(X, pd.DataFrame):
            if self.feature_names_in_ is not None and list(X.columns) != self.feature_names_in_:
                raise ValueError(
                    "feature columns do not match the training columns "
                    f"(expected {self.feature_names_in_}, got {list(X.columns)})"
                )
            X = X.to_numpy(dtype=np.float64)
        else:
            X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"expected {self.n_features_in_} features, got {X.shape[1]}"
            )
        if not np.isfinite(X).all():
            raise ValueError("X contains non-finite values")
        return X

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int64)


class Standardizer:
    """Per-column centering/scaling; constant columns get unit scale."""

    def fit(self, X: np.ndarray) -> "Standardizer":
        self.mean_ = X.mean(axis=0)
        std = X.std(axis=0)
        self.scale_ = np.where(std > 0, std, 1.0)
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean_) / self.scale_

    def state(self) -> dict:
        return {"mean": self.mean_.tolist(), "scale": self.scale_.tolist()}

    @staticmethod
    def from_state(state: dict) -> "Standardizer":
        out = Standardizer()
        out.mean_ = np.asarray(state["mean"], dtype=np.float64)
        out.scale_ = np.asarray(state["scale"], dtype=np.float64)
        return out


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out

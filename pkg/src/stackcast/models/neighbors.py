"""K-nearest-neighbor vote classifier over standardized Euclidean distance."""

from __future__ import annotations

import numpy as np

from stackcast.models.base import BinaryClassifierBase, Standardizer


class KNNClassifier(BinaryClassifierBase):
    """Probability = positive fraction among the k nearest training rows.

    Features are standardized internally; distance ties break by training-row
    order so predictions are deterministic.
    """

    family = "knn"

    def __init__(self, k: int = 5):
        self.k = k

    def fit(self, X, y):
        X, y = self._start_fit(X, y)
        if not 1 <= self.k <= len(X):
            raise ValueError(f"k must be in [1, n_train]; got k={self.k}, n={len(X)}")
        self.scaler_ = Standardizer().fit(X)
        self.X_ = self.scaler_.transform(X)
        self.y_ = y
        return self

    def predict_proba(self, X):
        X = self.scaler_.transform(self._check_X(X))
        d2 = (
            (X**2).sum(axis=1)[:, None]
            + (self.X_**2).sum(axis=1)[None, :]
            - 2.0 * (X @ self.X_.T)
        )
        nearest = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        return self.y_[nearest].mean(axis=1)

    def _get_state(self):
        return {
            "scaler": self.scaler_.state(),
            "X": self.X_.tolist(),
            "y": self.y_.tolist(),
        }

    def _set_state(self, state):
        self.scaler_ = Standardizer.from_state(state["scaler"])
        self.X_ = np.asarray(state["X"])
        self.y_ = np.asarray(state["y"], dtype=np.int64)

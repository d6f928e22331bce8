"""Stacked generalization: level-1 data from base-model outputs and a small
neural meta-learner.

Level-1 rows are the base models' predictions over a window that lies
strictly after every base model's recorded training range (refused
otherwise). The meta-learner is a single tanh hidden layer (default width 6)
with a sigmoid output, trained by full-batch gradient descent on log-loss;
``hidden_width=0`` degrades to a plain logistic combination of the
generalizers, which is handy for testing and mirrors linear stacking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from stackcast.indicators.frame import FeatureFrame
from stackcast.models.base import BinaryClassifierBase, sigmoid


@dataclass(frozen=True)
class LevelOneData:
    """Matrix of generalizer outputs with aligned labels."""

    timestamps: pd.DatetimeIndex
    Z: np.ndarray
    y: np.ndarray
    generalizer_names: list[str]
    mode: str  # "hard" | "proba"

    def __post_init__(self):
        if self.Z.ndim != 2 or self.Z.shape[0] != len(self.timestamps):
            raise ValueError("Z must be (n_rows, n_generalizers) aligned with timestamps")
        if self.Z.shape[1] != len(self.generalizer_names):
            raise ValueError("one column per generalizer is required")
        if self.Z.shape[1] < 2:
            raise ValueError("stacking needs at least two generalizers")
        if len(set(self.generalizer_names)) != len(self.generalizer_names):
            raise ValueError("generalizer names must be unique")
        if self.mode not in ("hard", "proba"):
            raise ValueError("mode must be 'hard' or 'proba'")
        if self.mode == "hard":
            if not np.isin(self.Z, (0.0, 1.0)).all():
                raise ValueError("hard-mode entries must be 0/1")
        elif ((self.Z < 0) | (self.Z > 1)).any():
            raise ValueError("proba-mode entries must lie in [0, 1]")

    def to_frame(self) -> pd.DataFrame:
        out = pd.DataFrame(self.Z, index=self.timestamps, columns=self.generalizer_names)
        out["label"] = self.y
        return out

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "generalizer_names": list(self.generalizer_names),
            "timestamps": [str(t.date()) for t in self.timestamps],
            "Z": self.Z.tolist(),
            "y": self.y.tolist(),
        }

    @staticmethod
    def from_dict(doc: dict) -> "LevelOneData":
        return LevelOneData(
            timestamps=pd.DatetimeIndex(pd.to_datetime(doc["timestamps"]), name="timestamp"),
            Z=np.asarray(doc["Z"], dtype=np.float64),
            y=np.asarray(doc["y"], dtype=np.int64),
            generalizer_names=list(doc["generalizer_names"]),
            mode=doc["mode"],
        )


class LeakageError(RuntimeError):
    """A base model's training range overlaps the level-1 window."""


def build_level_one(
    models: list,
    frame: FeatureFrame,
    window: tuple,
    mode: str = "hard",
    names: list[str] | None = None,
) -> LevelOneData:
    """Predict every base model over a window to form the level-1 matrix."""
    start, end = pd.Timestamp(window[0]), pd.Timestamp(window[1])
    names = names if names is not None else [m.family for m in models]
    for name, model in zip(names, models):
        train_range = getattr(model, "train_range_", None)
        if train_range is None:
            raise LeakageError(f"model {name!r} has no recorded training range")
        if pd.Timestamp(train_range[1]) >= start:
            raise LeakageError(
                f"model {name!r} trained through {train_range[1]}, "
                f"overlapping the level-1 window starting {start.date()}"
            )
    sub = frame.window(start, end)
    if len(sub) == 0:
        raise ValueError("level-1 window selects no rows")
    columns = []
    for model in models:
        if mode == "hard":
            columns.append(model.predict(sub.features).astype(np.float64))
        else:
            columns.append(model.predict_proba(sub.features))
    return LevelOneData(
        timestamps=sub.index,
        Z=np.column_stack(columns),
        y=sub.labels.to_numpy(),
        generalizer_names=list(names),
        mode=mode,
    )


class MetaLearner(BinaryClassifierBase):
    """One-hidden-layer stacker trained by full-batch gradient descent."""

    family = "meta"

    def __init__(
        self,
        hidden_width: int = 6,
        step: float = 0.05,
        epochs: int = 5000,
        plateau_tol: float = 1e-8,
        seed: int = 0,
    ):
        self.hidden_width = hidden_width
        self.step = step
        self.epochs = epochs
        self.plateau_tol = plateau_tol
        self.seed = seed

    # -- parameter handling ---------------------------------------------------

    def _init_weights(self, d: int):
        rng = np.random.default_rng(self.seed)
        h = self.hidden_width
        if h > 0:
            lim1 = 1.0 / np.sqrt(d)
            lim2 = 1.0 / np.sqrt(h)
            self.w1_ = rng.uniform(-lim1, lim1, size=(d, h))
            self.b1_ = np.zeros(h)
            self.w2_ = rng.uniform(-lim2, lim2, size=h)
            self.b2_ = 0.0
        else:
            lim = 1.0 / np.sqrt(d)
            self.w1_ = np.zeros((d, 0))
            self.b1_ = np.zeros(0)
            self.w2_ = rng.uniform(-lim, lim, size=d)
            self.b2_ = 0.0

    def _logits(self, Z: np.ndarray) -> np.ndarray:
        if self.hidden_width > 0:
            hidden = np.tanh(Z @ self.w1_ + self.b1_)
            return hidden @ self.w2_ + self.b2_
        return Z @ self.w2_ + self.b2_

    def _loss_and_grads(self, Z: np.ndarray, y: np.ndarray):
        n = len(y)
        if self.hidden_width > 0:
            pre = Z @ self.w1_ + self.b1_
            hidden = np.tanh(pre)
            logits = hidden @ self.w2_ + self.b2_
        else:
            hidden = None
            logits = Z @ self.w2_ + self.b2_
        # log(1 + e^z) - y z, computed stably
        loss = float(np.mean(np.log1p(np.exp(-np.abs(logits))) + np.maximum(logits, 0) - y * logits))
        dz = (sigmoid(logits) - y) / n
        if self.hidden_width > 0:
            grads = {
                "w2": hidden.T @ dz,
                "b2": float(dz.sum()),
            }
            dh = np.outer(dz, self.w2_) * (1.0 - hidden**2)
            grads["w1"] = Z.T @ dh
            grads["b1"] = dh.sum(axis=0)
        else:
            grads = {"w2": Z.T @ dz, "b2": float(dz.sum()), "w1": np.zeros_like(self.w1_), "b1": np.zeros_like(self.b1_)}
        return loss, grads

    # -- estimator API ----------------------------------------------------------

    def fit(self, Z, y):
        Z, y = self._start_fit(Z, y)
        yf = y.astype(np.float64)
        self._init_weights(Z.shape[1])
        loss, _ = self._loss_and_grads(Z, yf)
        self.loss_path_ = [loss]
        for _ in range(self.epochs):
            loss, grads = self._loss_and_grads(Z, yf)
            if not np.isfinite(loss):
                raise RuntimeError(
                    f"meta-learner loss became non-finite at epoch {len(self.loss_path_)}; "
                    f"|w1|max={np.abs(self.w1_).max(initial=0):.3g} |w2|max={np.abs(self.w2_).max():.3g}"
                )
            self.w1_ -= self.step * grads["w1"]
            self.b1_ -= self.step * grads["b1"]
            self.w2_ -= self.step * grads["w2"]
            self.b2_ -= self.step * grads["b2"]
            new_loss, _ = self._loss_and_grads(Z, yf)
            self.loss_path_.append(new_loss)
            if abs(self.loss_path_[-2] - new_loss) < self.plateau_tol:
                break
        return self

    def predict_proba(self, Z):
        Z = self._check_X(Z)
        return sigmoid(self._logits(Z))

    def _get_state(self):
        return {
            "w1": self.w1_.tolist(),
            "b1": self.b1_.tolist(),
            "w2": self.w2_.tolist(),
            "b2": self.b2_,
            "loss_path": [float(v) for v in getattr(self, "loss_path_", [])],
        }

    def _set_state(self, state):
        self.w1_ = np.asarray(state["w1"], dtype=np.float64)
        if self.w1_.ndim == 1:
            self.w1_ = self.w1_.reshape(self.n_features_in_, 0)
        self.b1_ = np.asarray(state["b1"], dtype=np.float64)
        self.w2_ = np.asarray(state["w2"], dtype=np.float64)
        self.b2_ = float(state["b2"])
        self.loss_path_ = list(state.get("loss_path", []))


def train_meta(data: LevelOneData, width: int = 6, seed: int = 0, **kwargs) -> MetaLearner:
    """Fit the meta-learner on level-1 data (both classes required)."""
    if len(np.unique(data.y)) < 2:
        raise ValueError("level-1 training window must contain both classes")
    meta = MetaLearner(hidden_width=width, seed=seed, **kwargs)
    meta.fit(data.Z, data.y)
    meta.generalizer_names_ = list(data.generalizer_names)
    return meta


def predict_meta(meta: MetaLearner, Z) -> np.ndarray:
    """Forward pass over one or more level-1 rows."""
    return meta.predict_proba(np.atleast_2d(np.asarray(Z, dtype=np.float64)))

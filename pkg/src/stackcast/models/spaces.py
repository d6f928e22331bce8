"""Random-search hyperparameter spaces for every model family."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ParamRange:
    """One sampled dimension: uniform/log-uniform scalar, integer, or choice."""

    kind: str  # "int" | "float" | "logfloat" | "odd_int" | "choice"
    low: float | None = None
    high: float | None = None
    choices: tuple = ()

    def sample(self, rng: np.random.Generator):
        if self.kind == "int":
            return int(rng.integers(int(self.low), int(self.high) + 1))
        if self.kind == "odd_int":
            v = int(rng.integers(int(self.low), int(self.high) + 1))
            return v if v % 2 == 1 else v + 1
        if self.kind == "float":
            return float(rng.uniform(self.low, self.high))
        if self.kind == "logfloat":
            return float(np.exp(rng.uniform(np.log(self.low), np.log(self.high))))
        if self.kind == "choice":
            return self.choices[int(rng.integers(0, len(self.choices)))]
        raise ValueError(f"unknown param kind {self.kind!r}")

    def contains(self, value) -> bool:
        if self.kind == "choice":
            return value in self.choices
        lo, hi = self.low, self.high
        if self.kind == "odd_int":
            hi = hi + 1
        return lo <= value <= hi


@dataclass(frozen=True)
class HyperparamSpace:
    """Named ranges for one family; empty spaces sample to no overrides."""

    ranges: dict

    def sample(self, rng: np.random.Generator) -> dict:
        point = {name: r.sample(rng) for name, r in self.ranges.items()}
        for name, value in point.items():
            assert self.ranges[name].contains(value), (name, value)
        return point

    def __len__(self):
        return len(self.ranges)


_TREE_COMMON = {
    "max_depth": ParamRange("int", 2, 8),
    "min_child_weight": ParamRange("logfloat", 0.5, 8.0),
    "subsample": ParamRange("float", 0.5, 1.0),
    "colsample_bytree": ParamRange("float", 0.5, 1.0),
    "reg_alpha": ParamRange("logfloat", 1e-3, 10.0),
    "reg_lambda": ParamRange("logfloat", 1e-3, 10.0),
    "n_estimators": ParamRange("int", 50, 500),
    "learning_rate": ParamRange("logfloat", 0.01, 0.3),
}

DEFAULT_SPACES: dict[str, HyperparamSpace] = {
    "xgb": HyperparamSpace(dict(_TREE_COMMON)),
    "lgbm": HyperparamSpace(
        dict(
            _TREE_COMMON,
            num_leaves=ParamRange("int", 8, 64),
            subsample_freq=ParamRange("int", 1, 5),
        )
    ),
    "rf": HyperparamSpace(
        {
            "n_estimators": ParamRange("int", 50, 500),
            "max_depth": ParamRange("int", 4, 20),
            "min_samples_split": ParamRange("int", 2, 10),
            "min_samples_leaf": ParamRange("int", 1, 5),
        }
    ),
    "svm": HyperparamSpace(
        {
            "kernel": ParamRange("choice", choices=("rbf", "sigmoid", "linear")),
            "gamma": ParamRange("logfloat", 1e-3, 1.0),
            "cost": ParamRange("logfloat", 0.1, 100.0),
        }
    ),
    "knn": HyperparamSpace({"k": ParamRange("odd_int", 3, 31)}),
    "logit_enet": HyperparamSpace(
        {
            "alpha": ParamRange("float", 0.0, 1.0),
            "lam": ParamRange("logfloat", 1e-4, 1.0),
        }
    ),
    "nb": HyperparamSpace({}),
    "lda": HyperparamSpace({}),
    "qda": HyperparamSpace({}),
}

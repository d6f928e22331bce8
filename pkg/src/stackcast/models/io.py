"""Self-describing model files: family tag + hyperparams + fitted state.

Files are JSON with sorted keys so identical fits serialize to identical
bytes. Loading reconstructs the estimator exactly (same class, same params,
same fitted arrays).
"""

from __future__ import annotations

import json
from pathlib import Path

FORMAT_VERSION = 1


def _registry():
    from stackcast.models.gaussian import GaussianNBClassifier, LDAClassifier, QDAClassifier
    from stackcast.models.linear import ElasticNetLogisticClassifier
    from stackcast.models.neighbors import KNNClassifier
    from stackcast.models.svm import KernelSVMClassifier
    from stackcast.models.trees import GradientBoostingClassifier, RandomForestClassifier
    from stackcast.stacking import MetaLearner

    return {
        "xgb": GradientBoostingClassifier,
        "lgbm": GradientBoostingClassifier,
        "rf": RandomForestClassifier,
        "svm": KernelSVMClassifier,
        "knn": KNNClassifier,
        "logit_enet": ElasticNetLogisticClassifier,
        "nb": GaussianNBClassifier,
        "lda": LDAClassifier,
        "qda": QDAClassifier,
        "meta": MetaLearner,
    }


def model_to_dict(model) -> dict:
    params = model.get_params()
    if "categorical_features" in params:
        params["categorical_features"] = list(params["categorical_features"])
    doc = {
        "format_version": FORMAT_VERSION,
        "family": model.family,
        "hyperparams": params,
        "feature_names": getattr(model, "feature_names_in_", None),
        "n_features": getattr(model, "n_features_in_", None),
        "state": model._get_state(),
    }
    train_range = getattr(model, "train_range_", None)
    if train_range is not None:
        doc["train_range"] = [str(train_range[0]), str(train_range[1])]
    return doc


def model_from_dict(doc: dict):
    family = doc["family"]
    cls = _registry()[family]
    params = dict(doc["hyperparams"])
    if "categorical_features" in params:
        params["categorical_features"] = tuple(params["categorical_features"])
    model = cls(**params)
    model.feature_names_in_ = doc["feature_names"]
    model.n_features_in_ = doc["n_features"]
    model._set_state(doc["state"])
    if "train_range" in doc:
        model.train_range_ = tuple(doc["train_range"])
    return model


def save_model(model, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), sort_keys=True))


def load_model(path):
    return model_from_dict(json.loads(Path(path).read_text()))

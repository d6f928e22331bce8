"""The level-0 classifier zoo: one fit/predict_proba/predict interface over
six discriminative and three generative families, all implemented in-repo."""

from stackcast.models.base import (
    BinaryClassifierBase,
    ConvergenceError,
    NotFittedError,
    check_X_y,
)
from stackcast.models.gaussian import GaussianNBClassifier, LDAClassifier, QDAClassifier
from stackcast.models.io import load_model, model_from_dict, model_to_dict, save_model
from stackcast.models.linear import ElasticNetLogisticClassifier
from stackcast.models.neighbors import KNNClassifier
from stackcast.models.spaces import DEFAULT_SPACES, HyperparamSpace, ParamRange
from stackcast.models.svm import KernelSVMClassifier
from stackcast.models.trees import GradientBoostingClassifier, RandomForestClassifier

FAMILY_ORDER = ("xgb", "svm", "knn", "lgbm", "rf", "logit_enet", "nb", "lda", "qda")


def make_model(family: str, params: dict | None = None, seed: int | None = None):
    """Instantiate one family with optional hyperparameter overrides."""
    params = dict(params or {})
    if family == "xgb":
        model = GradientBoostingClassifier(splitter="exact", **params)
    elif family == "lgbm":
        model = GradientBoostingClassifier(splitter="hist", **params)
    elif family == "rf":
        model = RandomForestClassifier(**params)
    elif family == "svm":
        model = KernelSVMClassifier(**params)
    elif family == "knn":
        model = KNNClassifier(**params)
    elif family == "logit_enet":
        model = ElasticNetLogisticClassifier(**params)
    elif family == "nb":
        model = GaussianNBClassifier(**params)
    elif family == "lda":
        model = LDAClassifier(**params)
    elif family == "qda":
        model = QDAClassifier(**params)
    else:
        raise ValueError(f"unknown model family {family!r}")
    if seed is not None and "seed" in model.get_params():
        model.set_params(seed=int(seed))
    return model


__all__ = [
    "BinaryClassifierBase",
    "ConvergenceError",
    "NotFittedError",
    "check_X_y",
    "GaussianNBClassifier",
    "LDAClassifier",
    "QDAClassifier",
    "ElasticNetLogisticClassifier",
    "KNNClassifier",
    "KernelSVMClassifier",
    "GradientBoostingClassifier",
    "RandomForestClassifier",
    "DEFAULT_SPACES",
    "HyperparamSpace",
    "ParamRange",
    "FAMILY_ORDER",
    "make_model",
    "save_model",
    "load_model",
    "model_to_dict",
    "model_from_dict",
]

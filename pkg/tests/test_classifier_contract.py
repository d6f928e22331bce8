"""Uniform-interface checks that every model family must satisfy."""

import json

import numpy as np
import pandas as pd
import pytest

from stackcast.models import (
    FAMILY_ORDER,
    KNNClassifier,
    load_model,
    make_model,
    model_to_dict,
    save_model,
)
from tests.conftest import gaussian_blobs

FAST_PARAMS = {
    "xgb": {"n_estimators": 15},
    "lgbm": {"n_estimators": 15},
    "rf": {"n_estimators": 15},
    "svm": {"kernel": "rbf", "gamma": 0.5, "cost": 10.0},
    "knn": {"k": 5},
    "logit_enet": {"alpha": 0.5, "lam": 1e-3},
    "nb": {},
    "lda": {},
    "qda": {},
}


def _fit(family, X, y, seed=0):
    return make_model(family, FAST_PARAMS[family], seed=seed).fit(X, y)


@pytest.fixture(scope="module")
def blobs():
    X, y = gaussian_blobs(n=240, seed=3)
    cols = [f"f{i}" for i in range(X.shape[1])]
    return pd.DataFrame(X, columns=cols), y


@pytest.mark.parametrize("family", FAMILY_ORDER)
class TestContract:
    def test_proba_bounds_and_threshold_rule(self, family, blobs):
        X, y = blobs
        model = _fit(family, X, y)
        proba = model.predict_proba(X)
        assert np.isfinite(proba).all()
        assert ((proba >= 0) & (proba <= 1)).all()
        labels = model.predict(X)
        np.testing.assert_array_equal(labels, (proba >= 0.5).astype(int))

    def test_permuted_columns_rejected(self, family, blobs):
        X, y = blobs
        model = _fit(family, X, y)
        permuted = X[list(X.columns[::-1])]
        with pytest.raises(ValueError, match="columns"):
            model.predict_proba(permuted)

    def test_deterministic_under_fixed_seed(self, family, blobs):
        X, y = blobs
        a = json.dumps(model_to_dict(_fit(family, X, y, seed=11)), sort_keys=True)
        b = json.dumps(model_to_dict(_fit(family, X, y, seed=11)), sort_keys=True)
        assert a == b

    def test_serialization_round_trip(self, family, blobs, tmp_path):
        X, y = blobs
        model = _fit(family, X, y)
        model.train_range_ = (str(pd.Timestamp("2020-01-01")), str(pd.Timestamp("2020-06-30")))
        path = tmp_path / f"{family}.json"
        save_model(model, path)
        back = load_model(path)
        np.testing.assert_array_equal(back.predict_proba(X), model.predict_proba(X))
        assert back.train_range_ == model.train_range_
        assert back.feature_names_in_ == list(X.columns)

    def test_single_class_rejected(self, family, blobs):
        X, _ = blobs
        with pytest.raises(ValueError, match="both classes"):
            _fit(family, X, np.ones(len(X), dtype=int))

    def test_non_finite_rejected(self, family, blobs):
        X, y = blobs
        bad = X.copy()
        bad.iloc[0, 0] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            _fit(family, bad, y)


@pytest.mark.parametrize("family", ["knn", "svm", "logit_enet"])
def test_standardization_invariance(family, blobs):
    """Affine rescaling of a column must not change hard labels."""
    X, y = blobs
    model = _fit(family, X, y)
    rescaled = X.copy()
    rescaled["f0"] = rescaled["f0"] * 250.0 - 17.0
    other = make_model(family, FAST_PARAMS[family], seed=0).fit(rescaled, y)
    np.testing.assert_array_equal(model.predict(X), other.predict(rescaled))


def test_tie_probability_maps_to_one():
    X = pd.DataFrame({"a": [0.0, 1.0]})
    y = np.array([0, 1])
    model = KNNClassifier(k=2).fit(X, y)
    proba = model.predict_proba(pd.DataFrame({"a": [0.5]}))
    assert proba[0] == pytest.approx(0.5)
    assert model.predict(pd.DataFrame({"a": [0.5]}))[0] == 1

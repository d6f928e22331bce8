"""Generative Gaussian classifiers: naive Bayes, linear and quadratic
discriminant analysis.

All three fit class-conditional Gaussians plus empirical priors and score in
log space; posteriors for the two classes are normalized so they sum to one.
"""

from __future__ import annotations

import numpy as np

from stackcast.models.base import BinaryClassifierBase

LOG_2PI = np.log(2.0 * np.pi)


class GaussianNBClassifier(BinaryClassifierBase):
    """Per-feature independent Gaussians given the class.

    Class-conditional variances are floored at ``var_floor`` times the overall
    feature variance (plus a tiny absolute floor) so single-valued features
    cannot produce degenerate densities.
    """

    family = "nb"

    def __init__(self, var_floor: float = 1e-9):
        self.var_floor = var_floor

    def fit(self, X, y):
        X, y = self._start_fit(X, y)
        overall_var = X.var(axis=0)
        floor = self.var_floor * overall_var + 1e-12
        self.theta_ = np.empty((2, X.shape[1]))
        self.var_ = np.empty((2, X.shape[1]))
        self.log_prior_ = np.empty(2)
        for k in (0, 1):
            rows = X[y == k]
            self.theta_[k] = rows.mean(axis=0)
            self.var_[k] = np.maximum(rows.var(axis=0), floor)
            self.log_prior_[k] = np.log(len(rows) / len(X))
        return self

    def _joint_log_likelihood(self, X):
        jll = np.empty((len(X), 2))
        for k in (0, 1):
            z = (X - self.theta_[k]) ** 2 / self.var_[k]
            jll[:, k] = self.log_prior_[k] - 0.5 * (
                np.sum(np.log(self.var_[k])) + X.shape[1] * LOG_2PI + z.sum(axis=1)
            )
        return jll

    def predict_proba(self, X):
        X = self._check_X(X)
        jll = self._joint_log_likelihood(X)
        m = jll.max(axis=1, keepdims=True)
        w = np.exp(jll - m)
        return w[:, 1] / w.sum(axis=1)

    def _get_state(self):
        return {
            "theta": self.theta_.tolist(),
            "var": self.var_.tolist(),
            "log_prior": self.log_prior_.tolist(),
        }

    def _set_state(self, state):
        self.theta_ = np.asarray(state["theta"])
        self.var_ = np.asarray(state["var"])
        self.log_prior_ = np.asarray(state["log_prior"])


class _DiscriminantBase(BinaryClassifierBase):
    """Shared machinery for LDA/QDA: ridge-stabilized covariances and the
    two-class quadratic decision statistic."""

    def __init__(self, ridge: float = 1e-6):
        self.ridge = ridge

    def _fit_gaussians(self, X, y, pooled: bool):
        p = X.shape[1]
        self.means_ = np.stack([X[y == k].mean(axis=0) for k in (0, 1)])
        self.log_prior_ = np.array([np.log((y == k).mean()) for k in (0, 1)])
        if pooled:
            scatter = np.zeros((p, p))
            for k in (0, 1):
                d = X[y == k] - self.means_[k]
                scatter += d.T @ d
            cov = scatter / max(len(X) - 2, 1)
            covs = np.stack([cov, cov])
        else:
            covs = np.stack(
                [np.atleast_2d(np.cov(X[y == k], rowvar=False, ddof=1)) for k in (0, 1)]
            )
        # ridge keeps near-singular covariances invertible on small frames
        for k in (0, 1):
            covs[k] = covs[k] + np.eye(p) * (self.ridge * np.trace(covs[k]) / p + 1e-300)
        self.covariances_ = covs
        self.precisions_ = np.stack([np.linalg.inv(covs[k]) for k in (0, 1)])
        self.log_det_ = np.array([np.linalg.slogdet(covs[k])[1] for k in (0, 1)])

    def decision_statistic(self, X) -> np.ndarray:
        """Mahalanobis/log-det contrast: positive favors class 1."""
        X = self._check_X(X)
        q = []
        for k in (0, 1):
            d = X - self.means_[k]
            q.append(np.einsum("ij,jk,ik->i", d, self.precisions_[k], d))
        return (q[0] + self.log_det_[0]) - (q[1] + self.log_det_[1])

    @property
    def decision_threshold(self) -> float:
        """Prior-ratio threshold the statistic is compared against."""
        return 2.0 * (self.log_prior_[0] - self.log_prior_[1])

    def predict_proba(self, X):
        X = self._check_X(X)
        log_post = np.empty((len(X), 2))
        for k in (0, 1):
            d = X - self.means_[k]
            q = np.einsum("ij,jk,ik->i", d, self.precisions_[k], d)
            log_post[:, k] = self.log_prior_[k] - 0.5 * (q + self.log_det_[k])
        m = log_post.max(axis=1, keepdims=True)
        w = np.exp(log_post - m)
        return w[:, 1] / w.sum(axis=1)

    def _get_state(self):
        return {
            "means": self.means_.tolist(),
            "covariances": self.covariances_.tolist(),
            "log_prior": self.log_prior_.tolist(),
        }

    def _set_state(self, state):
        self.means_ = np.asarray(state["means"])
        self.covariances_ = np.asarray(state["covariances"])
        self.log_prior_ = np.asarray(state["log_prior"])
        self.precisions_ = np.stack([np.linalg.inv(c) for c in self.covariances_])
        self.log_det_ = np.array([np.linalg.slogdet(c)[1] for c in self.covariances_])


class LDAClassifier(_DiscriminantBase):
    """Pooled-covariance discriminant."""

    family = "lda"

    def fit(self, X, y):
        X, y = self._start_fit(X, y)
        self._fit_gaussians(X, y, pooled=True)
        return self


class QDAClassifier(_DiscriminantBase):
    """Per-class-covariance discriminant."""

    family = "qda"

    def fit(self, X, y):
        X, y = self._start_fit(X, y)
        self._fit_gaussians(X, y, pooled=False)
        return self

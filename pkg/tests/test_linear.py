import numpy as np
import pytest

from stackcast.models import ElasticNetLogisticClassifier
from stackcast.models.base import sigmoid


def _logistic_data(n=400, p=4, seed=0):
    """Non-separable logistic data so the unregularized MLE is finite."""
    rng = np.random.default_rng(seed)
    X = rng.normal(0, 1, (n, p))
    beta = np.resize([1.0, -0.8, 0.5, 0.0], p)
    eta = X @ beta + 0.3
    y = (rng.random(n) < sigmoid(eta)).astype(int)
    return X, y


def newton_mle_oracle(X, y, max_iter=200, tol=1e-12):
    """Damped-step Newton fit of the unregularized logistic MLE."""
    n, p = X.shape
    Xb = np.column_stack([np.ones(n), X])
    beta = np.zeros(p + 1)

    def nll(b):
        eta = Xb @ b
        return float(np.sum(np.log1p(np.exp(-np.abs(eta))) + np.maximum(eta, 0) - y * eta))

    current = nll(beta)
    for _ in range(max_iter):
        mu = sigmoid(Xb @ beta)
        grad = Xb.T @ (mu - y)
        W = mu * (1 - mu)
        hess = Xb.T @ (Xb * W[:, None]) + 1e-12 * np.eye(p + 1)
        step = np.linalg.solve(hess, grad)
        scale = 1.0
        while scale > 1e-8:
            candidate = beta - scale * step
            value = nll(candidate)
            if value <= current:
                beta, current = candidate, value
                break
            scale /= 2
        if np.abs(step).max() * scale < tol:
            break
    return beta[0], beta[1:]


class TestElasticNetLogit:
    def test_lambda_zero_matches_mle_oracle(self):
        X, y = _logistic_data()
        model = ElasticNetLogisticClassifier(alpha=0.5, lam=0.0, tol=1e-12).fit(X, y)
        intercept, coef = newton_mle_oracle(X, y)
        assert np.abs(model.coef_ - coef).max() < 1e-4
        assert abs(model.intercept_ - intercept) < 1e-4

    def test_pure_l1_large_lambda_zeroes_coefficients(self):
        X, y = _logistic_data(seed=1)
        model = ElasticNetLogisticClassifier(alpha=1.0, lam=50.0).fit(X, y)
        np.testing.assert_array_equal(model.coef_, np.zeros(X.shape[1]))
        assert model.intercept_ != 0.0  # intercept is unpenalized

    def test_objective_monotone_across_sweeps(self):
        X, y = _logistic_data(seed=2)
        model = ElasticNetLogisticClassifier(alpha=0.3, lam=1e-2).fit(X, y)
        path = np.asarray(model.objective_path_)
        assert (np.diff(path) <= 1e-10).all()

    def test_sparsity_increases_with_lambda(self):
        X, y = _logistic_data(seed=3, p=8)
        small = ElasticNetLogisticClassifier(alpha=1.0, lam=1e-4).fit(X, y)
        large = ElasticNetLogisticClassifier(alpha=1.0, lam=0.2).fit(X, y)
        assert (large.coef_ == 0).sum() >= (small.coef_ == 0).sum()

    @pytest.mark.parametrize("alpha,lam", [(-0.1, 0.1), (1.5, 0.1), (0.5, -1.0)])
    def test_bad_penalty_config_rejected(self, alpha, lam):
        X, y = _logistic_data(seed=4)
        with pytest.raises(ValueError):
            ElasticNetLogisticClassifier(alpha=alpha, lam=lam).fit(X, y)

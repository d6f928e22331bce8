import numpy as np
import pytest

from stackcast.models import KernelSVMClassifier
from stackcast.models.base import ConvergenceError


def qp_dual_oracle(K, y_pm, C):
    """High-precision dense QP solve of the SVM dual (independent oracle)."""
    import cvxopt

    n = len(y_pm)
    Q = (y_pm[:, None] * y_pm[None, :]) * K + 1e-10 * np.eye(n)
    P = cvxopt.matrix(Q)
    q = cvxopt.matrix(-np.ones(n))
    G = cvxopt.matrix(np.vstack([-np.eye(n), np.eye(n)]))
    h = cvxopt.matrix(np.concatenate([np.zeros(n), np.full(n, C)]))
    A = cvxopt.matrix(y_pm.reshape(1, -1))
    b = cvxopt.matrix(np.zeros(1))
    cvxopt.solvers.options.update(
        {"show_progress": False, "abstol": 1e-12, "reltol": 1e-12, "feastol": 1e-12}
    )
    sol = cvxopt.solvers.qp(P, q, G, h, A, b)
    alpha = np.asarray(sol["x"]).ravel()
    return float(alpha.sum() - 0.5 * alpha @ Q @ alpha), alpha


class TestSVM:
    def test_two_points_midpoint_hyperplane(self):
        X = np.array([[0.0, 0.0], [2.0, 0.0]])
        y = np.array([0, 1])
        model = KernelSVMClassifier(kernel="linear", cost=100.0).fit(X, y)
        assert model.decision_function(np.array([[1.0, 0.0]]))[0] == pytest.approx(0.0, abs=1e-8)
        assert len(model.support_) == 2  # both points are support vectors
        assert (model.alpha_ > 0).all()
        np.testing.assert_array_equal(model.predict(X), y)

    def test_separable_large_cost_training_accuracy(self):
        rng = np.random.default_rng(0)
        X = np.vstack([rng.normal(0, 0.5, (60, 2)), rng.normal(4, 0.5, (60, 2))])
        y = np.r_[np.zeros(60, dtype=int), np.ones(60, dtype=int)]
        model = KernelSVMClassifier(kernel="linear", cost=1000.0).fit(X, y)
        assert (model.predict(X) == y).mean() == 1.0

    @pytest.mark.parametrize("kernel,gamma", [("linear", 0.0), ("rbf", 0.7)])
    def test_dual_objective_matches_qp_oracle_on_tiny_instance(self, kernel, gamma):
        rng = np.random.default_rng(1)
        n = 18
        X = rng.normal(0, 1, (n, 3))
        y = (X[:, 0] + 0.7 * rng.normal(size=n) > 0).astype(int)
        y[:2] = [0, 1]
        C = 2.5
        model = KernelSVMClassifier(kernel=kernel, gamma=gamma, cost=C, tol=1e-8).fit(X, y)

        Z = model.scaler_.transform(X)
        K = model._kernel_matrix(Z, Z)
        y_pm = np.where(y == 1, 1.0, -1.0)
        oracle_obj, _ = qp_dual_oracle(K, y_pm, C)
        assert model.dual_objective_ == pytest.approx(oracle_obj, abs=1e-6)

    def test_dual_feasibility_and_kkt_gap(self):
        rng = np.random.default_rng(2)
        X = rng.normal(0, 1, (120, 4))
        y = (X[:, 0] - X[:, 1] + 0.5 * rng.normal(size=120) > 0).astype(int)
        y[:2] = [0, 1]
        C = 5.0
        model = KernelSVMClassifier(kernel="rbf", gamma=0.3, cost=C).fit(X, y)
        assert (model.alpha_ >= -1e-12).all()
        assert (model.alpha_ <= C + 1e-12).all()
        y_pm = np.where(y == 1, 1.0, -1.0)
        assert abs(float(model.alpha_ @ y_pm)) < 1e-9
        assert model.kkt_gap_ < 1e-4

    def test_sigmoid_kernel_warns_non_psd(self):
        rng = np.random.default_rng(3)
        X = rng.normal(0, 1, (40, 2))
        y = (X[:, 0] > 0).astype(int)
        y[:2] = [0, 1]
        with pytest.warns(UserWarning, match="positive semidefinite"):
            KernelSVMClassifier(kernel="sigmoid", gamma=0.1).fit(X, y)

    def test_iteration_cap_reported(self):
        rng = np.random.default_rng(4)
        X = rng.normal(0, 1, (80, 2))
        y = (rng.random(80) < 0.5).astype(int)
        y[:2] = [0, 1]
        with pytest.raises(ConvergenceError, match="KKT gap"):
            KernelSVMClassifier(kernel="rbf", gamma=1.0, cost=10.0, max_iter=3).fit(X, y)

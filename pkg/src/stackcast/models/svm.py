"""Soft-margin kernel SVM trained by sequential minimal optimization.

The dual problem  min 0.5 a'Qa - 1'a  s.t.  y'a = 0, 0 <= a <= C  is solved
with maximal-violating-pair working-set selection; the reported KKT gap is
the final violation  max_{I_up}(-y g) - min_{I_low}(-y g). Probabilities come
from a sigmoid fit on the training margins.
"""

from __future__ import annotations

import warnings

import numpy as np
from numba import njit

from stackcast.models.base import (
    BinaryClassifierBase,
    ConvergenceError,
    Standardizer,
    sigmoid,
)


@njit(cache=True)
def _smo(K, y, C, tol, max_iter):
    n = y.shape[0]
    alpha = np.zeros(n)
    grad = -np.ones(n)
    gap = np.inf
    it = 0
    while it < max_iter:
        m_val = -1e300
        M_val = 1e300
        i = -1
        j = -1
        for t in range(n):
            v = -y[t] * grad[t]
            if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                if v > m_val:
                    m_val = v
                    i = t
            if (y[t] < 0 and alpha[t] < C) or (y[t] > 0 and alpha[t] > 0):
                if v < M_val:
                    M_val = v
                    j = t
        gap = m_val - M_val
        if i < 0 or j < 0 or gap < tol:
            break
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if eta <= 0.0:
            eta = 1e-12
        lam = gap / eta
        # box caps along the direction (d alpha_i, d alpha_j) = (+y_i, -y_j) * lam
        cap_i = C - alpha[i] if y[i] > 0 else alpha[i]
        cap_j = alpha[j] if y[j] > 0 else C - alpha[j]
        lam = min(lam, min(cap_i, cap_j))
        alpha[i] += y[i] * lam
        alpha[j] -= y[j] * lam
        for t in range(n):
            grad[t] += lam * y[t] * (K[t, i] - K[t, j])
        it += 1

    # bias from the final violation interval midpoint
    b = 0.0
    if i >= 0 and j >= 0:
        b = (m_val + M_val) / 2.0
    return alpha, b, gap, it


def _platt_fit(f, y, max_iter=100, min_step=1e-10, ridge=1e-12):
    """Newton fit of P(y=1|f) = 1 / (1 + exp(A f + B)) on training margins."""
    prior1 = float(np.sum(y == 1))
    prior0 = float(len(y) - prior1)
    hi = (prior1 + 1.0) / (prior1 + 2.0)
    lo = 1.0 / (prior0 + 2.0)
    t = np.where(y == 1, hi, lo)

    def objective(A, B):
        z = A * f + B
        return float(
            np.sum(np.where(z >= 0, t * z + np.log1p(np.exp(-z)), (t - 1) * z + np.log1p(np.exp(z))))
        )

    A, B = 0.0, np.log((prior0 + 1.0) / (prior1 + 1.0))
    fval = objective(A, B)
    for _ in range(max_iter):
        z = A * f + B
        p = sigmoid(-z)
        q = 1.0 - p
        d2 = p * q
        h11 = float(np.sum(f * f * d2)) + ridge
        h22 = float(np.sum(d2)) + ridge
        h21 = float(np.sum(f * d2))
        d1 = t - p
        g1 = float(np.sum(f * d1))
        g2 = float(np.sum(d1))
        if abs(g1) < 1e-5 and abs(g2) < 1e-5:
            break
        det = h11 * h22 - h21 * h21
        dA = -(h22 * g1 - h21 * g2) / det
        dB = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * dA + g2 * dB
        step = 1.0
        while step >= min_step:
            nA, nB = A + step * dA, B + step * dB
            nf = objective(nA, nB)
            if nf < fval + 1e-4 * step * gd:
                A, B, fval = nA, nB, nf
                break
            step /= 2.0
        else:
            break
    return A, B


class KernelSVMClassifier(BinaryClassifierBase):
    family = "svm"

    def __init__(
        self,
        kernel: str = "rbf",
        gamma: float = 0.1,
        cost: float = 1.0,
        coef0: float = 0.0,
        tol: float = 1e-6,
        max_iter: int = 500_000,
    ):
        self.kernel = kernel
        self.gamma = gamma
        self.cost = cost
        self.coef0 = coef0
        self.tol = tol
        self.max_iter = max_iter

    def _kernel_matrix(self, A, B):
        if self.kernel == "linear":
            return A @ B.T
        if self.kernel == "rbf":
            d2 = (
                np.sum(A**2, axis=1)[:, None]
                + np.sum(B**2, axis=1)[None, :]
                - 2.0 * (A @ B.T)
            )
            return np.exp(-self.gamma * np.maximum(d2, 0.0))
        if self.kernel == "sigmoid":
            return np.tanh(self.gamma * (A @ B.T) + self.coef0)
        raise ValueError(f"unknown kernel {self.kernel!r}")

    def fit(self, X, y):
        X, y = self._start_fit(X, y)
        if self.kernel == "sigmoid":
            warnings.warn(
                "sigmoid kernel is not positive semidefinite; the dual solve "
                "may be ill-conditioned",
                stacklevel=2,
            )
        self.scaler_ = Standardizer().fit(X)
        Z = self.scaler_.transform(X)
        ypm = np.where(y == 1, 1.0, -1.0)
        K = self._kernel_matrix(Z, Z)

        alpha, b, gap, iters = _smo(K, ypm, float(self.cost), float(self.tol), self.max_iter)
        if gap >= self.tol:
            raise ConvergenceError(
                f"SMO stopped after {iters} iterations with KKT gap {gap:.3e} >= tol"
            )
        self.kkt_gap_ = float(gap)
        self.n_iter_ = int(iters)
        self.dual_objective_ = float(alpha.sum() - 0.5 * (alpha * ypm) @ K @ (alpha * ypm))
        self.intercept_ = float(b)
        self.alpha_ = alpha

        sv = alpha > 1e-12
        self.support_ = np.flatnonzero(sv)
        self.support_vectors_ = Z[sv]
        self.dual_coef_ = alpha[sv] * ypm[sv]

        margins = K @ (alpha * ypm) + b
        self.platt_a_, self.platt_b_ = _platt_fit(margins, y)
        return self

    def decision_function(self, X):
        Z = self.scaler_.transform(self._check_X(X))
        K = self._kernel_matrix(Z, self.support_vectors_)
        return K @ self.dual_coef_ + self.intercept_

    def predict_proba(self, X):
        f = self.decision_function(X)
        return sigmoid(-(self.platt_a_ * f + self.platt_b_))

    def _get_state(self):
        return {
            "scaler": self.scaler_.state(),
            "support_vectors": self.support_vectors_.tolist(),
            "dual_coef": self.dual_coef_.tolist(),
            "intercept": self.intercept_,
            "platt": [self.platt_a_, self.platt_b_],
            "kkt_gap": self.kkt_gap_,
            "dual_objective": self.dual_objective_,
        }

    def _set_state(self, state):
        self.scaler_ = Standardizer.from_state(state["scaler"])
        self.support_vectors_ = np.asarray(state["support_vectors"], dtype=np.float64)
        if self.support_vectors_.ndim == 1:
            self.support_vectors_ = self.support_vectors_.reshape(0, len(self.scaler_.mean_))
        self.dual_coef_ = np.asarray(state["dual_coef"], dtype=np.float64)
        self.intercept_ = float(state["intercept"])
        self.platt_a_, self.platt_b_ = (float(v) for v in state["platt"])
        self.kkt_gap_ = float(state["kkt_gap"])
        self.dual_objective_ = float(state["dual_objective"])

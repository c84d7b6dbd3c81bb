"""Kernel SVM trained by mini-batch Pegasos, with a Platt-style probability map."""
from __future__ import annotations

import numpy as np

from .base import Model, class_weights, register, require_two_classes

KERNELS = ("linear", "poly", "rbf", "sigmoid")
PLATT_ITERATIONS = 50


def kernel_matrix(kind, A, B, gamma=1.0, degree=3, coef0=0.0):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if kind == "linear":
        return A @ B.T
    if kind == "poly":
        return (gamma * (A @ B.T) + coef0) ** int(degree)
    if kind == "rbf":
        sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * (A @ B.T)
        return np.exp(-gamma * np.maximum(sq, 0.0))
    if kind == "sigmoid":
        return np.tanh(gamma * (A @ B.T) + coef0)
    raise ValueError(f"unknown kernel {kind!r}")


def kernel_eval(kind, x, z, gamma=1.0, degree=3, coef0=0.0) -> float:
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if kind == "rbf":
        d = x - z
        return float(np.exp(-gamma * (d @ d)))
    return float(kernel_matrix(kind, x, z, gamma, degree, coef0)[0, 0])


def resolve_gamma(gamma, X) -> float:
    X = np.asarray(X, dtype=float)
    if gamma == "auto":
        return 1.0 / X.shape[1]
    if gamma == "scale":
        var = X.var()
        return 1.0 / (X.shape[1] * var) if var > 0 else 1.0
    return float(gamma)


def fit_platt(f, y, iterations=PLATT_ITERATIONS):
    """Fit p = sigmoid(a f + b) by Newton steps on Platt's smoothed targets; a stays > 0."""
    f = np.asarray(f, dtype=float)
    y = np.asarray(y).astype(int)
    n_pos, n_neg = int(y.sum()), int((1 - y).sum())
    t = np.where(y == 1, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))
    def objective(a, b):
        z = a * f + b
        return float(np.sum(np.logaddexp(0.0, z) - t * z))

    a, b = 0.0, float(np.log((n_pos + 1.0) / (n_neg + 1.0)))
    current = objective(a, b)
    for _ in range(iterations):
        p = np.exp(-np.logaddexp(0.0, -(a * f + b)))
        r = p - t
        s = p * (1 - p)
        g = np.array([r @ f, r.sum()])
        H = np.array([[s @ (f * f), s @ f], [s @ f, s.sum()]]) + 1e-12 * np.eye(2)
        try:
            delta = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            break
        # backtracking keeps each Newton step a descent step
        step = 1.0
        while step > 1e-10:
            na, nb = a - step * delta[0], b - step * delta[1]
            trial = objective(na, nb)
            if trial < current + 1e-4 * step * (g @ -delta):
                break
            step *= 0.5
        else:
            break
        a, b, current = na, nb, trial
        if np.max(np.abs(step * delta)) < 1e-12:
            break
    # keep the map strictly increasing, and away from float saturation at 1.0 on the
    # training range, so score order equals decision-value order
    span = float(np.max(np.abs(f))) if f.size else 0.0
    a = max(float(a), 1e-6)
    if span > 0 and a * span > 30.0:
        a = 30.0 / span
    return a, float(b)


@register
class KernelSVM(Model):
    method = "SVC"

    def __init__(self, C=1.0, kernel="rbf", degree=3, gamma="scale", shrinking=True,
                 tol=1e-3, class_weight=None, max_iter=100, coef0=0.0):
        super().__init__()
        self.C = float(C)
        self.kernel = kernel
        self.degree = int(degree)
        self.gamma = gamma
        self.shrinking = shrinking  # solver heuristic only; no effect on this optimizer
        self.tol = float(tol)
        self.class_weight = class_weight
        self.max_iter = int(max_iter)
        self.coef0 = float(coef0)

    def _kernel(self, A, B):
        # +1 absorbs the unregularized offset into the kernel
        return kernel_matrix(self.kernel, A, B, self.gamma_, self.degree, self.coef0) + 1.0

    def fit(self, X, y, sample_weight=None, seed=0):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y).astype(int)
        require_two_classes(y)
        self.n_inputs = X.shape[1]
        self.gamma_ = resolve_gamma(self.gamma, X)
        ys = 2.0 * y - 1.0
        cw = class_weights(y, self.class_weight)
        if sample_weight is not None:
            cw = cw * np.asarray(sample_weight, dtype=float)
        alpha = np.zeros(len(y))
        T = 0
        if self.C > 0:
            K = self._kernel(X, X)
            f_prev = np.zeros(len(y))
            for t in range(1, self.max_iter + 1):
                # decision values of the current iterate w_t = (C / (t - 1)) sum alpha_j y_j phi_j
                f = (self.C / (t - 1)) * (K @ (alpha * ys)) if t > 1 else np.zeros(len(y))
                alpha = alpha + cw * (ys * f < 1.0)
                T = t
                if t > 2 and np.max(np.abs(f - f_prev)) < self.tol:
                    break
                f_prev = f
        keep = alpha > 0
        self.support_ = X[keep]
        self.dual_coef_ = (self.C / max(T, 1)) * alpha[keep] * ys[keep]
        self.n_iter_ = T
        self.platt_ = fit_platt(self._decision(X), y)
        return self

    def _decision(self, X):
        if self.dual_coef_.size == 0:
            return np.zeros(X.shape[0])
        return self._kernel(X, self.support_) @ self.dual_coef_

    def decision_function(self, X):
        return self._decision(self._check_input(X))

    def _score(self, X):
        a, b = self.platt_
        return np.exp(-np.logaddexp(0.0, -(a * self._decision(X) + b)))

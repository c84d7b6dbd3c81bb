"""Penalized logistic regression (LR and LASSO) fitted by proximal gradient descent."""
from __future__ import annotations

import numpy as np

from ..errors import UsageError
from .base import Model, class_weights, register, require_two_classes

PENALTIES = ("none", "l1", "l2", "elasticnet")
L1_RATIO = 0.5


def _sigmoid(z):
    return np.exp(-np.logaddexp(0.0, -z))


def _penalty_parts(penalty):
    """(l1 coefficient, l2 coefficient) of R(w) = a |w|_1 + b/2 |w|^2."""
    return {"none": (0.0, 0.0), "l1": (1.0, 0.0), "l2": (0.0, 1.0),
            "elasticnet": (L1_RATIO, 1.0 - L1_RATIO)}[penalty]


def _sample_weights(y, class_weight):
    if class_weight is None or isinstance(class_weight, str):
        return class_weights(y, class_weight)
    cw = np.asarray(class_weight, dtype=float)
    return cw[np.asarray(y).astype(int)]


def logistic_loss(w, b, X, y, penalty="none", C=1.0, class_weight=None) -> float:
    """Weighted negative log-likelihood plus R(w) / C."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    sw = _sample_weights(y, class_weight)
    z = X @ w + b
    nll = np.sum(sw * (np.logaddexp(0.0, z) - y * z))
    a, l2 = _penalty_parts(penalty)
    if a == 0.0 and l2 == 0.0:
        return float(nll)
    return float(nll + (a * np.abs(w).sum() + 0.5 * l2 * (w @ w)) / C)


def logistic_gradient(w, b, X, y, penalty="none", C=1.0, class_weight=None):
    """Gradient (d/dw, d/db) of ``logistic_loss``; the L1 subgradient at 0 is 0."""
    if C <= 0:
        raise UsageError("C", f"C must be positive, got {C}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    sw = _sample_weights(y, class_weight)
    r = sw * (_sigmoid(X @ w + b) - y)
    gw = X.T @ r
    a, l2 = _penalty_parts(penalty)
    if a or l2:
        gw = gw + (a * np.sign(w) + l2 * w) / C
    return gw, float(r.sum())


@register
class LogisticModel(Model):
    """Logistic classifier; ``method`` is LR or LASSO (LASSO fixes the L1 penalty)."""

    def __init__(self, method="LR", penalty="l2", C=1.0, max_iter=100, tol=1e-4,
                 class_weight=None, solver=None):
        super().__init__()
        if penalty not in PENALTIES:
            raise ValueError(f"unknown penalty {penalty!r}")
        self.method = method
        self.penalty = penalty
        self.C = float(C)
        self.max_iter = int(max_iter)
        self.tol = float(tol)
        self.class_weight = class_weight
        self.solver = solver
        self.coef = None
        self.intercept = 0.0
        self.n_iter = 0

    def fit(self, X, y, sample_weight=None, seed=0):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        require_two_classes(y)
        n, p = X.shape
        self.n_inputs = p
        sw = _sample_weights(y, self.class_weight)
        if sample_weight is not None:
            sw = sw * np.asarray(sample_weight, dtype=float)
        a, l2 = _penalty_parts(self.penalty)
        penalized = bool(a or l2)
        prior = np.clip((sw * y).sum() / sw.sum(), 1e-12, 1 - 1e-12)
        w = np.zeros(p)
        b = float(np.log(prior / (1 - prior)))
        if penalized and self.C == 0.0:
            # infinite penalty: only the intercept survives
            self.coef, self.intercept, self.n_iter = w, b, 0
            return self
        inv_c = 1.0 / self.C if penalized else 0.0
        Xa = np.hstack([X, np.ones((n, 1))]) * np.sqrt(sw)[:, None]
        lipschitz = 0.25 * np.linalg.norm(Xa, 2) ** 2 + l2 * inv_c
        step = 1.0 / max(lipschitz, 1e-12)
        # FISTA on [w, b]
        theta = np.r_[w, b]
        z, t = theta.copy(), 1.0
        it = 0
        for it in range(1, self.max_iter + 1):
            r = sw * (_sigmoid(X @ z[:p] + z[p]) - y)
            grad = np.r_[X.T @ r + l2 * inv_c * z[:p], r.sum()]
            new = z - step * grad
            if a:
                thr = step * a * inv_c
                new[:p] = np.sign(new[:p]) * np.maximum(np.abs(new[:p]) - thr, 0.0)
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            z = new + ((t - 1.0) / t_next) * (new - theta)
            delta = np.max(np.abs(new - theta))
            theta, t = new, t_next
            if delta < self.tol:
                break
        self.coef, self.intercept, self.n_iter = theta[:p], float(theta[p]), it
        return self

    def decision_function(self, X):
        return self._check_input(X) @ self.coef + self.intercept

    def _score(self, X):
        return _sigmoid(X @ self.coef + self.intercept)

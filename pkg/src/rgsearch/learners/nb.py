"""Categorical naive Bayes on ordinal category indices."""
from __future__ import annotations

import numpy as np

from ..errors import UsageError
from .base import Model, register, require_two_classes


def nb_class_conditional(count, class_total, alpha, n_categories):
    """Laplace-smoothed P(category | class) = (count + alpha) / (total + alpha * K)."""
    if alpha < 0:
        raise UsageError("ALPHA", f"alpha must be >= 0, got {alpha}")
    denom = class_total + alpha * n_categories
    if np.any(np.asarray(denom) == 0):
        raise UsageError("ALPHA", "alpha = 0 with an empty class leaves the probability undefined")
    return (count + alpha) / denom


@register
class CategoricalNB(Model):
    method = "NB"
    encoding = "ordinal"

    def __init__(self, alpha=1.0, min_categories=None, fit_prior=True, cardinalities=None):
        super().__init__()
        self.alpha = float(alpha)
        self.min_categories = min_categories
        self.fit_prior = bool(fit_prior)
        self.cardinalities = None if cardinalities is None else [int(c) for c in cardinalities]

    def fit(self, X, y, sample_weight=None, seed=0):
        X = np.rint(np.asarray(X, dtype=float)).astype(np.int64)
        y = np.asarray(y).astype(int)
        require_two_classes(y)
        n, p = X.shape
        self.n_inputs = p
        cards = self.cardinalities or [int(X[:, j].max()) + 1 for j in range(p)]
        if self.min_categories is not None:
            cards = [max(c, int(self.min_categories)) for c in cards]
        self.n_categories = np.array(cards, dtype=np.int64)
        totals = np.array([(y == c).sum() for c in (0, 1)], dtype=float)
        # log_theta[j]: (2, K_j) smoothed log class-conditional probabilities
        self.log_theta = []
        for j in range(p):
            counts = np.zeros((2, cards[j]))
            np.add.at(counts, (y, X[:, j]), 1.0)
            theta = nb_class_conditional(counts, totals[:, None], self.alpha, cards[j])
            self.log_theta.append(np.log(theta))
        self.log_prior = np.log(totals / n) if self.fit_prior else np.log([0.5, 0.5])
        return self

    def _posterior(self, joint):
        # joint: (n, 2) log joint; P(y=1) = 1 / (1 + exp(l0 - l1))
        d = joint[:, 0] - joint[:, 1]
        return np.exp(-np.logaddexp(0.0, d))

    def joint_log_likelihood(self, X) -> np.ndarray:
        X = np.rint(self._check_input(X)).astype(np.int64)
        jll = np.tile(self.log_prior, (X.shape[0], 1))
        for j, lt in enumerate(self.log_theta):
            v = X[:, j]
            if (v < 0).any() or (v >= lt.shape[1]).any():
                raise UsageError("CATEGORY", f"NB: category index out of range in column {j}")
            jll += lt[:, v].T
        return jll

    def _score(self, X):
        return self._posterior(self.joint_log_likelihood(X))

    def predict_onehot(self, X) -> np.ndarray:
        """Score one-hot rows; a fractional block is read as a mixture over its categories."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        blocks, start = [], 0
        # one-hot blocks are sized by the schema vocabularies, which may be below min_categories
        if self.cardinalities is not None:
            sizes = self.cardinalities
        else:
            sizes = [lt.shape[1] for lt in self.log_theta]
        width = sum(sizes)
        if X.shape[1] != width:
            raise UsageError("DIMENSION", f"NB: expected {width} one-hot inputs, got {X.shape[1]}")
        for s in sizes:
            blocks.append(slice(start, start + s))
            start += s
        jll = np.tile(self.log_prior, (X.shape[0], 1))
        for lt, b in zip(self.log_theta, blocks):
            theta = np.exp(lt[:, : b.stop - b.start])
            jll += np.log(X[:, b] @ theta.T)
        return np.clip(self._posterior(jll), 0.0, 1.0)

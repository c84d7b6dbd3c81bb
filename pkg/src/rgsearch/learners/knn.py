"""Brute-force k-nearest-neighbour scoring with Euclidean distance."""
from __future__ import annotations

import numpy as np

from .base import Model, register, require_two_classes


def knn_score(neighbor_labels, neighbor_distances, weights="uniform") -> float:
    labels = np.asarray(neighbor_labels, dtype=float)
    dist = np.asarray(neighbor_distances, dtype=float)
    if labels.size == 0 or labels.shape != dist.shape:
        raise ValueError("need at least one neighbour and matching lengths")
    if weights != "distance":
        return float(labels.mean())
    exact = dist == 0
    if exact.any():
        m = labels[exact].mean()
        return 1.0 if m > 0.5 else 0.0 if m < 0.5 else 0.5
    inv = 1.0 / dist
    return float((inv * labels).sum() / inv.sum())


def _batch_scores(labels, dist, weights):
    # row-wise knn_score over (n_query, k) arrays
    if weights != "distance":
        return labels.mean(axis=1)
    exact = dist == 0
    with np.errstate(divide="ignore"):
        inv = np.where(exact, 0.0, 1.0 / np.where(exact, 1.0, dist))
    out = (inv * labels).sum(axis=1) / np.where(inv.sum(axis=1) > 0, inv.sum(axis=1), 1.0)
    has_exact = exact.any(axis=1)
    if has_exact.any():
        m = (labels * exact).sum(axis=1) / np.maximum(exact.sum(axis=1), 1)
        snapped = np.where(m > 0.5, 1.0, np.where(m < 0.5, 0.0, 0.5))
        out = np.where(has_exact, snapped, out)
    return out


@register
class KNearestNeighbors(Model):
    method = "KNN"

    def __init__(self, n_neighbors=5, weights="uniform", algorithm="auto", leaf_size=30):
        super().__init__()
        self.n_neighbors = int(n_neighbors)
        if weights in (None, "none"):
            self.warnings.append("KNN weights 'none' treated as 'uniform'")
            weights = "uniform"
        self.weights = weights
        # speed knobs of tree-based neighbour search; brute force gives identical neighbours
        self.algorithm = algorithm
        self.leaf_size = leaf_size

    def fit(self, X, y, sample_weight=None, seed=0):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y).astype(int)
        require_two_classes(y)
        self.n_inputs = X.shape[1]
        self.X_train = X.copy()
        self.y_train = y.copy()
        return self

    def neighbors(self, X, chunk=128):
        k = min(self.n_neighbors, self.X_train.shape[0])
        idx = np.empty((X.shape[0], k), dtype=np.int64)
        dist = np.empty((X.shape[0], k))
        for s in range(0, X.shape[0], chunk):
            q = X[s:s + chunk]
            d = np.sqrt(((q[:, None, :] - self.X_train[None, :, :]) ** 2).sum(axis=2))
            nn = np.argsort(d, axis=1, kind="stable")[:, :k]
            idx[s:s + chunk] = nn
            dist[s:s + chunk] = np.take_along_axis(d, nn, axis=1)
        return idx, dist

    def _score(self, X):
        idx, dist = self.neighbors(X)
        return _batch_scores(self.y_train[idx].astype(float), dist, self.weights)

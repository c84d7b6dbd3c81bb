"""CART-style decision trees on numeric rows and bagged random forests."""
from __future__ import annotations

import heapq

import numpy as np

from .base import Model, class_weights, register, require_two_classes

CRITERIA = ("gini", "entropy", "log_loss")


def _impurity_from_fraction(p, criterion):
    p = np.asarray(p, dtype=float)
    if criterion == "gini":
        return 2.0 * p * (1.0 - p)
    q = 1.0 - p
    log = np.log2 if criterion == "entropy" else np.log
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}")
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(p > 0, p * log(np.where(p > 0, p, 1.0)), 0.0)
              + np.where(q > 0, q * log(np.where(q > 0, q, 1.0)), 0.0))
    return h


def impurity(labels, criterion: str = "gini") -> float:
    """Node impurity of a binary label multiset.

    gini = 1 - sum p^2; entropy uses log2; log_loss is the same entropy in nats.
    """
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("impurity of an empty node")
    return float(_impurity_from_fraction(labels.mean(), criterion))


class TreeArrays:
    """Flat node storage. Leaves have feature == -1; ``value`` holds the leaf output."""

    def __init__(self):
        self.feature, self.threshold, self.left, self.right = [], [], [], []
        self.value, self.n_samples, self.weight, self.impurity, self.depth = [], [], [], [], []

    def add(self, value, n, w, imp, depth) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(float(value))
        self.n_samples.append(int(n))
        self.weight.append(float(w))
        self.impurity.append(float(imp))
        self.depth.append(int(depth))
        return len(self.value) - 1

    def finalize(self) -> dict:
        return {
            "feature": np.array(self.feature, dtype=np.int64),
            "threshold": np.array(self.threshold, dtype=float),
            "left": np.array(self.left, dtype=np.int64),
            "right": np.array(self.right, dtype=np.int64),
            "value": np.array(self.value, dtype=float),
            "n_samples": np.array(self.n_samples, dtype=np.int64),
            "weight": np.array(self.weight, dtype=float),
            "impurity": np.array(self.impurity, dtype=float),
            "depth": np.array(self.depth, dtype=np.int64),
        }


def apply_tree(nodes: dict, X: np.ndarray) -> np.ndarray:
    """Leaf index reached by each row (left branch when x <= threshold)."""
    feature, threshold = nodes["feature"], nodes["threshold"]
    left, right = nodes["left"], nodes["right"]
    at = np.zeros(X.shape[0], dtype=np.int64)
    active = np.flatnonzero(feature[at] >= 0)
    while active.size:
        n = at[active]
        go_left = X[active, feature[n]] <= threshold[n]
        at[active] = np.where(go_left, left[n], right[n])
        active = active[feature[at[active]] >= 0]
    return at


def candidate_splits(Xn, w, wy, min_leaf, min_weight_leaf):
    """Score every valid split position of every column of Xn.

    Returns (order, values, child_cost, valid) where child_cost[f, i] is the split into the first
    i + 1 sorted rows vs the rest, and valid masks positions that respect the leaf limits and
    fall between distinct values. child_cost is left to the caller's criterion via fractions.
    """
    n, f = Xn.shape
    order = np.argsort(Xn, axis=0, kind="stable")
    vals = np.take_along_axis(Xn, order, axis=0)
    cw = np.cumsum(w[order], axis=0)
    cwy = np.cumsum(wy[order], axis=0)
    W, Wy = cw[-1], cwy[-1]
    wl, wyl = cw[:-1], cwy[:-1]
    wr, wyr = W - wl, Wy - wyl
    counts = np.arange(1, n)[:, None]
    valid = ((vals[1:] > vals[:-1])
             & (counts >= min_leaf) & (n - counts >= min_leaf)
             & (wl >= min_weight_leaf) & (wr >= min_weight_leaf)
             & (wl > 0) & (wr > 0))
    return order, vals, (wl, wyl, wr, wyr), valid


@register
class DecisionTree(Model):
    method = "DT"

    def __init__(self, criterion="gini", splitter="best", max_depth=None, min_samples_split=2,
                 min_samples_leaf=1, min_weight_fraction_leaf=0.0, max_features=None,
                 max_leaf_nodes=None, min_impurity_decrease=0.0, class_weight=None):
        super().__init__()
        if criterion not in CRITERIA:
            raise ValueError(f"unknown criterion {criterion!r}")
        self.criterion = criterion
        self.splitter = splitter
        self.max_depth = max_depth
        self.min_samples_split = int(min_samples_split)
        self.min_samples_leaf = int(min_samples_leaf)
        self.min_weight_fraction_leaf = float(min_weight_fraction_leaf)
        self.max_features = max_features
        self.max_leaf_nodes = max_leaf_nodes
        self.min_impurity_decrease = float(min_impurity_decrease)
        self.class_weight = class_weight
        self.nodes = None

    def fit(self, X, y, sample_weight=None, seed=0):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y).astype(int)
        require_two_classes(y)
        w = class_weights(y, self.class_weight)
        if sample_weight is not None:
            w = w * np.asarray(sample_weight, dtype=float)
        self.n_inputs = X.shape[1]
        self.nodes = self._grow(X, y, w, np.random.default_rng(seed))
        return self

    # a pending split: (-weighted improvement, node id, feature, threshold, left rows, right rows)
    def _evaluate(self, X, y, w, rows, node, depth, total_w, rng, nodes):
        n = rows.size
        W = w[rows].sum()
        Wy = (w[rows] * y[rows]).sum()
        imp = nodes.impurity[node]
        if ((self.max_depth is not None and depth >= self.max_depth)
                or n < self.min_samples_split or n < 2 * self.min_samples_leaf or imp <= 0.0):
            return None
        min_wl = self.min_weight_fraction_leaf * total_w
        n_feat = X.shape[1]
        feats = np.arange(n_feat)
        if self.max_features is not None and self.max_features < n_feat:
            feats = np.sort(rng.choice(n_feat, size=int(self.max_features), replace=False))
        Xn = X[np.ix_(rows, feats)]
        wr_, yr_ = w[rows], y[rows]
        order, vals, (wl, wyl, wr, wyr), valid = candidate_splits(
            Xn, wr_, wr_ * yr_, self.min_samples_leaf, min_wl)
        if not valid.any():
            return None
        with np.errstate(divide="ignore", invalid="ignore"):
            cost = (wl * _impurity_from_fraction(wyl / wl, self.criterion)
                    + wr * _impurity_from_fraction(wyr / wr, self.criterion)) / W
        if self.splitter == "random":
            ok_feats = np.flatnonzero(valid.any(axis=0))
            j = int(rng.choice(ok_feats))
            i = int(rng.choice(np.flatnonzero(valid[:, j])))
        else:
            masked = np.where(valid, cost, np.inf).T  # feature-major: ties go to lowest feature
            flat = int(np.argmin(masked))
            j, i = divmod(flat, masked.shape[1])
        decrease = W / total_w * (imp - cost[i, j])
        if decrease < self.min_impurity_decrease - 1e-15:
            return None
        thr = 0.5 * (vals[i, j] + vals[i + 1, j])
        left = rows[order[: i + 1, j]]
        right = rows[order[i + 1:, j]]
        return (-decrease, node, int(feats[j]), float(thr), np.sort(left), np.sort(right))

    def _grow(self, X, y, w, rng):
        nodes = TreeArrays()
        total_w = w.sum()

        def leaf(rows, depth):
            W = w[rows].sum()
            p = (w[rows] * y[rows]).sum() / W if W > 0 else 0.5
            return nodes.add(p, rows.size, W, _impurity_from_fraction(p, self.criterion), depth)

        rows = np.arange(X.shape[0])
        root = leaf(rows, 0)
        heap, counter = [], 0
        cand = self._evaluate(X, y, w, rows, root, 0, total_w, rng, nodes)
        if cand is not None:
            heapq.heappush(heap, (cand[0], counter, cand))
        n_leaves = 1
        while heap:
            if self.max_leaf_nodes is not None and n_leaves >= self.max_leaf_nodes:
                break
            _, _, (_, node, feat, thr, lrows, rrows) = heapq.heappop(heap)
            depth = nodes.depth[node] + 1
            l, r = leaf(lrows, depth), leaf(rrows, depth)
            nodes.feature[node], nodes.threshold[node] = feat, thr
            nodes.left[node], nodes.right[node] = l, r
            n_leaves += 1
            for child, crow in ((l, lrows), (r, rrows)):
                counter += 1
                c = self._evaluate(X, y, w, crow, child, depth, total_w, rng, nodes)
                if c is not None:
                    heapq.heappush(heap, (c[0], counter, c))
        return nodes.finalize()

    def _score(self, X):
        return self.nodes["value"][apply_tree(self.nodes, X)]

    @property
    def n_leaves(self) -> int:
        return int((self.nodes["feature"] < 0).sum())


@register
class RandomForest(Model):
    method = "RaF"

    def __init__(self, n_estimators=100, bootstrap=True, **tree_params):
        super().__init__()
        self.n_estimators = int(n_estimators)
        self.bootstrap = bootstrap
        self.tree_params = tree_params
        self.trees = []

    def fit(self, X, y, sample_weight=None, seed=0):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y).astype(int)
        require_two_classes(y)
        self.n_inputs = X.shape[1]
        n = X.shape[0]
        if self.n_estimators == 1 and not self.bootstrap:
            # a single full-data tree is grown exactly as a plain DecisionTree with the same seed
            self.trees = [DecisionTree(**self.tree_params).fit(X, y, sample_weight, seed)]
            return self
        self.trees = []
        for child in np.random.SeedSequence(seed).spawn(self.n_estimators):
            rng = np.random.default_rng(child)
            rows = rng.integers(0, n, n) if self.bootstrap else np.arange(n)
            if np.unique(y[rows]).size < 2:
                rows = np.arange(n)
            sw = None if sample_weight is None else np.asarray(sample_weight)[rows]
            tree_seed = int(rng.integers(2**63))
            self.trees.append(DecisionTree(**self.tree_params).fit(X[rows], y[rows], sw, tree_seed))
        return self

    def _score(self, X):
        return np.mean([t._score(X) for t in self.trees], axis=0)

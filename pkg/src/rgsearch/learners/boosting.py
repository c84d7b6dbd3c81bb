"""AdaBoost (SAMME, decision stumps) and gradient-boosted trees on the logistic loss."""
from __future__ import annotations

import numpy as np

from .base import Model, register, require_two_classes
from .tree import DecisionTree, TreeArrays, apply_tree

MAX_STAGE_WEIGHT = float(np.log(1e12))
XGB_ROUNDS = 100
XGB_MIN_CHILD_WEIGHT = 1.0


class StageRejected(Exception):
    pass


def adaboost_stage_weight(err: float, n_classes: int = 2) -> float:
    """SAMME stage weight ln((1 - err) / err) + ln(K - 1)."""
    if err > 1.0 - 1.0 / n_classes:
        raise StageRejected(f"weighted error {err} is no better than chance")
    if err <= 0.0:
        return MAX_STAGE_WEIGHT
    return min(float(np.log((1.0 - err) / err) + np.log(n_classes - 1.0)), MAX_STAGE_WEIGHT)


@register
class AdaBoost(Model):
    method = "ADB"

    def __init__(self, n_estimators=50, learning_rate=1.0, algorithm="SAMME", base_estimator="stump"):
        super().__init__()
        self.n_estimators = int(n_estimators)
        self.learning_rate = float(learning_rate)
        self.algorithm = algorithm
        self.base_estimator = base_estimator

    def fit(self, X, y, sample_weight=None, seed=0):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y).astype(int)
        require_two_classes(y)
        self.n_inputs = X.shape[1]
        n = len(y)
        w = np.full(n, 1.0 / n) if sample_weight is None else np.asarray(sample_weight, float) / np.sum(sample_weight)
        self.stumps, self.alphas = [], []
        self.weight_sums = []
        rng = np.random.default_rng(seed)
        for _ in range(self.n_estimators):
            stump = DecisionTree(max_depth=1).fit(X, y, sample_weight=w, seed=int(rng.integers(2**63)))
            pred = (stump._score(X) > 0.5).astype(int)
            miss = pred != y
            err = float(w[miss].sum())
            try:
                alpha = self.learning_rate * adaboost_stage_weight(err)
            except StageRejected:
                alpha = 0.0
            if alpha == 0.0:
                # chance-level stage: reweighting would repeat it forever
                if not self.stumps:
                    self.stumps.append(stump)
                    self.alphas.append(1.0)
                break
            self.stumps.append(stump)
            self.alphas.append(alpha)
            if err <= 0.0:
                break
            w = w * np.exp(alpha * miss)
            w = w / w.sum()
            self.weight_sums.append(float(w.sum()))
        self.alphas = np.array(self.alphas)
        return self

    def decision_function(self, X):
        return self._vote(self._check_input(X))

    def _vote(self, X):
        """Stage-weighted vote in [-1, 1]; all-zero stage weights give 0."""
        votes = np.array([2.0 * (s._score(X) > 0.5) - 1.0 for s in self.stumps])
        total = self.alphas.sum()
        return self.alphas @ votes / total if total > 0 else np.zeros(X.shape[0])

    def _score(self, X):
        return 1.0 / (1.0 + np.exp(-2.0 * self._vote(X)))


def soft_threshold(g, a):
    return np.sign(g) * np.maximum(np.abs(g) - a, 0.0)


def xgb_leaf_weight(G, H, lam, alpha) -> float:
    """Optimal leaf weight -T_alpha(G) / (H + lambda)."""
    return float(-soft_threshold(G, alpha) / (H + lam))


def _xgb_score(G, H, lam, alpha):
    t = soft_threshold(G, alpha)
    return t * t / (H + lam)


def grow_xgb_tree(X, g, h, max_depth, lam, alpha, gamma, min_child_weight=XGB_MIN_CHILD_WEIGHT):
    """Exact greedy tree on gradient statistics; leaf values are raw (unshrunk) weights."""
    nodes = TreeArrays()

    def make(rows, depth):
        G, H = g[rows].sum(), h[rows].sum()
        node = nodes.add(xgb_leaf_weight(G, H, lam, alpha) if H + lam > 0 else 0.0,
                         rows.size, H, 0.0, depth)
        if depth >= max_depth or rows.size < 2 or H < 2 * min_child_weight:
            return node
        Xn = X[rows]
        order = np.argsort(Xn, axis=0, kind="stable")
        vals = np.take_along_axis(Xn, order, axis=0)
        GL = np.cumsum(g[rows][order], axis=0)[:-1]
        HL = np.cumsum(h[rows][order], axis=0)[:-1]
        GR, HR = G - GL, H - HL
        valid = (vals[1:] > vals[:-1]) & (HL >= min_child_weight) & (HR >= min_child_weight)
        if not valid.any():
            return node
        gain = 0.5 * (_xgb_score(GL, HL, lam, alpha) + _xgb_score(GR, HR, lam, alpha)
                      - _xgb_score(G, H, lam, alpha)) - gamma
        gain = np.where(valid, gain, -np.inf).T
        flat = int(np.argmax(gain))
        j, i = divmod(flat, gain.shape[1])
        if not gain[j, i] > 0:
            return node
        thr = 0.5 * (vals[i, j] + vals[i + 1, j])
        left = np.sort(rows[order[: i + 1, j]])
        right = np.sort(rows[order[i + 1:, j]])
        nodes.feature[node], nodes.threshold[node] = j, float(thr)
        nodes.left[node] = make(left, depth + 1)
        nodes.right[node] = make(right, depth + 1)
        return node

    make(np.arange(X.shape[0]), 0)
    return nodes.finalize()


def _sigmoid(z):
    return np.exp(-np.logaddexp(0.0, -z))


def log_loss(y, margin) -> float:
    return float(np.mean(np.logaddexp(0.0, margin) - y * margin))


@register
class GradientBoosting(Model):
    method = "XGB"

    def __init__(self, booster="gbtree", eta=0.3, gamma=0.0, max_depth=6, subsample=1.0,
                 sampling_method="uniform", alpha=0.0, reg_lambda=1.0, tree_method="auto",
                 objective="binary:logistic", n_rounds=XGB_ROUNDS):
        super().__init__()
        if booster == "dart":
            self.warnings.append("booster 'dart' runs as 'gbtree'")
            booster = "gbtree"
        if sampling_method == "gradient_based":
            self.warnings.append("sampling_method 'gradient_based' runs as 'uniform'")
            sampling_method = "uniform"
        if tree_method in ("approx", "hist"):
            self.warnings.append(f"tree_method {tree_method!r} runs as 'exact'")
        self.booster = booster
        self.eta = float(eta)
        self.gamma = float(gamma)
        self.max_depth = int(max_depth)
        self.subsample = float(subsample)
        self.sampling_method = sampling_method
        self.alpha = float(alpha)
        self.reg_lambda = float(reg_lambda)
        self.tree_method = tree_method
        self.objective = objective
        self.n_rounds = int(n_rounds)

    def fit(self, X, y, sample_weight=None, seed=0):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        require_two_classes(y)
        n, p = X.shape
        self.n_inputs = p
        rng = np.random.default_rng(seed)
        sw = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=float)
        margin = np.zeros(n)  # base score 0.5
        self.train_loss = [log_loss(y, margin)]
        self.trees = []
        self.coef = np.zeros(p)
        self.bias = 0.0
        for _ in range(self.n_rounds):
            prob = _sigmoid(margin)
            g = sw * (prob - y)
            h = sw * np.maximum(prob * (1.0 - prob), 1e-16)
            if self.subsample < 1.0:
                mask = rng.random(n) < self.subsample
                if not mask.any():
                    mask[rng.integers(n)] = True
            else:
                mask = np.ones(n, dtype=bool)
            if self.booster == "gblinear":
                margin = self._linear_round(X, y, sw, margin, mask)
            else:
                rows = np.flatnonzero(mask)
                tree = grow_xgb_tree(X[rows], g[rows], h[rows], self.max_depth,
                                     self.reg_lambda, self.alpha, self.gamma)
                tree["value"] = tree["value"] * self.eta
                self.trees.append(tree)
                margin = margin + tree["value"][apply_tree(tree, X)]
            self.train_loss.append(log_loss(y, margin))
        return self

    def _linear_round(self, X, y, sw, margin, mask):
        # one pass of shrunk coordinate descent: bias first, then each weight
        lam, a = self.reg_lambda, self.alpha
        Xm, ym, swm = X[mask], y[mask], sw[mask]
        m = margin[mask]
        prob = _sigmoid(m)
        g, h = swm * (prob - ym), swm * np.maximum(prob * (1 - prob), 1e-16)
        db = -self.eta * g.sum() / h.sum()
        self.bias += db
        m = m + db
        for j in range(X.shape[1]):
            prob = _sigmoid(m)
            g, h = swm * (prob - ym), swm * np.maximum(prob * (1 - prob), 1e-16)
            x = Xm[:, j]
            hess = h @ (x * x)
            if hess < 1e-5:
                continue
            grad = g @ x + lam * self.coef[j]
            hess = hess + lam
            w = self.coef[j]
            if w - grad / hess >= 0:
                dw = -(grad + a) / hess
            else:
                dw = -(grad - a) / hess
            # the L1 term never pushes a weight across zero in one step
            if w - grad / hess >= 0:
                dw = max(dw, -w)
            else:
                dw = min(dw, -w)
            dw *= self.eta
            self.coef[j] += dw
            m = m + dw * x
        return X @ self.coef + self.bias

    def margin(self, X):
        X = self._check_input(X)
        return self._margin(X)

    def _margin(self, X):
        if self.booster == "gblinear":
            return X @ self.coef + self.bias
        out = np.zeros(X.shape[0])
        for t in self.trees:
            out += t["value"][apply_tree(t, X)]
        return out

    def _score(self, X):
        return _sigmoid(self._margin(X))

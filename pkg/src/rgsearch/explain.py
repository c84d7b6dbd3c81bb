"""Shapley-value explanations against a k-means background row.

A feature is a source column: all of its one-hot coordinates move together when a
synthetic sample is composed.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError

EXACT_LIMIT = 20
AUTO_EXACT = 12
DEFAULT_CLUSTERS = 10


@dataclass(frozen=True)
class Centroids:
    k: int
    vectors: np.ndarray
    inertia: float
    n_iter: int = 0


def _sq_dist(X, C):
    d = (X * X).sum(1)[:, None] + (C * C).sum(1)[None, :] - 2.0 * X @ C.T
    return np.maximum(d, 0.0)


def kmeans(values, k: int, seed: int = 0, max_iter: int = 300) -> Centroids:
    """k-means++ seeding followed by Lloyd iterations until the assignment stops changing."""
    X = np.asarray(values, dtype=float)
    if X.ndim != 2:
        raise UsageError("KMEANS", "k-means needs a 2-D matrix")
    n = X.shape[0]
    if k <= 0:
        raise UsageError("KMEANS", f"cluster count must be >= 1, got {k}")
    if k > n:
        raise UsageError("KMEANS", f"cluster count {k} exceeds the {n} available rows; lower --clusters")
    rng = np.random.default_rng(seed)
    centers = [X[rng.integers(n)]]
    closest = _sq_dist(X, centers[0][None, :])[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0:
            # every row already coincides with a center; take unused rows in order
            used = {tuple(c) for c in centers}
            pick = next((i for i in range(n) if tuple(X[i]) not in used), 0)
        else:
            pick = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
            pick = min(pick, n - 1)
        centers.append(X[pick])
        closest = np.minimum(closest, _sq_dist(X, X[pick][None, :])[:, 0])
    C = np.array(centers)
    labels = None
    it = 0
    for it in range(1, max_iter + 1):
        new = np.argmin(_sq_dist(X, C), axis=1)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(k):
            members = X[labels == j]
            if len(members):
                C[j] = members.mean(0)
    d = _sq_dist(X, C)
    labels = np.argmin(d, axis=1)
    inertia = float(((X - C[labels]) ** 2).sum())
    return Centroids(k, C, inertia, it)


def background(c: Centroids) -> np.ndarray:
    return np.asarray(c.vectors, dtype=float).mean(0)


def _blocks(width: int, blocks):
    if blocks is None:
        return tuple(slice(i, i + 1) for i in range(width))
    return tuple(blocks)


def synthetic_sample(case, bg, subset, include_i=None, blocks=None) -> np.ndarray:
    """Row taking the case's coordinates for features in ``subset`` (plus ``include_i``), else ``bg``."""
    case = np.asarray(case, dtype=float)
    bg = np.asarray(bg, dtype=float)
    blocks = _blocks(case.shape[0], blocks)
    subset = set(int(s) for s in subset)
    if include_i is not None:
        if include_i in subset:
            raise UsageError("SUBSET", f"feature {include_i} is already in the subset")
        subset.add(int(include_i))
    row = bg.copy()
    for j in subset:
        row[blocks[j]] = case[blocks[j]]
    return row


def _mask_rows(case, bg, blocks, masks: np.ndarray) -> np.ndarray:
    """Synthetic rows for a (m, F) boolean matrix of present features."""
    expand = np.zeros((len(blocks), case.shape[0]))
    for j, b in enumerate(blocks):
        expand[j, b] = 1.0
    on = masks.astype(float) @ expand
    return bg[None, :] + on * (case - bg)[None, :]


def _predictor(model):
    if callable(model) and not hasattr(model, "predict_onehot"):
        return lambda X: np.asarray(model(X), dtype=float)
    return lambda X: np.asarray(model.predict_onehot(X), dtype=float)


def _bits(codes: np.ndarray, F: int) -> np.ndarray:
    return ((codes[:, None] >> np.arange(F)[None, :]) & 1).astype(bool)


def subset_values(model, case, bg, blocks=None) -> np.ndarray:
    """p(S) for every subset S, indexed by the bitmask of S."""
    case = np.asarray(case, dtype=float)
    bg = np.asarray(bg, dtype=float)
    blocks = _blocks(case.shape[0], blocks)
    F = len(blocks)
    codes = np.arange(2 ** F, dtype=np.int64)
    return _predictor(model)(_mask_rows(case, bg, blocks, _bits(codes, F)))


def shap_exact(model, case, bg, blocks=None) -> np.ndarray:
    """phi_i = (1/|F|) sum over S not containing i of [p(S + i) - p(S)] / C(|F|-1, |S|)."""
    case = np.asarray(case, dtype=float)
    blocks = _blocks(case.shape[0], blocks)
    F = len(blocks)
    if F > EXACT_LIMIT:
        raise UsageError("SHAP_EXACT", f"{F} features is above the exact limit of {EXACT_LIMIT}; use sampled mode")
    v = subset_values(model, case, bg, blocks)
    codes = np.arange(2 ** F, dtype=np.int64)
    sizes = _bits(codes, F).sum(1)
    weight = np.array([1.0 / (F * math.comb(F - 1, s)) for s in range(F)])
    phi = np.zeros(F)
    for i in range(F):
        without = codes[(codes >> i) & 1 == 0]
        phi[i] = np.sum(weight[sizes[without]] * (v[without | (1 << i)] - v[without]))
    return phi


def shap_permutations(model, case, bg, perms, blocks=None) -> np.ndarray:
    """Average marginal contribution along the given feature orderings."""
    case = np.asarray(case, dtype=float)
    bg = np.asarray(bg, dtype=float)
    blocks = _blocks(case.shape[0], blocks)
    F = len(blocks)
    perms = np.asarray(perms, dtype=np.int64).reshape(-1, F)
    m = perms.shape[0]
    # prefix masks: row r, step t holds the first t features of permutation r
    prefix = np.zeros((m, F + 1, F), dtype=bool)
    for t in range(1, F + 1):
        prefix[:, t] = prefix[:, t - 1]
        prefix[np.arange(m), t, perms[:, t - 1]] = True
    flat = prefix.reshape(-1, F)
    uniq, inverse = np.unique(flat, axis=0, return_inverse=True)
    v = _predictor(model)(_mask_rows(case, bg, blocks, uniq))[inverse.ravel()].reshape(m, F + 1)
    gains = np.diff(v, axis=1)
    phi = np.zeros(F)
    np.add.at(phi, perms.ravel(), gains.ravel())
    return phi / m


def sample_permutations(F: int, n_permutations: int, seed: int) -> np.ndarray:
    """Antithetic orderings: each drawn permutation is followed by its reverse."""
    if n_permutations < 1:
        raise UsageError("PERMUTATIONS", "n_permutations must be >= 1")
    rng = np.random.default_rng(seed)
    out = np.empty((n_permutations, F), dtype=np.int64)
    for r in range(0, n_permutations, 2):
        p = rng.permutation(F)
        out[r] = p
        if r + 1 < n_permutations:
            out[r + 1] = p[::-1]
    return out


def shap_sampled(model, case, bg, n_permutations: int, seed: int, blocks=None) -> np.ndarray:
    case = np.asarray(case, dtype=float)
    F = len(_blocks(case.shape[0], blocks))
    return shap_permutations(model, case, bg, sample_permutations(F, n_permutations, seed), blocks)


@dataclass
class ShapReport:
    phi: np.ndarray           # (cases, features)
    base_value: float
    features: list
    mode: str
    predictions: np.ndarray = field(default_factory=lambda: np.zeros(0))


def explain_cases(model, cases, bg, features, blocks=None, mode="auto",
                  n_permutations=2000, seed=0) -> ShapReport:
    """Shapley values for each row of ``cases``. Mode 'auto' is exact up to 12 features."""
    cases = np.atleast_2d(np.asarray(cases, dtype=float))
    bg = np.asarray(bg, dtype=float)
    blocks = _blocks(cases.shape[1], blocks)
    F = len(blocks)
    if len(features) != F:
        raise UsageError("FEATURES", f"{len(features)} feature names for {F} features")
    if mode == "auto":
        mode = "exact" if F <= AUTO_EXACT else "sampled"
    if mode not in ("exact", "sampled"):
        raise UsageError("SHAP_MODE", f"unknown mode {mode!r}; use exact, sampled or auto")
    predict = _predictor(model)
    phi = np.zeros((cases.shape[0], F))
    for r, case in enumerate(cases):
        if mode == "exact":
            phi[r] = shap_exact(model, case, bg, blocks)
        else:
            phi[r] = shap_sampled(model, case, bg, n_permutations, seed + r, blocks)
    label = "exact" if mode == "exact" else f"sampled({n_permutations})"
    return ShapReport(phi, float(predict(bg[None, :])[0]), list(features), label, predict(cases))


def aggregate(phi, raw=None, features=None, cardinalities=None):
    """Bar data (features by mean |phi|, descending) and per-case summary triples.

    Summary triples are (feature, phi, raw category index scaled to [0, 1]).
    """
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    if phi.size == 0:
        raise UsageError("EMPTY", "no Shapley values to aggregate")
    n, F = phi.shape
    features = list(features) if features is not None else [str(i) for i in range(F)]
    mean_abs = np.abs(phi).mean(0)
    order = sorted(range(F), key=lambda j: -mean_abs[j])
    bar = [(features[j], float(mean_abs[j])) for j in order]
    summary = []
    for r in range(n):
        for j in order:
            if raw is None:
                level = 0.0
            else:
                K = cardinalities[j] if cardinalities is not None else int(np.max(raw[:, j])) + 1
                level = float(raw[r, j]) / (K - 1) if K > 1 else 0.0
            summary.append((features[j], float(phi[r, j]), level))
    return bar, summary


def write_shap(report: ShapReport, path, case_ids, raw_categories) -> None:
    """Long format: case id, feature, phi, raw category label."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["case_id", "feature", "phi", "category"])
        for r, cid in enumerate(case_ids):
            for j, name in enumerate(report.features):
                w.writerow([cid, name, repr(float(report.phi[r, j])), raw_categories[r][j]])


def write_bar(bar, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature", "mean_abs_phi"])
        for name, v in bar:
            w.writerow([name, repr(v)])


def write_summary_points(summary, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature", "phi", "level"])
        for name, v, level in summary:
            w.writerow([name, repr(v), repr(level)])

"""ROC curves, AUC, and the comparison arithmetic used in result tables."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError, UsageError


@dataclass(frozen=True, eq=False)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray  # descending; thresholds[0] = +inf marks the (0, 0) endpoint
    auc: float

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))


def _check(scores, labels):
    s = np.asarray(scores, dtype=float).ravel()
    y = np.asarray(labels).ravel().astype(int)
    if s.shape != y.shape:
        raise UsageError("SHAPE", "scores and labels differ in length")
    P = int((y == 1).sum())
    N = int((y == 0).sum())
    if P == 0 or N == 0:
        raise DataError("SINGLE_CLASS", f"AUC undefined with {P} positive and {N} negative cases")
    return s, y, P, N


def roc_curve(scores, labels) -> RocCurve:
    """One point per distinct score (ties collapse into a diagonal segment)."""
    s, y, P, N = _check(scores, labels)
    order = np.argsort(-s, kind="mergesort")
    s, y = s[order], y[order]
    # last index of each run of tied scores
    ends = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tp = np.cumsum(y)[ends]
    fp = (ends + 1) - tp
    tpr = np.r_[0.0, tp / P]
    fpr = np.r_[0.0, fp / N]
    thresholds = np.r_[np.inf, s[ends]]
    area = float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1])) / 2.0)
    return RocCurve(fpr, tpr, thresholds, area)


def auc(scores, labels) -> float:
    """Mann-Whitney AUC: (concordant + 0.5 * tied) / (P * N), computed from average ranks."""
    s, y, P, N = _check(scores, labels)
    order = np.argsort(s, kind="mergesort")
    ss = s[order]
    ranks = np.empty(len(s))
    starts = np.flatnonzero(np.r_[True, ss[1:] != ss[:-1]])
    stops = np.r_[starts[1:], len(ss)]
    # average 1-based rank of each tie group; exact in float for n < 2**52
    avg = (starts + 1 + stops) / 2.0
    ranks[order] = np.repeat(avg, stops - starts)
    # 2 * U is integral, so keep it exact before the single division
    u2 = 2.0 * ranks[y == 1].sum() - P * (P + 1.0)
    return float(u2 / (2.0 * P * N))


def mean_test_auc(fold_aucs: Sequence[float], k: int | None = None) -> float:
    fold_aucs = list(fold_aucs)
    if k is not None and len(fold_aucs) != k:
        raise UsageError("FOLDS", f"expected {k} fold AUCs, got {len(fold_aucs)}")
    if not fold_aucs:
        raise UsageError("FOLDS", "no fold AUCs")
    return float(np.mean(fold_aucs))


def percent_difference(reference: float, value: float) -> float:
    if reference <= 0:
        raise UsageError("REFERENCE", f"reference must be positive, got {reference}")
    return (value - reference) / reference * 100.0


def write_roc(curve: RocCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["threshold", "fpr", "tpr"])
        for t, f, p in zip(curve.thresholds, curve.fpr, curve.tpr):
            w.writerow(["inf" if np.isinf(t) else repr(float(t)), repr(float(f)), repr(float(p))])
        w.writerow(["auc", repr(curve.auc), ""])

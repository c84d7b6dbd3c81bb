"""Grid searcher: k-fold evaluation of sampled settings, best-setting refit, holdout validation."""
from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import Dataset, FoldPlan, column_blocks, encode, make_folds
from .errors import DataError, NumericalError, UsageError
from .learners import Model, build_model, encoding_for
from .metrics import RocCurve, auc, mean_test_auc, percent_difference, roc_curve
from .space import HyperparameterSpace, Hypes, check_method, sample_hypes

FIT_FAILURES = (ArithmeticError, np.linalg.LinAlgError)


def derive_seed(*parts: int) -> int:
    """Deterministic 32-bit seed from integer parts (platform independent)."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


REFIT_TAG = 0xFFFFFFFF


@dataclass(frozen=True)
class SearchConfig:
    method: str
    space: HyperparameterSpace
    n_hypes: int = 50
    k: int = 5
    sampling_seed: int = 0
    fold_seed: int = 0
    training_seed: int = 0
    workers: int = 1
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "method", check_method(self.method))
        if self.n_hypes < 1:
            raise UsageError("N_HYPES", "n_hypes must be >= 1")
        if self.k < 2:
            raise UsageError("FOLDS", "k must be >= 2")
        if self.space.method != self.method:
            raise UsageError("SPACE", f"space is for {self.space.method}, not {self.method}")


@dataclass
class HypesResult:
    index: int
    hypes: Hypes
    fold_aucs: list
    mean_test_auc: float
    fit_seconds: float = 0.0
    warnings: list = field(default_factory=list)
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    @property
    def selection_score(self) -> float:
        return -math.inf if self.failed else self.mean_test_auc


@dataclass
class SearchReport:
    config: SearchConfig
    results: list
    best_index: int
    model: Model | None
    validation_auc: float
    validation_roc: RocCurve | None
    total_minutes: float
    models_trained: int
    n_train_test: int = 0
    n_validation: int = 0
    features: list = field(default_factory=list)
    refit_error: str | None = None

    @property
    def best(self) -> HypesResult:
        return self.results[self.best_index]

    @property
    def average_mean_test_auc(self) -> float:
        ok = [r.mean_test_auc for r in self.results if not r.failed]
        return float(np.mean(ok)) if ok else math.nan


def fit_encoded(method: str, values: dict, X: np.ndarray, y: np.ndarray, seed: int, d: Dataset) -> Model:
    """Fit on an already-encoded matrix (rows of ``d`` in the method's encoding)."""
    if method == "DFNN":
        from .dfnn import NetworkConfig, train
        return train(NetworkConfig.from_hypes(values), X, y, seed)
    model = build_model(method, values, d, X.shape[1])
    return model.fit(X, y, seed=seed)


def _score(model: Model, X) -> np.ndarray:
    p = model.predict_proba(X)
    if not np.all(np.isfinite(p)):
        raise NumericalError("NON_FINITE", "model produced non-finite scores")
    return p


def evaluate_hypes(method: str, h: Hypes, train_test: Dataset, folds: FoldPlan, seed: int,
                   index: int = 0, encoded: np.ndarray | None = None) -> HypesResult:
    """Train on k-1 folds and score the held-out fold, for each of the k folds."""
    method = check_method(method)
    if folds.assignment.shape[0] != train_test.n_cases:
        raise DataError("FOLDS", "fold plan does not match the train-test set")
    X = encode(train_test, encoding_for(method)).values if encoded is None else encoded
    start = time.perf_counter()
    aucs, warnings = [], []
    for f in range(folds.k):
        tr, te = folds.split(f)
        model = fit_encoded(method, h.values, X[tr], train_test.y[tr], derive_seed(seed, index, f), train_test)
        aucs.append(auc(_score(model, X[te]), train_test.y[te]))
        for w in model.warnings:
            if w not in warnings:
                warnings.append(w)
    return HypesResult(index, h, aucs, mean_test_auc(aucs, folds.k),
                       time.perf_counter() - start, warnings)


def _evaluate_safe(args) -> HypesResult:
    method, h, train_test, folds, seed, index, X = args
    start = time.perf_counter()
    try:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return evaluate_hypes(method, h, train_test, folds, seed, index, X)
    except FIT_FAILURES as e:
        return HypesResult(index, h, [math.nan] * folds.k, math.nan,
                           time.perf_counter() - start, [], f"{type(e).__name__}: {e}")


def select_best(results) -> int:
    """Index of the highest mean-test AUC; ties go to the earliest sampled setting."""
    if not results:
        raise UsageError("EMPTY", "no results to select from")
    best, best_score = 0, -math.inf
    for i, r in enumerate(results):
        s = r.selection_score if isinstance(r, HypesResult) else float(r)
        if s > best_score:
            best, best_score = i, s
    return best


def refit_and_validate(method: str, best: Hypes, train_test: Dataset, validation: Dataset, seed: int):
    """Refit on the whole train-test set; return (model, validation AUC, validation ROC)."""
    method = check_method(method)
    if validation.n_cases == 0:
        raise DataError("EMPTY", "empty validation set")
    if validation.n_positive == 0 or validation.n_negative == 0:
        raise DataError("SINGLE_CLASS", "validation set lacks one of the classes")
    mode = encoding_for(method)
    X = encode(train_test, mode).values
    model = fit_encoded(method, best.values, X, train_test.y, seed, train_test)
    p = _score(model, encode(validation, mode).values)
    curve = roc_curve(p, validation.y)
    return model, auc(p, validation.y), curve


def check_no_leakage(train_test: Dataset, validation: Dataset | None) -> None:
    if validation is None:
        return
    shared = np.intersect1d(train_test.case_ids, validation.case_ids)
    if shared.size:
        raise DataError("LEAKAGE", f"case {int(shared[0])} is in both train-test and validation sets")


def run_search(config: SearchConfig, train_test: Dataset, validation: Dataset | None = None,
               folds: FoldPlan | None = None, progress=None) -> SearchReport:
    """Evaluate ``n_hypes`` sampled settings by k-fold CV, pick the best, refit, validate."""
    start = time.perf_counter()
    method = config.method
    if validation is not None and validation.schema.names != train_test.schema.names:
        raise DataError("SCHEMA", "train-test and validation sets have different predictors")
    check_no_leakage(train_test, validation)
    if folds is None:
        folds = make_folds(train_test, config.k, config.fold_seed)
    elif folds.k != config.k:
        raise DataError("FOLDS", f"fold plan has k={folds.k}, config asks for k={config.k}")
    if folds.assignment.shape[0] != train_test.n_cases:
        raise DataError("FOLDS", "fold plan does not match the train-test set")
    settings = sample_hypes(config.space, config.n_hypes, config.sampling_seed)
    X = encode(train_test, encoding_for(method)).values
    jobs = [(method, h, train_test, folds, config.training_seed, i, X) for i, h in enumerate(settings)]
    if config.workers <= 1:
        results = []
        for job in jobs:
            results.append(_evaluate_safe(job))
            if progress:
                progress(results[-1])
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_evaluate_safe, jobs, chunksize=max(1, len(jobs) // (4 * config.workers))))
    results.sort(key=lambda r: r.index)
    best = select_best(results)
    model, v_auc, curve, refit_error = None, math.nan, None, None
    if validation is not None:
        try:
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                model, v_auc, curve = refit_and_validate(
                    method, results[best].hypes, train_test, validation,
                    derive_seed(config.training_seed, REFIT_TAG))
        except FIT_FAILURES as e:
            refit_error = f"{type(e).__name__}: {e}"
    return SearchReport(
        config=config, results=results, best_index=best, model=model, validation_auc=v_auc,
        validation_roc=curve, total_minutes=(time.perf_counter() - start) / 60.0,
        models_trained=len(results) * folds.k, n_train_test=train_test.n_cases,
        n_validation=0 if validation is None else validation.n_cases,
        features=train_test.schema.names, refit_error=refit_error,
    )


def compare_reports(all_feature: dict, rf: dict) -> dict:
    """Best and average mean-test AUCs of an all-feature and a risk-factor search, with % changes.

    Accepts SearchReports or summary dicts (see ``summary_dict``).
    """
    a, b = _as_summary(all_feature), _as_summary(rf)
    if a["method"] != b["method"]:
        raise UsageError("METHOD", f"cannot compare {a['method']} with {b['method']}")
    return {
        "method": a["method"],
        "best": a["best_mean_test_auc"],
        "best_rf": b["best_mean_test_auc"],
        "difference_pct": percent_difference(a["best_mean_test_auc"], b["best_mean_test_auc"]),
        "average": a["average_mean_test_auc"],
        "best_vs_average_pct": percent_difference(a["average_mean_test_auc"], a["best_mean_test_auc"]),
        "average_rf": b["average_mean_test_auc"],
        "best_vs_average_rf_pct": percent_difference(b["average_mean_test_auc"], b["best_mean_test_auc"]),
    }


def _as_summary(x) -> dict:
    return summary_dict(x) if isinstance(x, SearchReport) else x


# --- output files -------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_results(report: SearchReport, path) -> None:
    """One row per setting, in sampling order. Wall-clock timings go to a separate file."""
    axes = report.config.space.names
    k = report.config.k
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index"] + axes + [f"fold{f + 1}_auc" for f in range(k)]
                   + ["mean_test_auc", "status", "warnings"])
        for r in report.results:
            w.writerow([r.index] + [_fmt(r.hypes.values[a]) for a in axes]
                       + [_fmt(float(x)) for x in r.fold_aucs] + [_fmt(float(r.mean_test_auc))]
                       + ["failed: " + r.error if r.failed else "ok", "; ".join(r.warnings)])


def write_timing(report: SearchReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "fit_seconds"])
        for r in report.results:
            w.writerow([r.index, f"{r.fit_seconds:.6f}"])


def summary_dict(report: SearchReport) -> dict:
    c = report.config
    best = report.best
    roc = report.validation_roc
    return {
        "method": c.method,
        "label": c.label,
        "n_hypes": c.n_hypes,
        "k": c.k,
        "seeds": {"sampling": c.sampling_seed, "folding": c.fold_seed, "training": c.training_seed},
        "models_trained": report.models_trained,
        "n_failed": sum(r.failed for r in report.results),
        "n_train_test": report.n_train_test,
        "n_validation": report.n_validation,
        "features": list(report.features),
        "best_index": report.best_index,
        "best_hypes": best.hypes.values,
        "best_fold_aucs": [float(x) for x in best.fold_aucs],
        "best_mean_test_auc": float(best.mean_test_auc),
        "average_mean_test_auc": report.average_mean_test_auc,
        "validation_auc": None if math.isnan(report.validation_auc) else float(report.validation_auc),
        "validation_roc": None if roc is None else {"fpr": roc.fpr.tolist(), "tpr": roc.tpr.tolist()},
        "refit_error": report.refit_error,
    }


def write_summary(report: SearchReport, path) -> None:
    Path(path).write_text(json.dumps(summary_dict(report), indent=2, sort_keys=True) + "\n")


def write_timing_summary(report: SearchReport, path) -> None:
    Path(path).write_text(json.dumps({
        "total_minutes": round(report.total_minutes, 2),
        "fit_seconds": round(sum(r.fit_seconds for r in report.results), 3),
    }, indent=2) + "\n")


def onehot_blocks(d: Dataset):
    return column_blocks(d.schema, "onehot")

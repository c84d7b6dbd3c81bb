"""Learner families and the Hypes-driven ``fit`` dispatcher."""
from __future__ import annotations

import numpy as np

from ..data import Dataset, encode
from ..space import Hypes, builtin_space, check_method, validate_hypes
from .base import Model, dump_model, load_model
from .boosting import AdaBoost, GradientBoosting, adaboost_stage_weight, xgb_leaf_weight
from .knn import KNearestNeighbors, knn_score
from .linear import LogisticModel, logistic_gradient, logistic_loss
from .nb import CategoricalNB, nb_class_conditional
from .svm import KernelSVM, kernel_eval
from .tree import DecisionTree, RandomForest, impurity

__all__ = [
    "Model", "fit", "predict_proba", "build_model", "dump_model", "load_model", "encoding_for",
    "AdaBoost", "GradientBoosting", "KNearestNeighbors", "LogisticModel", "CategoricalNB",
    "KernelSVM", "DecisionTree", "RandomForest",
    "adaboost_stage_weight", "xgb_leaf_weight", "knn_score", "logistic_gradient", "logistic_loss",
    "nb_class_conditional", "kernel_eval", "impurity",
]


def encoding_for(method: str) -> str:
    return "ordinal" if check_method(method) == "NB" else "onehot"


def _cw(v):
    return None if v in (None, "none") else v


def _tree_params(v: dict, n_features: int) -> dict:
    return dict(
        criterion=v["criterion"],
        max_depth=int(v["max_depth"]),
        min_samples_split=int(v["min_samples_split"]),
        min_samples_leaf=int(v["min_samples_leaf"]),
        min_weight_fraction_leaf=float(v["min_weight_fraction_leaf"]),
        max_features=min(int(v["max_features"]), n_features),
        max_leaf_nodes=int(v["max_leaf_nodes"]),
        min_impurity_decrease=float(v["min_impurity_decrease"]),
        class_weight=_cw(v["class_weight"]),
    )


def build_model(method: str, values: dict, d: Dataset | None = None, n_features: int | None = None) -> Model:
    """Unfitted model configured from a value mapping (axes named as in the built-in spaces)."""
    v = values
    if method == "NB":
        cards = None if d is None else [c.cardinality for c in d.schema.columns]
        return CategoricalNB(v["alpha"], v["min_categories"], v["fit_prior"], cards)
    if method in ("LR", "LASSO"):
        penalty = "l1" if method == "LASSO" else v["penalty"]
        return LogisticModel(method, penalty, v["C"], v["max_iter"], v["tol"], _cw(v["class_weight"]),
                             v.get("solver"))
    if method == "DT":
        return DecisionTree(splitter=v["splitter"], **_tree_params(v, n_features))
    if method == "RaF":
        return RandomForest(int(v["n_estimators"]), True, **_tree_params(v, n_features))
    if method == "KNN":
        return KNearestNeighbors(v["n_neighbors"], v["weights"], v["algorithm"], v["leaf_size"])
    if method == "SVC":
        return KernelSVM(v["C"], v["kernel"], v["degree"], v["gamma"], v["shrinking"], v["tol"],
                         _cw(v["class_weight"]), v["max_iter"])
    if method == "ADB":
        return AdaBoost(v["n_estimators"], v["learning_rate"], v["algorithm"], v["base_estimator"])
    if method == "XGB":
        return GradientBoosting(v["booster"], v["eta"], v["gamma"], v["max_depth"], v["subsample"],
                                v["sampling_method"], v["alpha"], v["lambda"], v["tree_method"],
                                v["objective"])
    raise ValueError(f"no learner for method {method!r}")


def fit(method: str, h: Hypes, d: Dataset, seed: int) -> Model:
    """Fit ``method`` with setting ``h`` on ``d``; deterministic in (h, d, seed)."""
    from ..dfnn import NetworkConfig, train

    method = check_method(method)
    # axis membership is checked against the space's names only: bounds depend on the data size
    space = builtin_space(method, n_cases=max(d.n_cases, 2))
    missing = [n for n in space.names if n not in h.values]
    foreign = [n for n in h.values if n not in space.names]
    if missing or foreign:
        validate_hypes(space, h)
    m = encode(d, encoding_for(method))
    if method == "DFNN":
        return train(NetworkConfig.from_hypes(h.values), m.values, d.y, seed)
    model = build_model(method, h.values, d, m.width)
    return model.fit(m.values, d.y, seed=seed)


def predict_proba(model: Model, rows) -> np.ndarray:
    return model.predict_proba(rows)

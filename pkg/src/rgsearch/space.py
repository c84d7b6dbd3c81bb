"""Hyperparameter axes, per-method spaces, and uniform sampling of distinct settings."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from decimal import Decimal
from typing import Any

import numpy as np

from .errors import UsageError

METHODS = ("NB", "LR", "LASSO", "DT", "KNN", "SVC", "RaF", "ADB", "XGB", "DFNN")

# Pool-size factors quoted for the DFNN space (epochs, batch size, learning rate, dropout,
# momentum, decay, l1, l2, layers, hidden nodes, categorical product).
QUOTED_DFNN_FACTORS = (332, 4189, 299, 90, 89, 299, 299, 299, 4, 4189, 400)


def _dec(x) -> Decimal:
    return x if isinstance(x, Decimal) else Decimal(str(x))


@dataclass(frozen=True)
class Axis:
    """One adjustable hyperparameter.

    ``kind`` is ``grid`` (min..max in multiples of step), ``int`` (inclusive integer range)
    or ``choice`` (explicit list).
    """

    name: str
    kind: str
    min: Any = None
    max: Any = None
    step: Any = None
    choices: tuple = ()

    def __post_init__(self):
        if self.kind == "grid":
            if _dec(self.step) <= 0 or _dec(self.min) > _dec(self.max):
                raise ValueError(f"axis {self.name}: need step > 0 and min <= max")
        elif self.kind == "int":
            if int(self.min) > int(self.max):
                raise ValueError(f"axis {self.name}: min > max")
        elif self.kind == "choice":
            if not self.choices:
                raise ValueError(f"axis {self.name}: empty value list")
            if len(set(self.choices)) != len(self.choices):
                raise ValueError(f"axis {self.name}: duplicate values")
        else:
            raise ValueError(f"axis {self.name}: unknown kind {self.kind!r}")

    @classmethod
    def grid(cls, name, lo, hi, step):
        return cls(name, "grid", lo, hi, step)

    @classmethod
    def integers(cls, name, lo, hi):
        return cls(name, "int", int(lo), int(hi))

    @classmethod
    def explicit(cls, name, *values):
        return cls(name, "choice", choices=tuple(values))

    @property
    def _integral(self) -> bool:
        return all(_dec(v) == _dec(v).to_integral_value() for v in (self.min, self.step))

    @property
    def count(self) -> int:
        if self.kind == "choice":
            return len(self.choices)
        if self.kind == "int":
            return int(self.max) - int(self.min) + 1
        # exact decimal arithmetic: no float drift in the division
        return int((_dec(self.max) - _dec(self.min)) // _dec(self.step)) + 1

    def value_at(self, i: int):
        if not 0 <= i < self.count:
            raise IndexError(f"axis {self.name}: index {i} out of range")
        if self.kind == "choice":
            return self.choices[i]
        if self.kind == "int":
            return int(self.min) + i
        v = _dec(self.min) + i * _dec(self.step)
        return int(v) if self._integral else float(v)

    def values(self) -> list:
        return [self.value_at(i) for i in range(self.count)]

    def index_of(self, value) -> int:
        if self.kind == "choice":
            for i, c in enumerate(self.choices):
                if c == value and type(c) is type(value):
                    return i
            raise ValueError(f"{value!r} is not a value of axis {self.name}")
        if isinstance(value, bool):
            raise ValueError(f"{value!r} is not a value of axis {self.name}")
        if self.kind == "int":
            i = int(value) - int(self.min)
            if value != int(value):
                raise ValueError(f"{value!r} is not a value of axis {self.name}")
        else:
            q = (_dec(value) - _dec(self.min)) / _dec(self.step)
            i = int(q.to_integral_value())
            if abs(q - i) > Decimal("1e-9"):
                raise ValueError(f"{value!r} is not a value of axis {self.name}")
        if not 0 <= i < self.count:
            raise ValueError(f"{value!r} is outside axis {self.name}")
        return i

    def __contains__(self, value) -> bool:
        try:
            self.index_of(value)
            return True
        except (ValueError, TypeError, ArithmeticError):
            return False

    def to_dict(self) -> dict:
        if self.kind == "choice":
            return {"name": self.name, "kind": "choice", "values": list(self.choices)}
        d = {"name": self.name, "kind": self.kind, "min": self.min, "max": self.max}
        if self.kind == "grid":
            d["step"] = self.step
        return d


@dataclass(frozen=True)
class HyperparameterSpace:
    method: str
    axes: tuple[Axis, ...]

    def __post_init__(self):
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate axis names in {self.method} space")

    def axis(self, name: str) -> Axis:
        for a in self.axes:
            if a.name == name:
                return a
        raise KeyError(name)

    @property
    def names(self) -> list[str]:
        return [a.name for a in self.axes]

    def to_dict(self) -> dict:
        return {"method": self.method, "axes": [a.to_dict() for a in self.axes]}


@dataclass(frozen=True)
class Hypes:
    """One concrete value per axis of a method's space."""

    method: str
    values: dict

    @property
    def key(self) -> tuple:
        return tuple(self.values.items())

    def __hash__(self):
        return hash((self.method, tuple((k, repr(v)) for k, v in self.values.items())))

    def __getitem__(self, name):
        return self.values[name]

    def get(self, name, default=None):
        return self.values.get(name, default)


def axis_values(a: Axis) -> list:
    return a.values()


def axis_counts(space: HyperparameterSpace) -> dict[str, int]:
    return {a.name: a.count for a in space.axes}


def cardinality(space: HyperparameterSpace) -> int:
    """Exact pool size (Python integers, no overflow)."""
    return math.prod(a.count for a in space.axes)


def dfnn_cardinality_report(space: HyperparameterSpace) -> dict:
    """Computed DFNN axis counts and pool size next to the quoted factors.

    The categorical axes are folded into one factor to line up with the quoted list.
    """
    counts = axis_counts(space)
    numeric = [a.name for a in space.axes if a.kind != "choice"]
    categorical = math.prod(a.count for a in space.axes if a.kind == "choice")
    return {
        "counts": counts,
        "factors": [counts[n] for n in numeric] + [categorical],
        "cardinality": cardinality(space),
        "quoted_factors": list(QUOTED_DFNN_FACTORS),
        "quoted_product": math.prod(QUOTED_DFNN_FACTORS),
    }


def validate_hypes(space: HyperparameterSpace, h: Hypes) -> None:
    missing = [n for n in space.names if n not in h.values]
    foreign = [n for n in h.values if n not in space.names]
    if missing:
        raise UsageError("HYPES", f"{space.method} setting lacks axis {missing[0]!r}")
    if foreign:
        raise UsageError("HYPES", f"{space.method} setting has foreign axis {foreign[0]!r}")
    for a in space.axes:
        if h.values[a.name] not in a:
            raise UsageError("HYPES", f"value {h.values[a.name]!r} not on axis {a.name!r}")


def sample_hypes(space: HyperparameterSpace, n: int, seed: int, distinct: bool = True) -> list[Hypes]:
    """Draw n settings by independent uniform choice per axis.

    With ``distinct`` (the default) repeated settings are rejected and redrawn.
    """
    if n <= 0:
        raise UsageError("N_HYPES", f"n must be positive, got {n}")
    if distinct and n > cardinality(space):
        raise UsageError("N_HYPES", f"cannot draw {n} distinct settings from a pool of {cardinality(space)}")
    rng = np.random.default_rng(seed)
    counts = [a.count for a in space.axes]
    seen: set = set()
    out = []
    while len(out) < n:
        idx = tuple(int(rng.integers(c)) for c in counts)
        if distinct:
            if idx in seen:
                continue
            seen.add(idx)
        out.append(Hypes(space.method, {a.name: a.value_at(i) for a, i in zip(space.axes, idx)}))
    return out


# --- built-in spaces --------------------------------------------------------------------
# Bounds given as "N" / "N/2" depend on the number of cases and are resolved at build time.

_CLASS_WEIGHT = {"name": "class_weight", "kind": "choice", "values": ["balanced", "none"]}
_CRITERION = {"name": "criterion", "kind": "choice", "values": ["gini", "entropy", "log_loss"]}
_TOL = {"name": "tol", "kind": "grid", "min": 0.00001, "max": 0.01, "step": 0.00005}
_MAX_ITER = {"name": "max_iter", "kind": "int", "min": 5, "max": 1000}

BUILTIN_SPACES: dict[str, list[dict]] = {
    "DFNN": [
        {"name": "epochs", "kind": "grid", "min": 5, "max": 1001, "step": 3},
        {"name": "batch_size", "kind": "int", "min": 1, "max": "N"},
        {"name": "learning_rate", "kind": "grid", "min": 0.001, "max": 0.3, "step": 0.001},
        {"name": "dropout_rate", "kind": "grid", "min": 0, "max": 0.9, "step": 0.01},
        {"name": "momentum", "kind": "grid", "min": 0.1, "max": 0.9, "step": 0.01},
        {"name": "decay", "kind": "grid", "min": 0, "max": 0.3, "step": 0.001},
        {"name": "l1_weight", "kind": "grid", "min": 0, "max": 0.3, "step": 0.001},
        {"name": "l2_weight", "kind": "grid", "min": 0, "max": 0.3, "step": 0.001},
        {"name": "n_hidden_layers", "kind": "int", "min": 1, "max": 4},
        {"name": "n_hidden_nodes", "kind": "int", "min": 1, "max": "N"},
        {"name": "optimizer", "kind": "choice", "values": ["SGD", "Adam", "Adagrad", "Nadam", "Adamax"]},
        {"name": "initializer", "kind": "choice",
         "values": ["constant", "glorot_normal", "glorot_uniform", "he_normal", "he_uniform"]},
        {"name": "input_activation", "kind": "choice", "values": ["relu", "sigmoid", "softmax", "tanh"]},
        {"name": "hidden_activation", "kind": "choice", "values": ["relu", "sigmoid", "softmax", "tanh"]},
        {"name": "output_activation", "kind": "choice", "values": ["sigmoid"]},
        {"name": "loss", "kind": "choice", "values": ["binary_crossentropy"]},
    ],
    "ADB": [
        {"name": "base_estimator", "kind": "choice", "values": ["stump"]},
        {"name": "n_estimators", "kind": "int", "min": 1, "max": 1001},
        {"name": "learning_rate", "kind": "grid", "min": 0.001, "max": 0.101, "step": 0.001},
        {"name": "algorithm", "kind": "choice", "values": ["SAMME"]},
    ],
    "NB": [
        {"name": "alpha", "kind": "grid", "min": 0.00001, "max": 100, "step": 0.00001},
        {"name": "min_categories", "kind": "int", "min": 5, "max": 16},
        {"name": "fit_prior", "kind": "choice", "values": [True, False]},
    ],
    "DT": [
        _CRITERION,
        {"name": "splitter", "kind": "choice", "values": ["best", "random"]},
        {"name": "max_depth", "kind": "int", "min": 1, "max": 100},
        {"name": "min_samples_split", "kind": "int", "min": 2, "max": "N"},
        {"name": "min_samples_leaf", "kind": "int", "min": 2, "max": "N/2"},
        {"name": "min_weight_fraction_leaf", "kind": "grid", "min": 0, "max": 0.5, "step": 0.001},
        {"name": "max_features", "kind": "int", "min": 1, "max": 17},
        {"name": "max_leaf_nodes", "kind": "int", "min": 2, "max": "N"},
        {"name": "min_impurity_decrease", "kind": "grid", "min": 0, "max": 0.01, "step": 0.001},
        _CLASS_WEIGHT,
    ],
    "KNN": [
        {"name": "n_neighbors", "kind": "int", "min": 1, "max": 100},
        {"name": "weights", "kind": "choice", "values": ["uniform", "distance", "none"]},
        {"name": "algorithm", "kind": "choice", "values": ["auto", "ball_tree", "kd_tree", "brute"]},
        {"name": "leaf_size", "kind": "int", "min": 1, "max": "N"},
    ],
    "LASSO": [
        _MAX_ITER, _TOL,
        {"name": "C", "kind": "grid", "min": 0, "max": 100, "step": 0.00005},
        _CLASS_WEIGHT,
        {"name": "solver", "kind": "choice", "values": ["liblinear", "saga"]},
    ],
    "LR": [
        _MAX_ITER, _TOL,
        {"name": "C", "kind": "grid", "min": 0, "max": 100, "step": 0.005},
        _CLASS_WEIGHT,
        {"name": "penalty", "kind": "choice", "values": ["none", "l1", "l2", "elasticnet"]},
    ],
    "RaF": [
        {"name": "n_estimators", "kind": "int", "min": 1, "max": 1000},
        _CRITERION,
        {"name": "max_depth", "kind": "int", "min": 1, "max": 101},
        {"name": "min_samples_split", "kind": "int", "min": 2, "max": "N"},
        {"name": "min_samples_leaf", "kind": "int", "min": 1, "max": "N/2"},
        {"name": "min_weight_fraction_leaf", "kind": "grid", "min": 0, "max": 0.5, "step": 0.001},
        {"name": "max_features", "kind": "int", "min": 1, "max": 17},
        {"name": "max_leaf_nodes", "kind": "int", "min": 2, "max": "N/2"},
        {"name": "min_impurity_decrease", "kind": "grid", "min": 0, "max": 0.01, "step": 0.001},
        _CLASS_WEIGHT,
    ],
    "SVC": [
        {"name": "C", "kind": "grid", "min": 0, "max": 100, "step": 0.005},
        {"name": "kernel", "kind": "choice", "values": ["linear", "poly", "rbf", "sigmoid"]},
        {"name": "degree", "kind": "int", "min": 0, "max": 5},
        {"name": "gamma", "kind": "choice", "values": ["scale", "auto"]},
        {"name": "shrinking", "kind": "choice", "values": [True, False]},
        _TOL, _CLASS_WEIGHT, _MAX_ITER,
    ],
    "XGB": [
        {"name": "booster", "kind": "choice", "values": ["gbtree", "gblinear", "dart"]},
        {"name": "eta", "kind": "grid", "min": 0.001, "max": 0.1, "step": 0.001},
        {"name": "gamma", "kind": "grid", "min": 0, "max": 10, "step": 0.01},
        {"name": "max_depth", "kind": "int", "min": 1, "max": 100},
        {"name": "subsample", "kind": "grid", "min": 0.01, "max": 1, "step": 0.01},
        {"name": "sampling_method", "kind": "choice", "values": ["uniform", "gradient_based"]},
        {"name": "alpha", "kind": "grid", "min": 0, "max": 100, "step": 0.00001},
        {"name": "lambda", "kind": "grid", "min": 0, "max": 100, "step": 0.00001},
        {"name": "tree_method", "kind": "choice", "values": ["auto", "exact", "approx", "hist"]},
        {"name": "objective", "kind": "choice", "values": ["binary:logistic"]},
    ],
}

# Narrowed bounds on the cost-dominating axes, for single-machine runs.
DESK_OVERRIDES: dict[str, dict[str, dict]] = {
    "DFNN": {
        "epochs": {"min": 5, "max": 101, "step": 3},
        "batch_size": {"min": 32, "max": "N"},
        "n_hidden_nodes": {"min": 1, "max": 32},
    },
    "RaF": {"n_estimators": {"min": 1, "max": 100}},
    "ADB": {"n_estimators": {"min": 1, "max": 201}},
}


def _resolve(bound, n_cases):
    if isinstance(bound, str):
        if n_cases is None:
            raise UsageError("SPACE", f"bound {bound!r} needs the number of cases")
        if bound == "N":
            return int(n_cases)
        if bound == "N/2":
            return int(n_cases) // 2
        raise UsageError("SPACE", f"unknown symbolic bound {bound!r}")
    return bound


def axis_from_dict(d: dict, n_cases: int | None = None) -> Axis:
    kind = d["kind"]
    if kind == "choice":
        return Axis.explicit(d["name"], *d["values"])
    lo, hi = _resolve(d["min"], n_cases), _resolve(d["max"], n_cases)
    if kind == "int":
        return Axis.integers(d["name"], lo, max(lo, hi))
    return Axis.grid(d["name"], lo, hi, d["step"])


def space_from_dict(method: str, axes: list[dict], n_cases: int | None = None) -> HyperparameterSpace:
    return HyperparameterSpace(method, tuple(axis_from_dict(a, n_cases) for a in axes))


def builtin_space(method: str, n_cases: int | None = None, scale: str = "full") -> HyperparameterSpace:
    """The space for ``method``; data-dependent bounds are resolved against ``n_cases``.

    ``scale="desk"`` narrows a few expensive axes (see DESK_OVERRIDES).
    """
    method = check_method(method)
    axes = [dict(a) for a in BUILTIN_SPACES[method]]
    if scale == "desk":
        over = DESK_OVERRIDES.get(method, {})
        axes = [{**a, **over.get(a["name"], {})} for a in axes]
    elif scale != "full":
        raise UsageError("SPACE", f"unknown scale {scale!r}")
    return space_from_dict(method, axes, n_cases)


def load_space_file(path, n_cases: int | None = None) -> HyperparameterSpace:
    with open(path) as f:
        d = json.load(f)
    return space_from_dict(check_method(d["method"]), d["axes"], n_cases)


def check_method(token: str) -> str:
    if token in METHODS:
        return token
    lowered = {m.lower(): m for m in METHODS}
    if token.lower() in lowered:
        return lowered[token.lower()]
    hint = {"svm": "SVC", "rf": "RaF", "adaboost": "ADB", "xgboost": "XGB",
            "dnn": "DFNN", "dnm": "DFNN", "knn": "KNN"}.get(token.lower())
    msg = f"unknown method {token!r}; valid methods: {', '.join(METHODS)}"
    if hint:
        msg += f" (did you mean {hint!r}?)"
    raise UsageError("METHOD", msg)

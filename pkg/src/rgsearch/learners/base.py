"""Common model surface, class weighting, and the versioned JSON model dump."""
from __future__ import annotations

import json

import numpy as np

from ..errors import DataError, UsageError

FORMAT_VERSION = 1

_REGISTRY: dict[str, type] = {}


def register(cls):
    _REGISTRY[cls.__name__] = cls
    return cls


class Model:
    """A fitted binary classifier scoring encoded rows with P(y = 1)."""

    method = "?"
    encoding = "onehot"

    def __init__(self):
        self.n_inputs = None
        self.warnings: list[str] = []

    def _check_input(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if self.n_inputs is not None and X.shape[1] != self.n_inputs:
            raise UsageError("DIMENSION", f"{self.method}: expected {self.n_inputs} inputs, got {X.shape[1]}")
        return X

    def predict_proba(self, X) -> np.ndarray:
        """Positive-class probability for each row of X (encoded under ``self.encoding``)."""
        return np.clip(self._score(self._check_input(X)), 0.0, 1.0)

    def predict_onehot(self, X) -> np.ndarray:
        """Score one-hot rows; identical to predict_proba for one-hot models."""
        return self.predict_proba(X)

    def _score(self, X):
        raise NotImplementedError


def class_weights(y, mode) -> np.ndarray:
    """Per-case weights: 'balanced' gives n / (2 n_c), anything else 1."""
    y = np.asarray(y).astype(int)
    w = np.ones(len(y))
    if mode == "balanced":
        n = len(y)
        for c in (0, 1):
            nc = int((y == c).sum())
            if nc:
                w[y == c] = n / (2.0 * nc)
    return w


def require_two_classes(y) -> None:
    y = np.asarray(y)
    if y.size == 0:
        raise DataError("EMPTY", "no training cases")
    if np.unique(y).size < 2:
        raise DataError("SINGLE_CLASS", "training data contains a single class")


# --- serialization ------------------------------------------------------------------------

def _pack(obj):
    if isinstance(obj, Model) or type(obj).__name__ in _REGISTRY:
        return {"__model__": type(obj).__name__, "state": {k: _pack(v) for k, v in vars(obj).items()}}
    if isinstance(obj, np.ndarray):
        return {"__ndarray__": obj.ravel().tolist(), "dtype": str(obj.dtype), "shape": list(obj.shape)}
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, (list, tuple)):
        return [_pack(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _pack(v) for k, v in obj.items()}
    if isinstance(obj, float) and not np.isfinite(obj):
        return {"__float__": repr(obj)}
    return obj


def _unpack(obj):
    if isinstance(obj, dict):
        if "__model__" in obj:
            cls = _REGISTRY[obj["__model__"]]
            m = cls.__new__(cls)
            for k, v in obj["state"].items():
                setattr(m, k, _unpack(v))
            return m
        if "__ndarray__" in obj:
            return np.array(obj["__ndarray__"], dtype=obj["dtype"]).reshape(obj["shape"])
        if "__float__" in obj:
            return float(obj["__float__"])
        return {k: _unpack(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_unpack(v) for v in obj]
    return obj


def dump_model(model: Model) -> str:
    return json.dumps({"format": "rgsearch-model", "version": FORMAT_VERSION,
                       "method": model.method, "model": _pack(model)}, sort_keys=True) + "\n"


def load_model(text: str) -> Model:
    d = json.loads(text)
    if d.get("format") != "rgsearch-model":
        raise DataError("MODEL", "not a model dump")
    if d.get("version") != FORMAT_VERSION:
        raise DataError("MODEL", f"unsupported model dump version {d.get('version')}")
    return _unpack(d["model"])

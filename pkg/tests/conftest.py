import numpy as np
import pytest

from rgsearch.data import Column, Dataset, Schema
from rgsearch.synthetic import PlantedSignal


def make_schema(cards, prefix="f"):
    return Schema(tuple(Column(f"{prefix}{j}", tuple(f"v{i}" for i in range(k))) for j, k in enumerate(cards)))


def make_dataset(n_pos, n_neg, cards=(2, 3, 4), seed=0):
    """Random categorical cases with a fixed class count (positives first)."""
    rng = np.random.default_rng(seed)
    n = n_pos + n_neg
    X = np.column_stack([rng.integers(0, k, n) for k in cards]) if cards else np.zeros((n, 0), int)
    y = np.r_[np.ones(n_pos, int), np.zeros(n_neg, int)]
    return Dataset(make_schema(cards), X, y)


def signal_dataset(n=200, cards=(2, 3, 3, 2), seed=0):
    """Cases whose outcome leans on the first column, so every learner finds some signal."""
    rng = np.random.default_rng(seed)
    X = np.column_stack([rng.integers(0, k, n) for k in cards])
    p = np.where(X[:, 0] == 1, 0.8, 0.2)
    y = (rng.random(n) < p).astype(int)
    y[:2] = [0, 1]
    return Dataset(make_schema(cards), X, y)


@pytest.fixture(scope="session")
def planted():
    return PlantedSignal().generate()


@pytest.fixture
def toy():
    return signal_dataset()

"""Planted-signal generator with a known Bayes-optimal AUC."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .data import Column, Dataset, Schema


@dataclass(frozen=True)
class PlantedSignal:
    n_cases: int = 2000
    n_predictors: int = 12
    informative: tuple = (1, 4, 8)
    weight: float = 2.5
    seed: int = 0

    def cardinalities(self) -> list[int]:
        # informative columns are ternary; noise columns cycle through 2, 3, 4 levels
        return [3 if j in self.informative else 2 + j % 3 for j in range(self.n_predictors)]

    def schema(self) -> Schema:
        cols = []
        for j, k in enumerate(self.cardinalities()):
            cols.append(Column(f"x{j + 1:02d}", tuple(f"c{v}" for v in range(k))))
        return Schema(tuple(cols))

    def informative_names(self) -> list[str]:
        return [f"x{j + 1:02d}" for j in self.informative]

    def logit(self, X) -> np.ndarray:
        X = np.asarray(X)
        s = X[:, list(self.informative)].sum(1)
        return self.weight * (s - len(self.informative))

    def generate(self) -> Dataset:
        rng = np.random.default_rng(self.seed)
        cards = self.cardinalities()
        X = np.column_stack([rng.integers(0, k, self.n_cases) for k in cards])
        p = 1.0 / (1.0 + np.exp(-self.logit(X)))
        y = (rng.random(self.n_cases) < p).astype(np.int8)
        return Dataset(self.schema(), X, y, np.arange(self.n_cases))

    def bayes_auc(self) -> float:
        """Population AUC of the true P(y=1 | x), by exact enumeration of the informative cells."""
        m = len(self.informative)
        cells = np.array(list(itertools.product(range(3), repeat=m)))
        s = self.weight * (cells.sum(1) - m)
        p = 1.0 / (1.0 + np.exp(-s))
        mass = np.full(len(cells), 1.0 / len(cells))
        pos, neg = mass * p, mass * (1 - p)
        gt = (s[:, None] > s[None, :]) + 0.5 * (s[:, None] == s[None, :])
        return float(pos @ gt @ neg / (pos.sum() * neg.sum()))


def planted_dataset(seed: int = 0, n_cases: int = 2000) -> Dataset:
    return PlantedSignal(n_cases=n_cases, seed=seed).generate()

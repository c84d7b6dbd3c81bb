"""Categorical dataset handling: schema, loading, splitting, fold plans, encoding."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError

OUTCOME_CATEGORIES = ("no", "yes")
CASE_ID_COLUMN = "case_id"


@dataclass(frozen=True)
class Column:
    name: str
    categories: tuple[str, ...]

    @property
    def cardinality(self) -> int:
        return len(self.categories)


@dataclass(frozen=True)
class Schema:
    """Ordered predictor columns with closed vocabularies, plus a binary outcome."""

    columns: tuple[Column, ...]
    outcome: str = "metastasis"

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise DataError("SCHEMA", "duplicate column names in schema")
        if self.outcome in names:
            raise DataError("SCHEMA", f"outcome column {self.outcome!r} listed as predictor")
        for c in self.columns:
            if len(c.categories) < 2:
                raise DataError("SCHEMA", f"column {c.name!r} has fewer than 2 categories")
            if len(set(c.categories)) != len(c.categories):
                raise DataError("SCHEMA", f"column {c.name!r} has duplicate categories")

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise DataError("UNKNOWN_COLUMN", f"unknown column {name!r}")

    def to_dict(self) -> dict:
        return {
            "outcome": {"name": self.outcome, "categories": list(OUTCOME_CATEGORIES)},
            "columns": [{"name": c.name, "categories": list(c.categories)} for c in self.columns],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Schema":
        outcome = d["outcome"]
        if isinstance(outcome, dict):
            if list(outcome.get("categories", OUTCOME_CATEGORIES)) != list(OUTCOME_CATEGORIES):
                raise DataError("SCHEMA", "outcome categories must be [no, yes]")
            outcome = outcome["name"]
        cols = tuple(Column(c["name"], tuple(str(v) for v in c["categories"])) for c in d["columns"])
        return cls(cols, outcome)


def load_schema(path) -> Schema:
    try:
        with open(path) as f:
            return Schema.from_dict(json.load(f))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as e:
        raise DataError("SCHEMA", f"cannot read schema {path}: {e}") from e


def save_schema(schema: Schema, path) -> None:
    Path(path).write_text(json.dumps(schema.to_dict(), indent=2) + "\n")


def load_feature_list(path) -> list[str]:
    """One column name per line; blank lines and '#' comments are skipped."""
    names = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            names.append(line)
    return names


@dataclass(frozen=True, eq=False)
class Dataset:
    schema: Schema
    X: np.ndarray  # (n_cases, n_predictors) category indices
    y: np.ndarray  # (n_cases,) 0/1
    case_ids: np.ndarray = field(default=None)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.int64).reshape(-1, len(self.schema.columns))
        y = np.asarray(self.y, dtype=np.int64).reshape(-1)
        if X.shape[0] != y.shape[0]:
            raise DataError("SHAPE", "X and y disagree on the number of cases")
        if self.case_ids is None:
            ids = np.arange(X.shape[0], dtype=np.int64)
        else:
            ids = np.asarray(self.case_ids, dtype=np.int64).reshape(-1)
        cards = np.array([c.cardinality for c in self.schema.columns], dtype=np.int64)
        if X.size and ((X < 0).any() or (X >= cards).any()):
            raise DataError("CATEGORY", "category index out of range")
        if y.size and not np.isin(y, (0, 1)).all():
            raise DataError("CATEGORY", "outcome must be 0/1")
        for arr in (X, y, ids):
            arr.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "case_ids", ids)

    @property
    def n_cases(self) -> int:
        return int(self.y.shape[0])

    @property
    def n_positive(self) -> int:
        return int(self.y.sum())

    @property
    def n_negative(self) -> int:
        return self.n_cases - self.n_positive

    @property
    def n_predictors(self) -> int:
        return len(self.schema.columns)

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(self.schema, self.X[rows], self.y[rows], self.case_ids[rows])

    def __repr__(self):
        return (f"Dataset(n_cases={self.n_cases}, n_positive={self.n_positive}, "
                f"n_predictors={self.n_predictors})")


def load_dataset(path, schema: Schema) -> Dataset:
    """Read a comma-delimited file with a header row of schema names (any order).

    An optional ``case_id`` column carries stable case identifiers through splits.
    """
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as e:
        raise DataError("IO", f"cannot open {path}: {e}") from e
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise DataError("EMPTY", f"{path}: empty file")
        header = [h.strip() for h in header]
        needed = schema.names + [schema.outcome]
        for name in needed:
            if name not in header:
                raise DataError("MISSING_COLUMN", f"{path}: missing column {name!r}")
        extra = [h for h in header if h not in needed and h != CASE_ID_COLUMN]
        if extra:
            raise DataError("UNKNOWN_COLUMN", f"{path}: unknown column {extra[0]!r}")
        pos = {h: i for i, h in enumerate(header)}
        lookup = [{tok: j for j, tok in enumerate(c.categories)} for c in schema.columns]
        X, y, ids = [], [], []
        for r, row in enumerate(reader):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DataError("ROW_LENGTH", f"{path}: row {r} has {len(row)} cells, expected {len(header)}")
            codes = []
            for c, table in zip(schema.columns, lookup):
                tok = row[pos[c.name]].strip()
                if tok == "":
                    raise DataError("MISSING_VALUE", f"{path}: row {r}, column {c.name!r}: missing value")
                if tok not in table:
                    raise DataError("UNKNOWN_CATEGORY",
                                    f"{path}: row {r}, column {c.name!r}: unknown category {tok!r}")
                codes.append(table[tok])
            out = row[pos[schema.outcome]].strip().lower()
            if out not in OUTCOME_CATEGORIES:
                raise DataError("UNKNOWN_CATEGORY",
                                f"{path}: row {r}, column {schema.outcome!r}: unknown category {out!r}")
            X.append(codes)
            y.append(OUTCOME_CATEGORIES.index(out))
            if CASE_ID_COLUMN in pos:
                try:
                    ids.append(int(row[pos[CASE_ID_COLUMN]]))
                except ValueError as e:
                    raise DataError("CASE_ID", f"{path}: row {r}: bad case_id") from e
    if not y:
        raise DataError("EMPTY", f"{path}: no data rows")
    X = np.array(X, dtype=np.int64).reshape(len(y), len(schema.columns))
    return Dataset(schema, X, np.array(y), np.array(ids) if ids else None)


def write_dataset(d: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([CASE_ID_COLUMN] + d.schema.names + [d.schema.outcome])
        for cid, row, label in zip(d.case_ids, d.X, d.y):
            w.writerow([int(cid)] + [c.categories[v] for c, v in zip(d.schema.columns, row)]
                       + [OUTCOME_CATEGORIES[label]])


def _round_half_up(x: Decimal) -> int:
    return int(x.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def stratified_holdout(d: Dataset, ratio: float, seed: int) -> tuple[Dataset, Dataset]:
    """Split into (train_test, validation), keeping round-half-up(ratio * n_c) of each class."""
    if not 0.0 < ratio < 1.0:
        raise DataError("RATIO", f"ratio must lie in (0, 1), got {ratio}")
    rng = np.random.default_rng(seed)
    keep = np.zeros(d.n_cases, dtype=bool)
    for c in (0, 1):
        idx = np.flatnonzero(d.y == c)
        if idx.size < 2:
            raise DataError("CLASS_SIZE", f"class {c} has {idx.size} cases; need at least 2")
        n_keep = _round_half_up(Decimal(str(ratio)) * idx.size)
        keep[rng.permutation(idx)[:n_keep]] = True
    return d.take(np.flatnonzero(keep)), d.take(np.flatnonzero(~keep))


@dataclass(frozen=True, eq=False)
class FoldPlan:
    k: int
    assignment: np.ndarray  # per-case fold id, aligned with the dataset rows

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64)
        a.flags.writeable = False
        object.__setattr__(self, "assignment", a)

    def split(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        """(train rows, test rows) for one fold."""
        test = self.assignment == fold
        return np.flatnonzero(~test), np.flatnonzero(test)

    def __eq__(self, other):
        return (isinstance(other, FoldPlan) and self.k == other.k
                and np.array_equal(self.assignment, other.assignment))


def make_folds(d: Dataset, k: int, seed: int) -> FoldPlan:
    """Stratified k-fold plan; remainders go one-per-fold starting at fold 0."""
    if k < 2:
        raise DataError("FOLDS", f"k must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    assignment = np.full(d.n_cases, -1, dtype=np.int64)
    for c in (0, 1):
        idx = np.flatnonzero(d.y == c)
        if idx.size < k:
            raise DataError("FOLDS", f"k={k} exceeds the {idx.size} cases of class {c}")
        q, r = divmod(idx.size, k)
        sizes = [q + 1 if f < r else q for f in range(k)]
        assignment[rng.permutation(idx)] = np.repeat(np.arange(k), sizes)
    return FoldPlan(k, assignment)


def write_folds(plan: FoldPlan, d: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([CASE_ID_COLUMN, "fold"])
        for cid, f in zip(d.case_ids, plan.assignment):
            w.writerow([int(cid), int(f)])


def load_folds(path, d: Dataset) -> FoldPlan:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    by_id = {int(r[CASE_ID_COLUMN]): int(r["fold"]) for r in rows}
    try:
        assignment = np.array([by_id[int(c)] for c in d.case_ids], dtype=np.int64)
    except KeyError as e:
        raise DataError("FOLDS", f"{path}: no fold for case {e.args[0]}") from e
    return FoldPlan(int(assignment.max()) + 1, assignment)


def subset_features(d: Dataset, keep: Sequence[str]) -> Dataset:
    if not keep:
        raise DataError("FEATURES", "empty feature list")
    names = d.schema.names
    for name in keep:
        if name == d.schema.outcome:
            raise DataError("FEATURES", f"{name!r} is the outcome column and cannot be kept as a predictor")
        if name not in names:
            raise DataError("UNKNOWN_COLUMN", f"unknown column {name!r}")
    wanted = set(keep)
    cols = [i for i, n in enumerate(names) if n in wanted]
    schema = Schema(tuple(d.schema.columns[i] for i in cols), d.schema.outcome)
    return Dataset(schema, d.X[:, cols], d.y, d.case_ids)


@dataclass(frozen=True, eq=False)
class EncodedMatrix:
    values: np.ndarray
    layout: dict  # (column name, category) -> coordinate
    mode: str
    blocks: tuple  # per source column: slice of coordinates

    @property
    def width(self) -> int:
        return self.values.shape[1]


def column_blocks(schema: Schema, mode: str) -> tuple:
    if mode == "ordinal":
        return tuple(slice(i, i + 1) for i in range(len(schema.columns)))
    out, start = [], 0
    for c in schema.columns:
        out.append(slice(start, start + c.cardinality))
        start += c.cardinality
    return tuple(out)


def encode(d: Dataset, mode: str = "onehot") -> EncodedMatrix:
    mode = mode.replace("-", "")
    if mode not in ("onehot", "ordinal"):
        raise ValueError(f"unknown encoding mode {mode!r}")
    blocks = column_blocks(d.schema, mode)
    if mode == "ordinal":
        values = d.X.astype(float)
        layout = {(c.name, cat): i for i, c in enumerate(d.schema.columns) for cat in c.categories}
    else:
        width = blocks[-1].stop if blocks else 0
        values = np.zeros((d.n_cases, width))
        layout = {}
        for j, (c, b) in enumerate(zip(d.schema.columns, blocks)):
            values[np.arange(d.n_cases), b.start + d.X[:, j]] = 1.0
            for i, cat in enumerate(c.categories):
                layout[(c.name, cat)] = b.start + i
    return EncodedMatrix(values, layout, mode, blocks)


def decode(m: EncodedMatrix, schema: Schema) -> np.ndarray:
    """Category-index matrix from an encoding (argmax within one-hot blocks)."""
    if m.mode == "ordinal":
        return np.rint(m.values).astype(np.int64)
    return np.stack([m.values[:, b].argmax(axis=1) for b in m.blocks], axis=1).astype(np.int64)

"""45-column node feature vectors and column standardization."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .graph import SyntaxGraph
from .metrics import METRICS, NodeMetricTable, read_keyed_csv, write_keyed_csv

FEATURES: tuple[str, ...] = (
    tuple(f"{m}.self" for m in METRICS)
    + tuple(f"{m}.nmean" for m in METRICS)
    + tuple(f"{m}.nstd" for m in METRICS)
)


@dataclass
class FeatureMatrix:
    keys: tuple
    values: np.ndarray
    columns: tuple[str, ...] = FEATURES

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[0] != len(self.keys):
            raise ValueError("values must have one row per key")
        if self.values.shape[1] != len(self.columns):
            raise ValueError(f"{self.values.shape[1]} values per row but {len(self.columns)} column names")

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]

    def write_csv(self, stream: TextIO) -> None:
        write_keyed_csv(stream, self.keys, self.columns, self.values)

    @classmethod
    def read_csv(cls, stream: TextIO) -> "FeatureMatrix":
        keys, cols, values = read_keyed_csv(stream)
        return cls(keys, values, tuple(cols))


def neighbor_stats(g: SyntaxGraph, table: NodeMetricTable) -> FeatureMatrix:
    """Append the mean and population std of every metric over each node's neighbors.

    Nodes without neighbors get zeros in both derived blocks.
    """
    if len(table) != g.n_nodes:
        raise ValueError("metric table and graph differ in node count")
    x = table.values
    a = g.adjacency()
    k = a.sum(axis=1)
    safe = np.where(k > 0, k, 1.0)[:, None]
    mean = (a @ x) / safe
    # deviations from the neighbor mean; E[x^2] - E[x]^2 cancels badly
    std = np.zeros_like(mean)
    for i, nb in enumerate(g.neighbors):
        if len(nb) > 1:
            dev = x[list(nb)] - mean[i]
            std[i] = np.sqrt((dev * dev).mean(axis=0))
    return FeatureMatrix(table.keys, np.hstack([x, mean, std]))


@dataclass
class Standardizer:
    columns: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray
    flagged: np.ndarray  # True where the column had zero variance at fit time

    def transform(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape[-1] != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} columns, got {values.shape[-1]}")
        scale = np.where(self.flagged, 1.0, self.std)
        z = (values - self.mean) / scale
        z[..., self.flagged] = 0.0
        return z

    def to_json(self) -> dict:
        return {
            c: {"mean": float(m), "std": float(s), "zero_variance": bool(f)}
            for c, m, s, f in zip(self.columns, self.mean, self.std, self.flagged)
        }

    @classmethod
    def from_json(cls, data: dict) -> "Standardizer":
        cols = tuple(data)
        return cls(cols,
                   np.array([data[c]["mean"] for c in cols], dtype=float),
                   np.array([data[c]["std"] for c in cols], dtype=float),
                   np.array([data[c]["zero_variance"] for c in cols], dtype=bool))

    def dump(self, stream: TextIO) -> None:
        json.dump(self.to_json(), stream, indent=2)
        stream.write("\n")


def fit_standardizer(values: np.ndarray, columns: tuple[str, ...]) -> Standardizer:
    values = np.asarray(values, dtype=float)
    if values.shape[0] < 2:
        raise ValueError("cannot standardize one observation")
    mean = values.mean(axis=0)
    std = values.std(axis=0)
    # spread relative to magnitude; exact constants give 0 here
    flagged = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    return Standardizer(tuple(columns), mean, std, flagged)


def standardize(matrix: FeatureMatrix) -> tuple[FeatureMatrix, Standardizer]:
    """Z-score every column with the population std; constant columns become zeros and are flagged."""
    st = fit_standardizer(matrix.values, matrix.columns)
    return FeatureMatrix(matrix.keys, st.transform(matrix.values), matrix.columns), st

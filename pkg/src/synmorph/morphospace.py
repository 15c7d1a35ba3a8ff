"""PCA morphospace of node feature vectors.

The covariance eigendecomposition uses cyclic Jacobi rotations: the matrices
are small (45x45) and Jacobi gives orthonormal eigenvectors to working
precision with a fully deterministic sequence of operations.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .features import FeatureMatrix, Standardizer
from .metrics import fmt


class JacobiError(RuntimeError):
    def __init__(self, residual: float, sweeps: int):
        self.residual = residual
        super().__init__(f"Jacobi did not converge in {sweeps} sweeps (off-diagonal norm {residual:.3e})")


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt((off * off).sum()))


def jacobi_eigh(matrix: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors (as columns) of a symmetric matrix.

    Sweeps every ``(p, q)`` pair in row order until the off-diagonal Frobenius
    norm is at most ``tol * max(1, ||A||_F)``. Output is unsorted.
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max(initial=0.0))):
        raise ValueError("matrix must be symmetric")
    a = (a + a.T) / 2.0
    v = np.eye(n)
    bound = tol * max(1.0, float(np.linalg.norm(a)))
    off = _off_norm(a)
    for _ in range(max_sweeps):
        if off <= bound:
            return np.diag(a).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        off = _off_norm(a)
    if off <= bound:
        return np.diag(a).copy(), v
    raise JacobiError(off, max_sweeps)


def covariance(x: np.ndarray) -> np.ndarray:
    """Sample covariance (divisor n-1) of the columns of ``x``."""
    x = np.asarray(x, dtype=float)
    d = x - x.mean(axis=0)
    return d.T @ d / (x.shape[0] - 1)


@dataclass
class MorphospaceModel:
    standardizer: Standardizer
    eigenvalues: np.ndarray
    loadings: np.ndarray  # columns are principal axes

    @property
    def columns(self) -> tuple[str, ...]:
        return self.standardizer.columns

    @property
    def explained_variance_ratio(self) -> np.ndarray:
        total = self.eigenvalues.sum()
        return self.eigenvalues / total if total > 0 else np.zeros_like(self.eigenvalues)

    def to_json(self) -> dict:
        k = len(self.eigenvalues)
        return {
            "standardizer": self.standardizer.to_json(),
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "explained_variance_ratio": [float(x) for x in self.explained_variance_ratio],
            "loadings": {
                "rows": list(self.columns),
                "cols": [f"PC{i + 1}" for i in range(k)],
                "values": [[float(x) for x in row] for row in self.loadings],
            },
        }

    @classmethod
    def from_json(cls, data: dict) -> "MorphospaceModel":
        return cls(Standardizer.from_json(data["standardizer"]),
                   np.array(data["eigenvalues"], dtype=float),
                   np.array(data["loadings"]["values"], dtype=float))

    def dump(self, stream: TextIO) -> None:
        json.dump(self.to_json(), stream, indent=1)
        stream.write("\n")


def identity_standardizer(columns: tuple[str, ...]) -> Standardizer:
    k = len(columns)
    return Standardizer(tuple(columns), np.zeros(k), np.ones(k), np.zeros(k, dtype=bool))


def fit_pca(z: FeatureMatrix | np.ndarray, standardizer: Standardizer | None = None) -> MorphospaceModel:
    """Principal axes of already z-scored data.

    Eigenpairs are sorted by decreasing eigenvalue and each axis is signed so
    that its largest-magnitude entry is positive. ``standardizer`` is stored
    for projecting raw features later; by default it is the identity.
    """
    values = z.values if isinstance(z, FeatureMatrix) else np.asarray(z, dtype=float)
    if values.shape[0] < 2:
        raise ValueError("PCA needs at least 2 rows")
    if standardizer is None:
        cols = z.columns if isinstance(z, FeatureMatrix) else tuple(f"x{i}" for i in range(values.shape[1]))
        standardizer = identity_standardizer(cols)
    evals, evecs = jacobi_eigh(covariance(values))
    order = np.argsort(-evals, kind="stable")
    evals, evecs = evals[order], evecs[:, order]
    for j in range(evecs.shape[1]):
        if evecs[np.argmax(np.abs(evecs[:, j])), j] < 0:
            evecs[:, j] = -evecs[:, j]
    # C order so products match a model reloaded from JSON bit for bit
    return MorphospaceModel(standardizer, evals, np.ascontiguousarray(evecs))


@dataclass
class ScoreMatrix:
    keys: tuple
    values: np.ndarray

    @property
    def columns(self) -> tuple[str, ...]:
        return tuple(f"PC{i + 1}" for i in range(self.values.shape[1]))

    def write_csv(self, stream: TextIO, n_components: int | None = None) -> None:
        k = self.values.shape[1] if n_components is None else min(n_components, self.values.shape[1])
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["surface", "upos", *self.columns[:k]])
        for key, row in zip(self.keys, self.values):
            w.writerow([key.surface, key.upos.value, *(fmt(x) for x in row[:k])])

    @classmethod
    def read_csv(cls, stream: TextIO) -> "ScoreMatrix":
        from .metrics import read_keyed_csv
        keys, _, values = read_keyed_csv(stream)
        return cls(keys, values)


def project(model: MorphospaceModel, z: FeatureMatrix | np.ndarray, keys: tuple = ()) -> ScoreMatrix:
    """PC coordinates of z-scored rows."""
    values = z.values if isinstance(z, FeatureMatrix) else np.atleast_2d(np.asarray(z, dtype=float))
    if isinstance(z, FeatureMatrix):
        keys = z.keys
    if values.shape[1] != model.loadings.shape[0]:
        raise ValueError(f"expected {model.loadings.shape[0]} columns, got {values.shape[1]}")
    return ScoreMatrix(tuple(keys), values @ model.loadings)


def cross_project(model: MorphospaceModel, features: FeatureMatrix) -> ScoreMatrix:
    """Standardize raw features with the model's stored means/stds, then project."""
    if features.values.shape[1] != len(model.columns):
        raise ValueError(f"expected {len(model.columns)} columns, got {features.values.shape[1]}")
    return project(model, model.standardizer.transform(features.values), features.keys)


def rgb_colors(scores: ScoreMatrix | np.ndarray) -> np.ndarray:
    """Min-max normalize PC1..PC3 independently into (r, g, b); constant channels are 0.5."""
    values = scores.values if isinstance(scores, ScoreMatrix) else np.asarray(scores, dtype=float)
    if values.shape[0] < 2:
        raise ValueError("colors need at least 2 rows")
    rgb = np.full((values.shape[0], 3), 0.5)
    for c in range(min(3, values.shape[1])):
        col = values[:, c]
        lo, hi = col.min(), col.max()
        if hi > lo:
            rgb[:, c] = (col - lo) / (hi - lo)
    return rgb


def write_colors(stream: TextIO, keys, rgb: np.ndarray) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["surface", "upos", "r", "g", "b"])
    for key, row in zip(keys, rgb):
        w.writerow([key.surface, key.upos.value, *(fmt(x) for x in row)])

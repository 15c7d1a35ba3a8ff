"""Global mean properties per language and their clustering across languages."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from .communities import Dendrogram, cut_assignment, ward_linkage
from .features import fit_standardizer
from .metrics import METRICS, NodeMetricTable, fmt
from .morphospace import MorphospaceModel, ScoreMatrix, fit_pca, project

# Mean-property columns with component size swapped for the mean neighbor degree.
NEIGHBOR_DEGREE_COLUMNS: tuple[str, ...] = METRICS[:-1] + ("neighbor_mean_degree",)


@dataclass
class LanguageProfile:
    language: str
    mode: str
    means: np.ndarray  # one per METRICS entry
    neighbor_mean_degree: float

    def vector(self, variant: str = "properties") -> np.ndarray:
        if variant == "properties":
            return self.means
        if variant == "neighbor_degree":
            return np.append(self.means[:-1], self.neighbor_mean_degree)
        raise ValueError(f"unknown profile variant {variant!r}")


def mean_properties(table: NodeMetricTable, language: str = "", mode: str = "inflected",
                    neighbor_degree: np.ndarray | None = None) -> LanguageProfile:
    """Column-wise means of the metric table.

    ``neighbor_degree`` holds each node's mean neighbor degree; its average
    fills the alternative column used in place of component size.
    """
    if len(table) == 0:
        raise ValueError("empty metric table")
    nmd = float(np.mean(neighbor_degree)) if neighbor_degree is not None else float("nan")
    return LanguageProfile(language, mode, table.values.mean(axis=0), nmd)


def write_profiles_csv(stream: TextIO, profiles: Sequence[LanguageProfile]) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["language", "mode", *METRICS, "neighbor_mean_degree"])
    for p in profiles:
        w.writerow([p.language, p.mode, *(fmt(x) for x in p.means), fmt(p.neighbor_mean_degree)])


def read_profiles_csv(stream: TextIO) -> list[LanguageProfile]:
    out = []
    for r in csv.DictReader(stream):
        out.append(LanguageProfile(r["language"], r["mode"],
                                   np.array([float(r[m]) for m in METRICS]),
                                   float(r["neighbor_mean_degree"])))
    return out


@dataclass
class LanguageComparison:
    languages: list[str]
    mode: str
    model: MorphospaceModel
    scores: ScoreMatrix
    dendrogram: Dendrogram
    labels: np.ndarray

    def write_scores_csv(self, stream: TextIO, n_components: int = 2) -> None:
        w = csv.writer(stream, lineterminator="\n")
        k = min(n_components, self.scores.values.shape[1])
        w.writerow(["language", *(f"PC{i + 1}" for i in range(k))])
        for lang, row in zip(self.languages, self.scores.values):
            w.writerow([lang, *(fmt(x) for x in row[:k])])

    def write_clusters_csv(self, stream: TextIO) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["language", "cluster"])
        for lang, lab in zip(self.languages, self.labels):
            w.writerow([lang, int(lab)])


def compare_languages(profiles: Sequence[LanguageProfile], n_clusters: int = 4,
                      variant: str = "properties") -> LanguageComparison:
    """Z-score profiles across languages, fit their PCA and Ward-cluster them.

    The dendrogram is built on the standardized mean vectors, not on the PC
    scores; the cut count is capped at the number of languages.
    """
    if len(profiles) < 3:
        raise ValueError("language comparison needs at least 3 profiles")
    modes = {p.mode for p in profiles}
    if len(modes) != 1:
        raise ValueError(f"profiles mix modes {sorted(modes)}")
    cols = METRICS if variant == "properties" else NEIGHBOR_DEGREE_COLUMNS
    x = np.vstack([p.vector(variant) for p in profiles])
    st = fit_standardizer(x, cols)
    z = st.transform(x)
    model = fit_pca(z, st)
    langs = [p.language for p in profiles]
    scores = project(model, z)
    dendro = ward_linkage(z)
    labels = cut_assignment(dendro, min(n_clusters, len(profiles))).labels
    return LanguageComparison(langs, modes.pop(), model, scores, dendro, labels)

"""Topological communities: Ward clustering of nodes in PC space and dendrogram cuts."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence, TextIO

import numpy as np

from .metrics import NodeMetricTable, fmt
from .morphospace import ScoreMatrix

TC_NAMES = ("SuperCore", "InnerConnectors", "OuterConnectors", "InnerPeriphery", "OuterPeriphery")


@dataclass
class Dendrogram:
    """Agglomeration history in the usual linkage-matrix convention.

    Leaves are ``0..n-1``; merge ``i`` creates cluster ``n + i``. Each merge is
    ``(a, b, distance, size)`` with ``a < b``.
    """

    n_leaves: int
    merges: list[tuple[int, int, float, int]]

    def __post_init__(self):
        if len(self.merges) != max(self.n_leaves - 1, 0):
            raise ValueError("a dendrogram over n leaves needs n-1 merges")

    def as_array(self) -> np.ndarray:
        return np.array([[a, b, d, s] for a, b, d, s in self.merges], dtype=float).reshape(-1, 4)

    def write_csv(self, stream: TextIO) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["step", "cluster_a", "cluster_b", "distance", "size", "new_cluster"])
        for i, (a, b, d, s) in enumerate(self.merges):
            w.writerow([i, a, b, fmt(d), s, self.n_leaves + i])

    @classmethod
    def read_csv(cls, stream: TextIO) -> "Dendrogram":
        rows = list(csv.DictReader(stream))
        merges = [(int(r["cluster_a"]), int(r["cluster_b"]), float(r["distance"]), int(r["size"]))
                  for r in rows]
        return cls(len(merges) + 1, merges)

    def newick(self, labels: Sequence[str] | None = None) -> str:
        """Newick string; branch lengths are half the merge-height differences."""
        n = self.n_leaves
        if labels is None:
            labels = [str(i) for i in range(n)]
        text = {i: _newick_label(labels[i]) for i in range(n)}
        height = {i: 0.0 for i in range(n)}
        for i, (a, b, d, _) in enumerate(self.merges):
            h = d / 2.0
            text[n + i] = "({}:{},{}:{})".format(
                text.pop(a), fmt(h - height[a]), text.pop(b), fmt(h - height[b]))
            height[n + i] = h
        (root,) = text.values()
        return root + ";"


def _newick_label(s: str) -> str:
    if any(c in s for c in " ()[]':;,"):
        return "'" + s.replace("'", "''") + "'"
    return s


def ward_linkage(points: np.ndarray) -> Dendrogram:
    """Ward agglomeration on Euclidean distances.

    Uses the Lance–Williams update on squared distances; reported distances are
    ``sqrt(2 |A||B| / (|A|+|B|)) * ||c_A - c_B||``. Ties in the minimum are
    broken by the smallest ``(cluster_a, cluster_b)`` id pair.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if n < 2:
        raise ValueError("clustering needs at least 2 rows")
    diff = x[:, None, :] - x[None, :, :]
    d2 = (diff * diff).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    ids = np.arange(n)  # cluster id held in each slot
    size = np.ones(n)
    active = np.ones(n, dtype=bool)
    merges = []
    for step in range(n - 1):
        m = d2.min()
        cand = np.argwhere(d2 == m)
        best = None
        for i, j in cand:
            if i < j:
                pair = (min(ids[i], ids[j]), max(ids[i], ids[j]))
                if best is None or pair < best[0]:
                    best = (pair, i, j)
        (ca, cb), i, j = best
        ni, nj = size[i], size[j]
        # Lance–Williams for Ward; new cluster lives in slot i
        nk = size
        upd = ((ni + nk) * d2[i] + (nj + nk) * d2[j] - nk * m) / (ni + nj + nk)
        upd[~active] = np.inf
        upd[i] = upd[j] = np.inf
        d2[i, :] = upd
        d2[:, i] = upd
        d2[j, :] = np.inf
        d2[:, j] = np.inf
        active[j] = False
        size[i] = ni + nj
        size[j] = 0
        ids[i] = n + step
        merges.append((int(ca), int(cb), float(np.sqrt(max(m, 0.0))), int(ni + nj)))
    return Dendrogram(n, merges)


def ward_dendrogram(scores: ScoreMatrix | np.ndarray, n_pcs: int = 3) -> Dendrogram:
    """Ward dendrogram over the first ``n_pcs`` score columns."""
    values = scores.values if isinstance(scores, ScoreMatrix) else np.asarray(scores, dtype=float)
    if n_pcs < 1:
        raise ValueError("n_pcs must be >= 1")
    return ward_linkage(values[:, :n_pcs])


@dataclass
class CommunityAssignment:
    n_c: int
    labels: np.ndarray
    names: dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.names:
            self.names = {k: f"TC-{k}" for k in range(self.n_c)}

    def members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.labels == k)

    def sizes(self) -> list[int]:
        return [int((self.labels == k).sum()) for k in range(self.n_c)]

    def write_csv(self, stream: TextIO, keys) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["surface", "upos", "community", "name"])
        for key, lab in zip(keys, self.labels):
            w.writerow([key.surface, key.upos.value, int(lab), self.names[int(lab)]])

    @classmethod
    def read_csv(cls, stream: TextIO) -> "CommunityAssignment":
        rows = list(csv.DictReader(stream))
        labels = np.array([int(r["community"]) for r in rows], dtype=np.int64)
        names = {int(r["community"]): r["name"] for r in rows}
        return cls(int(labels.max()) + 1 if len(labels) else 0, labels, dict(sorted(names.items())))


def cut_assignment(d: Dendrogram, n_c: int) -> CommunityAssignment:
    """Undo the last ``n_c - 1`` merges.

    Community ids run by decreasing size, then by smallest member index.
    """
    n = d.n_leaves
    if not 1 <= n_c <= n:
        raise ValueError(f"n_c must be in [1, {n}], got {n_c}")
    parent = list(range(2 * n - 1))

    def find(u: int) -> int:
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for step, (a, b, _, _) in enumerate(d.merges[: n - n_c]):
        parent[find(a)] = n + step
        parent[find(b)] = n + step
    groups: dict[int, list[int]] = {}
    for leaf in range(n):
        groups.setdefault(find(leaf), []).append(leaf)
    ordered = sorted(groups.values(), key=lambda g: (-len(g), g[0]))
    labels = np.empty(n, dtype=np.int64)
    for k, g in enumerate(ordered):
        labels[g] = k
    return CommunityAssignment(n_c, labels)


def label_communities(a: CommunityAssignment, table: NodeMetricTable) -> CommunityAssignment:
    """Name the five communities by decreasing mean degree; other cuts keep ``TC-k``.

    Equal mean degrees keep community-id order.
    """
    if len(table) != len(a.labels):
        raise ValueError("metric table does not cover the assignment")
    if a.n_c != 5:
        return CommunityAssignment(a.n_c, a.labels.copy())
    deg = table["degree"]
    means = [deg[a.labels == k].mean() for k in range(5)]
    ranking = sorted(range(5), key=lambda k: -means[k])
    names = {k: TC_NAMES[r] for r, k in enumerate(ranking)}
    return CommunityAssignment(5, a.labels.copy(), dict(sorted(names.items())))

"""Per-node topological properties of a syntax network.

All fifteen primary properties are computed here from the graph alone, with
formulas fixed so that results do not depend on any graph library:

degree, eigenvector centrality, betweenness, closeness, harmonic centrality,
pagerank, core number, onion layer, effective size, node clique number,
number of maximal cliques, clustering, square clustering, Burt constraint and
component size.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .graph import SyntaxGraph, connected_components

METRICS: tuple[str, ...] = (
    "degree",
    "eigenvector_centrality",
    "betweenness",
    "closeness",
    "harmonic",
    "pagerank",
    "core_number",
    "onion_layer",
    "effective_size",
    "node_clique_number",
    "number_of_cliques",
    "clustering",
    "square_clustering",
    "constraint",
    "component_size",
)


class ConvergenceError(RuntimeError):
    def __init__(self, what: str, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(f"{what} did not converge in {iterations} iterations (residual {residual:.3e})")


def degree_and_components(g: SyntaxGraph) -> tuple[np.ndarray, np.ndarray]:
    deg = g.degrees()
    size = np.zeros(g.n_nodes, dtype=np.int64)
    for comp in connected_components(g):
        size[comp] = len(comp)
    return deg, size


def _bfs_levels(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, list[np.ndarray]]:
    """All-sources BFS on a dense adjacency.

    Returns distances (-1 when unreachable), shortest-path counts and the list
    of boolean masks ``levels[d][s, v] = dist(s, v) == d``.
    """
    n = a.shape[0]
    dist = np.full((n, n), -1, dtype=np.int64)
    np.fill_diagonal(dist, 0)
    sigma = np.eye(n)
    frontier = np.eye(n, dtype=bool)
    levels = [frontier]
    d = 0
    while True:
        reach = (sigma * frontier) @ a
        new = (reach > 0) & (dist < 0)
        if not new.any():
            break
        d += 1
        dist[new] = d
        sigma[new] = reach[new]
        frontier = new
        levels.append(new)
    return dist, sigma, levels


def path_centralities(g: SyntaxGraph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Betweenness, closeness and harmonic centrality from unweighted BFS.

    Betweenness uses Brandes' dependency accumulation, run for all sources at
    once level by level, and is normalized by ``2 / ((n-1)(n-2))``. Closeness is
    ``(n-1) / sum of distances``; on a disconnected graph it is computed over
    the reachable set and scaled by ``(r-1)/(n-1)``.
    """
    n = g.n_nodes
    a = g.adjacency()
    dist, sigma, levels = _bfs_levels(a)

    delta = np.zeros((n, n))
    for d in range(len(levels) - 1, 1, -1):
        coef = np.where(levels[d], (1.0 + delta) / np.where(levels[d], sigma, 1.0), 0.0)
        delta += levels[d - 1] * sigma * (coef @ a)
    raw = delta.sum(axis=0)
    if n < 3:
        betweenness = np.zeros(n)
    else:
        betweenness = raw / ((n - 1) * (n - 2))

    reach = dist > 0
    r = reach.sum(axis=1)
    tot = np.where(reach, dist, 0).sum(axis=1).astype(float)
    closeness = np.zeros(n)
    ok = tot > 0
    closeness[ok] = r[ok] / tot[ok]
    if n > 1:
        closeness[ok] *= r[ok] / (n - 1)
    harmonic = np.where(reach, 1.0 / np.where(reach, dist, 1), 0.0).sum(axis=1)
    return betweenness, closeness, harmonic


def eigenvector_centrality(g: SyntaxGraph, tol: float = 1e-10, max_iter: int = 1000) -> np.ndarray:
    """Perron vector of the adjacency, unit Euclidean norm.

    Iterates ``x <- (A + I) x``; the shift leaves the eigenvectors unchanged and
    keeps the iteration from oscillating on bipartite graphs.
    """
    n = g.n_nodes
    if n == 0:
        return np.zeros(0)
    a = g.adjacency()
    x = np.full(n, 1.0 / np.sqrt(n))
    change = np.inf
    for _ in range(max_iter):
        y = a @ x + x
        norm = np.linalg.norm(y)
        if norm == 0:
            raise ConvergenceError("eigenvector centrality", np.inf, 0)
        y /= norm
        change = np.abs(y - x).max()
        x = y
        if change < tol:
            return x
    raise ConvergenceError("eigenvector centrality", float(change), max_iter)


def pagerank(g: SyntaxGraph, damping: float = 0.85, tol: float = 1e-10,
             max_iter: int = 1000) -> np.ndarray:
    """Stationary distribution of the damped random walk with uniform teleport.

    Mass sitting on isolated nodes is spread uniformly.
    """
    n = g.n_nodes
    if n == 0:
        return np.zeros(0)
    a = g.adjacency()
    deg = a.sum(axis=1)
    dangling = deg == 0
    inv = np.where(dangling, 0.0, 1.0 / np.where(dangling, 1.0, deg))
    x = np.full(n, 1.0 / n)
    change = np.inf
    for _ in range(max_iter):
        y = damping * (a @ (x * inv)) + (damping * x[dangling].sum() + 1.0 - damping) / n
        change = np.abs(y - x).sum()
        x = y
        if change < tol:
            return x / x.sum()
    raise ConvergenceError("pagerank", float(change), max_iter)


def spectral_centralities(g: SyntaxGraph, damping: float = 0.85, tol: float = 1e-10,
                          max_iter: int = 1000) -> tuple[np.ndarray, np.ndarray]:
    return (eigenvector_centrality(g, tol, max_iter),
            pagerank(g, damping, tol, max_iter))


def core_decomposition(g: SyntaxGraph) -> tuple[np.ndarray, np.ndarray]:
    """Core numbers and onion layers by iterative peeling.

    Each round removes every node whose current degree is at most ``k``, where
    ``k`` is the running maximum of the minimum degree; the round number is the
    onion layer and ``k`` the core number. Isolated nodes form layer 1 with
    core number 0.
    """
    n = g.n_nodes
    core = np.zeros(n, dtype=np.int64)
    layer = np.zeros(n, dtype=np.int64)
    deg = {v: len(g.neighbors[v]) for v in range(n)}
    current_layer = 1
    isolated = [v for v, d in deg.items() if d == 0]
    if isolated:
        for v in isolated:
            layer[v] = 1
            del deg[v]
        current_layer = 2
    k = 0
    while deg:
        k = max(k, min(deg.values()))
        peel = [v for v, d in deg.items() if d <= k]
        for v in peel:
            core[v] = k
            layer[v] = current_layer
            del deg[v]
        for v in peel:
            for u in g.neighbors[v]:
                if u in deg:
                    deg[u] -= 1
        current_layer += 1
    return core, layer


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def maximal_cliques(g: SyntaxGraph) -> list[int]:
    """All maximal cliques as node bitmasks (Bron–Kerbosch with Tomita pivoting).

    Isolated nodes form singleton cliques.
    """
    nbr = [0] * g.n_nodes
    for i, j in g.edges:
        nbr[i] |= 1 << j
        nbr[j] |= 1 << i
    out: list[int] = []

    def expand(r: int, p: int, x: int) -> None:
        if not p:
            if not x:
                out.append(r)
            return
        pivot, best = -1, -1
        for u in _bits(p | x):
            c = (p & nbr[u]).bit_count()
            if c > best:
                pivot, best = u, c
        for v in _bits(p & ~nbr[pivot]):
            bit = 1 << v
            expand(r | bit, p & nbr[v], x & nbr[v])
            p &= ~bit
            x |= bit

    if g.n_nodes:
        expand(0, (1 << g.n_nodes) - 1, 0)
    return out


def clique_metrics(g: SyntaxGraph) -> tuple[np.ndarray, np.ndarray]:
    """Size of the largest maximal clique through each node, and how many maximal cliques contain it."""
    largest = np.zeros(g.n_nodes, dtype=np.int64)
    count = np.zeros(g.n_nodes, dtype=np.int64)
    for c in maximal_cliques(g):
        size = c.bit_count()
        for v in _bits(c):
            count[v] += 1
            if size > largest[v]:
                largest[v] = size
    return largest, count


def clustering_metrics(g: SyntaxGraph) -> tuple[np.ndarray, np.ndarray]:
    """Local clustering and square clustering.

    Square clustering of ``i`` sums over neighbor pairs ``(u, v)``:
    ``q`` = common neighbors of ``u`` and ``v`` other than ``i`` and
    ``eta = 1 + q + a_uv``, giving ``sum q / sum (q + (k_u - eta)(k_v - eta))``.
    """
    n = g.n_nodes
    a = g.adjacency()
    a2 = a @ a
    k = a.sum(axis=1)
    tri = (a * a2).sum(axis=1) / 2.0
    pairs = k * (k - 1)
    clustering = np.zeros(n)
    ok = pairs > 0
    clustering[ok] = 2.0 * tri[ok] / pairs[ok]

    square = np.zeros(n)
    for i in range(n):
        nb = np.asarray(g.neighbors[i])
        if len(nb) < 2:
            continue
        iu = np.triu_indices(len(nb), 1)
        q = a2[np.ix_(nb, nb)][iu] - 1.0
        eta = 1.0 + q + a[np.ix_(nb, nb)][iu]
        ku, kv = k[nb][iu[0]], k[nb][iu[1]]
        num = q.sum()
        den = (q + (ku - eta) * (kv - eta)).sum()
        if den > 0:
            square[i] = num / den
    return clustering, square


def structural_holes(g: SyntaxGraph) -> tuple[np.ndarray, np.ndarray]:
    """Unweighted effective size ``k - 2t/k`` and Burt's constraint."""
    a = g.adjacency()
    k = a.sum(axis=1)
    if (k == 0).any():
        raise ValueError("degree-0 node has undefined structural-hole measures")
    tri = (a * (a @ a)).sum(axis=1) / 2.0
    eff = k - 2.0 * tri / k
    p = a / k[:, None]
    constraint = (((p + p @ p) ** 2) * a).sum(axis=1)
    return eff, constraint


@dataclass
class NodeMetricTable:
    """Primary properties, one row per node in graph order, columns as in ``METRICS``."""

    keys: tuple
    values: np.ndarray

    columns = METRICS

    def __post_init__(self):
        if self.values.shape != (len(self.keys), len(METRICS)):
            raise ValueError(f"expected shape {(len(self.keys), len(METRICS))}, got {self.values.shape}")

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[:, METRICS.index(name)]

    def __len__(self) -> int:
        return len(self.keys)

    def write_csv(self, stream: TextIO) -> None:
        write_keyed_csv(stream, self.keys, METRICS, self.values)


def primary_matrix(g: SyntaxGraph, damping: float = 0.85) -> NodeMetricTable:
    deg, comp = degree_and_components(g)
    eig, pr = spectral_centralities(g, damping)
    btw, clo, har = path_centralities(g)
    core, onion = core_decomposition(g)
    eff, cons = structural_holes(g)
    ncl, nnum = clique_metrics(g)
    clu, sq = clustering_metrics(g)
    cols = dict(degree=deg, eigenvector_centrality=eig, betweenness=btw, closeness=clo,
                harmonic=har, pagerank=pr, core_number=core, onion_layer=onion,
                effective_size=eff, node_clique_number=ncl, number_of_cliques=nnum,
                clustering=clu, square_clustering=sq, constraint=cons, component_size=comp)
    values = np.column_stack([np.asarray(cols[m], dtype=float) for m in METRICS])
    return NodeMetricTable(g.keys, values)


# --- CSV helpers shared by the table-like outputs -------------------------

def fmt(x: float) -> str:
    """17 significant digits; round-trips every double."""
    return format(float(x), ".17g")


def write_keyed_csv(stream: TextIO, keys, columns, values: np.ndarray) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["surface", "upos", *columns])
    for key, row in zip(keys, values):
        w.writerow([key.surface, key.upos.value, *(fmt(v) for v in row)])


def read_keyed_csv(stream: TextIO) -> tuple[tuple, list[str], np.ndarray]:
    from .conllu import POSTag
    from .graph import WordKey

    reader = csv.reader(stream)
    header = next(reader)
    if header[:2] != ["surface", "upos"]:
        raise ValueError("expected surface,upos leading columns")
    keys, rows = [], []
    for rec in reader:
        keys.append(WordKey(rec[0], POSTag(rec[1])))
        rows.append([float(v) for v in rec[2:]])
    values = np.asarray(rows, dtype=float).reshape(len(rows), len(header) - 2)
    return tuple(keys), header[2:], values


def read_metric_table(stream: TextIO) -> NodeMetricTable:
    keys, cols, values = read_keyed_csv(stream)
    if tuple(cols) != METRICS:
        raise ValueError("metric CSV columns do not match the primary property order")
    return NodeMetricTable(keys, values)

"""Brute-force reference implementations, kept independent of the package code paths."""

from __future__ import annotations

import itertools
import math
from collections import deque

import numpy as np
from scipy import integrate


def adjacency(n, edges):
    a = np.zeros((n, n), dtype=np.int64)
    for i, j in edges:
        a[i, j] = a[j, i] = 1
    return a


def components(a):
    n = len(a)
    label = [-1] * n
    c = 0
    for s in range(n):
        if label[s] >= 0:
            continue
        label[s] = c
        q = deque([s])
        while q:
            u = q.popleft()
            for v in range(n):
                if a[u, v] and label[v] < 0:
                    label[v] = c
                    q.append(v)
        c += 1
    return label


def floyd_warshall(a):
    n = len(a)
    d = np.where(a > 0, 1.0, np.inf)
    np.fill_diagonal(d, 0.0)
    for k in range(n):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return d


def count_shortest_paths(a, d):
    """sigma[s, t] by counting walks layer by layer along the distance matrix."""
    n = len(a)
    sigma = np.zeros((n, n))
    for s in range(n):
        order = sorted(range(n), key=lambda v: d[s, v])
        sigma[s, s] = 1
        for v in order:
            if v == s or not np.isfinite(d[s, v]):
                continue
            sigma[s, v] = sum(sigma[s, u] for u in range(n) if a[u, v] and d[s, u] == d[s, v] - 1)
    return sigma


def betweenness(a):
    n = len(a)
    d = floyd_warshall(a)
    sigma = count_shortest_paths(a, d)
    bc = np.zeros(n)
    for s, t in itertools.combinations(range(n), 2):
        if not np.isfinite(d[s, t]):
            continue
        for v in range(n):
            if v in (s, t):
                continue
            if d[s, v] + d[v, t] == d[s, t]:
                bc[v] += sigma[s, v] * sigma[v, t] / sigma[s, t]
    if n > 2:
        bc *= 2.0 / ((n - 1) * (n - 2))
    return bc


def closeness_harmonic(a):
    n = len(a)
    d = floyd_warshall(a)
    clo, har = np.zeros(n), np.zeros(n)
    for u in range(n):
        ds = [d[u, v] for v in range(n) if v != u]
        clo[u] = (n - 1) / sum(ds)
        har[u] = sum(1.0 / x for x in ds)
    return clo, har


def eigenvector(a):
    w, v = np.linalg.eigh(a.astype(float))
    x = v[:, np.argmax(w)]
    return np.abs(x) / np.linalg.norm(x)


def pagerank(a, damping=0.85):
    n = len(a)
    p = a / a.sum(axis=1, keepdims=True)
    return np.linalg.solve(np.eye(n) - damping * p.T, np.full(n, (1 - damping) / n))


def core_numbers(a):
    """Largest k such that the node survives iterative pruning of degree < k."""
    n = len(a)
    core = np.zeros(n, dtype=int)
    for k in range(1, n):
        alive = set(range(n))
        changed = True
        while changed:
            changed = False
            for v in list(alive):
                if sum(a[v, u] for u in alive) < k:
                    alive.discard(v)
                    changed = True
        for v in alive:
            core[v] = k
        if not alive:
            break
    return core


def onion_layers(a):
    """Literal peeling simulation recomputing all degrees each round."""
    n = len(a)
    alive = set(range(n))
    layer = np.zeros(n, dtype=int)
    k, r = 0, 1
    while alive:
        deg = {v: sum(a[v, u] for u in alive) for v in alive}
        k = max(k, min(deg.values()))
        peel = {v for v in alive if deg[v] <= k}
        for v in peel:
            layer[v] = r
        alive -= peel
        r += 1
    return layer


def maximal_cliques(a):
    """Grow every clique by increasing vertex id, then keep the non-extendable ones."""
    n = len(a)
    cliques = [frozenset([v]) for v in range(n)]
    frontier = list(cliques)
    while frontier:
        nxt = []
        for c in frontier:
            top = max(c)
            for v in range(top + 1, n):
                if all(a[v, u] for u in c):
                    nxt.append(c | {v})
        cliques.extend(nxt)
        frontier = nxt
    return [c for c in cliques if not any(all(a[v, u] for u in c) for v in range(n) if v not in c)]


def clique_metrics(a):
    n = len(a)
    cl = maximal_cliques(a)
    number = np.array([max(len(c) for c in cl if v in c) for v in range(n)])
    count = np.array([sum(v in c for c in cl) for v in range(n)])
    return number, count


def clustering(a):
    n = len(a)
    out = np.zeros(n)
    for i in range(n):
        nb = [j for j in range(n) if a[i, j]]
        k = len(nb)
        if k < 2:
            continue
        t = sum(a[u, v] for u, v in itertools.combinations(nb, 2))
        out[i] = 2 * t / (k * (k - 1))
    return out


def square_clustering(a):
    n = len(a)
    out = np.zeros(n)
    k = a.sum(axis=1)
    for i in range(n):
        nb = [j for j in range(n) if a[i, j]]
        num = den = 0
        for u, v in itertools.combinations(nb, 2):
            q = sum(1 for w in range(n) if w != i and a[u, w] and a[v, w])
            eta = 1 + q + a[u, v]
            num += q
            den += q + (k[u] - eta) * (k[v] - eta)
        out[i] = num / den if den else 0.0
    return out


def structural_holes(a):
    n = len(a)
    k = a.sum(axis=1)
    eff, con = np.zeros(n), np.zeros(n)
    for i in range(n):
        nb = [j for j in range(n) if a[i, j]]
        t = sum(a[u, v] for u, v in itertools.combinations(nb, 2))
        eff[i] = k[i] - 2 * t / k[i]
        for j in nb:
            indirect = sum((1 / k[i]) * (a[q, j] / k[q]) for q in nb if q != j)
            con[i] += (1 / k[i] + indirect) ** 2
    return eff, con


def primary(n, edges):
    """All fifteen columns in property order, from the oracles above."""
    a = adjacency(n, edges)
    lab = components(a)
    comp = np.array([lab.count(lab[v]) for v in range(n)])
    clo, har = closeness_harmonic(a)
    eff, con = structural_holes(a)
    ncl, nnum = clique_metrics(a)
    return np.column_stack([
        a.sum(axis=1), eigenvector(a), betweenness(a), clo, har, pagerank(a),
        core_numbers(a), onion_layers(a), eff, ncl, nnum, clustering(a),
        square_clustering(a), con, comp,
    ]).astype(float)


def f_density(x, d1, d2):
    if x <= 0:
        return 0.0
    return math.exp(0.5 * d1 * math.log(d1 * x) + 0.5 * d2 * math.log(d2)
                    - 0.5 * (d1 + d2) * math.log(d1 * x + d2) - math.log(x)
                    - (math.lgamma(d1 / 2) + math.lgamma(d2 / 2) - math.lgamma((d1 + d2) / 2)))


def f_cdf_quad(x, d1, d2):
    val, _ = integrate.quad(f_density, 0, x, args=(d1, d2), epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def anova_direct(groups):
    allv = [v for g in groups for v in g]
    n, k = len(allv), len(groups)
    grand = sum(allv) / n
    ssb = sum(len(g) * (sum(g) / len(g) - grand) ** 2 for g in groups)
    ssw = sum((v - sum(g) / len(g)) ** 2 for g in groups for v in g)
    f = (ssb / (k - 1)) / (ssw / (n - k))
    return f, 1.0 - f_cdf_quad(f, k - 1, n - k)

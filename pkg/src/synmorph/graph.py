"""Undirected syntax networks over the most frequent word keys of a corpus."""

from __future__ import annotations

import csv
import logging
import xml.etree.ElementTree as ET
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property
from os import PathLike
from typing import Iterable, Literal, TextIO

import numpy as np

from .conllu import CorpusSample, POSTag

log = logging.getLogger(__name__)

Mode = Literal["inflected", "lemmatized"]
MODES: tuple[str, ...] = ("inflected", "lemmatized")
DEFAULT_EXCLUDED = frozenset({POSTag.SYM, POSTag.X, POSTag.INTJ, POSTag.PUNCT})


@dataclass(frozen=True, order=True)
class WordKey:
    surface: str
    upos: POSTag

    def __post_init__(self):
        if not self.surface:
            raise ValueError("empty surface string")

    def sort_key(self) -> tuple[str, str]:
        return (self.surface, self.upos.value)

    def __str__(self) -> str:
        return f"{self.surface}/{self.upos.value}"


@dataclass(frozen=True)
class SyntaxGraph:
    """Simple undirected graph; node ``i`` is ``keys[i]`` seen ``freqs[i]`` times.

    ``edges`` holds sorted ``(i, j)`` pairs with ``i < j``.
    """

    keys: tuple[WordKey, ...]
    freqs: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    mode: str = "inflected"
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if len(self.keys) != len(self.freqs):
            raise ValueError("keys and freqs differ in length")
        n = len(self.keys)
        seen = set()
        for i, j in self.edges:
            if not (0 <= i < j < n):
                raise ValueError(f"bad edge {(i, j)} for {n} nodes")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge {(i, j)}")
            seen.add((i, j))

    @property
    def n_nodes(self) -> int:
        return len(self.keys)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n_nodes)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def neighbor_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(a) for a in self.neighbors)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n_nodes, self.n_nodes))
        if self.edges:
            idx = np.asarray(self.edges)
            a[idx[:, 0], idx[:, 1]] = 1.0
            a[idx[:, 1], idx[:, 0]] = 1.0
        return a

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.neighbors], dtype=np.int64)

    def index_of(self, key: WordKey) -> int:
        return self.keys.index(key)

    def subgraph(self, nodes: Iterable[int]) -> "SyntaxGraph":
        """Induced subgraph; nodes keep their relative order."""
        keep = sorted(set(nodes))
        remap = {old: new for new, old in enumerate(keep)}
        edges = tuple(sorted((remap[i], remap[j]) for i, j in self.edges
                             if i in remap and j in remap))
        return SyntaxGraph(tuple(self.keys[i] for i in keep),
                           tuple(self.freqs[i] for i in keep), edges, self.mode, self.notes)


def _key(token, mode: str) -> WordKey:
    surface = token.form if mode == "inflected" else token.lemma
    return WordKey(surface, token.upos)


def build_network(sample: CorpusSample, mode: Mode = "inflected", top_k: int = 500,
                  excluded: Iterable[POSTag] = DEFAULT_EXCLUDED) -> SyntaxGraph:
    """Build the syntax network of the ``top_k`` most frequent word keys.

    Tokens whose POS is in ``excluded`` are neither counted nor linked, and
    dependencies through them are dropped rather than rewired. Frequency ties
    are broken by ``(surface, upos)`` order, which is also the node order
    after descending frequency.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    if sample.token_count == 0:
        raise ValueError("empty corpus sample")
    excluded = frozenset(POSTag(p) for p in excluded)

    counts: Counter[WordKey] = Counter()
    for tok in sample.tokens():
        if tok.upos not in excluded:
            counts[_key(tok, mode)] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0].sort_key()))
    notes: tuple[str, ...] = ()
    if top_k > len(ranked):
        msg = f"top_k={top_k} exceeds {len(ranked)} distinct keys; using all keys"
        log.warning(msg)
        notes = (msg,)
    ranked = ranked[:top_k]
    index = {k: i for i, (k, _) in enumerate(ranked)}

    edges: set[tuple[int, int]] = set()
    for sent in sample.sentences:
        by_id = {t.index: t for t in sent}
        for tok in sent:
            if tok.head == 0 or tok.upos in excluded:
                continue
            head = by_id[tok.head]
            if head.upos in excluded:
                continue
            a = index.get(_key(tok, mode))
            b = index.get(_key(head, mode))
            if a is None or b is None or a == b:
                continue
            edges.add((a, b) if a < b else (b, a))

    return SyntaxGraph(tuple(k for k, _ in ranked), tuple(c for _, c in ranked),
                       tuple(sorted(edges)), mode, notes)


def connected_components(g: SyntaxGraph) -> list[list[int]]:
    """Components as sorted node lists, ordered by their smallest node."""
    seen = [False] * g.n_nodes
    comps = []
    for s in range(g.n_nodes):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in g.neighbors[u]:
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
                    queue.append(v)
        comps.append(sorted(comp))
    return comps


def giant_component(g: SyntaxGraph) -> SyntaxGraph:
    if g.n_nodes == 0:
        raise ValueError("empty graph")
    comps = connected_components(g)
    # max() keeps the first maximum, i.e. the component with the smallest minimum node
    best = max(comps, key=len)
    if len(best) == g.n_nodes:
        return g
    return g.subgraph(best)


# --- export / import -------------------------------------------------------

_GML_NS = "http://graphml.graphdrawing.org/xmlns"


def write_graphml(g: SyntaxGraph, stream: TextIO) -> None:
    root = ET.Element("graphml", xmlns=_GML_NS)
    for kid, ktype in (("surface", "string"), ("upos", "string"), ("frequency", "int")):
        ET.SubElement(root, "key", {"id": kid, "for": "node", "attr.name": kid, "attr.type": ktype})
    ET.SubElement(root, "key", {"id": "mode", "for": "graph", "attr.name": "mode", "attr.type": "string"})
    graph = ET.SubElement(root, "graph", id="G", edgedefault="undirected")
    ET.SubElement(graph, "data", key="mode").text = g.mode
    for i, (k, f) in enumerate(zip(g.keys, g.freqs)):
        node = ET.SubElement(graph, "node", id=f"n{i}")
        ET.SubElement(node, "data", key="surface").text = k.surface
        ET.SubElement(node, "data", key="upos").text = k.upos.value
        ET.SubElement(node, "data", key="frequency").text = str(f)
    for i, j in g.edges:
        ET.SubElement(graph, "edge", source=f"n{i}", target=f"n{j}")
    ET.indent(root)
    stream.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    stream.write(ET.tostring(root, encoding="unicode"))
    stream.write("\n")


def read_graphml(source: str | PathLike | TextIO) -> SyntaxGraph:
    tree = ET.parse(source)
    ns = {"g": _GML_NS}
    graph = tree.getroot().find("g:graph", ns)
    if graph is None:
        raise ValueError("no <graph> element")
    mode = "inflected"
    for d in graph.findall("g:data", ns):
        if d.get("key") == "mode":
            mode = d.text or mode
    ids: dict[str, int] = {}
    keys, freqs = [], []
    for node in graph.findall("g:node", ns):
        data = {d.get("key"): d.text or "" for d in node.findall("g:data", ns)}
        ids[node.get("id")] = len(keys)
        keys.append(WordKey(data["surface"], POSTag(data["upos"])))
        freqs.append(int(data["frequency"]))
    edges = set()
    for e in graph.findall("g:edge", ns):
        i, j = ids[e.get("source")], ids[e.get("target")]
        if i != j:
            edges.add((min(i, j), max(i, j)))
    return SyntaxGraph(tuple(keys), tuple(freqs), tuple(sorted(edges)), mode)


def write_edgelist(g: SyntaxGraph, nodes_stream: TextIO, edges_stream: TextIO) -> None:
    """Node table (id,surface,upos,frequency) plus edge list (src,dst) of node ids."""
    w = csv.writer(nodes_stream, lineterminator="\n")
    w.writerow(["id", "surface", "upos", "frequency"])
    for i, (k, f) in enumerate(zip(g.keys, g.freqs)):
        w.writerow([i, k.surface, k.upos.value, f])
    w = csv.writer(edges_stream, lineterminator="\n")
    w.writerow(["src", "dst"])
    w.writerows(g.edges)


def read_edgelist(nodes_stream: TextIO, edges_stream: TextIO, mode: str = "inflected") -> SyntaxGraph:
    rows = sorted(csv.DictReader(nodes_stream), key=lambda r: int(r["id"]))
    if [int(r["id"]) for r in rows] != list(range(len(rows))):
        raise ValueError("node ids must be 0..n-1")
    keys = tuple(WordKey(r["surface"], POSTag(r["upos"])) for r in rows)
    freqs = tuple(int(r["frequency"]) for r in rows)
    edges = set()
    for r in csv.DictReader(edges_stream):
        i, j = int(r["src"]), int(r["dst"])
        if i != j:
            edges.add((min(i, j), max(i, j)))
    return SyntaxGraph(keys, freqs, tuple(sorted(edges)), mode)


def from_edges(n: int, edges: Iterable[tuple[int, int]], mode: str = "inflected") -> SyntaxGraph:
    """Graph over ``n`` placeholder NOUN keys; handy for synthetic topologies."""
    keys = tuple(WordKey(f"w{i}", POSTag.NOUN) for i in range(n))
    es = {(min(i, j), max(i, j)) for i, j in edges if i != j}
    return SyntaxGraph(keys, (1,) * n, tuple(sorted(es)), mode)

"""One-way ANOVA, assortativity regressions, community composition, entropies and link fractions."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Hashable, NamedTuple, Sequence, TextIO

import numpy as np

from .communities import CommunityAssignment
from .conllu import UPOS_ORDER, POSTag
from .graph import SyntaxGraph
from .metrics import NodeMetricTable, fmt

P_FLOOR = 1e-300


# --- F distribution -------------------------------------------------------

def _betacf(a: float, b: float, x: float, eps: float = 1e-12, max_iter: int = 10000) -> float:
    """Continued fraction for the incomplete beta, modified Lentz evaluation."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction failed for a={a}, b={b}, x={x}")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (a * math.log(x) + b * math.log1p(-x)
                 - (math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)))
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    # symmetry I_x(a,b) = 1 - I_{1-x}(b,a), evaluated where the fraction converges fast
    return 1.0 - math.exp(log_front) * _betacf(b, a, 1.0 - x) / b


def f_cdf(x: float, d1: float, d2: float) -> float:
    if x <= 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    return betainc(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2))


def f_sf(x: float, d1: float, d2: float) -> float:
    """Upper tail ``1 - f_cdf``, computed directly so tiny tails keep their precision."""
    if x <= 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    return betainc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * x))


# --- ANOVA ----------------------------------------------------------------

class AnovaResult(NamedTuple):
    f: float
    p: float
    ssb: float
    ssw: float
    df_between: int
    df_within: int
    flag: str | None = None


def anova_oneway(values: Sequence[float], groups: Sequence[Hashable],
                 drop_singletons: bool = False) -> AnovaResult:
    """One-way ANOVA of ``values`` split by ``groups``.

    ``flag`` is ``"constant"`` when all values are equal (F=0, p=1),
    ``"zero_within"`` when groups are internally constant but differ (p=0),
    and ``"underflow"`` when p falls below 1e-300 and is clamped there.
    """
    values = np.asarray(values, dtype=float)
    groups = list(groups)
    if len(groups) != len(values):
        raise ValueError("values and groups differ in length")
    buckets: dict[Hashable, list[float]] = {}
    for v, g in zip(values, groups):
        buckets.setdefault(g, []).append(v)
    if drop_singletons:
        buckets = {g: vs for g, vs in buckets.items() if len(vs) > 1}
    k = len(buckets)
    n = sum(len(vs) for vs in buckets.values())
    if k < 2:
        raise ValueError("ANOVA needs at least 2 groups")
    if n <= k or all(len(vs) < 2 for vs in buckets.values()):
        raise ValueError("ANOVA needs more observations than groups")
    arrays = [np.asarray(vs) for vs in buckets.values()]
    grand = math.fsum(float(x) for a in arrays for x in a) / n
    ssb = math.fsum(len(a) * (a.mean() - grand) ** 2 for a in arrays)
    ssw = math.fsum(float(((a - a.mean()) ** 2).sum()) for a in arrays)
    dfb, dfw = k - 1, n - k
    if ssw == 0.0:
        if ssb == 0.0:
            return AnovaResult(0.0, 1.0, ssb, ssw, dfb, dfw, "constant")
        return AnovaResult(math.inf, 0.0, ssb, ssw, dfb, dfw, "zero_within")
    f = (ssb / dfb) / (ssw / dfw)
    p = f_sf(f, dfb, dfw)
    if p < P_FLOOR:
        return AnovaResult(f, P_FLOOR, ssb, ssw, dfb, dfw, "underflow")
    return AnovaResult(f, p, ssb, ssw, dfb, dfw)


# --- regression / assortativity -------------------------------------------

class RegressionLine(NamedTuple):
    slope: float
    intercept: float


def regression_slope(x: Sequence[float], y: Sequence[float]) -> RegressionLine:
    """Least-squares line ``y = slope * x + intercept``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("need at least 2 paired points")
    dx = x - x.mean()
    sxx = float((dx * dx).sum())
    if sxx == 0.0:
        raise ValueError("degenerate abscissa")
    m = float((dx * (y - y.mean())).sum()) / sxx
    return RegressionLine(m, float(y.mean() - m * x.mean()))


def mean_neighbor_degree(g: SyntaxGraph) -> np.ndarray:
    deg = g.degrees().astype(float)
    out = np.zeros(g.n_nodes)
    for i, nb in enumerate(g.neighbors):
        if nb:
            out[i] = deg[list(nb)].mean()
    return out


@dataclass
class AssortativityReport:
    grouping: str
    lines: dict[str, RegressionLine]
    sizes: dict[str, int]
    skipped: dict[str, str]
    overall: RegressionLine | None

    def write_csv(self, stream: TextIO) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["group", "n", "slope", "intercept", "flag"])
        for name, size in self.sizes.items():
            line = self.lines.get(name)
            if line is None:
                w.writerow([name, size, "", "", self.skipped[name]])
            else:
                w.writerow([name, size, fmt(line.slope), fmt(line.intercept), ""])
        if self.overall is not None:
            w.writerow(["ALL", sum(self.sizes.values()), fmt(self.overall.slope),
                        fmt(self.overall.intercept), ""])


def _group_names(g: SyntaxGraph, grouping: str, assignment: CommunityAssignment | None) -> list[str]:
    if grouping == "POS":
        return [k.upos.value for k in g.keys]
    if grouping == "TC":
        if assignment is None:
            raise ValueError("TC grouping requires a community assignment")
        return [assignment.names[int(c)] for c in assignment.labels]
    raise ValueError(f"grouping must be 'POS' or 'TC', got {grouping!r}")


def _group_order(names: list[str], grouping: str, assignment: CommunityAssignment | None) -> list[str]:
    present = set(names)
    if grouping == "POS":
        return [p.value for p in UPOS_ORDER if p.value in present]
    return [assignment.names[k] for k in range(assignment.n_c) if assignment.names[k] in present]


def assortativity_report(g: SyntaxGraph, table: NodeMetricTable, grouping: str = "POS",
                         assignment: CommunityAssignment | None = None) -> AssortativityReport:
    """Regress mean neighbor degree on degree within each POS class or community, and overall."""
    names = _group_names(g, grouping, assignment)
    x = np.asarray(table["degree"], dtype=float)
    y = mean_neighbor_degree(g)
    lines, sizes, skipped = {}, {}, {}
    arr = np.array(names, dtype=object)
    for name in _group_order(names, grouping, assignment):
        idx = np.flatnonzero(arr == name)
        sizes[name] = len(idx)
        if len(idx) < 2:
            skipped[name] = "too_few_nodes"
            continue
        try:
            lines[name] = regression_slope(x[idx], y[idx])
        except ValueError:
            skipped[name] = "degenerate_degree"
    try:
        overall = regression_slope(x, y)
    except ValueError:
        overall = None
    return AssortativityReport(grouping, lines, sizes, skipped, overall)


def _anova_or_flag(values, groups, drop_singletons: bool) -> AnovaResult:
    try:
        return anova_oneway(values, groups, drop_singletons)
    except ValueError:
        nan = math.nan
        return AnovaResult(nan, nan, nan, nan, 0, 0, "too_few_groups")


def anova_table(g: SyntaxGraph, table: NodeMetricTable, assignment: CommunityAssignment,
                drop_singletons: bool = False) -> dict[str, dict[str, AnovaResult]]:
    """ANOVA of every primary metric across communities and across POS classes.

    Splits that cannot support a test (one group, or no replicated group) are
    reported with NaN statistics and the flag ``"too_few_groups"``.
    """
    tc = [int(c) for c in assignment.labels]
    pos = [k.upos.value for k in g.keys]
    out = {}
    for m in table.columns:
        out[m] = {"TC": _anova_or_flag(table[m], tc, drop_singletons),
                  "POS": _anova_or_flag(table[m], pos, drop_singletons)}
    return out


def write_anova_csv(stream: TextIO, results: dict[str, dict[str, AnovaResult]]) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["property", "F_TC", "p_TC", "flag_TC", "F_POS", "p_POS", "flag_POS"])
    for m, r in results.items():
        tc, pos = r["TC"], r["POS"]
        w.writerow([m, fmt(tc.f), fmt(tc.p), tc.flag or "", fmt(pos.f), fmt(pos.p), pos.flag or ""])


# --- composition, entropies, link fractions -------------------------------

def _pos_classes(pos_of: Sequence[POSTag]) -> list[POSTag]:
    present = {POSTag(p) for p in pos_of}
    return [p for p in UPOS_ORDER if p in present]


@dataclass
class CompositionTable:
    pos_classes: list[POSTag]
    community_names: list[str]
    counts: np.ndarray  # POS x TC

    @property
    def f(self) -> np.ndarray:
        """Fraction of each community made up by each POS class (columns sum to 1)."""
        col = self.counts.sum(axis=0, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(col > 0, self.counts / np.where(col > 0, col, 1), np.nan)

    @property
    def p(self) -> np.ndarray:
        """Fraction of each POS class falling in each community (rows sum to 1)."""
        row = self.counts.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(row > 0, self.counts / np.where(row > 0, row, 1), np.nan)

    def write_csv(self, stream: TextIO) -> None:
        w = csv.writer(stream, lineterminator="\n")
        head = ["pos"]
        for name in self.community_names:
            head += [name, f"%{name}"]
        w.writerow(head)
        f = self.f
        for i, pos in enumerate(self.pos_classes):
            row = [pos.value]
            for j in range(len(self.community_names)):
                row += [int(self.counts[i, j]), fmt(f[i, j])]
            w.writerow(row)
        total = ["Total"]
        for j in range(len(self.community_names)):
            total += [int(self.counts[:, j].sum()), fmt(1.0)]
        w.writerow(total)


def composition_table(assignment: CommunityAssignment, pos_of: Sequence[POSTag]) -> CompositionTable:
    if len(pos_of) != len(assignment.labels):
        raise ValueError("assignment does not cover all nodes")
    classes = _pos_classes(pos_of)
    row = {p: i for i, p in enumerate(classes)}
    counts = np.zeros((len(classes), assignment.n_c), dtype=np.int64)
    for p, c in zip(pos_of, assignment.labels):
        counts[row[POSTag(p)], int(c)] += 1
    names = [assignment.names[k] for k in range(assignment.n_c)]
    return CompositionTable(classes, names, counts)


def _entropy(fracs: np.ndarray) -> float | None:
    if np.isnan(fracs).any():
        return None
    nz = fracs[fracs > 0]
    return float(-(nz * np.log(nz)).sum())


def entropies(c: CompositionTable) -> tuple[dict[str, float | None], dict[str, float | None]]:
    """``H`` per community over POS fractions and ``S`` per POS class over community fractions.

    Empty communities or classes get ``None``.
    """
    f, p = c.f, c.p
    h = {name: _entropy(f[:, j]) for j, name in enumerate(c.community_names)}
    s = {pos.value: _entropy(p[i, :]) for i, pos in enumerate(c.pos_classes)}
    return h, s


def write_entropies_csv(stream: TextIO, h: dict, s: dict) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["kind", "group", "entropy"])
    for name, v in h.items():
        w.writerow(["H", name, "" if v is None else fmt(v)])
    for name, v in s.items():
        w.writerow(["S", name, "" if v is None else fmt(v)])


@dataclass
class LinkFractionMatrices:
    pos_classes: list[POSTag]
    community_names: list[str]
    l: np.ndarray  # POS x TC incidence counts
    k: np.ndarray  # TC x TC edge counts, symmetric, diagonal counted once
    n_edges: int

    @property
    def fl(self) -> np.ndarray:
        return self.l / (2.0 * self.n_edges)

    @property
    def fk(self) -> np.ndarray:
        return self.k / float(self.n_edges)

    def unordered_fk(self) -> np.ndarray:
        return np.triu(self.fk)

    def write_csv(self, fl_stream: TextIO, fk_stream: TextIO) -> None:
        w = csv.writer(fl_stream, lineterminator="\n")
        w.writerow(["pos", "community", "links", "fraction"])
        fl = self.fl
        for i, p in enumerate(self.pos_classes):
            for j, name in enumerate(self.community_names):
                w.writerow([p.value, name, int(self.l[i, j]), fmt(fl[i, j])])
        w = csv.writer(fk_stream, lineterminator="\n")
        w.writerow(["community_a", "community_b", "links", "fraction"])
        fk = self.fk
        for a, na in enumerate(self.community_names):
            for b in range(a, len(self.community_names)):
                w.writerow([na, self.community_names[b], int(self.k[a, b]), fmt(fk[a, b])])


def link_fractions(g: SyntaxGraph, assignment: CommunityAssignment,
                   pos_of: Sequence[POSTag] | None = None) -> LinkFractionMatrices:
    """Edge incidences between POS classes and communities, and between community pairs.

    Each edge ``(u, v)`` adds the incidences ``(POS(u), TC(v))`` and
    ``(POS(v), TC(u))``, so ``fl`` is normalized by twice the edge count.
    """
    if pos_of is None:
        pos_of = [k.upos for k in g.keys]
    if len(pos_of) != g.n_nodes or len(assignment.labels) != g.n_nodes:
        raise ValueError("assignment does not cover all nodes")
    if g.n_edges == 0:
        raise ValueError("graph has no edges")
    classes = _pos_classes(pos_of)
    row = {p: i for i, p in enumerate(classes)}
    tc = assignment.labels
    l = np.zeros((len(classes), assignment.n_c), dtype=np.int64)
    k = np.zeros((assignment.n_c, assignment.n_c), dtype=np.int64)
    for u, v in g.edges:
        l[row[POSTag(pos_of[u])], tc[v]] += 1
        l[row[POSTag(pos_of[v])], tc[u]] += 1
        a, b = sorted((int(tc[u]), int(tc[v])))
        k[a, b] += 1
        if a != b:
            k[b, a] += 1
    names = [assignment.names[j] for j in range(assignment.n_c)]
    return LinkFractionMatrices(classes, names, l, k, g.n_edges)

"""Conventional and LV-SEM-ME faithfulness checks.

The LV-SEM-ME check compares, for qualifying source/sink sets, the rank of a
W* submatrix with the size of a minimal vertex bottleneck between the sets.
Bottlenecks are computed as maximum unit-vertex-capacity flows (Menger).
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Iterator, Mapping, Sequence

import networkx as nx
import numpy as np

from .mixing import DEFAULT_TOL, MixingMatrix, build_w_star
from .model import CanonicalModel, Kind, ancestors, noise_label, possible_parents, total_effects

DEFAULT_SUBSET_CAP = 8


@dataclass(frozen=True)
class FaithfulnessViolation:
    kind: str  # "conventional" | "lvsemme-a" | "lvsemme-b"
    target: str
    sources: tuple[str, ...]
    sinks: tuple[str, ...] = ()
    rank: int | None = None
    bottleneck: int | None = None

    def __str__(self) -> str:
        if self.kind == "conventional":
            return f"conventional: zero total effect {self.sources[0]} -> {self.target}"
        return (f"{self.kind}: V_i={self.target} J={{{', '.join(self.sources)}}} "
                f"K={{{', '.join(self.sinks)}}} rank={self.rank} bottleneck={self.bottleneck}")


@dataclass
class FaithfulnessReport:
    violations: list[FaithfulnessViolation] = field(default_factory=list)
    subsets_examined: int = 0
    truncated: bool = False

    @property
    def passed(self) -> bool:
        return not self.violations and not self.truncated

    def summary(self) -> str:
        state = "PASS" if self.passed else "FAIL"
        lines = [f"{state}: {len(self.violations)} violation(s), {self.subsets_examined} subset pair(s) examined"
                 + (", enumeration truncated" if self.truncated else "")]
        lines += [f"  {v}" for v in self.violations]
        return "\n".join(lines)


# -- bottlenecks -----------------------------------------------------------


def _successors(diagram: CanonicalModel | nx.DiGraph | Mapping[Any, Iterable[Any]]) -> dict[Any, list[Any]]:
    if isinstance(diagram, CanonicalModel):
        diagram = diagram.graph
    if isinstance(diagram, nx.DiGraph):
        return {u: list(diagram.successors(u)) for u in diagram.nodes}
    succ = {u: list(vs) for u, vs in diagram.items()}
    for vs in list(succ.values()):
        for v in vs:
            succ.setdefault(v, [])
    return succ


class _SplitGraph:
    """Node-split residual network: each vertex v becomes in(v) -> out(v) with capacity 1.

    Built once per diagram; every query works on a copy of the capacities.
    The super source and sink are implicit (multi-source BFS from the
    in-nodes of J, success on reaching an out-node of K).
    """

    def __init__(self, succ: Mapping[Any, list[Any]]):
        nodes = list(succ)
        self.ix = {v: k for k, v in enumerate(nodes)}
        self.adj: list[list[int]] = [[] for _ in range(2 * len(nodes))]
        self.head: list[int] = []
        self.cap: list[int] = []
        big = len(nodes) + 1
        for v in nodes:
            self._add(2 * self.ix[v], 2 * self.ix[v] + 1, 1)
            for w in succ[v]:
                self._add(2 * self.ix[v] + 1, 2 * self.ix[w], big)

    def _add(self, u: int, v: int, c: int) -> None:
        self.adj[u].append(len(self.head))
        self.head.append(v)
        self.cap.append(c)
        self.adj[v].append(len(self.head))
        self.head.append(u)
        self.cap.append(0)

    def max_disjoint_paths(self, sources: Iterable[Any], sinks: Iterable[Any]) -> int:
        try:
            starts = [2 * self.ix[j] for j in set(sources)]
            goals = {2 * self.ix[k] + 1 for k in set(sinks)}
        except KeyError as exc:
            raise KeyError(exc.args[0]) from None
        if not starts or not goals:
            return 0
        cap, head, adj = self.cap.copy(), self.head, self.adj
        flow = 0
        while True:
            via = {u: -1 for u in starts}
            q = deque(starts)
            hit = None
            while q and hit is None:
                u = q.popleft()
                for e in adj[u]:
                    v = head[e]
                    if cap[e] > 0 and v not in via:
                        via[v] = e
                        if v in goals:
                            hit = v
                            break
                        q.append(v)
            if hit is None:
                return flow
            v = hit
            while via[v] != -1:
                e = via[v]
                cap[e] -= 1
                cap[e ^ 1] += 1
                v = head[e ^ 1]
            flow += 1


def minimal_bottleneck_size(diagram, sources: Iterable[Any], sinks: Iterable[Any]) -> int:
    """Smallest number of vertices meeting every directed path from ``sources`` to ``sinks``.

    Endpoints may be cut.  Equals the maximum number of vertex-disjoint
    source-to-sink paths, found by augmenting paths on the node-split graph.
    ``diagram`` is a model, a ``networkx.DiGraph`` or a successor mapping.
    """
    return _SplitGraph(_successors(diagram)).max_disjoint_paths(sources, sinks)


# -- ranks ---------------------------------------------------------------


def _exact_rank(a: np.ndarray) -> int:
    m = [[x if isinstance(x, Fraction) else Fraction(x) for x in row] for row in a.tolist()]
    rank, rows = 0, len(m)
    cols = len(m[0]) if rows else 0
    for c in range(cols):
        piv = next((r for r in range(rank, rows) if m[r][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(rows):
            if r != rank and m[r][c] != 0:
                f = m[r][c] / m[rank][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[rank])]
        rank += 1
    return rank


def numerical_rank(a: np.ndarray, tol: float = DEFAULT_TOL, exact: bool = False) -> int:
    if a.size == 0:
        return 0
    if exact:
        return _exact_rank(a)
    s = np.linalg.svd(np.asarray(a, dtype=float), compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def submatrix_rank(Wstar: MixingMatrix, J: Iterable[str], rows: Iterable[str], tol: float = DEFAULT_TOL,
                   exact: bool = False) -> int:
    """Rank of W* restricted to the rows of ``rows`` and the noise columns of ``J``.

    Rows and sources may be given as variable names (looked up through
    ``row_variables`` / ``N_<name>`` labels) or as raw row/column labels.
    Singular values count when above ``tol`` times the largest one; with
    ``exact`` the rank is computed by rational elimination.
    """
    row_lookup = {}
    if Wstar.row_variables is not None:
        row_lookup = {v: i for i, v in enumerate(Wstar.row_variables)}
    ri = [row_lookup[r] if r in row_lookup else Wstar.row_index(r) for r in rows]
    cols = set(Wstar.col_labels)
    ci = [Wstar.col_index(j if j in cols else noise_label(j)) for j in J]
    if not ri or not ci:
        return 0
    return numerical_rank(Wstar.entries[np.ix_(ri, ci)], tol, exact)


# -- checks ----------------------------------------------------------------


def check_conventional_faithfulness(model: CanonicalModel, tol: float = DEFAULT_TOL) -> FaithfulnessReport:
    """Every ancestor must have a nonzero total effect (|effect| > tol) on each descendant in V."""
    T = total_effects(model)
    names = model.structural
    pos = {n: k for k, n in enumerate(names)}
    report = FaithfulnessReport()
    for j in names:
        for i in sorted(ancestors(model, j) & pos.keys(), key=pos.__getitem__):
            report.subsets_examined += 1
            val = T[pos[j], pos[i]]
            try:
                zero = abs(float(val)) <= tol
            except TypeError:
                zero = val == 0
            if zero:
                report.violations.append(FaithfulnessViolation("conventional", j, (i,)))
    return report


def _pairs(uj: Sequence[str], uk: Sequence[str], cap: int | None) -> Iterator[tuple[tuple[str, ...], tuple[str, ...]]]:
    """(J, K) with J nonempty, by increasing |J| + |K|, lexicographic within a size."""
    top = len(uj) + len(uk) if cap is None else min(cap, len(uj) + len(uk))
    for total in range(1, top + 1):
        for nj in range(max(1, total - len(uk)), min(total, len(uj)) + 1):
            for J in itertools.combinations(uj, nj):
                for K in itertools.combinations(uk, total - nj):
                    yield J, K


def check_lvsemme_faithfulness(model: CanonicalModel, tol: float = DEFAULT_TOL,
                               subset_cap: int | None = DEFAULT_SUBSET_CAP, exact: bool = False,
                               stop_at_first: bool = False) -> FaithfulnessReport:
    """Rank / bottleneck comparison over every qualifying ``(V_i, J, K)``.

    Clause (a): ``J`` within the ancestors of ``V_i`` and ``K`` within its
    possible parents.  Clause (b), for an mleaf ``V_i`` and each parent
    ``V_j`` (observed, measured or unobserved): ``J`` within the ancestors of
    ``V_i`` minus ``V_j`` and ``K`` within the possible parents of ``V_j``
    (empty for an unobserved parent).  Pairs with an empty ``J`` hold
    trivially and are skipped.  Only pairs with ``|J| + |K| <= subset_cap``
    are examined; ``truncated`` is set when that leaves some out.
    """
    W = build_w_star(model)
    rows = {v: i for i, v in enumerate(W.row_variables)}
    cols = {c: j for j, c in enumerate(W.col_labels)}
    entries = W.entries
    net = _SplitGraph(_successors(model))
    index = {v.name: v.index for v in model.variables}
    by_index = lambda names: sorted(names, key=index.__getitem__)

    tasks: list[tuple[str, str, list[str], list[str]]] = []
    for vi in model.row_variables:
        an = by_index(ancestors(model, vi))
        tasks.append(("lvsemme-a", vi, an, by_index(possible_parents(model, vi))))
        if model.kind(vi) == Kind.MLEAF:
            for vj in by_index(model.parents(vi)):
                pp = [] if model.kind(vj) == Kind.UNOBSERVED else by_index(possible_parents(model, vj))
                tasks.append(("lvsemme-b", vi, [a for a in an if a != vj], pp))
    tasks.sort(key=lambda t: (index[t[1]], t[0]))

    report = FaithfulnessReport()
    seen: set[tuple[str, tuple[str, ...], tuple[str, ...]]] = set()
    for kind, vi, uj, uk in tasks:
        if subset_cap is not None and len(uj) + len(uk) > subset_cap:
            report.truncated = True
        for J, K in _pairs(uj, uk, subset_cap):
            key = (vi, J, K)
            if key in seen:
                continue
            seen.add(key)
            report.subsets_examined += 1
            sinks = list(K) if vi in K else list(K) + [vi]
            ri = [rows[k] for k in sinks]
            ci = [cols[noise_label(j)] for j in J]
            r = numerical_rank(entries[np.ix_(ri, ci)], tol, exact)
            b = net.max_disjoint_paths(J, sinks)
            if r != b:
                report.violations.append(FaithfulnessViolation(kind, vi, J, K, r, b))
                if stop_at_first:
                    return report
    report.violations.sort(key=lambda v: (index[v.target], v.kind, len(v.sources) + len(v.sinks), v.sources, v.sinks))
    return report

"""Canonical LV-SEM-ME models and graph queries on their causal diagrams.

A model has four kinds of structural variables (unobserved, observed,
measured cogent, mleaf) plus one measurement per measured variable.  Edge
weights are stored as given, so floats, :class:`fractions.Fraction` and sympy
expressions all flow through the arithmetic helpers in this package.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Mapping

import networkx as nx
import numpy as np


class Kind(str, enum.Enum):
    UNOBSERVED = "unobserved"
    OBSERVED = "observed"
    MEASURED = "measured"
    MLEAF = "mleaf"
    MEASUREMENT = "measurement"


COGENT_KINDS = (Kind.OBSERVED, Kind.MEASURED)


@dataclass(frozen=True)
class Variable:
    index: int
    name: str
    kind: Kind


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    weight: Any
    # original decimal text from a model file, kept for lossless round trips
    text: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Violation:
    rule: str
    subject: tuple[str, ...]
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.rule}: {', '.join(self.subject)}" + (f" ({self.detail})" if self.detail else "")


def noise_label(name: str) -> str:
    return f"N_{name}"


class UnknownVariableError(KeyError):
    pass


@dataclass(frozen=True)
class CanonicalModel:
    """Variables, weighted structural edges and the measurement pairing.

    ``edges`` only hold structural edges among V; the Z -> X measurement
    edges are implied by ``measurements`` (pairs ``(measured, measurement)``).
    """

    variables: tuple[Variable, ...]
    edges: tuple[Edge, ...] = ()
    measurements: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        idx = [v.index for v in self.variables]
        if len(set(idx)) != len(idx):
            raise ValueError("variable indices must be unique")
        known = set(names)
        for e in self.edges:
            for end in (e.src, e.dst):
                if end not in known:
                    raise UnknownVariableError(end)
        for z, x in self.measurements:
            for end in (z, x):
                if end not in known:
                    raise UnknownVariableError(end)

    @classmethod
    def build(
        cls,
        variables: Iterable[tuple[str, Kind | str]],
        edges: Mapping[tuple[str, str], Any] | Iterable[tuple[str, str, Any]] = (),
        measurements: Mapping[str, str] | Iterable[tuple[str, str]] = (),
    ) -> "CanonicalModel":
        """Convenience constructor; indices follow the order of ``variables``."""
        vs = tuple(Variable(i, name, Kind(kind)) for i, (name, kind) in enumerate(variables))
        if isinstance(edges, Mapping):
            edges = [(s, d, w) for (s, d), w in edges.items()]
        es = tuple(Edge(s, d, w) for s, d, w in edges)
        if isinstance(measurements, Mapping):
            measurements = measurements.items()
        return cls(vs, es, tuple((z, x) for z, x in measurements))

    # -- lookups -----------------------------------------------------------

    @cached_property
    def by_name(self) -> dict[str, Variable]:
        return {v.name: v for v in self.variables}

    def kind(self, name: str) -> Kind:
        try:
            return self.by_name[name].kind
        except KeyError:
            raise UnknownVariableError(name) from None

    def names_of(self, *kinds: Kind) -> list[str]:
        ordered = sorted(self.variables, key=lambda v: v.index)
        return [v.name for v in ordered if v.kind in kinds]

    @property
    def unobserved(self) -> list[str]:
        return self.names_of(Kind.UNOBSERVED)

    @property
    def observed(self) -> list[str]:
        return self.names_of(Kind.OBSERVED)

    @property
    def measured_cogent(self) -> list[str]:
        return self.names_of(Kind.MEASURED)

    @property
    def mleaves(self) -> list[str]:
        return self.names_of(Kind.MLEAF)

    @property
    def cogent(self) -> list[str]:
        """V^C in block order [Z^C; Y]."""
        return self.measured_cogent + self.observed

    @property
    def structural(self) -> list[str]:
        """All of V (everything but measurements) in index order."""
        return [v.name for v in sorted(self.variables, key=lambda v: v.index) if v.kind != Kind.MEASUREMENT]

    @property
    def row_variables(self) -> list[str]:
        """Z u Y in mixing-matrix row order [Z^L; Z^C; Y]."""
        return self.mleaves + self.measured_cogent + self.observed

    @property
    def noise_carriers(self) -> list[str]:
        """H u V^C in mixing-matrix column order [H; Z^C; Y]."""
        return self.unobserved + self.cogent

    @cached_property
    def measurement_of(self) -> dict[str, str]:
        return dict(self.measurements)

    @cached_property
    def measured_by(self) -> dict[str, str]:
        return {x: z for z, x in self.measurements}

    def row_label(self, name: str) -> str:
        """Observable label of a Z/Y variable: its measurement for measured ones."""
        return self.measurement_of.get(name, name)

    def row_labels(self) -> list[str]:
        return [self.row_label(v) for v in self.row_variables]

    @property
    def counts(self) -> dict[str, int]:
        p_h, p_y = len(self.unobserved), len(self.observed)
        p_zc, p_ml = len(self.measured_cogent), len(self.mleaves)
        return {"p_H": p_h, "p_Y": p_y, "p_ZC": p_zc, "p_ml": p_ml, "p_c": p_y + p_zc, "p": p_y + p_zc + p_ml}

    @cached_property
    def weights(self) -> dict[tuple[str, str], Any]:
        return {(e.src, e.dst): e.weight for e in self.edges}

    @cached_property
    def graph(self) -> nx.DiGraph:
        """Causal diagram over V u X (measurement edges included)."""
        g = nx.DiGraph()
        for v in sorted(self.variables, key=lambda v: v.index):
            g.add_node(v.name, kind=v.kind)
        for e in self.edges:
            g.add_edge(e.src, e.dst)
        for z, x in self.measurements:
            g.add_edge(z, x)
        return g

    @cached_property
    def _pa(self) -> dict[str, frozenset[str]]:
        pa: dict[str, set[str]] = {v.name: set() for v in self.variables}
        for e in self.edges:
            pa[e.dst].add(e.src)
        return {k: frozenset(v) for k, v in pa.items()}

    @cached_property
    def _ch(self) -> dict[str, frozenset[str]]:
        ch: dict[str, set[str]] = {v.name: set() for v in self.variables}
        for e in self.edges:
            ch[e.src].add(e.dst)
        return {k: frozenset(v) for k, v in ch.items()}

    def parents(self, name: str) -> frozenset[str]:
        """Structural parents (a measurement's parent is its measured variable)."""
        self.kind(name)
        if name in self.measured_by:
            return frozenset({self.measured_by[name]})
        return self._pa[name]

    def children(self, name: str) -> frozenset[str]:
        """Children within V; measurements are not included."""
        self.kind(name)
        return self._ch[name]

    def topological_order(self) -> list[str]:
        index = {v.name: v.index for v in self.variables}
        return list(nx.lexicographical_topological_sort(self.graph, key=index.__getitem__))

    def is_acyclic(self) -> bool:
        return nx.is_directed_acyclic_graph(self.graph)

    def with_edges(self, edges: Iterable[Edge], variables: Iterable[Variable] | None = None) -> "CanonicalModel":
        vs = tuple(variables) if variables is not None else self.variables
        names = {v.name for v in vs}
        ms = tuple((z, x) for z, x in self.measurements if z in names)
        return CanonicalModel(vs, tuple(edges), ms)

    def __repr__(self) -> str:
        c = self.counts
        return (f"CanonicalModel(p_H={c['p_H']}, p_Y={c['p_Y']}, p_ZC={c['p_ZC']}, "
                f"p_ml={c['p_ml']}, edges={len(self.edges)})")


# -- graph queries -------------------------------------------------------


def ancestors(model: CanonicalModel, v: str) -> set[str]:
    model.kind(v)
    return set(nx.ancestors(model.graph, v))


def descendants(model: CanonicalModel, v: str) -> set[str]:
    model.kind(v)
    return set(nx.descendants(model.graph, v))


def possible_parents(model: CanonicalModel, v: str) -> set[str]:
    """Cogent ancestors of ``v`` plus every mleaf whose parents are all ancestors of ``v``."""
    kind = model.kind(v)
    if kind in (Kind.UNOBSERVED, Kind.MEASUREMENT):
        raise ValueError(f"possible parents are defined for Z u Y variables, not {kind.value} {v!r}")
    an = ancestors(model, v)
    pp = {a for a in an if model.kind(a) != Kind.UNOBSERVED}
    for m in model.mleaves:
        if m != v and model.parents(m) <= an:
            pp.add(m)
    return pp


def total_effects(model: CanonicalModel) -> np.ndarray:
    """Total causal effects over V, ordered as ``model.structural``.

    ``T[j, i]`` is the summed path product from ``V_i`` to ``V_j``, i.e.
    ``(I - A)^{-1} - I``.  Computed by propagation along a topological order
    so exact weight types (Fraction, sympy) are preserved; float weights give
    a float array.
    """
    names = model.structural
    pos = {n: k for k, n in enumerate(names)}
    order = [n for n in model.topological_order() if n in pos]
    exact = any(not isinstance(e.weight, (int, float, np.floating, np.integer)) for e in model.edges)
    p = len(names)
    T: list[list[Any]] = [[0] * p for _ in range(p)]
    for j in order:
        row = T[pos[j]]
        for par in model.parents(j):
            w = model.weights[(par, j)]
            prow = T[pos[par]]
            for i in range(p):
                if prow[i] != 0:
                    row[i] = row[i] + w * prow[i]
            row[pos[par]] = row[pos[par]] + w
    if exact:
        return np.array(T, dtype=object).reshape(p, p)
    return np.array(T, dtype=float).reshape(p, p)


def validate_canonical(model: CanonicalModel) -> list[Violation]:
    """Every broken canonical-form rule; an empty list means the model is canonical."""
    out: list[Violation] = []
    kinds = {v.name: v.kind for v in model.variables}
    seen: set[tuple[str, str]] = set()
    for e in model.edges:
        if (e.src, e.dst) in seen:
            out.append(Violation("duplicate-edge", (e.src, e.dst)))
        seen.add((e.src, e.dst))
        if e.src == e.dst:
            out.append(Violation("self-loop", (e.src,)))
        try:
            zero = e.weight == 0
        except TypeError:
            zero = False
        if zero:
            out.append(Violation("zero-weight-edge", (e.src, e.dst)))
        if kinds[e.src] == Kind.MEASUREMENT or kinds[e.dst] == Kind.MEASUREMENT:
            out.append(Violation("structural-edge-on-measurement", (e.src, e.dst)))
        if kinds[e.dst] == Kind.UNOBSERVED:
            out.append(Violation("unobserved-with-parent", (e.dst,), f"parent {e.src}"))
        if kinds[e.src] == Kind.MLEAF:
            out.append(Violation("mleaf-with-extra-child", (e.src,), f"child {e.dst}"))
    if not model.is_acyclic():
        cycle = nx.find_cycle(model.graph)
        out.append(Violation("cycle", tuple(u for u, _ in cycle)))

    measured_counts: dict[str, int] = {}
    measurement_counts: dict[str, int] = {}
    for z, x in model.measurements:
        measured_counts[z] = measured_counts.get(z, 0) + 1
        measurement_counts[x] = measurement_counts.get(x, 0) + 1
        if kinds[z] not in (Kind.MEASURED, Kind.MLEAF):
            out.append(Violation("measurement-of-unmeasured", (z, x), kinds[z].value))
        if kinds[x] != Kind.MEASUREMENT:
            out.append(Violation("measurement-wrong-kind", (z, x), kinds[x].value))

    for v in sorted(model.variables, key=lambda v: v.index):
        n = v.name
        if v.kind == Kind.UNOBSERVED:
            if len(model._ch[n]) < 2:
                out.append(Violation("confounder-with-one-child", (n,), f"{len(model._ch[n])} children"))
        elif v.kind in (Kind.MEASURED, Kind.MLEAF):
            if measured_counts.get(n, 0) != 1:
                out.append(Violation("measured-without-single-measurement", (n,)))
            if v.kind == Kind.MEASURED and not model._ch[n]:
                out.append(Violation("measured-is-mleaf", (n,), "no children besides its measurement"))
            if v.kind == Kind.MLEAF and not model._pa[n]:
                out.append(Violation("mleaf-without-parents", (n,)))
        elif v.kind == Kind.MEASUREMENT:
            if measurement_counts.get(n, 0) != 1:
                out.append(Violation("measurement-without-single-source", (n,)))
    return out


def is_minimal(model: CanonicalModel) -> tuple[bool, tuple[str, str] | None]:
    """Graphical minimality test; returns the first ``(H_i, Z_j)`` witness if not minimal.

    The model is not minimal iff some unobserved ``H_i`` has an mleaf child
    ``Z_j`` whose ancestors are contained in the ancestors of every other
    child of ``H_i``.
    """
    index = {v.name: v.index for v in model.variables}
    for h in model.unobserved:
        kids = sorted(model.children(h), key=index.__getitem__)
        for z in kids:
            if model.kind(z) != Kind.MLEAF:
                continue
            an_z = ancestors(model, z)
            if all(an_z <= ancestors(model, k) for k in kids if k != z):
                return False, (h, z)
    return True, None


# -- edge identifiability ------------------------------------------------


def edge_identifiable_me(model: CanonicalModel, src: str, dst: str) -> bool:
    """Whether the measured-cogent -> mleaf edge ``src -> dst`` is identifiable.

    True iff ``dst`` has another parent that is not a parent of ``src``, or
    some other child of ``src`` (within V) misses one of ``dst``'s parents.
    """
    if model.kind(src) != Kind.MEASURED or model.kind(dst) != Kind.MLEAF:
        raise ValueError("expected a measured cogent source and an mleaf target")
    if (src, dst) not in model.weights:
        raise ValueError(f"no edge {src} -> {dst}")
    pa_l = model.parents(dst)
    if not (pa_l - {src}) <= model.parents(src):
        return True
    return any(not pa_l <= model.parents(k) for k in model.children(src) if k != dst)


def edge_identifiable_lv(model: CanonicalModel, src: str, dst: str, cogent_witnesses_only: bool = False) -> bool:
    """Whether the unobserved -> cogent edge ``src -> dst`` is identifiable.

    True iff some other child ``V_j`` of ``src`` either does not have ``dst``
    as a parent or misses one of ``dst``'s parents.  By default every other
    child in V is a candidate witness; ``cogent_witnesses_only`` restricts the
    candidates to cogent children.
    """
    if model.kind(src) != Kind.UNOBSERVED or model.kind(dst) not in COGENT_KINDS:
        raise ValueError("expected an unobserved source and a cogent target")
    if (src, dst) not in model.weights:
        raise ValueError(f"no edge {src} -> {dst}")
    pa_i = model.parents(dst)
    for vj in model.children(src):
        if vj == dst:
            continue
        if cogent_witnesses_only and model.kind(vj) not in COGENT_KINDS:
            continue
        pa_j = model.parents(vj)
        if dst not in pa_j or not pa_i <= pa_j:
            return True
    return False

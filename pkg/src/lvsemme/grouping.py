"""Ordered groupings (AOG / DOG) and their ground-truth computation from a model."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping

from .model import (
    COGENT_KINDS,
    CanonicalModel,
    Kind,
    ancestors,
    descendants,
    edge_identifiable_lv,
    edge_identifiable_me,
    noise_label,
)


@dataclass(frozen=True)
class Group:
    """One ordered group.

    ``cogent`` and ``mleaves`` name rows (variables, or row labels when the
    grouping came out of a mixing matrix); ``noises`` name columns.  A cogent
    group lists its center's own noise among ``noises``.
    """

    cogent: str | None = None
    mleaves: frozenset[str] = frozenset()
    noises: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "mleaves", frozenset(self.mleaves))
        object.__setattr__(self, "noises", frozenset(self.noises))

    @property
    def kind(self) -> str:
        if self.cogent is not None:
            return "cogent"
        return "mleaf" if self.mleaves else "unobserved"

    @property
    def rows(self) -> frozenset[str]:
        return self.mleaves | ({self.cogent} if self.cogent is not None else set())

    def __len__(self) -> int:
        return len(self.rows) + len(self.noises)

    def members(self) -> frozenset[str]:
        """Variable names in the group, reading unobserved members off ``N_<name>`` noise labels."""
        out = set(self.rows)
        for n in self.noises:
            v = n[2:] if n.startswith("N_") else n
            if v != self.cogent:
                out.add(v)
        return frozenset(out)

    def relabel(self, rows: Mapping[str, str] | None = None, noises: Mapping[str, str] | None = None) -> "Group":
        r = (lambda s: rows.get(s, s)) if rows else (lambda s: s)
        c = (lambda s: noises.get(s, s)) if noises else (lambda s: s)
        return Group(
            None if self.cogent is None else r(self.cogent),
            frozenset(map(r, self.mleaves)),
            frozenset(map(c, self.noises)),
        )

    def signature(self) -> tuple[str, frozenset[str], frozenset[str]]:
        """Kind, rows and noises, ignoring which row is marked as the center."""
        return self.kind, self.rows, self.noises

    def __str__(self) -> str:
        parts = []
        if self.cogent is not None:
            parts.append(f"*{self.cogent}")
        parts += sorted(self.mleaves)
        parts += sorted(self.noises)
        return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True)
class OrderedGrouping:
    """Groups in one consistent order, plus the group DAG when it is known.

    ``dag`` holds ``(i, j)`` position pairs meaning some member of group ``i``
    is a direct cause of some member of group ``j``.  ``iterations`` and
    ``trace`` are filled in by the recovery algorithm.
    """

    groups: tuple[Group, ...]
    dag: frozenset[tuple[int, int]] = frozenset()
    iterations: int | None = None
    trace: tuple[str, ...] = field(default=(), compare=False)

    def __iter__(self):
        return iter(self.groups)

    def __len__(self) -> int:
        return len(self.groups)

    def __getitem__(self, i: int) -> Group:
        return self.groups[i]

    def as_set(self) -> frozenset[Group]:
        return frozenset(self.groups)

    def signature(self) -> frozenset[tuple[str, frozenset[str], frozenset[str]]]:
        """Order- and center-free view used to compare groupings."""
        return frozenset(g.signature() for g in self.groups)

    def cogent_groups(self) -> list[Group]:
        return [g for g in self.groups if g.kind == "cogent"]

    def group_of(self, label: str) -> Group:
        for g in self.groups:
            if label in g.rows or label in g.noises:
                return g
        raise KeyError(label)

    def relabel(self, rows: Mapping[str, str] | None = None, noises: Mapping[str, str] | None = None) -> "OrderedGrouping":
        return replace(self, groups=tuple(g.relabel(rows, noises) for g in self.groups))

    def is_topological_for(self, dag: Iterable[tuple[Group, Group]]) -> bool:
        """True when this order places the source of every given group edge first."""
        pos = {g: k for k, g in enumerate(self.groups)}
        return all(pos[a] < pos[b] for a, b in dag)

    def edges_as_groups(self) -> set[tuple[Group, Group]]:
        return {(self.groups[i], self.groups[j]) for i, j in self.dag}

    def __str__(self) -> str:
        return " < ".join(str(g) for g in self.groups)


# -- ground-truth groupings ----------------------------------------------


def _assign(model: CanonicalModel, mleaf_rule: Callable[[str, str], bool], h_rule: Callable[[str, str], bool]) -> OrderedGrouping:
    cogent = model.cogent
    rows: dict[str, set[str]] = {c: set() for c in cogent}
    noises: dict[str, set[str]] = {c: {noise_label(c)} for c in cogent}
    loose: list[Group] = []

    for z in model.mleaves:
        hosts = [p for p in model.parents(z) if model.kind(p) == Kind.MEASURED and mleaf_rule(z, p)]
        # at most one parent can qualify: two would be ancestors of each other
        if hosts:
            rows[hosts[0]].add(z)
        else:
            loose.append(Group(mleaves=frozenset({z})))
    for h in model.unobserved:
        hosts = [c for c in model.children(h) if model.kind(c) in COGENT_KINDS and h_rule(h, c)]
        if hosts:
            noises[hosts[0]].add(noise_label(h))
        else:
            loose.append(Group(noises=frozenset({noise_label(h)})))

    groups = [Group(c, frozenset(rows[c]), frozenset(noises[c])) for c in cogent] + loose
    return _order_groups(model, groups)


def _order_groups(model: CanonicalModel, groups: list[Group]) -> OrderedGrouping:
    index = {v.name: v.index for v in model.variables}
    owner: dict[str, int] = {}
    for k, g in enumerate(groups):
        for v in g.members():
            owner[v] = k
    edges: set[tuple[int, int]] = set()
    for e in model.edges:
        a, b = owner.get(e.src), owner.get(e.dst)
        if a is not None and b is not None and a != b:
            edges.add((a, b))
    # Kahn's algorithm, ties broken by the smallest member index
    key = [min(index[v] for v in g.members()) for g in groups]
    indeg = [0] * len(groups)
    succ: dict[int, list[int]] = {k: [] for k in range(len(groups))}
    for a, b in edges:
        indeg[b] += 1
        succ[a].append(b)
    heap = [(key[k], k) for k in range(len(groups)) if indeg[k] == 0]
    heapq.heapify(heap)
    order: list[int] = []
    while heap:
        _, k = heapq.heappop(heap)
        order.append(k)
        for b in succ[k]:
            indeg[b] -= 1
            if indeg[b] == 0:
                heapq.heappush(heap, (key[b], b))
    if len(order) != len(groups):
        raise ValueError("group graph is cyclic; model is not a valid canonical model")
    pos = {k: i for i, k in enumerate(order)}
    return OrderedGrouping(
        tuple(groups[k] for k in order),
        frozenset((pos[a], pos[b]) for a, b in edges),
    )


def compute_aog(model: CanonicalModel) -> OrderedGrouping:
    """Ancestral ordered grouping of a canonical model."""

    def mleaf_rule(z: str, zi: str) -> bool:
        return (model.parents(z) - {zi}) <= ancestors(model, zi)

    def h_rule(h: str, vi: str) -> bool:
        de = descendants(model, vi)
        return all(k in de for k in model.children(h) if k != vi)

    return _assign(model, mleaf_rule, h_rule)


def compute_dog(model: CanonicalModel) -> OrderedGrouping:
    """Direct ordered grouping: members join a group when their edge to the center is not identifiable."""
    return _assign(
        model,
        lambda z, zi: not edge_identifiable_me(model, zi, z),
        lambda h, vi: not edge_identifiable_lv(model, h, vi),
    )


def row_label_map(model: CanonicalModel) -> dict[str, str]:
    """Variable name -> mixing-matrix row label (measurement name for measured variables)."""
    return {v: model.row_label(v) for v in model.row_variables}

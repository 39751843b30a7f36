"""Rewritings that keep W* fixed, and model comparison.

Both rewrites work on the structural equations as linear forms
``{parent: coefficient}`` and substitute one equation into another, so
coefficient cancellations fall out of ordinary addition.  Cancelled edges
are dropped when the combined coefficient is within ``tol`` of zero (exactly
zero in exact mode) and are logged.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import replace
from fractions import Fraction
from typing import Any, Iterable

from .grouping import Group, OrderedGrouping
from .mixing import DEFAULT_TOL, build_w_star, match_up_to_permutation_scaling
from .model import CanonicalModel, Edge, Kind, ancestors, noise_label

log = logging.getLogger(__name__)

Form = dict[str, Any]


class SwitchError(ValueError):
    pass


class _Equations:
    """Mutable copy of a model's structural equations (noise terms implied by kind)."""

    def __init__(self, model: CanonicalModel, exact: bool, tol: float):
        self.model = model
        self.exact = exact
        self.tol = tol
        self.kinds = {v.name: v.kind for v in model.variables}
        self.eq: dict[str, Form] = {v.name: {} for v in model.variables if v.kind != Kind.MEASUREMENT}
        self.text: dict[tuple[str, str], str | None] = {}
        for e in model.edges:
            self.eq[e.dst][e.src] = self._num(e.weight)
            self.text[(e.src, e.dst)] = e.text
        self.cancelled: list[tuple[str, str]] = []

    def _num(self, w: Any) -> Any:
        if not self.exact:
            return float(w)
        if isinstance(w, Fraction):
            return w
        if isinstance(w, float):
            return Fraction(str(w))
        return Fraction(w)

    def add(self, dst: str, form: Form, scale: Any) -> None:
        row = self.eq[dst]
        for src, c in form.items():
            row[src] = row.get(src, 0) + scale * c
            self.text.pop((src, dst), None)

    def clean(self) -> None:
        for dst, row in self.eq.items():
            for src in [s for s, c in row.items() if (c == 0 if self.exact else abs(c) <= self.tol)]:
                log.info("cancelled edge %s -> %s", src, dst)
                self.cancelled.append((src, dst))
                del row[src]

    def children(self, v: str) -> list[str]:
        index = {x.name: x.index for x in self.model.variables}
        return sorted((d for d, row in self.eq.items() if v in row), key=index.__getitem__)

    def to_model(self, drop: Iterable[str] = ()) -> CanonicalModel:
        drop = set(drop)
        variables = tuple(replace(v, kind=self.kinds[v.name]) for v in self.model.variables if v.name not in drop)
        index = {v.name: v.index for v in variables}
        edges = []
        for dst in sorted(self.eq, key=lambda n: index.get(n, -1)):
            if dst in drop:
                continue
            for src in sorted(self.eq[dst], key=index.__getitem__):
                edges.append(Edge(src, dst, self.eq[dst][src], self.text.get((src, dst))))
        return self.model.with_edges(edges, variables)


def _switch_center_var(eqs: _Equations, old: str, new: str) -> None:
    a = eqs.eq[new].get(old)
    if a is None or a == 0:
        raise SwitchError(f"zero pivot: {old} is not a parent of {new}")
    L_j = {k: c for k, c in eqs.eq[new].items() if k != old}
    L_i = dict(eqs.eq[old])
    kids = [k for k in eqs.children(old) if k != new]
    # new = a * L_i + L_j (+ a * N_old, its noise now)
    eqs.eq[new] = {}
    eqs.add(new, L_i, a)
    eqs.add(new, L_j, 1)
    # old = (new - L_j) / a
    inv = 1 / a
    old_form: Form = {new: inv}
    for k, c in L_j.items():
        old_form[k] = -c * inv
    eqs.eq[old] = dict(old_form)
    for k in kids:
        coef = eqs.eq[k].pop(old)
        eqs.text.pop((old, k), None)
        eqs.add(k, old_form, coef)
    eqs.kinds[old], eqs.kinds[new] = Kind.MLEAF, Kind.MEASURED


def _switch_noise(eqs: _Equations, center: str, h: str) -> None:
    b = eqs.eq[center].get(h)
    if b is None or b == 0:
        raise SwitchError(f"zero pivot: {h} is not a parent of {center}")
    others = {k: c for k, c in eqs.eq[center].items() if k != h}
    kids = [k for k in eqs.children(h) if k != center]
    # h now stands for the center's former noise, entering the center with weight 1
    eqs.eq[center][h] = eqs._num(1)
    eqs.text.pop((h, center), None)
    for k in kids:
        r = eqs.eq[k].pop(h) / b
        eqs.text.pop((h, k), None)
        eqs.add(k, {center: 1, h: -1}, r)
        eqs.add(k, others, -r)


def switch_center(model: CanonicalModel, group: Group, new_center: str | None = None, new_noise: str | None = None,
                  tol: float = DEFAULT_TOL, exact: bool = False,
                  cancelled: list[tuple[str, str]] | None = None) -> CanonicalModel:
    """Equivalent model with a different center and/or center noise in ``group``.

    ``new_center`` must be an mleaf of the group; it becomes the measured
    cogent center and the old center becomes an mleaf.  ``new_noise`` (a
    group noise label or the unobserved variable's name) swaps the center's
    own noise with that confounder's.  Cancelled edges are appended to
    ``cancelled`` when a list is passed.
    """
    if group.kind != "cogent":
        raise SwitchError(f"{group} is not a cogent group")
    center = group.cogent
    eqs = _Equations(model, exact, tol)
    if new_center is not None and new_center != center:
        if new_center not in group.mleaves:
            raise SwitchError(f"{new_center!r} is not an mleaf of {group}")
        _switch_center_var(eqs, center, new_center)
        center = new_center
    if new_noise is not None:
        label = new_noise if new_noise in group.noises else noise_label(new_noise)
        if label not in group.noises:
            raise SwitchError(f"{new_noise!r} is not a noise of {group}")
        h = label[2:]
        if h != group.cogent:
            if model.kind(h) != Kind.UNOBSERVED:
                raise SwitchError(f"{h!r} is not unobserved")
            _switch_noise(eqs, center, h)
    eqs.clean()
    if cancelled is not None:
        cancelled.extend(eqs.cancelled)
    return eqs.to_model()


def _model_key(model: CanonicalModel, digits: int = 9) -> tuple:
    kinds = tuple(sorted((v.name, v.kind.value) for v in model.variables))
    edges = tuple(sorted((e.src, e.dst, round(float(e.weight), digits)) for e in model.edges))
    return kinds, edges


def enumerate_equivalents(model: CanonicalModel, grouping: OrderedGrouping, tol: float = DEFAULT_TOL,
                          exact: bool = False) -> list[CanonicalModel]:
    """All models reachable by per-group center and noise switches, input first.

    Every cogent group contributes (1 + #mleaves) * (1 + #confounders)
    choices; switches for different groups are applied one after another.
    """
    options = []
    groups = grouping.cogent_groups()
    for g in groups:
        hs = sorted(n for n in g.noises if n != noise_label(g.cogent))
        options.append(list(itertools.product([None, *sorted(g.mleaves)], [None, *hs])))
    out, seen = [], set()
    for choice in itertools.product(*options):
        m = model
        for g, (z, h) in zip(groups, choice):
            if z is None and h is None:
                continue
            # the group's center may not be the original one if z was switched in an earlier group
            m = switch_center(m, g, z, h, tol=tol, exact=exact)
        key = _model_key(m)
        if key not in seen:
            seen.add(key)
            out.append(m)
    return out


def reduce_latent(model: CanonicalModel, h: str, z: str, tol: float = DEFAULT_TOL, exact: bool = False,
                  cancelled: list[tuple[str, str]] | None = None) -> CanonicalModel:
    """Remove ``h`` by letting its mleaf child ``z`` carry h's noise.

    ``(h, z)`` must witness non-minimality: ``z`` is an mleaf child of ``h``
    whose ancestors are ancestors of every other child of ``h``.  ``z`` becomes
    a measured cogent variable and each other child is rewritten in terms of
    ``z`` and ``z``'s other parents.
    """
    if model.kind(h) != Kind.UNOBSERVED or model.kind(z) != Kind.MLEAF or z not in model.children(h):
        raise ValueError(f"({h}, {z}) is not an unobserved / mleaf-child pair")
    an_z = ancestors(model, z)
    if not all(an_z <= ancestors(model, k) for k in model.children(h) if k != z):
        raise ValueError(f"({h}, {z}) does not witness non-minimality")
    eqs = _Equations(model, exact, tol)
    b = eqs.eq[z].pop(h)
    L_j = dict(eqs.eq[z])
    inv = 1 / b
    h_form: Form = {z: inv}
    for k, c in L_j.items():
        h_form[k] = -c * inv
    for k in eqs.children(h):
        coef = eqs.eq[k].pop(h)
        eqs.add(k, h_form, coef)
    eqs.kinds[z] = Kind.MEASURED
    del eqs.eq[h]
    eqs.clean()
    if cancelled is not None:
        cancelled.extend(eqs.cancelled)
    return eqs.to_model(drop=[h])


# -- comparison ----------------------------------------------------------


def same_unlabeled_structure(m1: CanonicalModel, m2: CanonicalModel) -> bool:
    """Whether the causal diagrams are isomorphic with kinds preserved."""
    g1, g2 = m1.graph, m2.graph
    if g1.number_of_nodes() != g2.number_of_nodes() or g1.number_of_edges() != g2.number_of_edges():
        return False

    def sig(g, v):
        return (g.nodes[v]["kind"].value, g.in_degree(v), g.out_degree(v))

    s1 = {v: sig(g1, v) for v in g1}
    s2 = {v: sig(g2, v) for v in g2}
    if sorted(s1.values()) != sorted(s2.values()):
        return False
    # rarest signatures first keeps the branching small
    freq: dict[tuple, int] = {}
    for s in s1.values():
        freq[s] = freq.get(s, 0) + 1
    order = sorted(g1, key=lambda v: (freq[s1[v]], s1[v], str(v)))
    by_sig: dict[tuple, list] = {}
    for v in sorted(g2, key=str):
        by_sig.setdefault(s2[v], []).append(v)
    mapping: dict[Any, Any] = {}
    used: set[Any] = set()

    def fits(u, x) -> bool:
        for p in g1.predecessors(u):
            if p in mapping and not g2.has_edge(mapping[p], x):
                return False
        for c in g1.successors(u):
            if c in mapping and not g2.has_edge(x, mapping[c]):
                return False
        return True

    def search(i: int) -> bool:
        if i == len(order):
            return True
        u = order[i]
        for x in by_sig[s1[u]]:
            if x in used or not fits(u, x):
                continue
            mapping[u] = x
            used.add(x)
            if search(i + 1):
                return True
            del mapping[u]
            used.discard(x)
        return False

    return search(0)


def models_equal_mixing(m1: CanonicalModel, m2: CanonicalModel, tol: float = DEFAULT_TOL) -> bool:
    """Whether both models have the same W* up to column permutation and scaling."""
    w1, w2 = build_w_star(m1), build_w_star(m2)
    if sorted(w1.row_labels) != sorted(w2.row_labels) or w1.shape != w2.shape:
        return False
    idx = [w2.row_index(r) for r in w1.row_labels]
    a = w1.as_float()
    b = w2.as_float()[idx]
    return match_up_to_permutation_scaling(a, b, tol) is not None

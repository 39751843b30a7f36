"""Recovering the ancestral ordered grouping and the equivalence class from W*.

``recover_aog`` works on the support of W* only.  ``enumerate_class`` then
tries every choice of center row and center noise in each cogent group and
reads B, C, D off W* by block inversion.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

import networkx as nx
import numpy as np

from .grouping import Group, OrderedGrouping
from .mixing import DEFAULT_TOL, MixingMatrix, support
from .model import CanonicalModel, Kind, noise_label

log = logging.getLogger(__name__)


class RecoveryError(RuntimeError):
    """W* is inconsistent with any minimal, faithful canonical model."""

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message if iteration is None else f"iteration {iteration}: {message}")
        self.iteration = iteration


def _observability(W: MixingMatrix, observability) -> tuple[bool, ...]:
    """Per-row measured flags from a bool sequence or a label -> flag/'measured'/'observed' mapping."""
    if observability is None:
        return W.measured
    if isinstance(observability, Mapping):
        out = []
        for r in W.row_labels:
            v = observability[r]
            out.append(v == "measured" if isinstance(v, str) else bool(v))
        return tuple(out)
    flags = tuple(bool(x) for x in observability)
    if len(flags) != W.shape[0]:
        raise ValueError("one observability flag per row is required")
    return flags


# -- Algorithm 1 ---------------------------------------------------------


def recover_aog(Wstar: MixingMatrix, observability=None, tol: float | None = None) -> OrderedGrouping:
    """Ancestral ordered grouping of the model behind ``Wstar``.

    Groups are labelled by row and column labels of ``Wstar`` and emitted as
    unobserved groups, then cogent groups in discovery order, then mleaf
    groups.  A cogent group marks its observed row (if any, otherwise its
    first row) as ``cogent``; which measured row is the true center cannot be
    told from W*.  Ties between candidate rows go to the lowest row index.

    When the chosen rows contain an observed variable and the W0 block has
    no zero, the observed row and every noise of N_J form one cogent group.
    Raises :class:`RecoveryError` on inputs no valid model could produce.
    """
    tol = Wstar.tolerance if tol is None else tol
    measured = _observability(Wstar, observability)
    rl, cl = Wstar.row_labels, Wstar.col_labels
    mask = support(Wstar, tol).mask
    n = mask.sum(axis=1)
    m = mask.sum(axis=0)
    rows = list(range(mask.shape[0]))
    cols = set(range(mask.shape[1]))
    unobserved: list[Group] = []
    cogent: list[Group] = []
    mleaf: list[Group] = []
    trace: list[str] = []
    it = 0

    while rows:
        it += 1
        resid = {r: frozenset(c for c in np.flatnonzero(mask[r]) if c in cols) for r in rows}
        w = min(rows, key=lambda r: (len(resid[r]), n[r], r))
        N_I = sorted(resid[w])
        if not N_I:
            raise RecoveryError(f"row {rl[w]!r} has no remaining nonzero column", it)
        Z_I = [r for r in rows if resid[r] == resid[w]]
        n0 = n[w]
        Z_J = [r for r in Z_I if n[r] == n0]
        m0 = min(m[c] for c in N_I)
        N_J = [c for c in N_I if m[c] == m0]
        mleaf += [Group(mleaves=frozenset({rl[r]})) for r in Z_I if r not in Z_J]
        unobserved += [Group(noises=frozenset({cl[c]})) for c in N_I if c not in N_J]

        N_m = N_J[0]
        W0 = mask[np.ix_(np.flatnonzero(mask[:, N_m]), np.flatnonzero(mask[w]))]
        has_zero = not W0.all()
        obs = [r for r in Z_J if not measured[r]]
        if len(obs) > 1:
            raise RecoveryError(f"observed rows {[rl[r] for r in obs]} share one support", it)
        step = (f"iteration {it}: w={rl[w]} Z_I={[rl[r] for r in Z_I]} N_I={[cl[c] for c in N_I]} "
                f"Z_J={[rl[r] for r in Z_J]} N_J={[cl[c] for c in N_J]} W0 {'has a zero' if has_zero else 'all nonzero'}")
        if has_zero:
            # no row of Z_J is cogent, except a forced observed one
            for r in obs:
                cogent.append(Group(rl[r]))
            mleaf += [Group(mleaves=frozenset({rl[r]})) for r in Z_J if measured[r]]
            unobserved += [Group(noises=frozenset({cl[c]})) for c in N_J]
            step += " -> split"
        elif obs:
            cogent.append(Group(rl[obs[0]], noises=frozenset(cl[c] for c in N_J)))
            mleaf += [Group(mleaves=frozenset({rl[r]})) for r in Z_J if measured[r]]
            step += f" -> cogent around observed {rl[obs[0]]}"
        else:
            cogent.append(Group(rl[Z_J[0]], frozenset(rl[r] for r in Z_J[1:]), frozenset(cl[c] for c in N_J)))
            step += " -> cogent"
        trace.append(step)
        log.debug(step)
        rows = [r for r in rows if r not in Z_I]
        cols -= set(N_I)

    out = OrderedGrouping(tuple(unobserved + cogent + mleaf), iterations=it, trace=tuple(trace))
    _verify(out, Wstar, measured, mask)
    return out


def _verify(g: OrderedGrouping, W: MixingMatrix, measured: Sequence[bool], mask: np.ndarray) -> None:
    ri = {r: k for k, r in enumerate(W.row_labels)}
    ci = {c: k for k, c in enumerate(W.col_labels)}
    for grp in g:
        if grp.kind == "mleaf" and not all(measured[ri[r]] for r in grp.mleaves):
            raise RecoveryError(f"observed row placed in an mleaf group {grp}")
        if grp.kind == "cogent" and not grp.noises:
            raise RecoveryError(f"cogent group {grp} has no noise column")
        if grp.kind == "unobserved":
            (c,) = grp.noises
            if mask[:, ci[c]].sum() < 2:
                raise RecoveryError(f"column {c!r} taken as unobserved but has fewer than two nonzeros")
        rs = [mask[ri[r]] for r in grp.rows]
        cs = [mask[:, ci[c]] for c in grp.noises]
        if any(not np.array_equal(rs[0], x) for x in rs[1:]) or any(not np.array_equal(cs[0], x) for x in cs[1:]):
            raise RecoveryError(f"group {grp} mixes different supports")


# -- Algorithm 2 ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RecoveredModel:
    """Parameters (B, C, D) for one choice of centers and center noises.

    ``centers[k]`` is the row picked as center of the k-th cogent group and
    ``center_columns[k]`` the column taken as its noise.  C is indexed by
    centers, D by (leaf_rows, centers), B^C by (centers, latent_columns) and
    B^L by (leaf_rows, latent_columns).
    """

    centers: tuple[str, ...]
    center_columns: tuple[str, ...]
    leaf_rows: tuple[str, ...]
    latent_columns: tuple[str, ...]
    C: np.ndarray
    B_C: np.ndarray
    D: np.ndarray
    B_L: np.ndarray
    observed_rows: frozenset[str] = frozenset()
    row_variables: Mapping[str, str] | None = None
    tolerance: float = DEFAULT_TOL

    @property
    def center_assignment(self) -> tuple[tuple[str, str], ...]:
        return tuple(zip(self.centers, self.center_columns))

    @property
    def B(self) -> np.ndarray:
        return np.vstack([self.B_L, self.B_C])

    def edge_count(self, tol: float | None = None) -> int:
        return edge_count(self, tol)

    @classmethod
    def from_model(cls, model: CanonicalModel) -> "RecoveredModel":
        """Ground-truth parameters of ``model`` laid out by row and noise labels."""
        cog, leaves, hs = model.cogent, model.mleaves, model.unobserved
        w = model.weights

        def block(dst: Sequence[str], src: Sequence[str]) -> np.ndarray:
            return np.array([[float(w.get((s, d), 0.0)) for s in src] for d in dst], dtype=float).reshape(len(dst), len(src))

        return cls(
            tuple(model.row_label(c) for c in cog),
            tuple(noise_label(c) for c in cog),
            tuple(model.row_label(z) for z in leaves),
            tuple(noise_label(h) for h in hs),
            C=block(cog, cog), B_C=block(cog, hs), D=block(leaves, cog), B_L=block(leaves, hs),
            observed_rows=frozenset(model.observed),
            row_variables={model.row_label(v): v for v in model.row_variables},
        )

    def w_star(self, row_order: Sequence[str] | None = None) -> MixingMatrix:
        """W* rebuilt from the parameters; columns are [latent; center] noises."""
        k = len(self.centers)
        M = np.linalg.inv(np.eye(k) - self.C) if k else np.zeros((0, 0))
        top = np.hstack([self.B_L + self.D @ M @ self.B_C, self.D @ M])
        bottom = np.hstack([M @ self.B_C, M])
        entries = np.vstack([top, bottom])
        labels = self.leaf_rows + self.centers
        if row_order is not None:
            pos = {r: i for i, r in enumerate(labels)}
            idx = [pos[r] for r in row_order]
            entries, labels = entries[idx], tuple(row_order)
        return MixingMatrix(entries, labels, self.latent_columns + self.center_columns,
                            tuple(r not in self.observed_rows for r in labels), self.tolerance)

    def to_model(self, tol: float | None = None) -> CanonicalModel:
        """Canonical model with edges for every parameter above ``tol``.

        Measured rows become variables named after ``row_variables`` when
        known (else ``Z_<row>``) with the row label as their measurement.
        Latent columns become unobserved variables named after the column.
        """
        tol = self.tolerance if tol is None else tol
        rv = dict(self.row_variables or {})

        def var(r: str) -> str:
            if r in self.observed_rows:
                return r
            return rv.get(r, f"Z_{r}")

        rows = {r: var(r) for r in self.centers + self.leaf_rows}
        taken = set(rows.values()) | set(self.centers + self.leaf_rows)
        hs = {}
        for c in self.latent_columns:
            base = c[2:] if c.startswith("N_") else f"H_{c}"
            name = base
            while name in taken:
                name = "U_" + name
            taken.add(name)
            hs[c] = name
        variables: list[tuple[str, Kind]] = [(hs[c], Kind.UNOBSERVED) for c in self.latent_columns]
        for r in self.centers:
            variables.append((rows[r], Kind.OBSERVED if r in self.observed_rows else Kind.MEASURED))
        variables += [(rows[r], Kind.MLEAF) for r in self.leaf_rows]
        measurements = [(rows[r], r) for r in self.centers + self.leaf_rows if r not in self.observed_rows]
        variables += [(x, Kind.MEASUREMENT) for _, x in measurements]

        edges: list[tuple[str, str, float]] = []

        def emit(mat: np.ndarray, dst: Sequence[str], src: Sequence[str]) -> None:
            for a, d in enumerate(dst):
                for b, s in enumerate(src):
                    if abs(mat[a, b]) > tol:
                        edges.append((s, d, float(mat[a, b])))

        cen = [rows[r] for r in self.centers]
        leaves = [rows[r] for r in self.leaf_rows]
        lat = [hs[c] for c in self.latent_columns]
        emit(self.B_C, cen, lat)
        emit(self.B_L, leaves, lat)
        emit(self.C, cen, cen)
        emit(self.D, leaves, cen)
        return CanonicalModel.build(variables, edges, measurements)

    def __repr__(self) -> str:
        pairs = ", ".join(f"{r}:{c}" for r, c in self.center_assignment)
        return f"RecoveredModel(centers=[{pairs}], edges={edge_count(self)})"


class ClassMembers(list):
    """List of recovered models that also keeps the rejected selections.

    ``rejected`` holds ``(center_assignment, reason)`` pairs.
    """

    def __init__(self, items=(), rejected=()):
        super().__init__(items)
        self.rejected: list[tuple[tuple[tuple[str, str], ...], str]] = list(rejected)


def edge_count(model: RecoveredModel, tol: float | None = None) -> int:
    """Number of entries of B, C and D with magnitude above ``tol``."""
    tol = model.tolerance if tol is None else tol
    return int(sum(np.count_nonzero(np.abs(a) > tol) for a in (model.B_L, model.B_C, model.C, model.D)))


def _is_acyclic(C: np.ndarray, tol: float) -> bool:
    g = nx.DiGraph()
    g.add_nodes_from(range(C.shape[0]))
    g.add_edges_from((int(j), int(i)) for i, j in zip(*np.nonzero(np.abs(C) > tol)))
    return nx.is_directed_acyclic_graph(g)


def enumerate_class(Wstar: MixingMatrix, grouping: OrderedGrouping | None = None, observability=None,
                    tol: float | None = None) -> ClassMembers:
    """Every model in the AOG class of ``Wstar``, sorted by center assignment.

    For each cogent group the center ranges over its rows (only the observed
    row when there is one) and the center noise over its noise columns.  Each
    chosen column is divided by its entry at the chosen center row before the
    block inversion.  Selections with a singular center block or a cyclic or
    non-zero-diagonal C are rejected and listed in ``.rejected``.
    """
    tol = Wstar.tolerance if tol is None else tol
    measured = _observability(Wstar, observability)
    if grouping is None:
        grouping = recover_aog(Wstar, measured, tol)
    W = Wstar.as_float()
    ri = {r: k for k, r in enumerate(Wstar.row_labels)}
    ci = {c: k for k, c in enumerate(Wstar.col_labels)}
    observed_rows = frozenset(r for r, m in zip(Wstar.row_labels, measured) if not m)
    row_vars = dict(zip(Wstar.row_labels, Wstar.row_variables)) if Wstar.row_variables else None

    groups = grouping.cogent_groups()
    row_choices, col_choices = [], []
    for g in groups:
        obs = sorted(r for r in g.rows if r in observed_rows)
        row_choices.append(obs if obs else sorted(g.rows, key=ri.__getitem__))
        col_choices.append(sorted(g.noises, key=ci.__getitem__))

    out = ClassMembers()
    for row in itertools.product(*row_choices):
        for col in itertools.product(*col_choices):
            assignment = tuple(zip(row, col))
            try:
                out.append(_reconstruct(W, ri, ci, row, col, observed_rows, row_vars, tol))
            except _Rejected as exc:
                log.warning("rejected selection %s: %s", assignment, exc)
                out.rejected.append((assignment, str(exc)))
    out.sort(key=lambda m: m.center_assignment)
    return out


class _Rejected(ValueError):
    pass


def _reconstruct(W: np.ndarray, ri: dict[str, int], ci: dict[str, int], row: Sequence[str], col: Sequence[str],
                 observed_rows: frozenset[str], row_vars, tol: float) -> RecoveredModel:
    Wn = W.copy()
    r_idx = [ri[r] for r in row]
    c_idx = [ci[c] for c in col]
    for r, c in zip(r_idx, c_idx):
        pivot = Wn[r, c]
        if abs(pivot) <= tol:
            raise _Rejected(f"zero entry at center ({r}, {c})")
        Wn[:, c] /= pivot
    rc = sorted(set(ri.values()) - set(r_idx))
    cc = sorted(set(ci.values()) - set(c_idx))
    k = len(r_idx)
    block = Wn[np.ix_(r_idx, c_idx)]
    try:
        inv = np.linalg.inv(block)
    except np.linalg.LinAlgError:
        raise _Rejected("singular center block") from None
    if not np.all(np.isfinite(inv)):
        raise _Rejected("singular center block")
    C = np.eye(k) - inv
    if np.any(np.abs(np.diag(C)) > tol * max(1.0, np.abs(C).max(initial=0.0))):
        raise _Rejected("C has a nonzero diagonal")
    np.fill_diagonal(C, 0.0)
    if not _is_acyclic(C, tol):
        raise _Rejected("C is cyclic")
    I_C = np.eye(k) - C
    B_C = I_C @ Wn[np.ix_(r_idx, cc)]
    D = Wn[np.ix_(rc, c_idx)] @ I_C
    B_L = Wn[np.ix_(rc, cc)] - D @ np.linalg.solve(I_C, B_C) if k else Wn[np.ix_(rc, cc)]
    rows_by_index = {v: r for r, v in ri.items()}
    cols_by_index = {v: c for c, v in ci.items()}
    return RecoveredModel(
        tuple(row), tuple(col),
        tuple(rows_by_index[i] for i in rc), tuple(cols_by_index[j] for j in cc),
        C=C, B_C=B_C, D=D, B_L=B_L,
        observed_rows=observed_rows, row_variables=row_vars, tolerance=tol,
    )


def dog_filter(models: Sequence[RecoveredModel], tol: float | None = None) -> list[RecoveredModel]:
    """Members with the fewest nonzero parameters."""
    if not models:
        raise ValueError("no models to filter")
    counts = [edge_count(m, tol) for m in models]
    best = min(counts)
    return [m for m, c in zip(models, counts) if c == best]


def parameters_match(a: RecoveredModel, b: RecoveredModel, tol: float = 1e-8) -> bool:
    """Same centers, leaves and parameters, with latent columns matched by label up to scale."""
    if set(a.center_assignment) != set(b.center_assignment) or set(a.leaf_rows) != set(b.leaf_rows) \
            or set(a.latent_columns) != set(b.latent_columns):
        return False
    pc = [b.centers.index(r) for r in a.centers]
    pl = [b.leaf_rows.index(r) for r in a.leaf_rows]
    ph = [b.latent_columns.index(c) for c in a.latent_columns]

    def close(x: np.ndarray, y: np.ndarray) -> bool:
        return bool(np.all(np.abs(x - y) <= tol * np.maximum(1.0, np.abs(y))))

    if not close(a.C, b.C[np.ix_(pc, pc)]) or not close(a.D, b.D[np.ix_(pl, pc)]):
        return False
    Ba = np.vstack([a.B_L, a.B_C])
    Bb = np.vstack([b.B_L[np.ix_(pl, ph)], b.B_C[np.ix_(pc, ph)]])
    for j in range(Ba.shape[1]):
        x, y = Ba[:, j], Bb[:, j]
        k = int(np.argmax(np.abs(x)))
        if abs(x[k]) <= tol:
            return False
        if not close(x * (y[k] / x[k]), y):
            return False
    return True

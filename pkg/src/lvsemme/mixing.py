"""Mixing matrices W* and W, measurement-column stripping, and orbit comparison.

Rows are observables in block order [Z^L; Z^C; Y] (measured rows labelled by
their measurement), columns are exogenous noises.  Columns are only known up
to permutation and scaling, so comparison helpers work on that orbit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import cmp_to_key
from typing import Any, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import CanonicalModel, noise_label, total_effects

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MixingMatrix:
    """Labelled real matrix with per-row observability.

    ``measured[i]`` is True when row ``i`` is a noisy measurement (X) and
    False when it is observed without error (Y).  ``row_variables`` names the
    underlying Z/Y variable of each row when known (ground-truth mode).
    """

    entries: np.ndarray
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    measured: tuple[bool, ...]
    tolerance: float = DEFAULT_TOL
    row_variables: tuple[str, ...] | None = None
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        e = np.asarray(self.entries)
        if e.ndim != 2:
            e = e.reshape(len(self.row_labels), len(self.col_labels))
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "row_labels", tuple(self.row_labels))
        object.__setattr__(self, "col_labels", tuple(self.col_labels))
        object.__setattr__(self, "measured", tuple(bool(m) for m in self.measured))
        if e.shape != (len(self.row_labels), len(self.col_labels)):
            raise ValueError(f"entries shape {e.shape} does not match labels "
                             f"({len(self.row_labels)}, {len(self.col_labels)})")
        if len(set(self.row_labels)) != len(self.row_labels):
            raise ValueError("row labels must be distinct")
        if len(self.measured) != len(self.row_labels):
            raise ValueError("one observability flag per row is required")

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def as_float(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=float)

    def row_index(self, label: str) -> int:
        return self.row_labels.index(label)

    def col_index(self, label: str) -> int:
        return self.col_labels.index(label)

    def select(self, rows: Sequence[str], cols: Sequence[str]) -> np.ndarray:
        ri = [self.row_index(r) for r in rows]
        ci = [self.col_index(c) for c in cols]
        return self.entries[np.ix_(ri, ci)]

    def take_columns(self, idx: Sequence[int]) -> "MixingMatrix":
        idx = list(idx)
        return replace(self, entries=self.entries[:, idx], col_labels=tuple(self.col_labels[i] for i in idx))

    def with_entries(self, entries: np.ndarray) -> "MixingMatrix":
        return replace(self, entries=np.asarray(entries))

    def __repr__(self) -> str:
        return f"MixingMatrix({self.shape[0]}x{self.shape[1]}, rows={list(self.row_labels)}, cols={list(self.col_labels)})"


@dataclass(frozen=True, eq=False)
class SupportPattern:
    mask: np.ndarray
    row_counts: np.ndarray
    col_counts: np.ndarray


def _nonzero(x: Any, tol: float) -> bool:
    try:
        return abs(float(x)) > tol
    except TypeError:
        # symbolic entry: nonzero unless it is structurally zero
        return bool(x != 0)


def support(W: MixingMatrix | np.ndarray, tol: float | None = None) -> SupportPattern:
    entries = W.entries if isinstance(W, MixingMatrix) else np.asarray(W)
    if tol is None:
        tol = W.tolerance if isinstance(W, MixingMatrix) else DEFAULT_TOL
    if entries.dtype == object:
        mask = np.array([[_nonzero(x, tol) for x in row] for row in entries], dtype=bool).reshape(entries.shape)
    else:
        mask = np.abs(entries) > tol
    return SupportPattern(mask, mask.sum(axis=1), mask.sum(axis=0))


# -- construction from a model -------------------------------------------


def build_w_star(model: CanonicalModel) -> MixingMatrix:
    """W* of a canonical model: observables in terms of [N_H; N_{V^C}]."""
    T = total_effects(model)
    names = model.structural
    pos = {n: k for k, n in enumerate(names)}
    rows, cols = model.row_variables, model.noise_carriers
    exact = T.dtype == object
    out = np.empty((len(rows), len(cols)), dtype=object if exact else float)
    for a, r in enumerate(rows):
        for b, c in enumerate(cols):
            out[a, b] = 1 if r == c else T[pos[r], pos[c]]
    if not exact:
        out = out.astype(float)
    return MixingMatrix(
        out,
        tuple(model.row_label(r) for r in rows),
        tuple(noise_label(c) for c in cols),
        tuple(r in model.measurement_of for r in rows),
        row_variables=tuple(rows),
    )


def build_w(model: CanonicalModel) -> MixingMatrix:
    """W = [W* | one-hot measurement-error columns], rows [X; Y]."""
    ws = build_w_star(model)
    measured_rows = [i for i, m in enumerate(ws.measured) if m]
    extra = np.zeros((ws.shape[0], len(measured_rows)), dtype=ws.entries.dtype)
    for k, i in enumerate(measured_rows):
        extra[i, k] = 1
    labels = tuple(noise_label(ws.row_labels[i]) for i in measured_rows)
    return replace(ws, entries=np.hstack([ws.entries, extra]), col_labels=ws.col_labels + labels)


class StripError(ValueError):
    pass


def strip_measurement_columns(W: MixingMatrix, measured: Sequence[bool] | None = None, tol: float | None = None) -> MixingMatrix:
    """Drop one one-hot column per measured row, keeping the rest in order.

    A matrix without any one-hot column on a measured row is returned as is.

    When several one-hot columns hit the same measured row the lowest-index
    one is removed and the ambiguity is logged and recorded in ``notes``.
    """
    measured = W.measured if measured is None else tuple(bool(m) for m in measured)
    if len(measured) != W.shape[0]:
        raise ValueError("one observability flag per row is required")
    tol = W.tolerance if tol is None else tol
    mask = support(W, tol).mask
    one_hot_row = {j: int(np.flatnonzero(mask[:, j])[0]) for j in range(W.shape[1]) if mask[:, j].sum() == 1}
    drop: list[int] = []
    notes = list(W.notes)
    if not any(measured[r] for r in one_hot_row.values()):
        # a valid W* never has a one-hot column on a measured row: already stripped
        return replace(W, measured=measured)
    for i, is_measured in enumerate(measured):
        if not is_measured:
            continue
        hits = sorted(j for j, r in one_hot_row.items() if r == i)
        if not hits:
            raise StripError(f"measured row {W.row_labels[i]!r} has no one-hot column; "
                             "not an LV-SEM-ME mixing matrix or tolerance too tight")
        if len(hits) > 1:
            msg = (f"row {W.row_labels[i]!r}: {len(hits)} one-hot columns "
                   f"{[W.col_labels[j] for j in hits]}, removed {W.col_labels[hits[0]]!r}")
            log.warning("ambiguous measurement column: %s", msg)
            notes.append("ambiguous: " + msg)
        drop.append(hits[0])
    keep = [j for j in range(W.shape[1]) if j not in set(drop)]
    return replace(W.take_columns(keep), measured=measured, notes=tuple(notes))


# -- orbit comparison ----------------------------------------------------


def _column_scale(a: np.ndarray, b: np.ndarray, sa: np.ndarray, tol: float) -> float | None:
    """Scale s with a * s ~= b on a shared support ``sa``; None if none fits."""
    if not sa.any():
        return 1.0
    k = int(np.argmax(np.abs(a) * sa))
    s = b[k] / a[k]
    atol = tol * max(1.0, float(np.max(np.abs(b))))
    if np.all(np.abs(a * s - b) <= atol):
        return float(s)
    return None


def match_up_to_permutation_scaling(A: MixingMatrix | np.ndarray, B: MixingMatrix | np.ndarray,
                                    tol: float = DEFAULT_TOL) -> tuple[list[int], list[float]] | None:
    """Find ``(perm, scales)`` with ``A[:, j] * scales[j] == B[:, perm[j]]`` within ``tol``.

    Candidate pairs must share the support and admit a common scale; a
    perfect bipartite matching over candidates is then searched exactly.
    The tolerance is applied per entry, relative to ``max(1, |B[:, k]|_inf)``.
    Returns None when no witness exists.
    """
    a = A.as_float() if isinstance(A, MixingMatrix) else np.asarray(A, dtype=float)
    b = B.as_float() if isinstance(B, MixingMatrix) else np.asarray(B, dtype=float)
    if isinstance(A, MixingMatrix) and isinstance(B, MixingMatrix) and A.row_labels != B.row_labels:
        raise ValueError("row labels differ")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    n = a.shape[1]
    sa, sb = np.abs(a) > tol, np.abs(b) > tol
    scale = np.full((n, n), np.nan)
    for j in range(n):
        for k in range(n):
            if np.array_equal(sa[:, j], sb[:, k]):
                s = _column_scale(a[:, j], b[:, k], sa[:, j], tol)
                if s is not None:
                    scale[j, k] = s
    ok = ~np.isnan(scale)
    cost = np.where(ok, 0.0, 1.0)
    rows, cols = linear_sum_assignment(cost)
    if cost[rows, cols].sum() > 0:
        return None
    perm = [int(c) for c in cols]
    return perm, [float(scale[j, perm[j]]) for j in range(n)]


def canonical_column_form(W: MixingMatrix, tol: float | None = None) -> MixingMatrix:
    """Representative of the permutation/scaling orbit of ``W``.

    Each column is scaled so its first nonzero entry is +1, then columns are
    sorted by support pattern and values.  Column labels are dropped.
    """
    tol = W.tolerance if tol is None else tol
    a = W.as_float()
    mask = np.abs(a) > tol
    cols = []
    for j in range(a.shape[1]):
        nz = np.flatnonzero(mask[:, j])
        if nz.size == 0:
            raise ValueError(f"column {W.col_labels[j]!r} is zero")
        c = a[:, j] / a[nz[0], j]
        cols.append(c)
    def cmp(c1, c2):
        s1, s2 = np.abs(c1) > tol, np.abs(c2) > tol
        if not np.array_equal(s1, s2):
            return -1 if tuple(~s1) < tuple(~s2) else 1
        for x, y in zip(c1, c2):
            if abs(x - y) > tol * max(1.0, abs(x), abs(y)):
                return -1 if x < y else 1
        return 0

    cols.sort(key=cmp_to_key(cmp))
    out = np.column_stack(cols) if cols else np.zeros((a.shape[0], 0))
    return replace(W, entries=out, col_labels=tuple(f"c{j}" for j in range(out.shape[1])))


def shuffle_and_scale(W: MixingMatrix, rng: np.random.Generator, low: float = 0.5, high: float = 2.0) -> MixingMatrix:
    """Randomly permute columns (labels travel with them) and rescale each by ±[low, high]."""
    perm = rng.permutation(W.shape[1])
    s = rng.uniform(low, high, size=W.shape[1]) * rng.choice([-1.0, 1.0], size=W.shape[1])
    out = W.take_columns(perm)
    return out.with_entries(out.as_float() * s)


"""Small hand-built models used by tests and demos."""

from __future__ import annotations

from typing import Any

from .model import CanonicalModel, Kind

H, Y, ZC, ZL, X = Kind.UNOBSERVED, Kind.OBSERVED, Kind.MEASURED, Kind.MLEAF, Kind.MEASUREMENT


def confounded_mleaf(b2: Any = 0.7, a21: Any = -1.3, b3: Any = 2.0) -> CanonicalModel:
    """H -> Z2, Z1 -> Z2, H -> Y3 with Z1, Z2 measured by X1, X2 (Z2 an mleaf)."""
    return CanonicalModel.build(
        [("H", H), ("Z1", ZC), ("Z2", ZL), ("Y3", Y), ("X1", X), ("X2", X)],
        [("H", "Z2", b2), ("Z1", "Z2", a21), ("H", "Y3", b3)],
        {"Z1": "X1", "Z2": "X2"},
    )


def measured_fork(a21: Any = 2, a31: Any = 3) -> CanonicalModel:
    """Z1 -> Z2 (mleaf), Z1 -> Y3; the measured variables are read through X1, X2."""
    return CanonicalModel.build(
        [("Z1", ZC), ("Z2", ZL), ("Y3", Y), ("X1", X), ("X2", X)],
        [("Z1", "Z2", a21), ("Z1", "Y3", a31)],
        {"Z1": "X1", "Z2": "X2"},
    )


def observed_chain(w12: Any = 1.0, w23: Any = 1.0, w13: Any | None = None) -> CanonicalModel:
    """Y1 -> Y2 -> Y3, plus Y1 -> Y3 when ``w13`` is given."""
    edges = [("Y1", "Y2", w12), ("Y2", "Y3", w23)]
    if w13 is not None:
        edges.append(("Y1", "Y3", w13))
    return CanonicalModel.build([("Y1", Y), ("Y2", Y), ("Y3", Y)], edges)


def full_group(b1: float = 0.8, b3: float = 1.5, a21: float = 2.0, a31: float = -0.7) -> CanonicalModel:
    """One AOG group holding a measured cogent Z1, its mleaf Z2 and the confounder H."""
    return CanonicalModel.build(
        [("H", H), ("Z1", ZC), ("Z2", ZL), ("Y3", Y), ("X1", X), ("X2", X)],
        [("H", "Z1", b1), ("H", "Y3", b3), ("Z1", "Z2", a21), ("Z1", "Y3", a31)],
        {"Z1": "X1", "Z2": "X2"},
    )


def mleaf_aog_not_dog(w01: float = 1.5, w1z: float = -0.8, wz2: float = 1.2, w02: float = 0.6) -> CanonicalModel:
    """Y0 -> Y1 -> Z1 -> Z2 and Y0 -> Z2: Z2 shares Z1's ancestral group but its edge is identifiable."""
    return CanonicalModel.build(
        [("Y0", Y), ("Y1", Y), ("Z1", ZC), ("Z2", ZL), ("X1", X), ("X2", X)],
        [("Y0", "Y1", w01), ("Y1", "Z1", w1z), ("Z1", "Z2", wz2), ("Y0", "Z2", w02)],
        {"Z1": "X1", "Z2": "X2"},
    )


def confounder_aog_not_dog(bz: float = 0.9, by: float = 1.4, a: float = -1.1, c: float = 0.7) -> CanonicalModel:
    """H -> Z1, H -> Y2, Z1 -> Y2, Y0 -> Z1: H sits in Z1's ancestral group, not its direct one."""
    return CanonicalModel.build(
        [("H", H), ("Y0", Y), ("Z1", ZC), ("Y2", Y), ("X1", X)],
        [("H", "Z1", bz), ("H", "Y2", by), ("Z1", "Y2", a), ("Y0", "Z1", c)],
        {"Z1": "X1"},
    )


def proportional_confounders() -> CanonicalModel:
    """Two confounders hitting the same two children with proportional weights (1, 2) and (2, 4)."""
    return CanonicalModel.build(
        [("H1", H), ("H2", H), ("Z1", ZL), ("Y2", Y), ("X1", X)],
        [("H1", "Z1", 1.0), ("H1", "Y2", 2.0), ("H2", "Z1", 2.0), ("H2", "Y2", 4.0)],
        {"Z1": "X1"},
    )


def non_minimal_fixtures() -> list[tuple[CanonicalModel, tuple[str, str]]]:
    """Models whose confounder H can be absorbed into an mleaf child; each with its witness."""
    out: list[tuple[CanonicalModel, tuple[str, str]]] = []
    for b2, b3 in [(0.5, 2.0), (-1.25, 0.75), (1.5, -0.5)]:
        # H -> {Z2, Y3}
        out.append((CanonicalModel.build(
            [("H", H), ("Z2", ZL), ("Y3", Y), ("X2", X)],
            [("H", "Z2", b2), ("H", "Y3", b3)], {"Z2": "X2"}), ("H", "Z2")))
        # H -> {Z2, Y3, Y4}, Y3 -> Y4
        out.append((CanonicalModel.build(
            [("H", H), ("Y3", Y), ("Y4", Y), ("Z2", ZL), ("X2", X)],
            [("H", "Z2", b2), ("H", "Y3", b3), ("H", "Y4", 1.0), ("Y3", "Y4", -0.5)], {"Z2": "X2"}), ("H", "Z2")))
        # Z2's other parent Y0 is also a parent of Y3
        out.append((CanonicalModel.build(
            [("Y0", Y), ("H", H), ("Z2", ZL), ("Y3", Y), ("X2", X)],
            [("Y0", "Z2", 0.8), ("Y0", "Y3", -1.0), ("H", "Z2", b2), ("H", "Y3", b3)], {"Z2": "X2"}), ("H", "Z2")))
        # Z2's other parent Y0 reaches Y3 only through Y1
        out.append((CanonicalModel.build(
            [("Y0", Y), ("Y1", Y), ("H", H), ("Z2", ZL), ("Y3", Y), ("X2", X)],
            [("Y0", "Y1", 1.2), ("Y1", "Y3", 0.9), ("Y0", "Z2", -0.6), ("H", "Z2", b2), ("H", "Y3", b3)],
            {"Z2": "X2"}), ("H", "Z2")))
    return out


def cancelling_overlap(b2: float = 0.5, b3: float = 2.0, c0: float = 0.75) -> CanonicalModel:
    """Non-minimal model whose reduction cancels the Y0 -> Y3 edge exactly."""
    return CanonicalModel.build(
        [("Y0", Y), ("H", H), ("Z2", ZL), ("Y3", Y), ("X2", X)],
        [("Y0", "Z2", c0), ("Y0", "Y3", b3 * c0 / b2), ("H", "Z2", b2), ("H", "Y3", b3)],
        {"Z2": "X2"},
    )


def cancellation_fixtures() -> list[tuple[CanonicalModel, tuple[str, str]]]:
    """Models with an exactly zero total effect, each with the (ancestor, descendant) pair.

    Weights are dyadic so the float path products cancel exactly.
    """
    out: list[tuple[CanonicalModel, tuple[str, str]]] = []
    for a, b in [(1.0, 1.0), (0.5, 2.0), (-1.5, 0.25), (2.0, -0.75), (1.25, 1.5)]:
        out.append((observed_chain(a, b, -a * b), ("Y1", "Y3")))
        out.append((CanonicalModel.build(
            [("H", H), ("Y1", Y), ("Y2", Y)],
            [("H", "Y1", a), ("H", "Y2", -a * b), ("Y1", "Y2", b)]), ("H", "Y2")))
        out.append((CanonicalModel.build(
            [("Z1", ZC), ("Y2", Y), ("Z3", ZL), ("X1", X), ("X3", X)],
            [("Z1", "Y2", a), ("Y2", "Z3", b), ("Z1", "Z3", -a * b)], {"Z1": "X1", "Z3": "X3"}), ("Z1", "Z3")))
    return out

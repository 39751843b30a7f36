"""Reading and writing models, matrices, groupings, reports, recovered classes and data tables.

Models, groupings, reports and recovered classes are JSON documents.
Matrices and data tables are CSV; a matrix's per-row observability lives in
a two-column sidecar CSV (``label,observability`` with values
``measured``/``observed``).
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .assumptions import FaithfulnessReport
from .grouping import Group, OrderedGrouping
from .mixing import DEFAULT_TOL, MixingMatrix
from .model import CanonicalModel, Edge, Kind, Variable
from .recovery import RecoveredModel, edge_count
from .simgen import DataTable

PathLike = str | Path


class FormatError(ValueError):
    pass


class _RawNumber(str):
    """JSON number kept as its source text."""


# -- models --------------------------------------------------------------


def _weight_from_json(raw: Any) -> tuple[Any, str | None]:
    if isinstance(raw, _RawNumber):
        text = str(raw)
        try:
            return int(text), text
        except ValueError:
            return float(text), text
    if isinstance(raw, str):
        # exact weights are written as "p/q" strings
        return Fraction(raw), raw
    raise FormatError(f"edge weight {raw!r} is neither a number nor a fraction string")


def model_from_dict(doc: dict) -> CanonicalModel:
    try:
        variables = tuple(Variable(int(v["id"]), str(v["name"]), Kind(v["kind"])) for v in doc["variables"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"bad variable entry: {exc}") from None
    by_id = {v.index: v.name for v in variables}

    def name(ref: Any) -> str:
        if isinstance(ref, _RawNumber) or isinstance(ref, int):
            try:
                return by_id[int(ref)]
            except (KeyError, ValueError):
                raise FormatError(f"unknown variable id {ref!r}") from None
        return str(ref)

    edges = []
    for e in doc.get("edges", []):
        w, text = _weight_from_json(e["weight"])
        edges.append(Edge(name(e["src"]), name(e["dst"]), w, text))
    ms = tuple((name(m["measured"]), name(m["measurement"])) for m in doc.get("measurements", []))
    return CanonicalModel(variables, tuple(edges), ms)


def model_to_json(model: CanonicalModel) -> str:
    """JSON text; weights read from a file are written back with their original text."""
    numbers: dict[str, str] = {}

    def weight(e: Edge, k: int) -> Any:
        if isinstance(e.weight, Fraction):
            return f"{e.weight.numerator}/{e.weight.denominator}" if e.weight.denominator != 1 else int(e.weight)
        text = e.text if e.text is not None else repr(float(e.weight)) if not isinstance(e.weight, int) else str(e.weight)
        key = f"@@weight{k}@@"
        numbers[key] = text
        return key

    doc = {
        "variables": [{"id": v.index, "name": v.name, "kind": v.kind.value}
                      for v in sorted(model.variables, key=lambda v: v.index)],
        "edges": [{"src": e.src, "dst": e.dst, "weight": weight(e, k)} for k, e in enumerate(model.edges)],
        "measurements": [{"measured": z, "measurement": x} for z, x in model.measurements],
    }
    text = json.dumps(doc, indent=2)
    for key, num in numbers.items():
        text = text.replace(f'"{key}"', num)
    return text + "\n"


def model_from_json(text: str) -> CanonicalModel:
    try:
        doc = json.loads(text, parse_float=_RawNumber, parse_int=_RawNumber)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not a JSON model document: {exc}") from None
    return model_from_dict(doc)


def read_model(path: PathLike) -> CanonicalModel:
    return model_from_json(Path(path).read_text())


def write_model(model: CanonicalModel, path: PathLike) -> None:
    Path(path).write_text(model_to_json(model))


# -- matrices ------------------------------------------------------------


def sidecar_path(path: PathLike) -> Path:
    p = Path(path)
    return p.with_name(p.stem + ".obs.csv")


def write_matrix(W: MixingMatrix, path: PathLike, observability_path: PathLike | None = None) -> Path:
    """Write the matrix CSV and its observability sidecar; returns the sidecar path."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["row", *W.col_labels])
        for label, row in zip(W.row_labels, W.as_float()):
            w.writerow([label, *(repr(float(x)) for x in row)])
    side = Path(observability_path) if observability_path else sidecar_path(path)
    write_observability(W.row_labels, W.measured, side)
    return side


def write_observability(labels: Sequence[str], measured: Sequence[bool], path: PathLike) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "observability"])
        for label, m in zip(labels, measured):
            w.writerow([label, "measured" if m else "observed"])


def read_observability(path: PathLike) -> dict[str, bool]:
    out = {}
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    for row in rows[1:]:
        if not row:
            continue
        label, flag = row[0], row[1].strip().lower()
        if flag not in ("measured", "observed"):
            raise FormatError(f"observability of {label!r} must be 'measured' or 'observed', got {flag!r}")
        out[label] = flag == "measured"
    return out


def read_matrix(path: PathLike, observability: PathLike | dict[str, bool] | None = None,
                tol: float = DEFAULT_TOL) -> MixingMatrix:
    """Read a matrix CSV; observability comes from a sidecar path, a mapping, or the default sidecar."""
    with Path(path).open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise FormatError(f"{path}: empty matrix file")
    cols = rows[0][1:]
    labels, values = [], []
    for r in rows[1:]:
        if len(r) != len(cols) + 1:
            raise FormatError(f"{path}: row {r[0]!r} has {len(r) - 1} values, expected {len(cols)}")
        labels.append(r[0])
        try:
            values.append([float(x) for x in r[1:]])
        except ValueError as exc:
            raise FormatError(f"{path}: {exc}") from None
    if observability is None:
        side = sidecar_path(path)
        obs = read_observability(side) if side.exists() else {}
    elif isinstance(observability, dict):
        obs = observability
    else:
        obs = read_observability(observability)
    missing = [l for l in labels if l not in obs]
    if missing:
        raise FormatError(f"no observability flag for rows {missing}")
    entries = np.array(values, dtype=float).reshape(len(labels), len(cols))
    return MixingMatrix(entries, tuple(labels), tuple(cols), tuple(obs[l] for l in labels), tol)


# -- groupings, reports, classes ----------------------------------------


def grouping_to_dict(g: OrderedGrouping) -> dict:
    return {
        "groups": [{"kind": grp.kind, "cogent": grp.cogent, "mleaves": sorted(grp.mleaves),
                    "noises": sorted(grp.noises)} for grp in g],
        "dag": sorted([list(p) for p in g.dag]),
        "iterations": g.iterations,
        "trace": list(g.trace),
    }


def grouping_from_dict(doc: dict) -> OrderedGrouping:
    groups = tuple(Group(d.get("cogent"), frozenset(d.get("mleaves", [])), frozenset(d.get("noises", [])))
                   for d in doc["groups"])
    return OrderedGrouping(groups, frozenset(tuple(p) for p in doc.get("dag", [])), doc.get("iterations"),
                           tuple(doc.get("trace", [])))


def report_to_dict(rep: FaithfulnessReport, check: str = "") -> dict:
    return {
        "check": check,
        "passed": rep.passed,
        "subsets_examined": rep.subsets_examined,
        "truncated": rep.truncated,
        "violations": [{"kind": v.kind, "target": v.target, "J": list(v.sources), "K": list(v.sinks),
                        "rank": v.rank, "bottleneck": v.bottleneck} for v in rep.violations],
    }


def recovered_to_dict(m: RecoveredModel) -> dict:
    return {
        "center_assignment": [list(p) for p in m.center_assignment],
        "leaf_rows": list(m.leaf_rows),
        "latent_columns": list(m.latent_columns),
        "C": m.C.tolist(), "B_C": m.B_C.tolist(), "D": m.D.tolist(), "B_L": m.B_L.tolist(),
        "edge_count": edge_count(m),
    }


def recovered_from_dict(doc: dict, observed_rows: Iterable[str] = (), tol: float = DEFAULT_TOL) -> RecoveredModel:
    centers = tuple(p[0] for p in doc["center_assignment"])
    cols = tuple(p[1] for p in doc["center_assignment"])
    k, nl, nh = len(centers), len(doc["leaf_rows"]), len(doc["latent_columns"])

    def arr(key: str, shape: tuple[int, int]) -> np.ndarray:
        return np.array(doc[key], dtype=float).reshape(shape)

    return RecoveredModel(centers, cols, tuple(doc["leaf_rows"]), tuple(doc["latent_columns"]),
                          C=arr("C", (k, k)), B_C=arr("B_C", (k, nh)), D=arr("D", (nl, k)), B_L=arr("B_L", (nl, nh)),
                          observed_rows=frozenset(observed_rows), tolerance=tol)


def write_json(doc: Any, path: PathLike | None) -> str:
    text = json.dumps(doc, indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


# -- data ----------------------------------------------------------------


def write_data(table: DataTable, path: PathLike) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(table.columns)
        for row in table.values:
            w.writerow([repr(float(x)) for x in row])


def read_data(path: PathLike) -> DataTable:
    with Path(path).open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    cols = tuple(rows[0]) if rows else ()
    vals = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float).reshape(len(rows) - 1 if rows else 0, len(cols))
    return DataTable(cols, vals)

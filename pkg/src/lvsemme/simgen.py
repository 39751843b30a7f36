"""Random canonical models, data sampling, matrix perturbation and DOT export."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .assumptions import check_conventional_faithfulness, check_lvsemme_faithfulness
from .mixing import MixingMatrix
from .model import CanonicalModel, Kind, is_minimal, noise_label, validate_canonical
from .recovery import RecoveredModel

log = logging.getLogger(__name__)

ENFORCE_FLAGS = ("canonical", "minimal", "conventional", "lvsemme")


class GenerationError(RuntimeError):
    def __init__(self, message: str, failures: Mapping[str, int] | None = None):
        super().__init__(message)
        self.failures = dict(failures or {})


@dataclass(frozen=True)
class GeneratorConfig:
    p_Y: int = 1
    p_ZC: int = 1
    p_ml: int = 1
    p_H: int = 1
    edge_density: float = 0.5
    coefficient_range: tuple[float, float] = (0.5, 2.0)
    margin: float = 0.1
    seed: int = 0
    enforce: frozenset[str] = frozenset({"canonical", "minimal", "conventional"})
    max_retries: int = 2000
    subset_cap: int | None = None
    tol: float = 1e-9

    def __post_init__(self):
        object.__setattr__(self, "enforce", frozenset(self.enforce))
        if min(self.p_Y, self.p_ZC, self.p_ml, self.p_H) < 0:
            raise ValueError("counts must be non-negative")
        if not 0.0 <= self.edge_density <= 1.0:
            raise ValueError("edge_density must lie in [0, 1]")
        low, high = self.coefficient_range
        if not 0 <= abs(low) <= abs(high) or abs(high) < self.margin:
            raise ValueError("coefficient range must satisfy |low| <= |high| and reach past the margin")
        unknown = self.enforce - set(ENFORCE_FLAGS)
        if unknown:
            raise ValueError(f"unknown enforce flags {sorted(unknown)}")


class _Impossible(Exception):
    pass


def _draw(config: GeneratorConfig, rng: np.random.Generator) -> CanonicalModel:
    low, high = abs(config.coefficient_range[0]), abs(config.coefficient_range[1])
    low = max(low, config.margin)

    def coef() -> float:
        return float(rng.uniform(low, high) * rng.choice([-1.0, 1.0]))

    if config.p_ZC and not (config.p_Y or config.p_ml):
        raise _Impossible("the last measured cogent variable in any order needs a child, "
                          "which takes an observed or mleaf variable")
    hs = [f"H{k + 1}" for k in range(config.p_H)]
    zc = [f"Z{k + 1}" for k in range(config.p_ZC)]
    zl = [f"Z{config.p_ZC + k + 1}" for k in range(config.p_ml)]
    ys = [f"Y{k + 1}" for k in range(config.p_Y)]
    cogent = zc + ys
    order = [cogent[i] for i in rng.permutation(len(cogent))]
    d = config.edge_density
    edges: dict[tuple[str, str], float] = {}

    for i, a in enumerate(order):
        for b in order[i + 1:]:
            if rng.random() < d:
                edges[(a, b)] = coef()
    for z in zl:
        for a in order:
            if rng.random() < d:
                edges[(a, z)] = coef()
    targets = order + zl
    for h in hs:
        for v in targets:
            if rng.random() < d:
                edges[(h, v)] = coef()
        kids = [v for v in targets if (h, v) in edges]
        if len(targets) < 2:
            raise _Impossible(f"confounder {h} needs two children but only {len(targets)} variable(s) can be children")
        while len(kids) < 2:
            v = targets[int(rng.integers(len(targets)))]
            if v not in kids:
                edges[(h, v)] = coef()
                kids.append(v)
    for z in zl:
        if not any(b == z for (_, b) in edges):
            pool = order + hs
            if not pool:
                raise _Impossible(f"mleaf {z} needs a parent but no cogent or unobserved variable exists")
            edges[(pool[int(rng.integers(len(pool)))], z)] = coef()
    for z in zc:
        if not any(a == z for (a, _) in edges):
            pos = order.index(z)
            pool = order[pos + 1:] + zl
            if pool:
                edges[(z, pool[int(rng.integers(len(pool)))])] = coef()
            # else: left as is; the canonical check rejects the draw

    variables = [(h, Kind.UNOBSERVED) for h in hs]
    for v in order:
        variables.append((v, Kind.MEASURED if v in zc else Kind.OBSERVED))
    variables += [(z, Kind.MLEAF) for z in zl]
    measurements = {z: "X" + z[1:] for z in sorted(zc + zl, key=lambda s: int(s[1:]))}
    variables += [(x, Kind.MEASUREMENT) for x in measurements.values()]
    index = {name: k for k, (name, _) in enumerate(variables)}
    ordered = sorted(edges.items(), key=lambda kv: (index[kv[0][1]], index[kv[0][0]]))
    return CanonicalModel.build(variables, [(a, b, w) for (a, b), w in ordered], measurements)


def _failed_flag(model: CanonicalModel, config: GeneratorConfig) -> str | None:
    if "canonical" in config.enforce and validate_canonical(model):
        return "canonical"
    if "minimal" in config.enforce and not is_minimal(model)[0]:
        return "minimal"
    if "conventional" in config.enforce and not check_conventional_faithfulness(model, config.tol).passed:
        return "conventional"
    if "lvsemme" in config.enforce:
        rep = check_lvsemme_faithfulness(model, config.tol, subset_cap=config.subset_cap, stop_at_first=True)
        if not rep.passed:
            return "lvsemme"
    return None


def generate_model(config: GeneratorConfig) -> CanonicalModel:
    """Random canonical model with the configured sizes, redrawn until every enforced check passes.

    Deterministic for a given config (seed included).  Raises
    :class:`GenerationError` naming the most frequently failing check when
    ``max_retries`` draws are exhausted or the sizes admit no canonical model.
    """
    rng = np.random.default_rng(config.seed)
    failures: Counter[str] = Counter()
    for _ in range(config.max_retries):
        try:
            model = _draw(config, rng)
        except _Impossible as exc:
            raise GenerationError(f"canonical: {exc}", {"canonical": 1}) from None
        flag = _failed_flag(model, config)
        if flag is None:
            return model
        failures[flag] += 1
    worst, count = failures.most_common(1)[0]
    raise GenerationError(
        f"no model after {config.max_retries} draws; '{worst}' failed most often ({count} times)", failures)


# -- data ----------------------------------------------------------------


@dataclass(frozen=True)
class NoiseSpec:
    """Noise distribution per exogenous term; ``overrides`` maps noise labels to (distribution, scale)."""

    distribution: str = "uniform"
    scale: float = 1.0
    overrides: Mapping[str, tuple[str, float]] = field(default_factory=dict)

    DISTRIBUTIONS = ("uniform", "laplace", "exponential-centered")

    def __post_init__(self):
        for dist, _ in [(self.distribution, self.scale), *self.overrides.values()]:
            if dist not in self.DISTRIBUTIONS:
                raise ValueError(f"unknown noise distribution {dist!r}; use one of {self.DISTRIBUTIONS}")

    def draw(self, label: str, n: int, rng: np.random.Generator) -> np.ndarray:
        dist, scale = self.overrides.get(label, (self.distribution, self.scale))
        if dist == "uniform":
            return rng.uniform(-scale, scale, n)
        if dist == "laplace":
            return rng.laplace(0.0, scale, n) if scale > 0 else np.zeros(n)
        return rng.exponential(scale, n) - scale if scale > 0 else np.zeros(n)


@dataclass(frozen=True, eq=False)
class DataTable:
    columns: tuple[str, ...]
    values: np.ndarray

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]


def sample_data(model: CanonicalModel, n: int, noise: NoiseSpec | None = None, seed: int = 0,
                include_latent: bool = False) -> DataTable | tuple[DataTable, DataTable]:
    """``n`` i.i.d. rows over the observables (measurements and observed variables).

    Noises are drawn in column order [H; Z^C; Y; measurement errors] and
    pushed through the structural equations in topological order.  With
    ``include_latent`` a second table holds every structural variable and
    every noise draw.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    noise = noise or NoiseSpec()
    rng = np.random.default_rng(seed)
    carriers = model.noise_carriers
    meas = [model.measurement_of[z] for z in model.row_variables if z in model.measurement_of]
    draws = {noise_label(v): noise.draw(noise_label(v), n, rng) for v in carriers}
    draws.update({noise_label(x): noise.draw(noise_label(x), n, rng) for x in meas})
    vals: dict[str, np.ndarray] = {}
    w = model.weights
    for v in model.topological_order():
        kind = model.kind(v)
        if kind == Kind.MEASUREMENT:
            vals[v] = vals[model.measured_by[v]] + draws[noise_label(v)]
            continue
        total = np.zeros(n)
        for p in sorted(model.parents(v)):
            total = total + float(w[(p, v)]) * vals[p]
        if kind != Kind.MLEAF:
            total = total + draws[noise_label(v)]
        vals[v] = total
    cols = tuple(model.row_labels())
    table = DataTable(cols, np.column_stack([vals[c] for c in cols]) if cols else np.zeros((n, 0)))
    if not include_latent:
        return table
    lat_cols = tuple(model.structural) + tuple(draws)
    allvals = {**vals, **draws}
    return table, DataTable(lat_cols, np.column_stack([allvals[c] for c in lat_cols]) if lat_cols else np.zeros((n, 0)))


def perturb_matrix(W: MixingMatrix, sigma: float, seed: int = 0) -> MixingMatrix:
    """Add independent N(0, sigma^2) noise to every entry."""
    if sigma == 0:
        return W
    rng = np.random.default_rng(seed)
    return W.with_entries(W.as_float() + rng.normal(0.0, sigma, W.shape))


# -- DOT -----------------------------------------------------------------

_NODE_STYLE = {
    Kind.UNOBSERVED: 'shape=circle, style=filled, fillcolor="gray85"',
    Kind.OBSERVED: "shape=circle",
    Kind.MEASURED: "shape=circle",
    Kind.MLEAF: "shape=doublecircle",
    Kind.MEASUREMENT: "shape=box, style=dashed",
}


def export_dot(model: CanonicalModel | RecoveredModel, name: str = "lvsemme") -> str:
    """Graphviz text for a causal diagram; measurement edges are dashed."""
    if isinstance(model, RecoveredModel):
        model = model.to_model()
    lines = [f"digraph {name} {{"]
    for v in sorted(model.variables, key=lambda v: v.index):
        lines.append(f'  "{v.name}" [{_NODE_STYLE[v.kind]}];')
    for e in model.edges:
        w = e.text if e.text is not None else f"{float(e.weight):.6g}"
        lines.append(f'  "{e.src}" -> "{e.dst}" [label="{w}"];')
    for z, x in model.measurements:
        lines.append(f'  "{z}" -> "{x}" [style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"

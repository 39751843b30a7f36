import itertools
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import draw_model, seeds
from lvsemme import (
    CanonicalModel,
    Kind,
    build_w_star,
    check_conventional_faithfulness,
    check_lvsemme_faithfulness,
    minimal_bottleneck_size,
    numerical_rank,
    submatrix_rank,
)
from lvsemme.fixtures import cancellation_fixtures, confounded_mleaf, observed_chain, proportional_confounders


def random_dag(rng, n_max=10):
    n = int(rng.integers(1, n_max + 1))
    p = rng.uniform(0.15, 0.6)
    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < p:
            g.add_edge(i, j)
    return g


def reaches(g, sources, sinks, removed):
    h = g.subgraph(set(g) - removed)
    live = [s for s in sources if s in h]
    seen = set(live)
    for s in live:
        seen |= nx.descendants(h, s)
    return bool(seen & set(sinks))


def brute_force_bottleneck(g, sources, sinks):
    nodes = sorted(g)
    for size in range(len(nodes) + 1):
        for cut in itertools.combinations(nodes, size):
            if not reaches(g, sources, sinks, set(cut)):
                return size
    raise AssertionError("unreachable")


def random_query(rng, g):
    nodes = sorted(g)
    J = [v for v in nodes if rng.random() < 0.35] or [nodes[0]]
    K = [v for v in nodes if rng.random() < 0.35] or [nodes[-1]]
    return J, K


class TestBottleneck:
    def test_chain(self):
        g = nx.DiGraph([("V1", "V2"), ("V2", "V3")])
        assert minimal_bottleneck_size(g, ["V1"], ["V3"]) == 1

    def test_two_disjoint_paths(self):
        g = nx.DiGraph([("a", "b"), ("b", "d"), ("c", "e"), ("e", "f")])
        assert minimal_bottleneck_size(g, ["a", "c"], ["d", "f"]) == 2

    def test_no_path(self):
        g = nx.DiGraph([("a", "b")])
        g.add_node("c")
        assert minimal_bottleneck_size(g, ["b"], ["a", "c"]) == 0

    def test_shared_endpoint(self):
        # a source that is also a sink is a path of length zero
        assert minimal_bottleneck_size({"a": []}, ["a"], ["a"]) == 1

    def test_model_and_mapping_inputs(self):
        m = confounded_mleaf()
        assert minimal_bottleneck_size(m, ["H", "Z1"], ["Z2"]) == 1
        assert minimal_bottleneck_size(m, ["H", "Z1"], ["Z2", "Y3"]) == 2
        assert minimal_bottleneck_size({1: [2, 3], 2: [4], 3: [4]}, [1], [4]) == 1

    @given(seeds)
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        g = random_dag(rng, 8)
        J, K = random_query(rng, g)
        assert minimal_bottleneck_size(g, J, K) == brute_force_bottleneck(g, J, K)

    @given(seeds)
    def test_menger_bounds(self, seed):
        rng = np.random.default_rng(seed)
        g = random_dag(rng, 10)
        J, K = random_query(rng, g)
        b = minimal_bottleneck_size(g, J, K)
        assert b <= min(len(J), len(K))
        # a flow certificate from networkx on the node-split graph
        split = nx.DiGraph()
        for v in g:
            split.add_edge(("in", v), ("out", v), capacity=1)
        for u, v in g.edges:
            split.add_edge(("out", u), ("in", v), capacity=len(g) + 1)
        for j in J:
            split.add_edge("s", ("in", j), capacity=len(g) + 1)
        for k in K:
            split.add_edge(("out", k), "t", capacity=len(g) + 1)
        assert b == nx.maximum_flow_value(split, "s", "t")


class TestRank:
    def test_chain_submatrix(self):
        W = build_w_star(observed_chain(2.0, 3.0))
        assert submatrix_rank(W, ["Y1", "Y2"], ["Y2", "Y3"]) == 1

    def test_identity_block(self):
        assert numerical_rank(np.eye(4)) == 4

    def test_single_entry(self):
        assert submatrix_rank(build_w_star(confounded_mleaf()), ["Z1"], ["X1"]) == 1

    def test_empty_selection(self):
        assert submatrix_rank(build_w_star(confounded_mleaf()), [], ["X1"]) == 0

    def test_relative_threshold(self):
        # ratio 1e-8 stays above the 1e-9 cutoff, 1e-10 falls below it
        assert numerical_rank(np.diag([1e6, 1e-2])) == 2
        assert numerical_rank(np.diag([1e6, 1e-4])) == 1
        assert numerical_rank(np.diag([1e6, 1e-4]), tol=1e-11) == 2

    def test_exact_mode(self):
        a = np.array([[Fraction(1, 3), Fraction(2, 3)], [Fraction(1), Fraction(2)]], dtype=object)
        assert numerical_rank(a, exact=True) == 1
        assert numerical_rank(np.array([[1, 2], [3, 4]]), exact=True) == 2


class TestConventional:
    def test_confounded_mleaf_passes(self):
        assert check_conventional_faithfulness(confounded_mleaf()).passed

    def test_cancelling_chain(self):
        rep = check_conventional_faithfulness(observed_chain(1.0, 1.0, -1.0))
        assert not rep.passed
        assert [(v.sources[0], v.target) for v in rep.violations] == [("Y1", "Y3")]

    def test_edgeless(self):
        m = CanonicalModel.build([("Y1", Kind.OBSERVED), ("Y2", Kind.OBSERVED)])
        rep = check_conventional_faithfulness(m)
        assert rep.passed and rep.subsets_examined == 0


class TestLvsemme:
    def test_confounded_mleaf_passes_exhaustively(self):
        rep = check_lvsemme_faithfulness(confounded_mleaf(), subset_cap=None)
        assert rep.passed and not rep.truncated and rep.subsets_examined > 0

    def test_proportional_confounders(self):
        rep = check_lvsemme_faithfulness(proportional_confounders())
        assert not rep.passed
        v = rep.violations[0]
        assert (v.rank, v.bottleneck) == (1, 2)
        assert set(v.sources) == {"H1", "H2"}

    def test_truncation_reported(self):
        rep = check_lvsemme_faithfulness(confounded_mleaf(), subset_cap=1)
        assert rep.truncated and not rep.passed and not rep.violations

    def test_violations_sorted_deterministically(self):
        a = check_lvsemme_faithfulness(observed_chain(1.0, 1.0, -1.0))
        b = check_lvsemme_faithfulness(observed_chain(1.0, 1.0, -1.0))
        assert a.violations == b.violations and a.violations

    def test_exact_mode_on_fractions(self):
        m = observed_chain(Fraction(1, 3), Fraction(3), Fraction(-1))
        assert not check_lvsemme_faithfulness(m, exact=True).passed
        assert check_lvsemme_faithfulness(observed_chain(Fraction(1, 3), Fraction(3), Fraction(1)), exact=True).passed

    @pytest.mark.parametrize("k", range(15))
    def test_conventional_failure_implies_lvsemme_failure(self, k):
        model, (src, dst) = cancellation_fixtures()[k]
        conv = check_conventional_faithfulness(model)
        assert (dst, (src,)) in {(v.target, v.sources) for v in conv.violations}
        lv = check_lvsemme_faithfulness(model)
        assert any(v.kind == "lvsemme-a" and v.target == dst and v.sources == (src,) and v.sinks == ()
                   for v in lv.violations)


@settings(max_examples=15)
@given(seeds)
def test_rank_never_exceeds_bottleneck(seed):
    m = draw_model(seed, max_c=3)
    if m is None:
        return
    rep = check_lvsemme_faithfulness(m, subset_cap=None)
    assert all(v.rank < v.bottleneck for v in rep.violations)
    assert rep.passed


@given(st.integers(0, 2**16))
def test_empty_source_set_is_trivial(seed):
    rng = np.random.default_rng(seed)
    g = random_dag(rng)
    assert minimal_bottleneck_size(g, [], sorted(g)) == 0

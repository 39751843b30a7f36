import networkx as nx
import numpy as np
import pytest
import sympy as sp
from hypothesis import given

from conftest import draw_model, seeds
from lvsemme import (
    CanonicalModel,
    Kind,
    ancestors,
    descendants,
    edge_identifiable_lv,
    edge_identifiable_me,
    is_minimal,
    possible_parents,
    total_effects,
    validate_canonical,
)
from lvsemme.fixtures import confounded_mleaf, measured_fork
from lvsemme.model import UnknownVariableError

H, Y, ZC, ZL, X = Kind.UNOBSERVED, Kind.OBSERVED, Kind.MEASURED, Kind.MLEAF, Kind.MEASUREMENT


def rules(model):
    return {v.rule for v in validate_canonical(model)}


class TestValidate:
    def test_confounded_mleaf_is_canonical(self):
        assert validate_canonical(confounded_mleaf()) == []

    def test_confounder_with_one_child(self):
        m = CanonicalModel.build([("H", H), ("Y1", Y)], [("H", "Y1", 1.0)])
        assert rules(m) == {"confounder-with-one-child"}

    def test_mleaf_with_cogent_child(self):
        m = CanonicalModel.build(
            [("Y0", Y), ("Z1", ZL), ("Y2", Y), ("X1", X)],
            [("Y0", "Z1", 1.0), ("Z1", "Y2", 2.0)], {"Z1": "X1"})
        assert "mleaf-with-extra-child" in rules(m)

    def test_zero_weight_and_cycle(self):
        m = CanonicalModel.build([("Y1", Y), ("Y2", Y)], [("Y1", "Y2", 0.0), ("Y2", "Y1", 1.0)])
        assert {"zero-weight-edge", "cycle"} <= rules(m)

    def test_unobserved_with_parent(self):
        m = CanonicalModel.build([("Y0", Y), ("H", H), ("Y1", Y), ("Y2", Y)],
                                 [("Y0", "H", 1.0), ("H", "Y1", 1.0), ("H", "Y2", 1.0)])
        assert rules(m) == {"unobserved-with-parent"}

    def test_measurement_pairing(self):
        m = CanonicalModel.build([("Y0", Y), ("Z1", ZL)], [("Y0", "Z1", 1.0)])
        assert rules(m) == {"measured-without-single-measurement"}

    def test_measured_cogent_needs_child(self):
        m = CanonicalModel.build([("Z1", ZC), ("X1", X)], [], {"Z1": "X1"})
        assert rules(m) == {"measured-is-mleaf"}

    def test_unknown_endpoint_rejected(self):
        with pytest.raises(UnknownVariableError):
            CanonicalModel.build([("Y1", Y)], [("Y1", "Q", 1.0)])


class TestGraphQueries:
    def test_ancestors(self):
        m = confounded_mleaf()
        assert ancestors(m, "Z2") == {"Z1", "H"}
        assert ancestors(m, "H") == set()
        assert ancestors(measured_fork(), "Y3") == {"Z1"}

    def test_descendants(self):
        m = confounded_mleaf()
        assert descendants(m, "H") == {"Z2", "Y3", "X2"}
        assert descendants(m, "Y3") == set()
        assert descendants(measured_fork(), "Z1") == {"Z2", "Y3", "X1", "X2"}

    def test_unknown_id(self):
        with pytest.raises(UnknownVariableError):
            ancestors(confounded_mleaf(), "nope")

    @given(seeds)
    def test_ancestors_and_descendants_agree(self, seed):
        m = draw_model(seed)
        if m is None:
            return
        for u in m.graph:
            for v in m.graph:
                assert (u in ancestors(m, v)) == (v in descendants(m, u))

    def test_possible_parents(self):
        assert possible_parents(confounded_mleaf(), "Y3") == set()
        assert possible_parents(confounded_mleaf(), "Z1") == set()
        assert possible_parents(measured_fork(), "Y3") == {"Z1", "Z2"}

    @pytest.mark.parametrize("v", ["H", "X1"])
    def test_possible_parents_rejects_wrong_kinds(self, v):
        with pytest.raises(ValueError):
            possible_parents(confounded_mleaf(), v)


class TestTotalEffects:
    def test_symbolic(self):
        b2, a21, b3 = sp.symbols("b2 a21 b3")
        m = confounded_mleaf(b2, a21, b3)
        T = total_effects(m)
        pos = {n: k for k, n in enumerate(m.structural)}
        assert T[pos["Z2"], pos["H"]] == b2
        assert T[pos["Z2"], pos["Z1"]] == a21
        assert T[pos["Y3"], pos["H"]] == b3

    def test_edgeless(self):
        m = CanonicalModel.build([("Y1", Y), ("Y2", Y)])
        assert np.array_equal(total_effects(m), np.zeros((2, 2)))

    def test_fork(self):
        m = measured_fork(2.0, 3.0)
        T = total_effects(m)
        expected = np.zeros((3, 3))
        expected[1, 0], expected[2, 0] = 2.0, 3.0
        assert np.array_equal(T, expected)

    @given(seeds)
    def test_matches_matrix_inverse(self, seed):
        m = draw_model(seed)
        if m is None:
            return
        names = m.structural
        pos = {n: k for k, n in enumerate(names)}
        A = np.zeros((len(names), len(names)))
        for e in m.edges:
            A[pos[e.dst], pos[e.src]] = e.weight
        oracle = np.linalg.inv(np.eye(len(names)) - A) - np.eye(len(names))
        assert np.allclose(total_effects(m), oracle, atol=1e-12)


class TestEdgeIdentifiability:
    def test_me_clause_a(self):
        assert edge_identifiable_me(confounded_mleaf(), "Z1", "Z2") is True

    def test_me_both_clauses_fail(self):
        assert edge_identifiable_me(measured_fork(), "Z1", "Z2") is False

    def test_me_isolated_pair(self):
        m = CanonicalModel.build([("Z1", ZC), ("Z2", ZL), ("X1", X), ("X2", X)], [("Z1", "Z2", 1.0)],
                                 {"Z1": "X1", "Z2": "X2"})
        assert edge_identifiable_me(m, "Z1", "Z2") is False

    def test_me_clause_b(self):
        # Z1's other child Y3 lacks Z2's parent H
        m = CanonicalModel.build(
            [("H", H), ("Z1", ZC), ("Y3", Y), ("Z2", ZL), ("Y4", Y), ("X1", X), ("X2", X)],
            [("H", "Z1", 1.0), ("H", "Z2", 1.0), ("H", "Y4", 1.0), ("Z1", "Z2", 1.0), ("Z1", "Y3", 1.0)],
            {"Z1": "X1", "Z2": "X2"})
        assert edge_identifiable_me(m, "Z1", "Z2") is True

    def test_me_wrong_kinds(self):
        with pytest.raises(ValueError):
            edge_identifiable_me(confounded_mleaf(), "H", "Z2")

    def test_lv_cogent_only_witnesses(self):
        # H's only other child is the mleaf Z2
        assert edge_identifiable_lv(confounded_mleaf(), "H", "Y3", cogent_witnesses_only=True) is False
        assert edge_identifiable_lv(confounded_mleaf(), "H", "Y3") is True

    def test_lv_two_unrelated_children(self):
        m = CanonicalModel.build([("H", H), ("Y1", Y), ("Y2", Y)], [("H", "Y1", 1.0), ("H", "Y2", 1.0)])
        assert edge_identifiable_lv(m, "H", "Y1") is True

    def test_lv_no_witness(self):
        m = CanonicalModel.build(
            [("Y0", Y), ("H", H), ("Y1", Y), ("Y2", Y)],
            [("Y0", "Y1", 1.0), ("Y0", "Y2", 1.0), ("H", "Y1", 1.0), ("H", "Y2", 1.0), ("Y1", "Y2", 1.0)])
        assert edge_identifiable_lv(m, "H", "Y1") is False

    def test_lv_wrong_kinds(self):
        with pytest.raises(ValueError):
            edge_identifiable_lv(confounded_mleaf(), "H", "Z2")


class TestMinimality:
    def test_confounded_mleaf_is_minimal(self):
        assert is_minimal(confounded_mleaf()) == (True, None)

    def test_no_confounders(self):
        assert is_minimal(measured_fork()) == (True, None)

    def test_absorbable_confounder(self):
        m = CanonicalModel.build([("H", H), ("Z2", ZL), ("Y3", Y), ("X2", X)],
                                 [("H", "Z2", 1.0), ("H", "Y3", 1.0)], {"Z2": "X2"})
        assert is_minimal(m) == (False, ("H", "Z2"))


def test_graph_includes_measurement_edges():
    g = confounded_mleaf().graph
    assert g.has_edge("Z1", "X1") and g.has_edge("Z2", "X2")
    assert nx.is_directed_acyclic_graph(g)

import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given

from conftest import draw_model, seeds
from lvsemme import (
    MixingMatrix,
    build_w,
    build_w_star,
    check_lvsemme_faithfulness,
    enumerate_class,
    parameters_match,
    recover_aog,
    sample_data,
)
from lvsemme.fixtures import confounded_mleaf, measured_fork, observed_chain, proportional_confounders
from lvsemme.io import (
    FormatError,
    grouping_from_dict,
    grouping_to_dict,
    model_from_json,
    model_to_json,
    read_data,
    read_matrix,
    read_model,
    recovered_from_dict,
    recovered_to_dict,
    report_to_dict,
    sidecar_path,
    write_data,
    write_matrix,
    write_model,
)


class TestModels:
    def test_round_trip_keeps_text(self, tmp_path):
        text = """{
  "variables": [
    {"id": 0, "name": "Y1", "kind": "observed"},
    {"id": 1, "name": "Y2", "kind": "observed"}
  ],
  "edges": [{"src": "Y1", "dst": "Y2", "weight": 0.1000000000000000055511151231257827}],
  "measurements": []
}"""
        m = model_from_json(text)
        assert m.edges[0].text == "0.1000000000000000055511151231257827"
        again = model_from_json(model_to_json(m))
        assert again.edges[0].text == m.edges[0].text
        write_model(m, tmp_path / "m.json")
        assert model_to_json(read_model(tmp_path / "m.json")) == model_to_json(m)

    def test_ids_as_references(self):
        doc = {"variables": [{"id": 3, "name": "Z1", "kind": "measured"}, {"id": 4, "name": "X1", "kind": "measurement"},
                             {"id": 5, "name": "Y2", "kind": "observed"}],
               "edges": [{"src": 3, "dst": 5, "weight": 2}],
               "measurements": [{"measured": 3, "measurement": 4}]}
        m = model_from_json(json.dumps(doc))
        assert m.weights[("Z1", "Y2")] == 2 and m.measurement_of == {"Z1": "X1"}

    def test_fractions(self):
        m = observed_chain(Fraction(1, 3), Fraction(3), Fraction(-1))
        again = model_from_json(model_to_json(m))
        assert again.weights[("Y1", "Y2")] == Fraction(1, 3)
        assert again.weights[("Y2", "Y3")] == 3

    @pytest.mark.parametrize("text", ["not json", '{"variables": [{"name": "A"}]}',
                                      '{"variables": [{"id": 0, "name": "A", "kind": "bogus"}]}',
                                      '{"variables": [{"id": 0, "name": "A", "kind": "observed"}],'
                                      ' "edges": [{"src": 7, "dst": 0, "weight": 1}]}'])
    def test_malformed(self, text):
        with pytest.raises(FormatError):
            model_from_json(text)

    @given(seeds)
    def test_generated_round_trip(self, seed):
        m = draw_model(seed)
        if m is None:
            return
        again = model_from_json(model_to_json(m))
        assert again.weights == m.weights and again.variables == m.variables


class TestMatrices:
    def test_round_trip(self, tmp_path):
        W = build_w(confounded_mleaf())
        side = write_matrix(W, tmp_path / "w.csv")
        assert side == sidecar_path(tmp_path / "w.csv") == tmp_path / "w.obs.csv"
        back = read_matrix(tmp_path / "w.csv")
        assert back.row_labels == W.row_labels and back.col_labels == W.col_labels
        assert back.measured == W.measured
        assert np.array_equal(back.as_float(), W.as_float())

    def test_mapping_observability(self, tmp_path):
        W = build_w_star(measured_fork())
        write_matrix(W, tmp_path / "w.csv", tmp_path / "flags.csv")
        back = read_matrix(tmp_path / "w.csv", {"X2": True, "X1": True, "Y3": False})
        assert back.measured == (True, True, False)
        assert read_matrix(tmp_path / "w.csv", tmp_path / "flags.csv").measured == back.measured

    def test_missing_flag(self, tmp_path):
        W = build_w_star(measured_fork())
        write_matrix(W, tmp_path / "w.csv")
        with pytest.raises(FormatError):
            read_matrix(tmp_path / "w.csv", {"X2": True})

    def test_bad_flag(self, tmp_path):
        (tmp_path / "w.csv").write_text("row,a\nY1,1.0\n")
        (tmp_path / "f.csv").write_text("label,observability\nY1,maybe\n")
        with pytest.raises(FormatError):
            read_matrix(tmp_path / "w.csv", tmp_path / "f.csv")

    def test_ragged(self, tmp_path):
        (tmp_path / "w.csv").write_text("row,a,b\nY1,1.0\n")
        with pytest.raises(FormatError):
            read_matrix(tmp_path / "w.csv", {"Y1": False})

    def test_anonymous_columns(self, tmp_path):
        W = MixingMatrix(np.array([[2.0, 0.0], [3.0, 1.0]]), ("X1", "Y2"), ("0", "1"), (True, False))
        write_matrix(W, tmp_path / "w.csv")
        assert recover_aog(read_matrix(tmp_path / "w.csv")).signature() == recover_aog(W).signature()


class TestDocuments:
    def test_grouping(self):
        g = recover_aog(build_w_star(confounded_mleaf()))
        back = grouping_from_dict(json.loads(json.dumps(grouping_to_dict(g))))
        assert back.signature() == g.signature()
        assert back.iterations == g.iterations and back.trace == g.trace

    def test_report(self):
        doc = report_to_dict(check_lvsemme_faithfulness(proportional_confounders()), "lvsemme")
        assert doc["passed"] is False and doc["violations"][0]["rank"] == 1
        json.dumps(doc)

    def test_recovered(self):
        W = build_w_star(measured_fork(2.0, 3.0))
        for r in enumerate_class(W):
            back = recovered_from_dict(json.loads(json.dumps(recovered_to_dict(r))), observed_rows={"Y3"})
            assert parameters_match(back, r)
            assert back.edge_count() == r.edge_count()


def test_data_round_trip(tmp_path):
    t = sample_data(confounded_mleaf(), 4, seed=1)
    write_data(t, tmp_path / "d.csv")
    back = read_data(tmp_path / "d.csv")
    assert back.columns == t.columns and np.array_equal(back.values, t.values)
    empty = sample_data(confounded_mleaf(), 0)
    write_data(empty, tmp_path / "e.csv")
    assert read_data(tmp_path / "e.csv").values.shape == (0, 3)

import json

import numpy as np
import pytest

from archsearch.errors import (
    GraphParseError,
    PinBindingError,
    PinConflictError,
    ReferentialError,
)
from archsearch.model import (
    EMPTY_PINS,
    ConceptualModel,
    Pin,
    bind_pins,
    package_graph,
    parse_graph,
    parse_model,
    parse_model_for_graph,
    resolve_package_slots,
)

from conftest import make_graph, make_model, solution


GRAPH_DOC = json.dumps({
    "types": [
        {"id": 0, "name": "app.ui.View", "package": "app.ui", "abstract": False},
        {"id": 1, "name": "app.core.Service", "package": "app.core", "abstract": True},
        {"id": 2, "name": "app.core.Impl", "package": "app.core"},
        {"id": 3, "name": "app.db.Dao", "package": "app.db"},
    ],
    "dependencies": [
        {"from": 0, "to": 1},
        {"from": 0, "to": 1},
        {"from": 2, "to": 2},
        {"from": 2, "to": 3},
    ],
})


class TestParseGraph:
    def test_round_trip(self):
        g = parse_graph(GRAPH_DOC)
        assert g.unit_count == 4
        assert g.nodes[1].fq_name == "app.core.Service"
        assert g.nodes[1].is_abstract
        assert not g.nodes[2].is_abstract

    def test_self_edges_dropped_duplicates_collapsed(self):
        g = parse_graph(GRAPH_DOC)
        assert g.edges == {(0, 1), (2, 3)}

    def test_origin_packages_sorted_and_slots(self):
        g = parse_graph(GRAPH_DOC)
        assert g.origin_packages == ("app.core", "app.db", "app.ui")
        assert g.origin_slot_of_unit.tolist() == [2, 0, 0, 1]

    def test_dangling_endpoint_names_the_id(self):
        doc = json.dumps({
            "types": [{"id": 0, "name": "a.A", "package": "a"}],
            "dependencies": [{"from": 0, "to": 7}],
        })
        with pytest.raises(ReferentialError, match="7"):
            parse_graph(doc)

    def test_empty_graph_rejected(self):
        with pytest.raises(GraphParseError, match="at least one type"):
            parse_graph(json.dumps({"types": [], "dependencies": []}))

    def test_duplicate_id_rejected(self):
        doc = json.dumps({"types": [
            {"id": 0, "name": "a.A", "package": "a"},
            {"id": 0, "name": "a.B", "package": "a"},
        ]})
        with pytest.raises(GraphParseError, match="duplicate"):
            parse_graph(doc)

    def test_non_contiguous_ids_rejected(self):
        doc = json.dumps({"types": [
            {"id": 0, "name": "a.A", "package": "a"},
            {"id": 2, "name": "a.B", "package": "a"},
        ]})
        with pytest.raises(GraphParseError, match="contiguous"):
            parse_graph(doc)

    def test_invalid_json_reports_location(self):
        with pytest.raises(GraphParseError) as err:
            parse_graph("{not json")
        assert "line 1" in str(err.value)

    def test_edge_arrays_sorted(self):
        g = parse_graph(GRAPH_DOC)
        src, dst = g.edge_arrays
        assert src.tolist() == [0, 2]
        assert dst.tolist() == [1, 3]


class TestParseModel:
    def test_round_trip_with_pins(self):
        doc = json.dumps({
            "style": "strict",
            "layers": ["presentation", "domain", "persistence"],
            "package_slots": 6,
            "pins": [{"pattern": "*.Dao", "package": 2, "layer": 2}],
        })
        model, pins = parse_model(doc)
        assert model.style == "strict"
        assert model.layer_count == 3
        assert model.package_slots == 6
        assert pins == [Pin("*.Dao", target_package=2, target_layer=2)]

    def test_unknown_style_rejected(self):
        doc = json.dumps({"style": "onion", "layers": ["a", "b"]})
        with pytest.raises(GraphParseError, match="onion"):
            parse_model(doc)

    def test_single_layer_rejected(self):
        doc = json.dumps({"style": "strict", "layers": ["only"]})
        with pytest.raises(GraphParseError, match="two layers"):
            parse_model(doc)

    def test_pin_without_target_rejected(self):
        doc = json.dumps({"style": "strict", "layers": ["a", "b"],
                          "pins": [{"pattern": "*"}]})
        with pytest.raises(GraphParseError, match="no target"):
            parse_model(doc)

    def test_pin_layer_out_of_range_rejected(self):
        doc = json.dumps({"style": "strict", "layers": ["a", "b"],
                          "pins": [{"pattern": "*", "layer": 2}]})
        with pytest.raises(GraphParseError, match="outside"):
            parse_model(doc)

    def test_slots_default_deferred_then_resolved_from_graph(self):
        doc = json.dumps({"style": "transient", "layers": ["a", "b"]})
        model, _ = parse_model(doc)
        assert model.package_slots == 0
        g = parse_graph(GRAPH_DOC)
        resolved = resolve_package_slots(model, g)
        assert resolved.package_slots == 3

        model2, _ = parse_model_for_graph(doc, g)
        assert model2.package_slots == 3


class TestConceptualModel:
    def test_transient_allows_any_downward(self):
        m = make_model(style="transient", layers=4)
        assert m.allowed(1, 1)
        assert m.allowed(0, 3)
        assert m.allowed(1, 2)
        assert not m.allowed(2, 1)
        assert not m.allowed(3, 0)

    def test_strict_allows_only_adjacent_downward(self):
        m = make_model(style="strict", layers=4)
        assert m.allowed(1, 1)
        assert m.allowed(1, 2)
        assert not m.allowed(0, 2)
        assert not m.allowed(2, 1)


class TestBindPins:
    def graph(self):
        return make_graph(
            4, [],
            packages=["app.ui", "app.core", "app.core", "app.db"],
            names=["app.ui.View", "app.core.Service", "app.core.Impl", "app.db.Dao"],
        )

    def test_unit_pattern_binds_units_to_package(self):
        g = self.graph()
        m = make_model(slots=3)
        table = bind_pins([Pin("app.core.*", target_package=0)], g, m)
        assert table.unit_package == {1: 0, 2: 0}
        assert table.unit_package_array(4).tolist() == [-1, 0, 0, -1]

    def test_package_pattern_layer_target_pins_slot(self):
        g = self.graph()  # origin slots: app.core=0, app.db=1, app.ui=2
        m = make_model(slots=3)
        table = bind_pins([Pin("app.db", target_layer=2)], g, m)
        assert table.package_layer == {1: 2}
        assert table.package_layer_array(3).tolist() == [-1, 2, -1]

    def test_package_pattern_package_target_relocates_units(self):
        g = self.graph()
        m = make_model(slots=3)
        table = bind_pins([Pin("app.core", target_package=2, target_layer=1)], g, m)
        assert table.unit_package == {1: 2, 2: 2}
        assert table.package_layer == {2: 1}

    def test_unit_pattern_with_package_and_layer(self):
        g = self.graph()
        m = make_model(slots=3)
        table = bind_pins([Pin("app.db.Dao", target_package=1, target_layer=2)], g, m)
        assert table.unit_package == {3: 1}
        assert table.package_layer == {1: 2}
        assert table.unit_layer == {}

    def test_layer_only_unit_pin_recorded(self):
        g = self.graph()
        m = make_model(slots=3)
        table = bind_pins([Pin("app.ui.View", target_layer=0)], g, m)
        assert table.unit_layer == {0: 0}
        assert len(table) == 1

    def test_conflicting_package_targets_rejected(self):
        g = self.graph()
        m = make_model(slots=3)
        with pytest.raises(PinConflictError):
            bind_pins([Pin("app.core.Service", target_package=0),
                       Pin("app.core.*", target_package=1)], g, m)

    def test_identical_targets_are_not_a_conflict(self):
        g = self.graph()
        m = make_model(slots=3)
        table = bind_pins([Pin("app.core.Service", target_package=0),
                           Pin("app.core.*", target_package=0)], g, m)
        assert table.unit_package == {1: 0, 2: 0}

    def test_layer_only_pins_with_two_layers_rejected(self):
        g = self.graph()
        m = make_model(slots=3)
        with pytest.raises(PinConflictError):
            bind_pins([Pin("app.ui.View", target_layer=0),
                       Pin("app.db.Dao", target_layer=2)], g, m)

    def test_layer_only_pin_against_contradicting_slot_pin_rejected(self):
        g = self.graph()
        m = make_model(slots=3)
        with pytest.raises(PinConflictError):
            bind_pins([Pin("app.ui.View", target_layer=0),
                       Pin("app.db", target_layer=2)], g, m)

    def test_pattern_matching_nothing_rejected(self):
        g = self.graph()
        m = make_model(slots=3)
        with pytest.raises(PinBindingError, match="matches nothing"):
            bind_pins([Pin("does.not.Exist", target_layer=0)], g, m)

    def test_target_out_of_range_rejected(self):
        g = self.graph()
        m = make_model(slots=3)
        with pytest.raises(PinBindingError, match="outside"):
            bind_pins([Pin("app.db.Dao", target_package=3)], g, m)

    def test_unresolved_model_rejected(self):
        g = self.graph()
        m = ConceptualModel("strict", ("a", "b"), package_slots=0)
        with pytest.raises(PinBindingError, match="unresolved"):
            bind_pins([Pin("app.db.Dao", target_package=0)], g, m)

    def test_empty_pin_list_gives_empty_table(self):
        g = self.graph()
        assert len(bind_pins([], g, make_model(slots=3))) == 0
        assert len(EMPTY_PINS) == 0


class TestPackageGraph:
    def test_cross_edges_deduped_and_internal_dropped(self):
        g = make_graph(5, [(0, 1), (1, 2), (0, 2), (3, 4), (0, 3), (1, 3)])
        sol = solution([0, 0, 0, 1, 1], [0, 1])
        pg = package_graph(g, sol)
        assert pg.nodes == (0, 1)
        assert pg.edges == {(0, 1)}

    def test_nodes_are_only_occupied_packages(self):
        g = make_graph(2, [(0, 1)])
        sol = solution([0, 3], [0, 0, 0, 1])
        pg = package_graph(g, sol)
        assert pg.nodes == (0, 3)
        assert pg.edges == {(0, 3)}

    def test_wrong_length_solution_rejected(self):
        g = make_graph(2, [(0, 1)])
        with pytest.raises(ReferentialError):
            package_graph(g, solution([0], [0]))

    def test_successors_predecessors(self):
        g = make_graph(3, [(0, 1), (1, 2), (2, 0)])
        pg = package_graph(g, solution([0, 1, 2], [0, 0, 0]))
        assert pg.successors() == {0: {1}, 1: {2}, 2: {0}}
        assert pg.predecessors() == {0: {2}, 1: {0}, 2: {1}}

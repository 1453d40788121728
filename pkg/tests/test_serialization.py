import json

import pytest

from ilp_workbench.errors import DerivationError, ModelError
from ilp_workbench.search import decide
from ilp_workbench.semantics import BimodalModel, SimplifiedModel, VeltmanModel, relabel
from ilp_workbench.serialization import (derivation_from_dict, derivation_to_dict,
                                         dump_derivation, dump_model, load_derivation,
                                         load_designated_world, load_model, model_from_dict,
                                         model_graph, model_to_dict, model_to_dot)
from ilp_workbench.syntax import parse


@pytest.fixture(scope="module")
def persistence_proof():
    return decide(parse("p |> q -> [](p |> q)")).derivation


def refuting_model():
    return SimplifiedModel(("w", "x", "y"), {("w", "x")}, {("x", "y")}, {"p": {"x"}, "q": set()})


class TestDerivations:
    def test_round_trip(self, persistence_proof):
        data = derivation_to_dict(persistence_proof)
        back = derivation_from_dict(data)
        assert back.endsequent == persistence_proof.endsequent
        assert back.size == persistence_proof.size
        assert derivation_to_dict(back) == data

    def test_node_table(self, persistence_proof):
        data = derivation_to_dict(persistence_proof)
        assert data["system"] == "ILmPs"
        assert data["root"] == len(data["nodes"]) - 1
        assert len(data["nodes"]) <= persistence_proof.size
        assert any(node["rule"] == "RhdP" for node in data["nodes"])

    def test_dump_is_stable(self, persistence_proof, tmp_path):
        first = dump_derivation(persistence_proof, tmp_path / "a.json")
        second = dump_derivation(load_derivation(first), tmp_path / "nested" / "b.json")
        assert first.read_bytes() == second.read_bytes()

    def test_missing_keys(self):
        with pytest.raises(DerivationError, match="malformed"):
            derivation_from_dict({"system": "ILmPs"})

    def test_unknown_rule(self, persistence_proof):
        data = derivation_to_dict(persistence_proof)
        data["nodes"][0]["rule"] = "Magic"
        with pytest.raises(DerivationError):
            derivation_from_dict(data)

    def test_bad_formula_text(self, persistence_proof):
        data = derivation_to_dict(persistence_proof)
        data["nodes"][0]["suc"] = ["p &"]
        with pytest.raises(DerivationError):
            derivation_from_dict(data)

    def test_tampered_proof_is_rejected(self, persistence_proof):
        data = derivation_to_dict(persistence_proof)
        data["nodes"][data["root"]]["suc"] = ["q"]
        with pytest.raises(DerivationError, match="rejected"):
            derivation_from_dict(data)
        assert derivation_from_dict(data, verify=False).endsequent.suc == {parse("q")}


class TestModels:
    @pytest.mark.parametrize("model", [
        refuting_model(),
        VeltmanModel(("w", "x", "y"), {("w", "x"), ("w", "y")}, {"w": {("x", "y")}},
                     {"p": {"x"}}),
        BimodalModel(("x", "y"), {("x", "y")}, {("y", "x")}, {"q": {"y"}}),
    ])
    def test_round_trip(self, model):
        data = model_to_dict(model)
        assert model_from_dict(json.loads(json.dumps(data))) == model

    def test_kind_keys(self):
        assert "S" in model_to_dict(refuting_model())
        assert "R1" in model_to_dict(BimodalModel(("x",), set(), set()))
        velt = model_to_dict(VeltmanModel(("w", "x"), {("w", "x")}, {"w": {("x", "w")}}))
        assert velt["S_family"] == {"w": [["x", "w"]]}

    def test_structured_worlds_are_renamed(self, tmp_path):
        model = SimplifiedModel([("a",), ("a", "b")], {(("a",), ("a", "b"))}, set(),
                                {"p": {("a", "b")}})
        data = model_to_dict(model, world=("a", "b"))
        assert data["worlds"] == ["w0", "w1"]
        assert data["world"] == "w1"
        assert model_from_dict(data) == relabel(model)
        path = dump_model(model, tmp_path / "model.json", world=("a",))
        assert load_designated_world(path) == "w0"
        assert load_model(path) == relabel(model)

    def test_unknown_kind(self):
        with pytest.raises(ModelError, match="unknown model kind"):
            model_from_dict({"kind": "kripke", "worlds": ["w"]})

    def test_missing_relation(self):
        with pytest.raises(ModelError, match="malformed"):
            model_from_dict({"kind": "simplified", "worlds": ["w"]})

    def test_invalid_model(self):
        with pytest.raises(ModelError):
            model_from_dict({"kind": "simplified", "worlds": ["w"], "R": [["w", "w"]]})

    def test_not_json(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("worlds: w")
        with pytest.raises(ModelError, match="not JSON"):
            load_model(path)

    def test_unknown_world(self):
        with pytest.raises(ModelError):
            model_to_dict(refuting_model(), world="z")


class TestDot:
    def test_graph_styles(self):
        graph = model_graph(refuting_model())
        styles = sorted(data["style"] for _, _, data in graph.edges(data=True))
        assert styles == ["dashed", "solid"]

    def test_dot_text(self):
        text = model_to_dot(refuting_model(), world="w")
        assert text.startswith("digraph simplified {")
        assert '"w" [label="w", shape="doublecircle"];' in text
        assert 'label="x\\np"' in text
        assert '"x" -> "y" [style="dashed"];' in text
        assert text.endswith("}\n")

    def test_veltman_edges_are_labelled(self):
        model = VeltmanModel(("w", "x", "y"), {("w", "x"), ("w", "y")}, {"w": {("x", "y")}})
        assert '"x" -> "y" [label="w", style="dashed"];' in model_to_dot(model)

    def test_dump_dot(self, tmp_path):
        path = dump_model(BimodalModel(("x", "y"), {("x", "y")}, {("y", "x")}),
                          tmp_path / "frame.dot")
        assert 'style="dotted"' in path.read_text()

#!/usr/bin/env python3
"""
JSON codecs for derivations and models, and DOT rendering of models.

Derivations are stored as a node table so shared subproofs are written once.
Keys and lists are sorted, so dumping the same object twice gives the same
bytes.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import networkx as nx

from .calculus import Derivation, Node, Rule, Sequent, System, check
from .errors import DerivationError, ModelError, ParseError
from .semantics import BimodalModel, Model, SimplifiedModel, VeltmanModel, World, relabel
from .syntax import parse, to_text

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _texts(formulas) -> List[str]:
    return sorted(to_text(f) for f in formulas)


# ---------------------------------------------------------------- derivations

def derivation_to_dict(derivation: Derivation) -> Dict[str, Any]:
    index: Dict[int, int] = {}
    nodes: List[Dict[str, Any]] = []

    def visit(node: Node) -> int:
        if id(node) in index:
            return index[id(node)]
        premises = [visit(p) for p in node.premises]
        entry = {
            "rule": node.rule.value,
            "ant": _texts(node.sequent.ant),
            "suc": _texts(node.sequent.suc),
            "premises": premises,
            "principals": [to_text(f) for f in node.principals],
            "diagonal": to_text(node.diagonal) if node.diagonal is not None else None,
            "cut": to_text(node.cut_formula) if node.cut_formula is not None else None,
        }
        index[id(node)] = len(nodes)
        nodes.append(entry)
        return index[id(node)]

    root = visit(derivation.root)
    return {"system": derivation.system.value, "nodes": nodes, "root": root}


def derivation_from_dict(data: Dict[str, Any], verify: bool = True) -> Derivation:
    """
    Rebuild a derivation; with verify the rule checker must accept it.

    Raises:
        DerivationError: malformed data or a rejected rule instance
    """
    try:
        system = System(data["system"])
        built: List[Node] = []
        for entry in data["nodes"]:
            premises = tuple(built[i] for i in entry["premises"])
            optional = {key: parse(entry[key]) if entry.get(key) is not None else None
                        for key in ("diagonal", "cut")}
            built.append(Node(Rule(entry["rule"]),
                              Sequent.of(map(parse, entry["ant"]), map(parse, entry["suc"])),
                              premises, tuple(map(parse, entry["principals"])),
                              optional["diagonal"], optional["cut"]))
        derivation = Derivation(system, built[data["root"]])
    except (KeyError, IndexError, TypeError, ValueError, ParseError) as e:
        raise DerivationError(f"malformed derivation data: {e}") from e
    if verify:
        report = check(derivation)
        if not report:
            raise DerivationError(f"derivation rejected: {report.violation}")
    return derivation


def dump_derivation(derivation: Derivation, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(derivation_to_dict(derivation), indent=2, sort_keys=True) + "\n")
    logger.info("wrote derivation to %s", path)
    return path


def load_derivation(path: PathLike, verify: bool = True) -> Derivation:
    return derivation_from_dict(json.loads(Path(path).read_text()), verify)


# ---------------------------------------------------------------- models

def _pairs(relation) -> List[List[str]]:
    return sorted([a, b] for a, b in relation)


def named(model: Model) -> Model:
    """model itself when every world is a string, else a relabelled copy."""
    if all(isinstance(w, str) for w in model.worlds):
        return model
    return relabel(model)


def model_to_dict(model: Model, world: Optional[World] = None) -> Dict[str, Any]:
    """
    JSON form of model. Worlds that are not strings are renamed w0, w1, ...;
    world is renamed along and stored under "world".
    """
    if world is not None:
        model.check_world(world)
        position = model.worlds.index(world)
    model = named(model)
    data: Dict[str, Any] = {
        "kind": model.kind,
        "worlds": list(model.worlds),
        "valuation": {v: sorted(ws) for v, ws in model.valuation.items()},
    }
    if isinstance(model, VeltmanModel):
        data["R"] = _pairs(model.R)
        data["S_family"] = {w: _pairs(pairs) for w, pairs in model.S.items()}
    elif isinstance(model, SimplifiedModel):
        data["R"] = _pairs(model.R)
        data["S"] = _pairs(model.S)
    else:
        data["R"] = _pairs(model.R0)
        data["R1"] = _pairs(model.R1)
    if world is not None:
        data["world"] = model.worlds[position]
    return data


def _as_pairs(items) -> List[tuple]:
    return [tuple(item) for item in items]


def model_from_dict(data: Dict[str, Any]) -> Model:
    """
    Raises:
        ModelError: unknown kind, missing keys or an invalid model
    """
    try:
        kind = data["kind"]
        worlds = data["worlds"]
        valuation = data.get("valuation", {})
        if kind == "veltman":
            family = {w: _as_pairs(pairs) for w, pairs in data.get("S_family", {}).items()}
            return VeltmanModel(worlds, _as_pairs(data["R"]), family, valuation)
        if kind == "simplified":
            return SimplifiedModel(worlds, _as_pairs(data["R"]), _as_pairs(data.get("S", [])),
                                   valuation)
        if kind == "bimodal":
            return BimodalModel(worlds, _as_pairs(data["R"]), _as_pairs(data.get("R1", [])),
                                valuation)
    except (KeyError, TypeError, ValueError) as e:
        raise ModelError(f"malformed model data: {e}") from e
    raise ModelError(f"unknown model kind {data.get('kind')!r}")


def dump_model(model: Model, path: PathLike, world: Optional[World] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix == ".dot":
        path.write_text(model_to_dot(model, world))
    else:
        path.write_text(json.dumps(model_to_dict(model, world), indent=2, sort_keys=True) + "\n")
    logger.info("wrote %s model to %s", model.kind, path)
    return path


def load_model(path: PathLike) -> Model:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ModelError(f"{path} is not JSON: {e}") from e
    return model_from_dict(data)


def load_designated_world(path: PathLike) -> Optional[str]:
    return json.loads(Path(path).read_text()).get("world")


# ---------------------------------------------------------------- DOT

def model_graph(model: Model) -> nx.MultiDiGraph:
    """R edges solid, S dashed (labelled with w for S_w), R1 dotted."""
    model = named(model)
    graph = nx.MultiDiGraph()
    for w in model.worlds:
        true = [v for v, ws in model.valuation.items() if w in ws]
        graph.add_node(w, label="\\n".join([w] + ([", ".join(true)] if true else [])))
    for a, b in sorted(model.R):
        graph.add_edge(a, b, style="solid")
    if isinstance(model, VeltmanModel):
        for w, pairs in sorted(model.S.items()):
            for a, b in sorted(pairs):
                graph.add_edge(a, b, style="dashed", label=w)
    elif isinstance(model, SimplifiedModel):
        for a, b in sorted(model.S):
            graph.add_edge(a, b, style="dashed")
    else:
        for a, b in sorted(model.R1):
            graph.add_edge(a, b, style="dotted")
    return graph


def _attrs(data: Dict[str, str]) -> str:
    return ", ".join(f'{key}="{value}"' for key, value in sorted(data.items()))


def model_to_dot(model: Model, world: Optional[World] = None) -> str:
    highlight = None
    if world is not None:
        model.check_world(world)
        highlight = named(model).worlds[model.worlds.index(world)]
    graph = model_graph(model)
    lines = [f"digraph {model.kind} {{"]
    for node, data in graph.nodes(data=True):
        attrs = dict(data)
        if node == highlight:
            attrs["shape"] = "doublecircle"
        lines.append(f'  "{node}" [{_attrs(attrs)}];')
    for a, b, data in graph.edges(data=True):
        lines.append(f'  "{a}" -> "{b}" [{_attrs(data)}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


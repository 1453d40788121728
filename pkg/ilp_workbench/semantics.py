#!/usr/bin/env python3
"""
Finite relational semantics: IL- models with a family S_w, simplified
IL-(P) models with a single S, and bimodal models with R0 and R1.

Truth sets are computed bottom-up over the formula tree. On simplified models
w forces A |> B when every R-successor forcing A has an S-successor forcing B;
the clause that also asks w R y is available as clause="b" for experiments.
"""

import itertools
import logging
import random
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import (Callable, Dict, FrozenSet, Hashable, Iterable, Iterator, List, Mapping,
                    Optional, Sequence, Set, Tuple, Union)

import networkx as nx

from .config import DEFAULT_CONFIG
from .errors import BudgetExceeded, ModelError
from .syntax import (And, Bot, Box, BoxK, Formula, Imp, Neg, Or, Rhd, Var, iter_subformulas,
                     variables)

logger = logging.getLogger(__name__)

World = Hashable
Pair = Tuple[World, World]
Valuation = Mapping[str, FrozenSet[World]]


# ---------------------------------------------------------------- relations

def relation_graph(worlds: Iterable[World], *relations: Iterable[Pair]) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(worlds)
    for relation in relations:
        graph.add_edges_from(relation)
    return graph


def is_transitive(relation: Iterable[Pair]) -> bool:
    relation = set(relation)
    successors: Dict[World, Set[World]] = {}
    for a, b in relation:
        successors.setdefault(a, set()).add(b)
    return all((a, c) in relation for a, b in relation for c in successors.get(b, ()))


def is_conversely_well_founded(worlds: Iterable[World], *relations: Iterable[Pair]) -> bool:
    """On a finite set: the union of the relations has no cycle."""
    return nx.is_directed_acyclic_graph(relation_graph(worlds, *relations))


def _successor_map(relation: Iterable[Pair]) -> Dict[World, FrozenSet[World]]:
    found: Dict[World, Set[World]] = {}
    for a, b in relation:
        found.setdefault(a, set()).add(b)
    return {a: frozenset(bs) for a, bs in found.items()}


def _normalize_valuation(valuation: Mapping[str, Iterable[World]]) -> Dict[str, FrozenSet[World]]:
    return {name: frozenset(ws) for name, ws in sorted(valuation.items())}


# ---------------------------------------------------------------- models

class _Model:
    """Shared checks for the three model kinds."""

    kind = ""
    worlds: Tuple[World, ...]
    valuation: Dict[str, FrozenSet[World]]

    def _check_worlds(self):
        if not self.worlds:
            raise ModelError("a model needs at least one world")
        if len(set(self.worlds)) != len(self.worlds):
            raise ModelError("duplicate worlds")

    def _check_pairs(self, name: str, relation: FrozenSet[Pair]):
        known = set(self.worlds)
        for a, b in relation:
            if a not in known or b not in known:
                raise ModelError(f"{name} relates unknown worlds {a!r}, {b!r}")

    def _check_gl(self, name: str, relation: FrozenSet[Pair]):
        self._check_pairs(name, relation)
        if not is_transitive(relation):
            raise ModelError(f"{name} is not transitive")
        if not is_conversely_well_founded(self.worlds, relation):
            raise ModelError(f"{name} is not conversely well-founded")

    def _check_valuation(self):
        known = set(self.worlds)
        for name, ws in self.valuation.items():
            if not ws <= known:
                raise ModelError(f"valuation of {name} mentions unknown worlds")

    def check_world(self, world: World):
        if world not in self._world_set:
            raise ModelError(f"unknown world {world!r}")

    @cached_property
    def _world_set(self) -> FrozenSet[World]:
        return frozenset(self.worlds)

    @cached_property
    def r_successors(self) -> Dict[World, FrozenSet[World]]:
        return _successor_map(self.R)

    def with_valuation(self, valuation: Mapping[str, Iterable[World]]):
        return replace(self, valuation=valuation)

    def frame(self):
        """The same model with an empty valuation."""
        return replace(self, valuation={})


@dataclass(frozen=True)
class VeltmanModel(_Model):
    """IL- model: R transitive and conversely well-founded, S_w a subset of R[w] x W."""

    worlds: Tuple[World, ...]
    R: FrozenSet[Pair]
    S: Dict[World, FrozenSet[Pair]]
    valuation: Dict[str, FrozenSet[World]] = field(default_factory=dict)

    kind = "veltman"

    def __post_init__(self):
        object.__setattr__(self, "worlds", tuple(self.worlds))
        object.__setattr__(self, "R", frozenset(self.R))
        family = {w: frozenset(pairs) for w, pairs in self.S.items() if pairs}
        object.__setattr__(self, "S", family)
        object.__setattr__(self, "valuation", _normalize_valuation(self.valuation))
        self._check_worlds()
        self._check_gl("R", self.R)
        for w, pairs in family.items():
            self.check_world(w)
            self._check_pairs(f"S_{w}", pairs)
            above = self.r_successors.get(w, frozenset())
            if any(x not in above for x, _ in pairs):
                raise ModelError(f"S_{w} starts outside R[{w}]")
        self._check_valuation()

    @cached_property
    def s_successors(self) -> Dict[World, Dict[World, FrozenSet[World]]]:
        return {w: _successor_map(pairs) for w, pairs in self.S.items()}


@dataclass(frozen=True)
class SimplifiedModel(_Model):
    """Simplified IL-(P) model: a single unconstrained S."""

    worlds: Tuple[World, ...]
    R: FrozenSet[Pair]
    S: FrozenSet[Pair]
    valuation: Dict[str, FrozenSet[World]] = field(default_factory=dict)

    kind = "simplified"

    def __post_init__(self):
        object.__setattr__(self, "worlds", tuple(self.worlds))
        object.__setattr__(self, "R", frozenset(self.R))
        object.__setattr__(self, "S", frozenset(self.S))
        object.__setattr__(self, "valuation", _normalize_valuation(self.valuation))
        self._check_worlds()
        self._check_gl("R", self.R)
        self._check_pairs("S", self.S)
        self._check_valuation()

    @cached_property
    def s_successors(self) -> Dict[World, FrozenSet[World]]:
        return _successor_map(self.S)


@dataclass(frozen=True)
class BimodalModel(_Model):
    """Model of the fusion of GL and K: R0 for [0], R1 for [1]."""

    worlds: Tuple[World, ...]
    R0: FrozenSet[Pair]
    R1: FrozenSet[Pair]
    valuation: Dict[str, FrozenSet[World]] = field(default_factory=dict)

    kind = "bimodal"

    def __post_init__(self):
        object.__setattr__(self, "worlds", tuple(self.worlds))
        object.__setattr__(self, "R0", frozenset(self.R0))
        object.__setattr__(self, "R1", frozenset(self.R1))
        object.__setattr__(self, "valuation", _normalize_valuation(self.valuation))
        self._check_worlds()
        self._check_gl("R0", self.R0)
        self._check_pairs("R1", self.R1)
        self._check_valuation()

    @property
    def R(self) -> FrozenSet[Pair]:
        return self.R0

    @cached_property
    def r1_successors(self) -> Dict[World, FrozenSet[World]]:
        return _successor_map(self.R1)


Model = Union[VeltmanModel, SimplifiedModel, BimodalModel]


def relabel(model: Model, prefix: str = "w") -> Model:
    """Copy of model with worlds renamed prefix0, prefix1, ... in world order."""
    names = {w: f"{prefix}{i}" for i, w in enumerate(model.worlds)}

    def pairs(relation):
        return frozenset((names[a], names[b]) for a, b in relation)

    valuation = {v: frozenset(names[w] for w in ws) for v, ws in model.valuation.items()}
    worlds = tuple(names[w] for w in model.worlds)
    if isinstance(model, VeltmanModel):
        family = {names[w]: pairs(ps) for w, ps in model.S.items()}
        return VeltmanModel(worlds, pairs(model.R), family, valuation)
    if isinstance(model, SimplifiedModel):
        return SimplifiedModel(worlds, pairs(model.R), pairs(model.S), valuation)
    return BimodalModel(worlds, pairs(model.R0), pairs(model.R1), valuation)


# ---------------------------------------------------------------- evaluation

class _Evaluator:
    def __init__(self, model: Model, valuation: Optional[Valuation] = None, clause: str = "a"):
        if clause not in ("a", "b"):
            raise ModelError(f"unknown clause {clause!r}")
        self.model = model
        self.valuation = model.valuation if valuation is None else valuation
        self.clause = clause
        self.everywhere = frozenset(model.worlds)
        self._memo: Dict[Formula, FrozenSet[World]] = {}

    def truth(self, f: Formula) -> FrozenSet[World]:
        found = self._memo.get(f)
        if found is None:
            found = self._compute(f)
            self._memo[f] = found
        return found

    def _compute(self, f: Formula) -> FrozenSet[World]:
        if isinstance(f, Var):
            if f.name not in self.valuation:
                raise ModelError(f"variable {f.name} has no valuation")
            return frozenset(self.valuation[f.name])
        if isinstance(f, Bot):
            return frozenset()
        if isinstance(f, Neg):
            return self.everywhere - self.truth(f.sub)
        if isinstance(f, And):
            return self.truth(f.left) & self.truth(f.right)
        if isinstance(f, Or):
            return self.truth(f.left) | self.truth(f.right)
        if isinstance(f, Imp):
            return (self.everywhere - self.truth(f.left)) | self.truth(f.right)
        model = self.model
        if isinstance(f, BoxK):
            if not isinstance(model, BimodalModel):
                raise ModelError(f"[{f.k}] is not interpreted on {model.kind} models")
            successors = model.r_successors if f.k == 0 else model.r1_successors
            return self._box(successors, self.truth(f.sub))
        if isinstance(model, BimodalModel):
            raise ModelError(f"{f} is not a bimodal formula")
        if isinstance(f, Box):
            return self._box(model.r_successors, self.truth(f.sub))
        if isinstance(f, Rhd):
            return self._rhd(self.truth(f.left), self.truth(f.right))
        raise ModelError(f"cannot evaluate {f!r}")

    def _box(self, successors, body: FrozenSet[World]) -> FrozenSet[World]:
        return frozenset(w for w in self.model.worlds if successors.get(w, frozenset()) <= body)

    def _rhd(self, left: FrozenSet[World], right: FrozenSet[World]) -> FrozenSet[World]:
        model = self.model
        found = []
        for w in model.worlds:
            above = model.r_successors.get(w, frozenset())
            if isinstance(model, VeltmanModel):
                s = model.s_successors.get(w, {})
                ok = all(s.get(x, frozenset()) & right for x in above & left)
            elif self.clause == "a":
                ok = all(model.s_successors.get(x, frozenset()) & right for x in above & left)
            else:
                ok = all(model.s_successors.get(x, frozenset()) & right & above
                         for x in above & left)
            if ok:
                found.append(w)
        return frozenset(found)


def extension(model: Model, f: Formula, clause: str = "a") -> FrozenSet[World]:
    """The set of worlds forcing f."""
    return _Evaluator(model, clause=clause).truth(f)


def truth_sets(model: Model, formulas: Iterable[Formula],
               clause: str = "a") -> Dict[Formula, FrozenSet[World]]:
    """Extensions of several formulas sharing one memo."""
    evaluator = _Evaluator(model, clause=clause)
    return {f: evaluator.truth(f) for f in formulas}


def evaluate(model: Model, world: World, f: Formula, clause: str = "a") -> bool:
    """
    Whether world forces f in model.

    Raises:
        ModelError: unknown world, a variable without valuation, or a formula
            of the wrong language for the model kind
    """
    model.check_world(world)
    return world in extension(model, f, clause)


def valuations(worlds: Sequence[World],
               names: Sequence[str]) -> Iterator[Dict[str, FrozenSet[World]]]:
    """Every valuation of names over worlds, in a fixed order."""
    subsets = [frozenset(c) for r in range(len(worlds) + 1)
               for c in itertools.combinations(worlds, r)]
    for choice in itertools.product(subsets, repeat=len(names)):
        yield dict(zip(names, choice))


def refuting_valuation(model: Model, f: Formula, clause: str = "a",
                       budget: int = DEFAULT_CONFIG.valuation_budget
                       ) -> Optional[Tuple[Dict[str, FrozenSet[World]], World]]:
    """A valuation of vars(f) and a world where f fails, or None."""
    names = sorted(variables(f))
    count = 2 ** (len(model.worlds) * len(names))
    if count > budget:
        raise BudgetExceeded("valuation", budget)
    for valuation in valuations(model.worlds, names):
        truth = _Evaluator(model, valuation, clause).truth(f)
        if len(truth) != len(model.worlds):
            world = next(w for w in model.worlds if w not in truth)
            return valuation, world
    return None


def frame_validates(frame: Model, f: Formula, clause: str = "a",
                    budget: int = DEFAULT_CONFIG.valuation_budget) -> bool:
    """f holds at every world under every valuation of its variables."""
    return refuting_valuation(frame, f, clause, budget) is None


# ---------------------------------------------------------------- frame conditions

def check_P_condition(frame: VeltmanModel) -> bool:
    """w R x R y and y S_w z imply y S_x z."""
    for w in frame.worlds:
        family = frame.S.get(w, frozenset())
        if not family:
            continue
        for x in frame.r_successors.get(w, ()):
            above = frame.r_successors.get(x, frozenset())
            local = frame.S.get(x, frozenset())
            if any(y in above and (y, z) not in local for y, z in family):
                return False
    return True


def check_dagger(frame: SimplifiedModel) -> bool:
    """No x S y S z."""
    starts = {x for x, _ in frame.S}
    return not any(y in starts for _, y in frame.S)


def p_instances(names: Sequence[str] = ("p", "q")) -> List[Formula]:
    """A |> B -> [](A |> B) for A, B among the given variables."""
    found = []
    for a, b in itertools.product(names, repeat=2):
        rhd = Rhd(Var(a), Var(b))
        found.append(Imp(rhd, Box(rhd)))
    return found


def frame_correspondence_P(frame: VeltmanModel, names: Sequence[str] = ("p", "q"),
                           budget: int = DEFAULT_CONFIG.valuation_budget) -> bool:
    """The frame condition for P and the validity of the P-instances agree on frame."""
    condition = check_P_condition(frame)
    valid = all(frame_validates(frame, f, budget=budget) for f in p_instances(names))
    if condition != valid:
        logger.warning("frame condition %s but P-instances valid %s", condition, valid)
    return condition == valid


# ---------------------------------------------------------------- enumeration

def _strict_orders(n: int) -> List[FrozenSet[Tuple[int, int]]]:
    """Transitive relations contained in i < j; every finite strict order is isomorphic to one."""
    above = [(i, j) for i in range(n) for j in range(i + 1, n)]
    found = []
    for mask in range(1 << len(above)):
        relation = frozenset(pair for k, pair in enumerate(above) if mask >> k & 1)
        if is_transitive(relation):
            found.append(relation)
    return found


def _subsets(items: Sequence) -> Iterator[FrozenSet]:
    for mask in range(1 << len(items)):
        yield frozenset(item for k, item in enumerate(items) if mask >> k & 1)


def _canonical_key(n: int, encode: Callable[[Sequence[int]], tuple]) -> tuple:
    return min(encode(perm) for perm in itertools.permutations(range(n)))


def _names(n: int) -> Tuple[str, ...]:
    return tuple(f"w{i}" for i in range(n))


def _named(relation, names) -> FrozenSet[Pair]:
    return frozenset((names[a], names[b]) for a, b in relation)


def simplified_frames(n: int) -> Iterator[SimplifiedModel]:
    """Simplified frames on n worlds, one per isomorphism class."""
    names = _names(n)
    seen = set()
    square = [(i, j) for i in range(n) for j in range(n)]
    for r in _strict_orders(n):
        for s in _subsets(square):
            def encode(perm, r=r, s=s):
                return (tuple(sorted((perm[a], perm[b]) for a, b in r)),
                        tuple(sorted((perm[a], perm[b]) for a, b in s)))
            key = _canonical_key(n, encode)
            if key in seen:
                continue
            seen.add(key)
            yield SimplifiedModel(names, _named(r, names), _named(s, names))


def veltman_frames(n: int) -> Iterator[VeltmanModel]:
    """IL- frames on n worlds, one per isomorphism class."""
    names = _names(n)
    seen = set()
    for r in _strict_orders(n):
        options = []
        for w in range(n):
            starts = [x for x in range(n) if (w, x) in r]
            options.append(list(_subsets([(x, y) for x in starts for y in range(n)])))
        for family in itertools.product(*options):
            def encode(perm, r=r, family=family):
                return (tuple(sorted((perm[a], perm[b]) for a, b in r)),
                        tuple(sorted((perm[w], perm[x], perm[y])
                                     for w, pairs in enumerate(family) for x, y in pairs)))
            key = _canonical_key(n, encode)
            if key in seen:
                continue
            seen.add(key)
            yield VeltmanModel(names, _named(r, names),
                               {names[w]: _named(pairs, names) for w, pairs in enumerate(family)})


def bimodal_frames(n: int) -> Iterator[BimodalModel]:
    """Bimodal frames on n worlds with R0 a strict order, one per isomorphism class."""
    names = _names(n)
    seen = set()
    square = [(i, j) for i in range(n) for j in range(n)]
    for r0 in _strict_orders(n):
        for r1 in _subsets(square):
            def encode(perm, r0=r0, r1=r1):
                return (tuple(sorted((perm[a], perm[b]) for a, b in r0)),
                        tuple(sorted((perm[a], perm[b]) for a, b in r1)))
            key = _canonical_key(n, encode)
            if key in seen:
                continue
            seen.add(key)
            yield BimodalModel(names, _named(r0, names), _named(r1, names))


def random_simplified_frame(rng: random.Random, n: int, density: float = 0.4) -> SimplifiedModel:
    """Random R (transitive closure of a random DAG on i < j) and random S."""
    names = _names(n)
    graph = relation_graph(range(n), [(i, j) for i in range(n) for j in range(i + 1, n)
                                      if rng.random() < density])
    r = nx.transitive_closure_dag(graph).edges()
    s = [(i, j) for i in range(n) for j in range(n) if rng.random() < density]
    return SimplifiedModel(names, _named(r, names), _named(s, names))


# ---------------------------------------------------------------- countermodels

def countermodel_search(f: Formula, max_worlds: int = DEFAULT_CONFIG.max_worlds,
                        budget: int = DEFAULT_CONFIG.valuation_budget
                        ) -> Optional[Tuple[SimplifiedModel, World]]:
    """
    Smallest simplified model falsifying f, up to max_worlds worlds.

    A result certifies that f is not a theorem of IL-(P); None certifies nothing.
    """
    for n in range(1, max_worlds + 1):
        checked = 0
        for frame in simplified_frames(n):
            checked += 1
            found = refuting_valuation(frame, f, budget=budget)
            if found is not None:
                valuation, world = found
                logger.debug("countermodel with %d worlds after %d frames", n, checked)
                return frame.with_valuation(valuation), world
        logger.debug("no countermodel among %d frames with %d worlds", checked, n)
    return None


def agree_on(left: Model, left_world: World, right: Model, right_world: World,
             formulas: Iterable[Formula], clause: str = "a") -> Optional[Formula]:
    """The first formula whose truth differs at the two points, or None."""
    left_eval = _Evaluator(left, clause=clause)
    right_eval = _Evaluator(right, clause=clause)
    for g in formulas:
        if (left_world in left_eval.truth(g)) != (right_world in right_eval.truth(g)):
            return g
    return None


def subformula_list(f: Formula) -> List[Formula]:
    """Distinct subformulas, innermost first."""
    return list(reversed(list(dict.fromkeys(iter_subformulas(f)))))

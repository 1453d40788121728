#!/usr/bin/env python3
"""
Cut elimination for ILmPs.

Cuts are removed bottom-up. A single cut between cut-free proofs is reduced
by the usual Gentzen steps: weakening absorption, initial sequents, pushing
the cut above a rule that does not introduce the cut formula, and the
principal propositional reductions. A cut between two persistence rules that
both use the cut formula A |> B is rebuilt from the left proof's premise with
cuts on A and B only, which are then removed in turn.

Every reduction lowers the pair (degree, height) of the cut it works on;
CutEliminator checks this on each step and keeps an audit log.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .calculus import (Derivation, Node, Rule, Sequent, System, apply_rule, check, cut,
                       init, rhd_p, rule_variant, weaken)
from .errors import DerivationError, PreconditionError, VerificationError
from .syntax import And, Formula, Imp, Neg, Or, Rhd, connectives

logger = logging.getLogger(__name__)

_RIGHT_INTRO = frozenset({Rule.NEG_R, Rule.AND_R, Rule.OR_R, Rule.IMP_R})
_LEFT_INTRO = frozenset({Rule.NEG_L, Rule.AND_L, Rule.OR_L, Rule.IMP_L})


@dataclass(frozen=True, order=True)
class CutMeasure:
    """Degree of the cut formula, then the summed heights of both subproofs."""

    degree: int
    height: int

    @classmethod
    def of(cls, left: Node, right: Node, f: Formula) -> "CutMeasure":
        return cls(connectives(f), left.height + right.height)


@dataclass(frozen=True)
class Reduction:
    kind: str
    cut_formula: Formula
    measure: CutMeasure

    def __str__(self) -> str:
        return f"{self.kind} on {self.cut_formula} {self.measure.degree}/{self.measure.height}"


@dataclass(frozen=True)
class ExplicitMarking:
    """
    The sequents of a proof that still carry a given |>-formula on the left,
    read from the root upwards and stopping where the formula disappears.

    theta_bar collects the diagonals of persistence rules inside the marked
    part that use the formula as a principal formula.
    """

    formula: Formula
    node_ids: FrozenSet[int]
    theta_bar: FrozenSet[Formula]

    def __contains__(self, node: Node) -> bool:
        return id(node) in self.node_ids


def explicit_marking(root: Node, formula: Formula) -> ExplicitMarking:
    ids: Set[int] = set()
    diagonals: Set[Formula] = set()
    stack = [root] if formula in root.sequent.ant else []
    while stack:
        node = stack.pop()
        if id(node) in ids:
            continue
        ids.add(id(node))
        if node.rule is Rule.RHD_P and formula in node.principals:
            diagonals.add(node.diagonal)
        stack.extend(p for p in node.premises if formula in p.sequent.ant)
    return ExplicitMarking(formula, frozenset(ids), frozenset(diagonals))


def explicit_nodes(root: Node, formula: Formula) -> List[Node]:
    marking = explicit_marking(root, formula)
    return [node for node in root.iter_nodes() if node in marking]


def theta_bar(root: Node, formula: Formula) -> FrozenSet[Formula]:
    return explicit_marking(root, formula).theta_bar


def cut_formulas(node: Node) -> Set[Formula]:
    return {n.cut_formula for n in node.iter_nodes() if n.rule is Rule.CUT}


def _cut_or_weaken(left: Node, right: Node, f: Formula) -> Node:
    if f not in left.sequent.suc:
        return left
    if f not in right.sequent.ant:
        return right
    return cut(left, right, f)


def _merge_sides(node: Node, formula: Formula, pi: Node) -> Tuple[Tuple[Formula, ...],
                                                                   Tuple[Node, ...]]:
    """
    Principal formulas and side proofs for a persistence rule that trades
    formula, principal in node, for the principal formulas of pi.
    """
    side_b = node.premises[1 + node.principals.index(formula)]
    merged: Dict[Formula, Node] = {}
    for principal, side in zip(node.principals, node.premises[1:]):
        if principal != formula:
            merged.setdefault(principal, side)
    for principal, side in zip(pi.principals, pi.premises[1:]):
        if principal not in merged:
            merged[principal] = _cut_or_weaken(side, side_b, formula.right)
    return tuple(merged), tuple(merged.values())


def _principal_right(node: Node, f: Formula) -> bool:
    if node.rule is Rule.RHD_P:
        return node.diagonal == f
    return node.rule in _RIGHT_INTRO and node.principals == (f,)


def _principal_left(node: Node, f: Formula) -> bool:
    if node.rule is Rule.RHD_P:
        return f in node.principals
    return node.rule in _LEFT_INTRO and node.principals == (f,)


def _require_persistence(node: Node, what: str) -> None:
    if node.rule is not Rule.RHD_P:
        raise PreconditionError(f"{what} must end in the persistence rule, not {node.rule.value}")
    if node.has_cut:
        raise PreconditionError(f"{what} must be cut-free")


class _LemmaStar:
    """
    Proofs with cuts on A and B only, built from the premise of a proof pi of
    A |> B by replacing A |> B with the antecedent of pi and a set theta of
    diagonal formulas.
    """

    def __init__(self, pi: Node):
        _require_persistence(pi, "the left proof")
        self.pi = pi
        self.formula: Rhd = pi.diagonal
        self.root = pi.premises[0]
        self.base = pi.sequent.ant
        self.marking = explicit_marking(self.root, self.formula)
        self._memo: Dict[Tuple[int, FrozenSet[Formula]], Node] = {}

    def target(self, theta: FrozenSet[Formula], node: Node) -> Sequent:
        return Sequent(self.base | theta | (node.sequent.ant - {self.formula}), node.sequent.suc)

    def prove(self, theta: FrozenSet[Formula], node: Node) -> Node:
        key = (id(node), theta)
        done = self._memo.get(key)
        if done is None:
            target = self.target(theta, node)
            done = weaken(self._prove(theta, node, target), target)
            self._memo[key] = done
        return done

    def _prove(self, theta: FrozenSet[Formula], node: Node, target: Sequent) -> Node:
        if self.formula not in node.sequent.ant:
            return node
        if node.rule is Rule.INIT:
            return self.pi
        if node.rule is Rule.CUT:
            raise PreconditionError("the left proof must be cut-free")
        if node.rule is Rule.RHD_P:
            if self.formula in node.principals:
                return self._principal(theta, node, target)
            premise = self.prove(theta, node.premises[0])
            return rhd_p(premise, node.premises[1:], node.principals, node.diagonal, target)
        parts = [self.prove(theta, p) for p in node.premises]
        return apply_rule(node.rule, node.principals[0], parts, target, rule_variant(node))

    def _principal(self, theta: FrozenSet[Formula], node: Node, target: Sequent) -> Node:
        diagonal = node.diagonal
        if diagonal in theta:
            return init(diagonal)
        wider = self.prove(theta | {diagonal}, self.root)
        premise = self.prove(theta, node.premises[0])
        merged = _cut_or_weaken(premise, wider, self.formula.left)
        principals, sides = _merge_sides(node, self.formula, self.pi)
        return rhd_p(merged, sides, principals, diagonal, target)


class CutEliminator:
    """
    Stateful cut eliminator; one instance may process several derivations
    and shares reductions between them.
    """

    def __init__(self):
        self.reductions: List[Reduction] = []
        self._measures: List[CutMeasure] = []
        self._done: Dict[int, Tuple[Node, Node]] = {}
        self._cuts: Dict[Tuple[int, int, Formula], Tuple[Node, Node, Node]] = {}

    def eliminate(self, derivation: Derivation) -> Derivation:
        if derivation.system is not System.ILMPS:
            raise PreconditionError("cut elimination is only available for ILmPs")
        report = check(derivation)
        if not report:
            raise DerivationError(f"malformed derivation: {report.violation}")
        before = len(self.reductions)
        result = Derivation(System.ILMPS, self.eliminate_tree(derivation.root))
        after = check(result)
        if not after or result.root.has_cut:
            raise VerificationError(f"cut elimination produced a bad proof: {after.violation}")
        logger.info("eliminated cuts from %s with %d reductions (height %d -> %d)",
                    derivation.endsequent, len(self.reductions) - before,
                    derivation.height, result.height)
        return result

    def eliminate_tree(self, node: Node) -> Node:
        """Same endsequent, no cuts; premises are cleaned before their conclusion."""
        done = self._done.get(id(node))
        if done is not None:
            return done[1]
        premises = tuple(self.eliminate_tree(p) for p in node.premises)
        if node.rule is Rule.CUT:
            result = weaken(self.cut_free(premises[0], premises[1], node.cut_formula),
                            node.sequent)
        elif all(new is old for new, old in zip(premises, node.premises)):
            result = node
        else:
            result = Node(node.rule, node.sequent, premises, node.principals, node.diagonal)
        self._done[id(node)] = (node, result)
        return result

    def cut_free(self, left: Node, right: Node, f: Formula) -> Node:
        """
        A cut-free proof of the conclusion of a cut on f between two
        cut-free proofs.
        """
        key = (id(left), id(right), f)
        hit = self._cuts.get(key)
        if hit is not None:
            return hit[2]
        target = Sequent(left.sequent.ant | (right.sequent.ant - {f}),
                         (left.sequent.suc - {f}) | right.sequent.suc)
        measure = CutMeasure.of(left, right, f)
        if self._measures and not measure < self._measures[-1]:
            raise VerificationError(f"cut measure {measure} does not drop below "
                                    f"{self._measures[-1]}")
        self._measures.append(measure)
        try:
            kind, node = self._reduce(left, right, f, target)
        finally:
            self._measures.pop()
        self.reductions.append(Reduction(kind, f, measure))
        logger.debug("%s on %s", kind, f)
        result = weaken(node, target)
        self._cuts[key] = (left, right, result)
        return result

    def _reduce(self, left: Node, right: Node, f: Formula, target: Sequent) -> Tuple[str, Node]:
        if f not in left.sequent.suc or f not in right.sequent.ant:
            return "weakening", left if f not in left.sequent.suc else right
        if left.rule is Rule.INIT:
            return "initial", right
        if right.rule is Rule.INIT:
            return "initial", left
        if not _principal_right(left, f):
            return f"permute {left.rule.value} left", self._push_left(left, right, f, target)
        if not _principal_left(right, f):
            return f"permute {right.rule.value} right", self._push_right(left, right, f, target)
        if left.rule is Rule.RHD_P:
            return "principal RhdP", self.principal_rhd(left, right, f)
        return f"principal {left.rule.value}/{right.rule.value}", self._principal(left, right, f)

    def _push_left(self, left: Node, right: Node, f: Formula, target: Sequent) -> Node:
        parts = [self.cut_free(p, right, f) for p in left.premises]
        return apply_rule(left.rule, left.principals[0], parts, target, rule_variant(left))

    def _push_right(self, left: Node, right: Node, f: Formula, target: Sequent) -> Node:
        if right.rule is Rule.RHD_P:
            premise = self.cut_free(left, right.premises[0], f)
            return rhd_p(premise, right.premises[1:], right.principals, right.diagonal, target)
        parts = [self.cut_free(left, p, f) for p in right.premises]
        return apply_rule(right.rule, right.principals[0], parts, target, rule_variant(right))

    def _principal(self, left: Node, right: Node, f: Formula) -> Node:
        lefts = [self.cut_free(p, right, f) for p in left.premises]
        rights = [self.cut_free(left, p, f) for p in right.premises]
        if isinstance(f, Neg):
            return self.cut_free(rights[0], lefts[0], f.sub)
        if isinstance(f, And):
            v = rule_variant(right)
            return self.cut_free(lefts[v], rights[0], (f.left, f.right)[v])
        if isinstance(f, Or):
            v = rule_variant(left)
            return self.cut_free(lefts[0], rights[v], (f.left, f.right)[v])
        if isinstance(f, Imp):
            through = self.cut_free(lefts[0], rights[1], f.right)
            return self.cut_free(rights[0], through, f.left)
        raise DerivationError(f"no principal reduction for {f}")

    def principal_rhd(self, left: Node, right: Node, f: Formula) -> Node:
        """
        Cut on A |> B where the left proof ends with A |> B as diagonal and
        the right proof uses it as a principal formula.
        """
        _require_persistence(left, "the left proof")
        _require_persistence(right, "the right proof")
        if left.diagonal != f or f not in right.principals:
            raise PreconditionError(f"{f} must be the left diagonal and a right principal formula")
        lemma = _LemmaStar(left)
        reduced = lemma.prove(frozenset(), lemma.root)
        premise = self.cut_free(left, right.premises[0], f)
        merged = _cut_or_weaken(premise, reduced, f.left)
        principals, sides = _merge_sides(right, f, left)
        target = Sequent(left.sequent.ant | (right.sequent.ant - {f}), right.sequent.suc)
        return self.eliminate_tree(rhd_p(merged, sides, principals, right.diagonal, target))


def eliminate(derivation: Derivation) -> Derivation:
    return CutEliminator().eliminate(derivation)


def eliminate_principal(pi: Derivation, sigma: Derivation, cut_formula: Formula) -> Derivation:
    """Cut-free proof of the conclusion of a cut on cut_formula between pi and sigma."""
    eliminator = CutEliminator()
    node = eliminator.principal_rhd(pi.root, sigma.root, cut_formula)
    return Derivation(System.ILMPS, node)


def lemma_star(pi: Derivation, theta: Iterable[Formula] = (),
               node: Optional[Node] = None) -> Derivation:
    """
    Proof of (antecedent of pi, theta, rest of node => succedent of node),
    where node is a sequent above pi's last rule that still carries the
    diagonal of pi on the left. The result cuts only on the components of
    that diagonal.
    """
    lemma = _LemmaStar(pi.root)
    theta = frozenset(theta)
    if not theta <= lemma.marking.theta_bar:
        raise PreconditionError("theta must consist of diagonals the left premise reaches")
    node = lemma.root if node is None else node
    if node not in lemma.marking:
        raise PreconditionError(f"{node.sequent} does not carry {lemma.formula} from the root")
    return Derivation(System.ILMPS, lemma.prove(theta, node))


def reduction_table(reductions: Sequence[Reduction]) -> List[Tuple[str, int]]:
    return sorted(Counter(r.kind for r in reductions).items())

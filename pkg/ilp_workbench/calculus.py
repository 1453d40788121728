#!/usr/bin/env python3
"""
Set-based sequents, proof trees and the rule checker for ILms and ILmPs.

Both systems share the initial sequents, weakening, the propositional rules
and cut. ILms adds the GL box rule and the plain |> rule; ILmPs replaces both
by the persistence rule, whose conclusion has only |>-formulas on the left
and whose left premise repeats the conclusion's diagonal formula.

Sequents never contain the [] constructor: []A is written (~A) |> false.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from .errors import DerivationError, PreconditionError
from .syntax import (BOT, And, Bot, Formula, Imp, Neg, Or, Rhd, expand_box, has_box,
                     parse)

logger = logging.getLogger(__name__)


class System(str, Enum):
    ILMS = "ILms"
    ILMPS = "ILmPs"


class Rule(str, Enum):
    INIT = "Init"
    INIT_BOT = "InitBot"
    WL = "WL"
    WR = "WR"
    NEG_L = "NegL"
    NEG_R = "NegR"
    AND_L = "AndL"
    AND_R = "AndR"
    OR_L = "OrL"
    OR_R = "OrR"
    IMP_L = "ImpL"
    IMP_R = "ImpR"
    CUT = "Cut"
    BOX = "BoxRule"
    RHD = "Rhd"
    RHD_P = "RhdP"


LOGICAL_RULES = frozenset({Rule.WL, Rule.WR, Rule.NEG_L, Rule.NEG_R, Rule.AND_L, Rule.AND_R,
                           Rule.OR_L, Rule.OR_R, Rule.IMP_L, Rule.IMP_R})
SYSTEM_RULES = {
    System.ILMS: LOGICAL_RULES | {Rule.INIT, Rule.INIT_BOT, Rule.CUT, Rule.BOX, Rule.RHD},
    System.ILMPS: LOGICAL_RULES | {Rule.INIT, Rule.INIT_BOT, Rule.CUT, Rule.RHD_P},
}


def _sorted(formulas: Iterable[Formula]) -> List[Formula]:
    return sorted(formulas, key=lambda f: f.text)


@dataclass(frozen=True)
class Sequent:
    """Gamma => Delta over finite sets of formulas."""

    ant: FrozenSet[Formula]
    suc: FrozenSet[Formula]

    @classmethod
    def of(cls, ant: Iterable[Formula] = (), suc: Iterable[Formula] = ()) -> "Sequent":
        return cls(frozenset(ant), frozenset(suc))

    def issubset(self, other: "Sequent") -> bool:
        return self.ant <= other.ant and self.suc <= other.suc

    def union(self, other: "Sequent") -> "Sequent":
        return Sequent(self.ant | other.ant, self.suc | other.suc)

    def formulas(self) -> FrozenSet[Formula]:
        return self.ant | self.suc

    def __str__(self) -> str:
        left = ", ".join(f.text for f in _sorted(self.ant))
        right = ", ".join(f.text for f in _sorted(self.suc))
        return f"{left} => {right}".strip()


def parse_sequent(text: str) -> Sequent:
    """Parse ``"A, B => C"``; boxes are expanded to the |> normal form."""
    if text.count("=>") != 1:
        raise PreconditionError(f"a sequent needs exactly one '=>': {text!r}")
    left, right = text.split("=>")

    def side(part: str) -> List[Formula]:
        return [expand_box(parse(item)) for item in part.split(",") if item.strip()]

    return Sequent.of(side(left), side(right))


@dataclass(frozen=True, eq=False)
class Node:
    """
    One rule application.

    principals holds the principal formula of a logical rule or weakening,
    the principal |>-formulas of a modal rule (in the order of the side
    premises), or the boxed context of the box rule.
    """

    rule: Rule
    sequent: Sequent
    premises: Tuple["Node", ...] = ()
    principals: Tuple[Formula, ...] = ()
    diagonal: Optional[Formula] = None
    cut_formula: Optional[Formula] = None

    @cached_property
    def height(self) -> int:
        """Number of nodes on the longest path to a leaf."""
        return 1 + max((p.height for p in self.premises), default=0)

    @cached_property
    def size(self) -> int:
        return 1 + sum(p.size for p in self.premises)

    @cached_property
    def has_cut(self) -> bool:
        return self.rule is Rule.CUT or any(p.has_cut for p in self.premises)

    def iter_nodes(self) -> Iterator["Node"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.premises))


@dataclass(frozen=True)
class Derivation:
    system: System
    root: Node

    @property
    def endsequent(self) -> Sequent:
        return self.root.sequent

    @property
    def height(self) -> int:
        return self.root.height

    @property
    def size(self) -> int:
        return self.root.size


# ---------------------------------------------------------------- rule shapes

_EMPTY: FrozenSet[Formula] = frozenset()

Shape = Tuple[FrozenSet[Formula], FrozenSet[Formula],
              Tuple[Tuple[FrozenSet[Formula], FrozenSet[Formula]], ...]]


def rule_shape(rule: Rule, f: Formula, variant: int = 0) -> Optional[Shape]:
    """
    Active formulas of a weakening or propositional rule with principal f.

    Returns (conclusion-left, conclusion-right, ((premise-left, premise-right), ...))
    or None when f does not fit the rule. variant selects the component for
    the one-premise conjunction-left and disjunction-right rules.
    """
    one = frozenset((f,))
    if rule is Rule.WL:
        return one, _EMPTY, ((_EMPTY, _EMPTY),)
    if rule is Rule.WR:
        return _EMPTY, one, ((_EMPTY, _EMPTY),)
    if rule is Rule.NEG_L and isinstance(f, Neg):
        return one, _EMPTY, ((_EMPTY, frozenset((f.sub,))),)
    if rule is Rule.NEG_R and isinstance(f, Neg):
        return _EMPTY, one, ((frozenset((f.sub,)), _EMPTY),)
    if rule is Rule.AND_L and isinstance(f, And):
        part = f.left if variant == 0 else f.right
        return one, _EMPTY, ((frozenset((part,)), _EMPTY),)
    if rule is Rule.AND_R and isinstance(f, And):
        return _EMPTY, one, ((_EMPTY, frozenset((f.left,))), (_EMPTY, frozenset((f.right,))))
    if rule is Rule.OR_L and isinstance(f, Or):
        return one, _EMPTY, ((frozenset((f.left,)), _EMPTY), (frozenset((f.right,)), _EMPTY))
    if rule is Rule.OR_R and isinstance(f, Or):
        part = f.left if variant == 0 else f.right
        return _EMPTY, one, ((_EMPTY, frozenset((part,))),)
    if rule is Rule.IMP_L and isinstance(f, Imp):
        return one, _EMPTY, ((_EMPTY, frozenset((f.left,))), (frozenset((f.right,)), _EMPTY))
    if rule is Rule.IMP_R and isinstance(f, Imp):
        return _EMPTY, one, ((frozenset((f.left,)), frozenset((f.right,))),)
    return None


def variants(rule: Rule) -> Tuple[int, ...]:
    return (0, 1) if rule in (Rule.AND_L, Rule.OR_R) else (0,)


def instantiate(rule: Rule, f: Formula, gamma: Iterable[Formula], delta: Iterable[Formula],
                variant: int = 0) -> Tuple[Sequent, List[Sequent]]:
    """Conclusion and premises of a propositional rule with context gamma => delta."""
    shape = rule_shape(rule, f, variant)
    if shape is None:
        raise DerivationError(f"{f} cannot be principal in {rule.value}")
    gamma, delta = frozenset(gamma), frozenset(delta)
    lc, rc, parts = shape
    conclusion = Sequent(gamma | lc, delta | rc)
    return conclusion, [Sequent(gamma | left, delta | right) for left, right in parts]


def _fits_shape(shape: Shape, conclusion: Sequent, premises: Sequence[Sequent]) -> bool:
    lc, rc, parts = shape
    if len(parts) != len(premises):
        return False
    gamma = conclusion.ant - lc
    delta = conclusion.suc - rc
    for (left, right), premise in zip(parts, premises):
        gamma = gamma | (premise.ant - left)
        delta = delta | (premise.suc - right)
    if conclusion != Sequent(gamma | lc, delta | rc):
        return False
    return all(premise == Sequent(gamma | left, delta | right)
               for (left, right), premise in zip(parts, premises))


# ---------------------------------------------------------------- building

def init(f: Formula) -> Node:
    return Node(Rule.INIT, Sequent.of((f,), (f,)))


def init_bot() -> Node:
    return Node(Rule.INIT_BOT, Sequent.of((BOT,), ()))


def weaken(node: Node, target: Sequent) -> Node:
    """Extend node to target by single-formula weakenings, left side first."""
    if node.sequent == target:
        return node
    if not node.sequent.issubset(target):
        raise DerivationError(f"cannot weaken {node.sequent} to {target}")
    current = node
    ant = set(node.sequent.ant)
    for f in _sorted(target.ant - node.sequent.ant):
        ant.add(f)
        current = Node(Rule.WL, Sequent(frozenset(ant), node.sequent.suc), (current,), (f,))
    suc = set(node.sequent.suc)
    for f in _sorted(target.suc - node.sequent.suc):
        suc.add(f)
        current = Node(Rule.WR, Sequent(target.ant, frozenset(suc)), (current,), (f,))
    return current


def apply_rule(rule: Rule, f: Formula, premises: Sequence[Node], target: Optional[Sequent],
               variant: int = 0) -> Node:
    """
    Apply a propositional rule to proofs of (possibly smaller) premises.

    The context is the least one that absorbs every given premise; the result
    is weakened up to target. A premise whose sequent already fits inside
    target is weakened directly instead. Without a target the bare rule
    instance is returned.
    """
    if target is not None:
        for premise in premises:
            if premise.sequent.issubset(target):
                return weaken(premise, target)
    shape = rule_shape(rule, f, variant)
    if shape is None:
        raise DerivationError(f"{f} cannot be principal in {rule.value}")
    lc, rc, parts = shape
    if len(parts) != len(premises):
        raise DerivationError(f"{rule.value} needs {len(parts)} premises")
    gamma: FrozenSet[Formula] = _EMPTY
    delta: FrozenSet[Formula] = _EMPTY
    for (left, right), premise in zip(parts, premises):
        gamma = gamma | (premise.sequent.ant - left)
        delta = delta | (premise.sequent.suc - right)
    conclusion, required = instantiate(rule, f, gamma, delta, variant)
    children = tuple(weaken(p, s) for p, s in zip(premises, required))
    node = Node(rule, conclusion, children, (f,))
    return node if target is None else weaken(node, target)


def rule_variant(node: Node) -> int:
    """Which component a one-premise conjunction-left or disjunction-right step used."""
    if node.rule not in (Rule.AND_L, Rule.OR_R):
        return 0
    f = node.principals[0]
    premise = node.premises[0].sequent
    side = premise.ant if node.rule is Rule.AND_L else premise.suc
    return 0 if f.left in side else 1


def cut(left: Node, right: Node, f: Formula, target: Optional[Sequent] = None) -> Node:
    """Cut on f; the conclusion is weakened to target when one is given."""
    if f not in left.sequent.suc or f not in right.sequent.ant:
        raise PreconditionError(f"cut formula {f} must be on the right of the left premise "
                                f"and on the left of the right premise")
    conclusion = Sequent(left.sequent.ant | (right.sequent.ant - {f}),
                         (left.sequent.suc - {f}) | right.sequent.suc)
    node = Node(Rule.CUT, conclusion, (left, right), cut_formula=f)
    return node if target is None else weaken(node, target)


def rhd_p(premise: Node, sides: Sequence[Node], principals: Sequence[Formula],
          diagonal: Formula, target: Sequent, omega: Iterable[Formula] = ()) -> Node:
    """
    The persistence rule applied to proofs that fit inside its premises.

    The non-principal context is everything the left premise needs beyond the
    principal formulas, the diagonal and its left argument, plus omega.
    """
    if not isinstance(diagonal, Rhd):
        raise DerivationError(f"diagonal {diagonal} is not a |>-formula")
    principals = tuple(principals)
    extra = premise.sequent.ant - {diagonal, diagonal.left} - set(principals)
    context = frozenset(extra) | frozenset(omega)
    for f in context:
        if not isinstance(f, Rhd):
            raise DerivationError(f"left premise carries non-|> formula {f}")
    ant = context | frozenset(principals)
    required = Sequent(ant | {diagonal, diagonal.left}, frozenset(p.left for p in principals))
    children = [weaken(premise, required)]
    for principal, side in zip(principals, sides):
        children.append(weaken(side, Sequent.of((principal.right,), (diagonal.right,))))
    node = Node(Rule.RHD_P, Sequent(ant, frozenset((diagonal,))), tuple(children),
                principals, diagonal)
    return weaken(node, target)


def rhd_plain(premise: Node, sides: Sequence[Node], principals: Sequence[Formula],
              diagonal: Formula, target: Sequent) -> Node:
    """The ILms |> rule; the left premise must fit inside A => {X_i}."""
    principals = tuple(principals)
    required = Sequent.of((diagonal.left,), (p.left for p in principals))
    children = [weaken(premise, required)]
    for principal, side in zip(principals, sides):
        children.append(weaken(side, Sequent.of((principal.right,), (diagonal.right,))))
    node = Node(Rule.RHD, Sequent.of(principals, (diagonal,)), tuple(children),
                principals, diagonal)
    return weaken(node, target)


def boxed(f: Formula) -> bool:
    """f is []X in normal form, i.e. (~X) |> false."""
    return isinstance(f, Rhd) and isinstance(f.left, Neg) and isinstance(f.right, Bot)


def box_rule(premise: Node, context: Sequence[Formula], diagonal: Formula,
             target: Sequent) -> Node:
    """The GL rule: from []G, G, []A => A infer []G => []A."""
    context = tuple(context)
    body = diagonal.left.sub
    required = Sequent(frozenset(context) | {c.left.sub for c in context} | {diagonal},
                       frozenset((body,)))
    node = Node(Rule.BOX, Sequent.of(context, (diagonal,)), (weaken(premise, required),),
                context, diagonal)
    return weaken(node, target)


# ---------------------------------------------------------------- checking

@dataclass(frozen=True)
class Violation:
    path: Tuple[int, ...]
    rule: Rule
    sequent: Sequent
    message: str

    def __str__(self) -> str:
        where = ".".join(str(i) for i in self.path) or "root"
        return f"{where} ({self.rule.value}: {self.sequent}): {self.message}"


@dataclass(frozen=True)
class CheckReport:
    violation: Optional[Violation] = None
    nodes: int = 0

    @property
    def ok(self) -> bool:
        return self.violation is None

    def __bool__(self) -> bool:
        return self.ok


def _check_rhd_p(node: Node, premises: List[Sequent]) -> Optional[str]:
    diagonal = node.diagonal
    if not isinstance(diagonal, Rhd):
        return "diagonal is not a |>-formula"
    if node.sequent.suc != frozenset((diagonal,)):
        return "succedent must be exactly the diagonal formula"
    for f in node.sequent.ant:
        if not isinstance(f, Rhd):
            return f"antecedent formula {f} is not a |>-formula"
    for p in node.principals:
        if not isinstance(p, Rhd) or p not in node.sequent.ant:
            return f"principal {p} not in the antecedent"
    if len(premises) != 1 + len(node.principals):
        return "one left premise and one side premise per principal formula expected"
    left = premises[0]
    if diagonal not in left.ant:
        return "diagonal missing"
    expected = Sequent(node.sequent.ant | {diagonal, diagonal.left},
                       frozenset(p.left for p in node.principals))
    if left != expected:
        return f"left premise should be {expected}"
    return _check_sides(node, premises[1:])


def _check_sides(node: Node, sides: List[Sequent]) -> Optional[str]:
    for principal, side in zip(node.principals, sides):
        expected = Sequent.of((principal.right,), (node.diagonal.right,))
        if side != expected:
            return f"side premise should be {expected}"
    return None


def _check_rhd(node: Node, premises: List[Sequent]) -> Optional[str]:
    diagonal = node.diagonal
    if not isinstance(diagonal, Rhd):
        return "diagonal is not a |>-formula"
    if any(not isinstance(p, Rhd) for p in node.principals):
        return "principal formulas must be |>-formulas"
    if node.sequent != Sequent.of(node.principals, (diagonal,)):
        return "conclusion must be exactly the principals => the diagonal"
    if len(premises) != 1 + len(node.principals):
        return "one left premise and one side premise per principal formula expected"
    expected = Sequent.of((diagonal.left,), (p.left for p in node.principals))
    if premises[0] != expected:
        return f"left premise should be {expected}"
    return _check_sides(node, premises[1:])


def _check_box(node: Node, premises: List[Sequent]) -> Optional[str]:
    diagonal = node.diagonal
    if not boxed(diagonal) or node.sequent.suc != frozenset((diagonal,)):
        return "succedent must be a single boxed formula"
    if any(not boxed(f) for f in node.sequent.ant):
        return "antecedent must consist of boxed formulas"
    if len(premises) != 1:
        return "exactly one premise expected"
    ant = node.sequent.ant
    expected = Sequent(ant | {f.left.sub for f in ant} | {diagonal},
                       frozenset((diagonal.left.sub,)))
    if premises[0] != expected:
        return f"premise should be {expected}"
    return None


def _check_cut(node: Node, premises: List[Sequent]) -> Optional[str]:
    f = node.cut_formula
    if f is None or len(premises) != 2:
        return "cut needs a cut formula and two premises"
    left, right = premises
    if f not in left.suc:
        return f"cut formula {f} missing on the right of the left premise"
    if f not in right.ant:
        return f"cut formula {f} missing on the left of the right premise"
    ants = {left.ant | right.ant, left.ant | (right.ant - {f})}
    sucs = {left.suc | right.suc, (left.suc - {f}) | right.suc}
    if node.sequent.ant not in ants or node.sequent.suc not in sucs:
        return "conclusion does not match the cut shape"
    return None


def check_node(node: Node, system: System) -> Optional[str]:
    """Check one rule instance against its premises; return a message or None."""
    rule = node.rule
    if rule not in SYSTEM_RULES[system]:
        return f"rule {rule.value} does not belong to {system.value}"
    for f in node.sequent.formulas():
        if has_box(f):
            return f"{f} contains the [] constructor"
    premises = [p.sequent for p in node.premises]
    if rule is Rule.INIT:
        if premises or len(node.sequent.ant) != 1 or node.sequent.ant != node.sequent.suc:
            return "initial sequent must be A => A"
        return None
    if rule is Rule.INIT_BOT:
        if premises or node.sequent != Sequent.of((BOT,), ()):
            return "initial sequent must be false =>"
        return None
    if rule is Rule.CUT:
        return _check_cut(node, premises)
    if rule is Rule.RHD_P:
        return _check_rhd_p(node, premises)
    if rule is Rule.RHD:
        return _check_rhd(node, premises)
    if rule is Rule.BOX:
        return _check_box(node, premises)
    if len(node.principals) != 1:
        return "a logical rule has exactly one principal formula"
    f = node.principals[0]
    for variant in variants(rule):
        shape = rule_shape(rule, f, variant)
        if shape is None:
            return f"{f} cannot be principal in {rule.value}"
        if _fits_shape(shape, node.sequent, premises):
            return None
    return "premises and conclusion do not match the rule"


def check(derivation: Derivation) -> CheckReport:
    """Validate every node; the report names the first offending node."""
    count = 0
    stack: List[Tuple[Node, Tuple[int, ...]]] = [(derivation.root, ())]
    seen: Dict[int, bool] = {}
    while stack:
        node, path = stack.pop()
        if id(node) in seen:
            continue
        seen[id(node)] = True
        count += 1
        message = check_node(node, derivation.system)
        if message is not None:
            logger.debug("check failed at %s: %s", path, message)
            return CheckReport(Violation(path, node.rule, node.sequent, message), count)
        for index in reversed(range(len(node.premises))):
            stack.append((node.premises[index], path + (index,)))
    return CheckReport(None, count)


def is_cut_free(derivation: Derivation) -> bool:
    return not derivation.root.has_cut


def cuts(derivation: Derivation) -> Iterator[Node]:
    """Cut nodes, root first; a shared subproof is visited once per occurrence."""
    return (node for node in derivation.root.iter_nodes() if node.rule is Rule.CUT)


def compose_cut(left: Derivation, right: Derivation, cut_formula: Formula) -> Derivation:
    """Join two derivations with a cut on cut_formula."""
    if left.system != right.system:
        raise PreconditionError("derivations belong to different systems")
    return Derivation(left.system, cut(left.root, right.root, cut_formula))

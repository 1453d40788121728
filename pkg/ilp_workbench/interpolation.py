#!/usr/bin/env python3
"""
Craig interpolants read off cut-free proofs (Maehara's method).

A separation splits both sides of a sequent into a left and a right block.
Walking the proof from the leaves, each sequent gets an interpolant C with
proofs of (left block => C) and (C, right block =>); the modal rules combine
the interpolant of the left premise with those of the side premises whose
principal formula lies in the other block.
"""

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Tuple, Union

from .calculus import (Derivation, Node, Rule, Sequent, System, apply_rule, box_rule, check,
                       init_bot, rhd_p, rhd_plain, rule_variant, weaken)
from .config import DEFAULT_CONFIG
from .errors import DerivationError, PreconditionError, VerificationError
from .search import NotProvable, decide, prove
from .syntax import (BOT, TOP, And, Formula, Imp, Neg, Or, Rhd, big_or, expand_box,
                     variables)

logger = logging.getLogger(__name__)

_LEFT_RULES = frozenset({Rule.WL, Rule.NEG_L, Rule.AND_L, Rule.OR_L, Rule.IMP_L})
_EMPTY: FrozenSet[Formula] = frozenset()


@dataclass(frozen=True)
class Separation:
    left_ant: FrozenSet[Formula]
    left_suc: FrozenSet[Formula]
    right_ant: FrozenSet[Formula]
    right_suc: FrozenSet[Formula]

    @classmethod
    def split(cls, sequent: Sequent, left_ant: Iterable[Formula] = (),
              left_suc: Iterable[Formula] = ()) -> "Separation":
        """Everything not named for the left block goes to the right block."""
        ant = sequent.ant & frozenset(left_ant)
        suc = sequent.suc & frozenset(left_suc)
        return cls(ant, suc, sequent.ant - ant, sequent.suc - suc)

    def validate(self, sequent: Sequent) -> None:
        if self.left_ant & self.right_ant or self.left_suc & self.right_suc:
            raise PreconditionError("separation blocks overlap")
        if (self.left_ant | self.right_ant != sequent.ant
                or self.left_suc | self.right_suc != sequent.suc):
            raise PreconditionError(f"separation does not cover {sequent}")

    def left_sequent(self, c: Formula) -> Sequent:
        return Sequent(self.left_ant, self.left_suc | {c})

    def right_sequent(self, c: Formula) -> Sequent:
        return Sequent(self.right_ant | {c}, self.right_suc)

    def shared_variables(self) -> FrozenSet[str]:
        def names(formulas):
            return frozenset().union(*(variables(f) for f in formulas))

        return names(self.left_ant | self.left_suc) & names(self.right_ant | self.right_suc)


@dataclass(frozen=True)
class Interpolant:
    formula: Formula
    proof_left: Derivation
    proof_right: Derivation
    separation: Separation


# interpolant, proof of the left part, proof of the right part
_Triple = Tuple[Formula, Node, Node]


def _contains(disjunction: Formula, item: Formula) -> bool:
    if disjunction == item:
        return True
    return isinstance(disjunction, Or) and (_contains(disjunction.left, item)
                                            or _contains(disjunction.right, item))


def _into_disjunction(node: Node, item: Formula, disjunction: Formula) -> Node:
    """From a proof with item on the right, one with the disjunction there."""
    if item == disjunction:
        return node
    if not isinstance(disjunction, Or) or not _contains(disjunction, item):
        raise DerivationError(f"{item} is not a disjunct of {disjunction}")
    variant = 0 if _contains(disjunction.left, item) else 1
    inner = _into_disjunction(node, item, (disjunction.left, disjunction.right)[variant])
    return apply_rule(Rule.OR_R, disjunction, [inner], None, variant)


def _from_disjunction(proofs: Dict[Formula, Node], disjunction: Formula) -> Node:
    """From proofs with each disjunct on the left, one with the disjunction there."""
    if disjunction in proofs:
        return proofs[disjunction]
    if disjunction == BOT:
        return init_bot()
    if not isinstance(disjunction, Or):
        raise DerivationError(f"no proof for disjunct {disjunction}")
    parts = [_from_disjunction(proofs, disjunction.left),
             _from_disjunction(proofs, disjunction.right)]
    return apply_rule(Rule.OR_L, disjunction, parts, None)


def _negate(rule: Rule, f: Formula, node: Node) -> Node:
    return apply_rule(rule, Neg(f), [node], None)


def _box(f: Formula) -> Formula:
    return Rhd(Neg(f), BOT)


class _Extractor:

    def __init__(self):
        self._memo: Dict[Tuple[int, Separation], Tuple[Node, _Triple]] = {}

    def extract(self, node: Node, sep: Separation) -> _Triple:
        key = (id(node), sep)
        hit = self._memo.get(key)
        if hit is not None:
            return hit[1]
        rule = node.rule
        if rule in (Rule.INIT, Rule.INIT_BOT):
            result = self._initial(node, sep)
        elif rule in (Rule.WL, Rule.WR):
            premise = node.premises[0]
            result = self.extract(premise, Separation.split(premise.sequent, sep.left_ant,
                                                            sep.left_suc))
        elif rule in (Rule.RHD_P, Rule.RHD):
            result = self._modal(node, sep)
        elif rule is Rule.BOX:
            result = self._box_rule(node, sep)
        elif rule is Rule.CUT:
            raise PreconditionError("interpolants are read off cut-free proofs only")
        else:
            result = self._logical(node, sep)
        self._memo[key] = (node, result)
        return result

    def _initial(self, node: Node, sep: Separation) -> _Triple:
        if node.rule is Rule.INIT_BOT:
            if BOT in sep.left_ant:
                return BOT, node, node
            return TOP, _negate(Rule.NEG_R, BOT, node), node
        f = next(iter(node.sequent.ant))
        ant_left, suc_left = f in sep.left_ant, f in sep.left_suc
        if ant_left and suc_left:
            return BOT, node, init_bot()
        if not ant_left and not suc_left:
            return TOP, _negate(Rule.NEG_R, BOT, init_bot()), node
        if ant_left:
            return f, node, node
        return Neg(f), _negate(Rule.NEG_R, f, node), _negate(Rule.NEG_L, f, node)

    def _logical(self, node: Node, sep: Separation) -> _Triple:
        rule, g = node.rule, node.principals[0]
        on_left = g in (sep.left_ant if rule in _LEFT_RULES else sep.left_suc)
        variant = rule_variant(node)
        results = []
        for premise in node.premises:
            left_ant, left_suc = sep.left_ant, sep.left_suc
            if on_left:
                left_ant = left_ant | (premise.sequent.ant - node.sequent.ant)
                left_suc = left_suc | (premise.sequent.suc - node.sequent.suc)
            results.append(self.extract(premise, Separation.split(premise.sequent, left_ant,
                                                                   left_suc)))
        if len(results) == 1:
            c, left, right = results[0]
            if on_left:
                return c, apply_rule(rule, g, [left], None, variant), right
            return c, left, apply_rule(rule, g, [right], None, variant)
        (c1, left1, right1), (c2, left2, right2) = results
        if on_left:
            c = Or(c1, c2)
            lifted = [apply_rule(Rule.OR_R, c, [left1], None, 0),
                      apply_rule(Rule.OR_R, c, [left2], None, 1)]
            return (c, apply_rule(rule, g, lifted, None, variant),
                    apply_rule(Rule.OR_L, c, [right1, right2], None))
        c = And(c1, c2)
        lifted = [apply_rule(Rule.AND_L, c, [right1], None, 0),
                  apply_rule(Rule.AND_L, c, [right2], None, 1)]
        return (c, apply_rule(Rule.AND_R, c, [left1, left2], None),
                apply_rule(rule, g, lifted, None, variant))

    def _modal(self, node: Node, sep: Separation) -> _Triple:
        """The persistence rule of ILmPs and the |> rule of ILms."""
        diagonal = node.diagonal
        on_left = diagonal in sep.left_suc
        premise, sides = node.premises[0], node.premises[1:]
        plain = node.rule is Rule.RHD
        if plain:
            left_ant = premise.sequent.ant if on_left else _EMPTY
        else:
            fresh = premise.sequent.ant - node.sequent.ant
            left_ant = sep.left_ant | (fresh if on_left else _EMPTY)
        placed = Separation.split(
            premise.sequent, left_ant,
            {p.left for p in node.principals if p in sep.left_ant})
        d, d_left, d_right = self.extract(premise, placed)

        own: List[Tuple[Formula, Node]] = []
        other: List[Tuple[Formula, Node]] = []
        for principal, side in zip(node.principals, sides):
            (own if (principal in sep.left_ant) == on_left else other).append((principal, side))


        def build(proof, side_proofs, principals, diag, context):
            if plain:
                return rhd_plain(proof, side_proofs, principals, diag,
                                 Sequent.of(principals, (diag,)))
            return rhd_p(proof, side_proofs, principals, diag,
                         Sequent(frozenset(context) | frozenset(principals),
                                 frozenset((diag,))))

        if on_left:
            # C = ~(D |> E') with E' the disjunction of the negated side interpolants
            parts = [self.extract(s, Separation.split(s.sequent, (), (diagonal.right,)))
                     for _, s in other]
            negated = [Neg(e) for e, _, _ in parts]
            e_prime = big_or(negated)
            to_b = _from_disjunction({n: _negate(Rule.NEG_L, e, l)
                                      for n, (e, l, _) in zip(negated, parts)}, e_prime)
            d_rhd = Rhd(d, e_prime)
            c = Neg(d_rhd)
            left = build(d_left, [s for _, s in own] + [to_b],
                         [p for p, _ in own] + [d_rhd], diagonal, sep.left_ant)
            w_sides = [_into_disjunction(_negate(Rule.NEG_R, e, r), n, e_prime)
                       for n, (e, _, r) in zip(negated, parts)]
            right = build(d_right, w_sides, [p for p, _ in other], d_rhd, sep.right_ant)
            return c, apply_rule(Rule.NEG_R, c, [left], None), apply_rule(Rule.NEG_L, c, [right],
                                                                         None)

        # C = (~D) |> E' with E' the disjunction of the side interpolants
        parts = [self.extract(s, Separation.split(s.sequent, (p.right,), ()))
                 for p, s in other]
        e_prime = big_or(e for e, _, _ in parts)
        c = Rhd(Neg(d), e_prime)
        y_sides = [_into_disjunction(l, e, e_prime) for e, l, _ in parts]
        left = build(_negate(Rule.NEG_L, d, d_left), y_sides, [p for p, _ in other], c,
                     sep.left_ant)
        to_b = _from_disjunction({e: r for e, _, r in parts}, e_prime)
        right = build(_negate(Rule.NEG_R, d, d_right), [s for _, s in own] + [to_b],
                      [p for p, _ in own] + [c], diagonal, sep.right_ant)
        return c, left, right

    def _box_rule(self, node: Node, sep: Separation) -> _Triple:
        diagonal = node.diagonal
        on_left = diagonal in sep.left_suc
        context_left = [f for f in node.principals if f in sep.left_ant]
        context_right = [f for f in node.principals if f in sep.right_ant]
        premise = node.premises[0]
        placed_left = set(sep.left_ant) | {f.left.sub for f in context_left}
        if on_left:
            placed_left.add(diagonal)
        placed_left -= sep.right_ant | {f.left.sub for f in context_right}
        placed = Separation.split(premise.sequent, placed_left,
                                  (diagonal.left.sub,) if on_left else ())
        d, d_left, d_right = self.extract(premise, placed)

        def build(proof, context, diag):
            return box_rule(proof, context, diag, Sequent.of(context, (diag,)))

        if on_left:
            boxed_neg = _box(Neg(d))
            c = Neg(boxed_neg)
            left = build(_negate(Rule.NEG_L, d, d_left), context_left + [boxed_neg], diagonal)
            right = build(_negate(Rule.NEG_R, d, d_right), context_right, boxed_neg)
            return c, apply_rule(Rule.NEG_R, c, [left], None), apply_rule(Rule.NEG_L, c, [right],
                                                                         None)
        c = _box(d)
        return c, build(d_left, context_left, c), build(d_right, context_right + [c], diagonal)


def maehara(derivation: Derivation, sep: Separation) -> Interpolant:
    """Interpolant of a separation of the endsequent of a cut-free derivation."""
    sep.validate(derivation.endsequent)
    if derivation.root.has_cut:
        raise PreconditionError("interpolants are read off cut-free proofs only")
    c, left, right = _Extractor().extract(derivation.root, sep)
    left = weaken(left, sep.left_sequent(c))
    right = weaken(right, sep.right_sequent(c))
    return Interpolant(c, Derivation(derivation.system, left),
                       Derivation(derivation.system, right), sep)


def verify_interpolant(interpolant: Interpolant) -> None:
    """Raise VerificationError unless both proofs check and C only uses shared variables."""
    sep, c = interpolant.separation, interpolant.formula
    for derivation, expected in ((interpolant.proof_left, sep.left_sequent(c)),
                                 (interpolant.proof_right, sep.right_sequent(c))):
        report = check(derivation)
        if not report:
            raise VerificationError(f"interpolant proof rejected: {report.violation}")
        if derivation.endsequent != expected:
            raise VerificationError(f"interpolant proof ends in {derivation.endsequent}, "
                                    f"expected {expected}")
    extra = variables(c) - sep.shared_variables()
    if extra:
        raise VerificationError(f"interpolant {c} uses unshared variables {sorted(extra)}")


def interpolate(a: Formula, b: Formula, system: System = System.ILMPS,
                budget: int = DEFAULT_CONFIG.budget,
                confirm: bool = False) -> Union[Interpolant, NotProvable]:
    """
    Interpolant for a -> b, or the failed search when the implication is not
    a theorem. With confirm, a -> C and C -> b are re-decided independently.
    """
    a, b = expand_box(a), expand_box(b)
    goal = Sequent.of((a,), (b,))
    verdict = prove(system, goal, budget)
    if not verdict:
        logger.info("%s -> %s is not a theorem of %s", a, b, system.value)
        return verdict
    result = maehara(verdict.derivation, Separation.split(goal, (a,), ()))
    verify_interpolant(result)
    if confirm:
        for f in (Imp(a, result.formula), Imp(result.formula, b)):
            if not decide(f, system, budget):
                raise VerificationError(f"{f} is not provable")
    logger.info("interpolant of %s -> %s: %s", a, b, result.formula)
    return result


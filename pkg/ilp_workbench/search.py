#!/usr/bin/env python3
"""
Backward cut-free proof search for ILmPs and ILms, and an independent
fixpoint oracle.

The search applies invertible propositional steps (principal formula removed,
non-branching rules first) until only variables, false and |>-formulas remain.
It then tries each |>-formula of the succedent as the diagonal of a modal
step. For the persistence rule the whole |>-part of the antecedent is kept and
every antecedent formula X |> Y whose side premise Y => B is provable becomes
principal; weakening makes this choice complete. Every modal step adds the
diagonal to the |>-part of the antecedent, so no branch revisits a sequent.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Set, Tuple, Union

from .calculus import (Derivation, Node, Rule, Sequent, System, apply_rule, box_rule, boxed,
                       check, cut, init, init_bot, rhd_p, rhd_plain, weaken)
from .config import DEFAULT_CONFIG
from .errors import BudgetExceeded, PreconditionError, VerificationError
from .syntax import BOT, And, Formula, Imp, Neg, Or, Rhd, expand_box, has_box

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Provable:
    derivation: Derivation
    explored: int = 0

    provable = True

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class NotProvable:
    """Search certificate: the saturated leaf where every option failed."""

    leaf: Sequent
    explored: int = 0

    provable = False

    def __bool__(self) -> bool:
        return False


Verdict = Union[Provable, NotProvable]


class SearchStats(NamedTuple):
    explored: int
    memo_hits: int
    cutoffs: int

# principal-selection order: non-branching rules first
_LEFT_RULES = {Neg: (Rule.NEG_L, 0), And: (Rule.AND_L, 0), Or: (Rule.OR_L, 1),
               Imp: (Rule.IMP_L, 1)}
_RIGHT_RULES = {Neg: (Rule.NEG_R, 0), Or: (Rule.OR_R, 0), Imp: (Rule.IMP_R, 0),
                And: (Rule.AND_R, 1)}


def _pick_principal(goal: Sequent) -> Optional[Tuple[Rule, Formula, bool]]:
    best = None
    for left, side, table in ((True, goal.ant, _LEFT_RULES), (False, goal.suc, _RIGHT_RULES)):
        for f in side:
            entry = table.get(type(f))
            if entry is None:
                continue
            key = (entry[1], f.text, not left)
            if best is None or key < best[0]:
                best = (key, entry[0], f, left)
    if best is None:
        return None
    return best[1], best[2], best[3]


def _check_goal(goal: Sequent):
    for f in goal.formulas():
        if has_box(f):
            raise PreconditionError(f"goal formula {f} is not in |> normal form")


class Prover:
    """
    Proof search with a sequent-keyed memo shared across calls.

    Args:
        system: ILmPs (decision procedure) or ILms (sound cut-free search)
        budget: Maximum number of sequents explored by one call to prove
        memo_limit: Memo size at which both memo tables are cleared
    """

    def __init__(self, system: System = System.ILMPS, budget: int = DEFAULT_CONFIG.budget,
                 memo_limit: int = DEFAULT_CONFIG.memo_limit):
        self.system = System(system)
        self.budget = budget
        self.memo_limit = memo_limit
        self._proved: Dict[Sequent, Node] = {}
        self._failed: Dict[Sequent, Sequent] = {}
        self._cutoffs = 0
        self.explored = 0
        self.memo_hits = 0

    def prove(self, goal: Sequent) -> Verdict:
        _check_goal(goal)
        self.explored = 0
        node = self._search(goal, set())
        logger.debug("%s search of %s: %d sequents explored, %d memo hits",
                     self.system.value, goal, self.explored, self.memo_hits)
        if node is None:
            return NotProvable(self._failed.get(goal, goal), self.explored)
        return Provable(Derivation(self.system, node), self.explored)

    def provable(self, goal: Sequent) -> bool:
        return self.prove(goal).provable

    @property
    def stats(self) -> SearchStats:
        """Counters of the last call; memo hits and cutoffs accumulate over the prover's life."""
        return SearchStats(self.explored, self.memo_hits, self._cutoffs)

    # -------------------------------------------------------------- internals

    def _fail(self, goal: Sequent, leaf: Sequent, cutoffs_before: int) -> None:
        if self._cutoffs == cutoffs_before:
            self._trim_memo()
            self._failed[goal] = leaf
        return None

    def _search(self, goal: Sequent, ancestors: Set[Sequent]) -> Optional[Node]:
        if goal in self._proved:
            self.memo_hits += 1
            return self._proved[goal]
        if goal in self._failed:
            self.memo_hits += 1
            return None
        if goal in ancestors:
            self._cutoffs += 1
            return None
        self.explored += 1
        if self.explored > self.budget:
            raise BudgetExceeded("search", self.budget)
        before = self._cutoffs
        node = self._axiom(goal)
        if node is None:
            ancestors.add(goal)
            try:
                picked = _pick_principal(goal)
                if picked is not None:
                    node, leaf = self._propositional(goal, picked, ancestors)
                else:
                    node, leaf = self._modal(goal, ancestors), goal
            finally:
                ancestors.discard(goal)
            if node is None:
                return self._fail(goal, leaf, before)
        self._trim_memo()
        self._proved[goal] = node
        return node

    def _trim_memo(self) -> None:
        if len(self._proved) + len(self._failed) >= self.memo_limit:
            logger.debug("memo limit %d reached, clearing %d proved and %d failed sequents",
                         self.memo_limit, len(self._proved), len(self._failed))
            self._proved.clear()
            self._failed.clear()

    @staticmethod
    def _axiom(goal: Sequent) -> Optional[Node]:
        common = goal.ant & goal.suc
        if common:
            return weaken(init(min(common, key=lambda f: f.text)), goal)
        if BOT in goal.ant:
            return weaken(init_bot(), goal)
        return None

    def _leaf(self, goal: Sequent) -> Sequent:
        return self._failed.get(goal, goal)

    def _propositional(self, goal: Sequent, picked, ancestors):
        rule, f, left = picked
        ant, suc = goal.ant, goal.suc
        if left:
            ant = ant - {f}
        else:
            suc = suc - {f}

        if rule in (Rule.AND_L, Rule.OR_R):
            parts = (f.left, f.right)
            premise = (Sequent(ant | set(parts), suc) if left else Sequent(ant, suc | set(parts)))
            child = self._search(premise, ancestors)
            if child is None:
                return None, self._leaf(premise)
            node = child
            side = goal.ant if left else goal.suc
            for variant, part in enumerate(parts):
                present = node.sequent.ant if left else node.sequent.suc
                if part in present and part not in side:
                    node = apply_rule(rule, f, [node], None, variant)
            return weaken(node, goal), None

        if rule is Rule.NEG_L:
            premises = [Sequent(ant, suc | {f.sub})]
        elif rule is Rule.NEG_R:
            premises = [Sequent(ant | {f.sub}, suc)]
        elif rule is Rule.IMP_R:
            premises = [Sequent(ant | {f.left}, suc | {f.right})]
        elif rule is Rule.AND_R:
            premises = [Sequent(ant, suc | {f.left}), Sequent(ant, suc | {f.right})]
        elif rule is Rule.OR_L:
            premises = [Sequent(ant | {f.left}, suc), Sequent(ant | {f.right}, suc)]
        else:
            premises = [Sequent(ant, suc | {f.left}), Sequent(ant | {f.right}, suc)]
        children = []
        for premise in premises:
            child = self._search(premise, ancestors)
            if child is None:
                return None, self._leaf(premise)
            children.append(child)
        return apply_rule(rule, f, children, goal), None

    def _sides(self, rhds: Sequence[Rhd], target: Formula, ancestors) -> List[Tuple[Rhd, Node]]:
        found = []
        for principal in rhds:
            side = self._search(Sequent.of((principal.right,), (target,)), ancestors)
            if side is not None:
                found.append((principal, side))
        return found

    def _modal(self, goal: Sequent, ancestors) -> Optional[Node]:
        rhds = sorted((f for f in goal.ant if isinstance(f, Rhd)), key=lambda f: f.text)
        diagonals = sorted((f for f in goal.suc if isinstance(f, Rhd)), key=lambda f: f.text)
        for diagonal in diagonals:
            sides = self._sides(rhds, diagonal.right, ancestors)
            if self.system is System.ILMPS:
                premise = Sequent(frozenset(rhds) | {diagonal, diagonal.left},
                                  frozenset(p.left for p, _ in sides))
            else:
                premise = Sequent.of((diagonal.left,), (p.left for p, _ in sides))
            child = self._search(premise, ancestors)
            if child is not None:
                used = [(p, s) for p, s in sides if p.left in child.sequent.suc]
                principals = [p for p, _ in used]
                nodes = [s for _, s in used]
                if self.system is System.ILMPS:
                    return rhd_p(child, nodes, principals, diagonal, goal)
                return rhd_plain(child, nodes, principals, diagonal, goal)
            if self.system is System.ILMS and boxed(diagonal):
                node = self._box(goal, diagonal, rhds, ancestors)
                if node is not None:
                    return node
        return None

    def _box(self, goal: Sequent, diagonal: Rhd, rhds, ancestors) -> Optional[Node]:
        context = [f for f in rhds if boxed(f)]
        premise = Sequent(frozenset(context) | {c.left.sub for c in context} | {diagonal},
                          frozenset((diagonal.left.sub,)))
        child = self._search(premise, ancestors)
        if child is None:
            return None
        return box_rule(child, context, diagonal, goal)


def prove(system: System, goal: Sequent, budget: int = DEFAULT_CONFIG.budget) -> Verdict:
    """Decide derivability of goal (ILmPs) or search a cut-free proof (ILms)."""
    return Prover(system, budget).prove(goal)


def formula_goal(f: Formula) -> Sequent:
    return Sequent.of((), (expand_box(f),))


def decide(f: Formula, system: System = System.ILMPS, budget: int = DEFAULT_CONFIG.budget,
           prover: Optional[Prover] = None) -> Verdict:
    """
    Decide IL-(P) provability of f (ILms: cut-free derivability, sound for IL-).

    Args:
        f: Formula, boxes allowed
        system: Calculus used for the search
        budget: Search budget when no prover is given
        prover: Shared prover whose memo is reused
    """
    if prover is None:
        prover = Prover(system, budget)
    return prover.prove(formula_goal(f))


ADMISSIBLE_RULES = ("R1", "R2", "J3")


def admissibility_witness(rule: str, a: Formula, b: Formula, c: Formula,
                          budget: int = DEFAULT_CONFIG.budget) -> Derivation:
    """
    Checked cut-free ILms derivation of an instance of an IL- rule or of J3.

    R1 takes A -> B to C |> A => C |> B, R2 takes A -> B to B |> C => A |> C,
    and J3 is A |> C, B |> C => (A | B) |> C.

    Raises:
        PreconditionError: unknown rule, or the premise A -> B is not derivable
        VerificationError: no derivation was found or the checker rejects it
    """
    if rule not in ADMISSIBLE_RULES:
        raise PreconditionError(f"unknown rule {rule!r}")
    a, b, c = expand_box(a), expand_box(b), expand_box(c)
    prover = Prover(System.ILMS, budget)
    if rule != "J3" and not prover.prove(Sequent.of((), (Imp(a, b),))):
        raise PreconditionError(f"premise {Imp(a, b)} of {rule} is not derivable")
    if rule == "R1":
        goal = Sequent.of((Rhd(c, a),), (Rhd(c, b),))
    elif rule == "R2":
        goal = Sequent.of((Rhd(b, c),), (Rhd(a, c),))
    else:
        goal = Sequent.of((Rhd(a, c), Rhd(b, c)), (Rhd(Or(a, b), c),))
    verdict = prover.prove(goal)
    if not verdict:
        raise VerificationError(f"no ILms derivation of {goal}")
    report = check(verdict.derivation)
    if not report:
        raise VerificationError(f"{rule} witness rejected: {report.violation}")
    return verdict.derivation


def hunt_cut_only(goals: Iterable[Sequent], cut_formulas: Sequence[Formula],
                  budget: int = DEFAULT_CONFIG.budget) -> Optional[Derivation]:
    """
    Look for an ILms sequent derivable with one cut but not without.

    For each goal the cut-free search must fail while both premises
    goal + C and C + goal succeed for some C of cut_formulas. Returns the
    checked derivation with that cut, or None when no candidate qualifies.
    """
    prover = Prover(System.ILMS, budget)
    candidates = [expand_box(c) for c in cut_formulas]
    tried = 0
    for goal in goals:
        tried += 1
        if prover.prove(goal):
            continue
        for c in candidates:
            if c in goal.ant or c in goal.suc:
                continue
            left = prover.prove(Sequent(goal.ant, goal.suc | {c}))
            if not left:
                continue
            right = prover.prove(Sequent(goal.ant | {c}, goal.suc))
            if not right:
                continue
            derivation = Derivation(System.ILMS, cut(left.derivation.root,
                                                     right.derivation.root, c))
            report = check(derivation)
            if not report:
                raise VerificationError(f"cut witness rejected: {report.violation}")
            logger.info("cut-only witness %s (cut on %s) after %d goals", goal, c, tried)
            return derivation
    logger.debug("no cut-only witness among %d goals", tried)
    return None


# ---------------------------------------------------------------- oracle

@dataclass(frozen=True)
class _Option:
    """One way to derive a sequent: a rule with its exact premises."""

    rule: Rule
    premises: Tuple[Sequent, ...]
    principal: Optional[Formula] = None
    variant: int = 0
    principals: Tuple[Formula, ...] = ()
    diagonal: Optional[Formula] = None


def _options(goal: Sequent, system: System) -> List[_Option]:
    ant, suc = goal.ant, goal.suc
    options: List[_Option] = []
    if ant & suc or BOT in ant:
        options.append(_Option(Rule.INIT, ()))
    for f in sorted(ant, key=lambda g: g.text):
        if isinstance(f, Neg):
            options.append(_Option(Rule.NEG_L, (Sequent(ant, suc | {f.sub}),), f))
        elif isinstance(f, And):
            options.append(_Option(Rule.AND_L, (Sequent(ant | {f.left}, suc),), f, 0))
            options.append(_Option(Rule.AND_L, (Sequent(ant | {f.right}, suc),), f, 1))
        elif isinstance(f, Or):
            options.append(_Option(Rule.OR_L, (Sequent(ant | {f.left}, suc),
                                               Sequent(ant | {f.right}, suc)), f))
        elif isinstance(f, Imp):
            options.append(_Option(Rule.IMP_L, (Sequent(ant, suc | {f.left}),
                                                Sequent(ant | {f.right}, suc)), f))
    for f in sorted(suc, key=lambda g: g.text):
        if isinstance(f, Neg):
            options.append(_Option(Rule.NEG_R, (Sequent(ant | {f.sub}, suc),), f))
        elif isinstance(f, Or):
            options.append(_Option(Rule.OR_R, (Sequent(ant, suc | {f.left}),), f, 0))
            options.append(_Option(Rule.OR_R, (Sequent(ant, suc | {f.right}),), f, 1))
        elif isinstance(f, And):
            options.append(_Option(Rule.AND_R, (Sequent(ant, suc | {f.left}),
                                                Sequent(ant, suc | {f.right})), f))
        elif isinstance(f, Imp):
            options.append(_Option(Rule.IMP_R, (Sequent(ant | {f.left}, suc | {f.right}),), f))
    rhds = sorted((f for f in ant if isinstance(f, Rhd)), key=lambda g: g.text)
    for diagonal in sorted((f for f in suc if isinstance(f, Rhd)), key=lambda g: g.text):
        for count in range(len(rhds), -1, -1):
            for chosen in itertools.combinations(rhds, count):
                sides = tuple(Sequent.of((p.right,), (diagonal.right,)) for p in chosen)
                lefts = frozenset(p.left for p in chosen)
                if system is System.ILMPS:
                    first = Sequent(frozenset(rhds) | {diagonal, diagonal.left}, lefts)
                    rule = Rule.RHD_P
                else:
                    first = Sequent(frozenset((diagonal.left,)), lefts)
                    rule = Rule.RHD
                options.append(_Option(rule, (first,) + sides, principals=chosen,
                                       diagonal=diagonal))
        if system is System.ILMS and boxed(diagonal):
            context = tuple(f for f in rhds if boxed(f))
            premise = Sequent(frozenset(context) | {c.left.sub for c in context} | {diagonal},
                              frozenset((diagonal.left.sub,)))
            options.append(_Option(Rule.BOX, (premise,), principals=context,
                                   diagonal=diagonal))
    return options


def prove_fixpoint_oracle(goal: Sequent, closure_budget: int = DEFAULT_CONFIG.closure_budget,
                          system: System = System.ILMPS) -> Verdict:
    """
    Least-fixpoint computation of derivability over the backward closure of goal.

    Every rule instance with the principal formula kept in the premises and
    every principal subset of the modal rules is considered, so the oracle
    shares no pruning decisions with Prover.
    """
    _check_goal(goal)
    system = System(system)
    table: Dict[Sequent, List[_Option]] = {}
    pending = [goal]
    while pending:
        current = pending.pop()
        if current in table:
            continue
        if len(table) >= closure_budget:
            raise BudgetExceeded("closure", closure_budget)
        table[current] = _options(current, system)
        for option in table[current]:
            pending.extend(p for p in option.premises if p not in table)

    rank: Dict[Sequent, int] = {}
    round_ = 0
    changed = True
    while changed:
        changed = False
        round_ += 1
        newly = []
        for sequent, options in table.items():
            if sequent in rank:
                continue
            if any(all(p in rank for p in option.premises) for option in options):
                newly.append(sequent)
        for sequent in newly:
            rank[sequent] = round_
            changed = True
    logger.debug("oracle closure %d sequents, %d derivable", len(table), len(rank))
    if goal not in rank:
        return NotProvable(goal, len(table))

    built: Dict[Sequent, Node] = {}

    def build(sequent: Sequent) -> Node:
        if sequent in built:
            return built[sequent]
        option = next(o for o in table[sequent]
                      if all(rank.get(p, round_ + 1) < rank[sequent] for p in o.premises))
        children = [build(p) for p in option.premises]
        if option.rule is Rule.INIT:
            node = Prover._axiom(sequent)
        elif option.rule is Rule.RHD_P:
            node = rhd_p(children[0], children[1:], option.principals, option.diagonal, sequent)
        elif option.rule is Rule.RHD:
            node = rhd_plain(children[0], children[1:], option.principals, option.diagonal,
                             sequent)
        elif option.rule is Rule.BOX:
            node = box_rule(children[0], option.principals, option.diagonal, sequent)
        else:
            node = apply_rule(option.rule, option.principal, children, sequent, option.variant)
        built[sequent] = node
        return node

    return Provable(Derivation(system, build(goal)), len(table))

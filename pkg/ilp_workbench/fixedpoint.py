#!/usr/bin/env python3
"""
Fixed points of left-modalized formulas in IL-(P), and the checks showing
that arbitrary modalized formulas need not have one.

For A(p) = C(p) |> D with p not in D the fixed point is C(true) |> D. Other
formulas are reduced to that case one outermost |>-subformula M at a time:
with M replaced by a fresh q, solve for p, then solve M for q, and substitute.
Every result is re-checked with the decision procedure.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Set

from .calculus import System
from .config import DEFAULT_CONFIG
from .corpus import formulas_up_to
from .errors import BudgetExceeded, PreconditionError, VerificationError
from .search import Prover, Verdict, decide
from .syntax import (TOP, And, Box, Formula, Imp, Neg, Rhd, Var, expand_box, fresh_variable,
                     iff, is_left_modalized, is_modalized, iter_subformulas,
                     replace_subformula, substitute, variables)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FixpointResult:
    formula: Formula
    variable: str
    fixpoint: Formula
    verdict: Optional[Verdict]
    variable_condition: bool

    @property
    def verified(self) -> bool:
        return self.verdict is not None and bool(self.verdict) and self.variable_condition


def fixpoint_rhd(a: Formula, b: Formula, p: str = "p") -> Formula:
    """Fixed point of A(p) |> B: the formula A(true) |> B."""
    if not is_left_modalized(Rhd(a, b), p):
        raise PreconditionError(f"{p} is not left-modalized in {Rhd(a, b)}")
    return Rhd(substitute(a, {p: TOP}), b)


def _solve(a: Formula, p: str, used: Set[str]) -> Formula:
    if p not in variables(a):
        return a
    if isinstance(a, Rhd):
        return fixpoint_rhd(a.left, a.right, p)
    outer = next(g for g in iter_subformulas(a) if isinstance(g, Rhd) and p in variables(g))
    q = fresh_variable(used)
    used.add(q)
    rest = _solve(replace_subformula(a, outer, Var(q)), p, used)
    inner = fixpoint_rhd(substitute(outer.left, {p: rest}), outer.right, q)
    logger.debug("solved %s for %s via %s := %s", outer, p, q, inner)
    return substitute(rest, {q: inner})


def fixpoint(a: Formula, p: str = "p", budget: int = DEFAULT_CONFIG.budget,
             verify: bool = True) -> FixpointResult:
    """
    A formula F without p such that F <-> A(F) is a theorem of IL-(P).

    Boxes are rewritten with (~X) |> false first. With verify, the
    equivalence is decided and a failure raises VerificationError.
    """
    if not is_left_modalized(a, p):
        raise PreconditionError(f"{p} is not left-modalized in {a}")
    used = set(variables(a)) | {p}
    f = _solve(expand_box(a), p, used)
    condition = variables(f) <= variables(a) - {p}
    verdict = None
    if verify:
        verdict = decide(iff(f, substitute(a, {p: f})), System.ILMPS, budget)
        if not verdict or not condition:
            raise VerificationError(f"{f} is not a fixed point of {a} in {p}")
    logger.info("fixed point of %s in %s: %s", a, p, f)
    return FixpointResult(a, p, f, verdict, condition)


@dataclass(frozen=True)
class FppRefutation:
    checked: int
    provable: List[Formula]
    over_budget: List[Formula]

    @property
    def ok(self) -> bool:
        return not self.provable


def fpp_failure_instance(f: Formula) -> Formula:
    """F <-> (true |> ~F), never a theorem of IL-(P)."""
    return iff(f, Rhd(TOP, Neg(f)))


def refute_fpp_witness(max_size: int, budget: int = DEFAULT_CONFIG.budget) -> FppRefutation:
    """Decide F <-> (true |> ~F) for every variable-free F of up to max_size nodes."""
    prover = Prover(System.ILMPS, budget)
    checked, provable, over = 0, [], []
    for f in formulas_up_to(max_size):
        checked += 1
        try:
            if decide(fpp_failure_instance(f), System.ILMPS, budget, prover=prover):
                provable.append(f)
        except BudgetExceeded:
            over.append(f)
            prover = Prover(System.ILMPS, budget)
    logger.info("checked %d constant formulas, %d provable, %d over budget",
                checked, len(provable), len(over))
    return FppRefutation(checked, provable, over)


def _boxdot(f: Formula) -> Formula:
    return And(Box(f), f)


def ufp_instance(a: Formula, p: str = "p", q: str = "q") -> Formula:
    """Uniqueness of fixed points for A: both p and q solving it forces p <-> q."""
    if not is_modalized(a, p):
        raise PreconditionError(f"{p} is not modalized in {a}")
    if q in variables(a):
        raise PreconditionError(f"{q} already occurs in {a}")
    solves_p = _boxdot(iff(Var(p), a))
    solves_q = _boxdot(iff(Var(q), substitute(a, {p: Var(q)})))
    return Imp(And(solves_p, solves_q), iff(Var(p), Var(q)))


def check_ufp_failure(budget: int = DEFAULT_CONFIG.budget) -> Verdict:
    """The uniqueness instance for true |> ~p; expected to be unprovable."""
    return decide(ufp_instance(Rhd(TOP, Neg(Var("p")))), System.ILMPS, budget)

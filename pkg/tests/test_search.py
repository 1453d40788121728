import pytest

from ilp_workbench.calculus import Sequent, System, check, is_cut_free, parse_sequent
from ilp_workbench.errors import BudgetExceeded, PreconditionError
from ilp_workbench.search import (ADMISSIBLE_RULES, NotProvable, Provable, Prover,
                                  admissibility_witness, decide, formula_goal, hunt_cut_only,
                                  prove, prove_fixpoint_oracle)
from ilp_workbench.syntax import Box, Var, parse

THEOREMS = [
    "p |> q -> [](p |> q)",
    "(p |> r) & (q |> r) -> (p | q) |> r",
    "[](p -> q) -> ([]p -> []q)",
    "[]([]p -> p) -> []p",
    "[]p <-> (~p |> false)",
    "[](p -> q) -> (q |> r -> p |> r)",
    "p -> q -> p",
]

NON_THEOREMS = [
    "[](p -> q) -> p |> q",
    "(p |> q) & (q |> r) -> p |> r",
    "<>p |> p",
    "p",
    "[]p -> p",
]


@pytest.mark.parametrize("text", THEOREMS)
def test_theorems_are_proved_with_checked_cut_free_proofs(text):
    f = parse(text)
    verdict = decide(f)
    assert isinstance(verdict, Provable)
    assert check(verdict.derivation)
    assert is_cut_free(verdict.derivation)
    assert verdict.derivation.endsequent == formula_goal(f)


@pytest.mark.parametrize("text", NON_THEOREMS)
def test_non_theorems_are_refuted(text):
    verdict = decide(parse(text))
    assert isinstance(verdict, NotProvable)
    assert not verdict
    assert verdict.explored > 0


def test_persistence_is_not_derivable_in_ilms():
    assert not decide(parse("p |> q -> [](p |> q)"), System.ILMS)


def test_ilms_proves_j3():
    verdict = decide(parse("(p |> r) & (q |> r) -> (p | q) |> r"), System.ILMS)
    assert verdict
    assert check(verdict.derivation)


def test_sequent_goal():
    verdict = prove(System.ILMPS, parse_sequent("p |> q => (p & r) |> (q | r)"))
    assert verdict
    assert check(verdict.derivation)


def test_box_goal_rejected():
    with pytest.raises(PreconditionError):
        Prover().prove(Sequent.of((), (Box(Var("p")),)))


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded) as info:
        decide(parse("[]([]p -> p) -> []p"), budget=1)
    assert info.value.value == 1


def test_shared_prover_reuses_memo():
    prover = Prover()
    f = parse("p |> q -> [](p |> q)")
    decide(f, prover=prover)
    decide(f, prover=prover)
    assert prover.memo_hits > 0


@pytest.mark.parametrize("text", THEOREMS[:3] + NON_THEOREMS)
def test_memo_limit_keeps_verdicts(text):
    f = parse(text)
    prover = Prover(memo_limit=2)
    verdict = decide(f, prover=prover)
    assert bool(verdict) == bool(decide(f))
    assert len(prover._proved) + len(prover._failed) <= 2
    if verdict:
        assert check(verdict.derivation)


@pytest.mark.parametrize("text", [
    "p |> q -> [](p |> q)", "p -> q -> p", "<>p |> p", "p", "[]p -> p", "false |> q",
])
def test_oracle_agrees_with_search(text):
    goal = formula_goal(parse(text))
    oracle = prove_fixpoint_oracle(goal)
    assert bool(oracle) == bool(prove(System.ILMPS, goal))
    if oracle:
        assert check(oracle.derivation)


def test_oracle_budget():
    with pytest.raises(BudgetExceeded):
        prove_fixpoint_oracle(formula_goal(parse("p -> q -> p")), 1)


def test_stats():
    prover = Prover(System.ILMPS)
    prover.prove(formula_goal(parse("p -> p")))
    stats = prover.stats
    assert stats.explored == prover.explored > 0
    assert stats.memo_hits == prover.memo_hits


@pytest.mark.parametrize("rule", ADMISSIBLE_RULES)
def test_admissibility_witnesses(rule):
    a, b, c = parse("p & q"), parse("p"), parse("[]r")
    derivation = admissibility_witness(rule, a, b, c)
    assert derivation.system is System.ILMS
    assert check(derivation)
    assert is_cut_free(derivation)


def test_admissibility_needs_derivable_premise():
    with pytest.raises(PreconditionError):
        admissibility_witness("R1", parse("p"), parse("q"), parse("r"))
    with pytest.raises(PreconditionError):
        admissibility_witness("J4", parse("p"), parse("q"), parse("r"))


def test_hunt_skips_cut_free_goals():
    assert hunt_cut_only([parse_sequent("p => p")], [parse("q")]) is None
    assert hunt_cut_only([parse_sequent("p => q")], [parse("r")]) is None


def test_hunt_result_needs_its_cut():
    goals = [parse_sequent(text) for text in ("p |> q, q |> r => p |> r",
                                              "false |> p => (q & ~q) |> p")]
    found = hunt_cut_only(goals, [parse("p |> q"), parse("q |> p"), parse("false |> false")])
    if found is not None:
        assert found.system is System.ILMS
        assert check(found)
        assert not is_cut_free(found)
        assert not Prover(System.ILMS).prove(found.endsequent)

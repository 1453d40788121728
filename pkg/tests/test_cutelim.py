import pytest

from ilp_workbench.calculus import (Derivation, Node, Rule, Sequent, System, check, compose_cut,
                                    init, is_cut_free, weaken)
from ilp_workbench.cutelim import (CutEliminator, CutMeasure, eliminate, eliminate_principal,
                                   explicit_nodes, lemma_star, reduction_table, theta_bar)
from ilp_workbench.errors import DerivationError, PreconditionError
from ilp_workbench.search import Prover
from ilp_workbench.syntax import BOT, And, Imp, Or, Rhd, Var, expand_box, parse

p, q = Var("p"), Var("q")


def proof(ant, suc):
    verdict = Prover().prove(Sequent.of(ant, suc))
    assert verdict
    return verdict.derivation


def persistence_cut():
    rhd = Rhd(BOT, q)
    wider = Rhd(And(BOT, p), Or(q, p))
    return proof((), (rhd,)), proof((rhd,), (wider,)), rhd


def test_principal_persistence_cut_is_eliminated():
    left, right, rhd = persistence_cut()
    composed = compose_cut(left, right, rhd)
    eliminator = CutEliminator()
    result = eliminator.eliminate(composed)
    assert is_cut_free(result)
    assert check(result)
    assert result.endsequent == composed.endsequent
    assert "principal RhdP" in {r.kind for r in eliminator.reductions}


def test_principal_cut_with_idle_rhd_context():
    narrow = Rhd(p, Or(q, BOT))
    left = proof((Rhd(q, p), Rhd(p, q)), (narrow,))
    right = proof((narrow,), (Rhd(And(p, q), Or(Or(q, BOT), p)),))
    assert Rhd(q, p) in left.endsequent.ant
    composed = compose_cut(left, right, narrow)
    eliminator = CutEliminator()
    result = eliminator.eliminate(composed)
    assert is_cut_free(result)
    assert check(result)
    assert result.endsequent == composed.endsequent
    assert "principal RhdP" in {r.kind for r in eliminator.reductions}


def test_eliminate_principal_directly():
    left, right, rhd = persistence_cut()
    result = eliminate_principal(left, right, rhd)
    assert check(result)
    assert is_cut_free(result)
    assert result.endsequent == Sequent.of((), right.endsequent.suc)


def test_eliminate_principal_needs_persistence_rules():
    left, _, rhd = persistence_cut()
    with pytest.raises(PreconditionError):
        eliminate_principal(left, Derivation(System.ILMPS, init(rhd)), rhd)


@pytest.mark.parametrize("text", ["p -> p", "[](p -> p)", "p |> q -> [](p |> q)",
                                  "~(p & ~p)"])
def test_propositional_and_modal_cuts(text):
    a = expand_box(parse(text))
    b = Or(a, q)
    composed = compose_cut(proof((), (a,)), proof((a,), (b,)), a)
    result = eliminate(composed)
    assert is_cut_free(result)
    assert check(result)
    assert result.endsequent == composed.endsequent


def test_cut_into_persistence_instance():
    rhd = Rhd(BOT, q)
    boxed = expand_box(parse("[](false |> q)"))
    composed = compose_cut(proof((), (rhd,)), proof((rhd,), (boxed,)), rhd)
    result = eliminate(composed)
    assert check(result)
    assert result.endsequent == Sequent.of((), (boxed,))


def test_nested_cuts():
    a = expand_box(parse("p -> p"))
    b = Or(a, q)
    c = Or(b, p)
    inner = compose_cut(proof((), (a,)), proof((a,), (b,)), a)
    outer = compose_cut(inner, proof((b,), (c,)), b)
    result = eliminate(outer)
    assert is_cut_free(result)
    assert result.endsequent == Sequent.of((), (c,))


def test_cut_free_input_is_unchanged():
    derivation = proof((), (Imp(p, p),))
    assert eliminate(derivation).root is derivation.root


def test_ilms_is_rejected():
    derivation = Derivation(System.ILMS, init(p))
    with pytest.raises(PreconditionError):
        eliminate(derivation)


def test_malformed_input_is_rejected():
    bad = Derivation(System.ILMPS, Node(Rule.INIT, Sequent.of((p,), (q,))))
    with pytest.raises(DerivationError):
        eliminate(bad)


def test_measure_order():
    assert CutMeasure(1, 9) < CutMeasure(2, 0)
    assert CutMeasure(2, 3) < CutMeasure(2, 4)


def test_reduction_table_counts_kinds():
    left, right, rhd = persistence_cut()
    eliminator = CutEliminator()
    eliminator.eliminate(compose_cut(left, right, rhd))
    table = dict(reduction_table(eliminator.reductions))
    assert table["principal RhdP"] >= 1
    assert sum(table.values()) == len(eliminator.reductions)


def test_explicit_marking_and_lemma():
    left, _, rhd = persistence_cut()
    premise = left.root.premises[0]
    nodes = explicit_nodes(premise, rhd)
    assert nodes and nodes[0] is premise
    assert theta_bar(premise, rhd) == frozenset()
    lemma = lemma_star(left)
    assert check(lemma)
    assert rhd not in lemma.endsequent.ant
    assert lemma.endsequent == Sequent.of((BOT,), ())


def test_lemma_rejects_unreached_theta():
    left, _, _ = persistence_cut()
    with pytest.raises(PreconditionError):
        lemma_star(left, [Rhd(p, q)])


def test_weakened_cut_formula_is_absorbed():
    a = Imp(p, p)
    left = proof((), (a,))
    right = Derivation(System.ILMPS, weaken(init(q), Sequent.of((a, q), (q,))))
    result = eliminate(compose_cut(left, right, a))
    assert result.endsequent == Sequent.of((q,), (q,))
    assert check(result)

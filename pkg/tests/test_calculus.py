import pytest

from ilp_workbench.calculus import (Derivation, Node, Rule, Sequent, System, apply_rule, check,
                                    compose_cut, cut, cuts, init, init_bot, is_cut_free,
                                    parse_sequent, rhd_p, weaken)
from ilp_workbench.errors import DerivationError, PreconditionError
from ilp_workbench.syntax import BOT, And, Box, Imp, Rhd, Var, parse

p, q = Var("p"), Var("q")


def identity_proof() -> Derivation:
    node = apply_rule(Rule.IMP_R, Imp(p, p), [init(p)], Sequent.of((), (Imp(p, p),)))
    return Derivation(System.ILMPS, node)


def bot_rhd_proof(y=q) -> Derivation:
    diagonal = Rhd(BOT, y)
    node = rhd_p(init_bot(), [], [], diagonal, Sequent.of((), (diagonal,)))
    return Derivation(System.ILMPS, node)


def test_parse_sequent_expands_boxes():
    sequent = parse_sequent("p, []q => p & q")
    assert sequent.ant == {p, Rhd(parse("~q"), BOT)}
    assert sequent.suc == {And(p, q)}


def test_parse_sequent_needs_arrow():
    with pytest.raises(PreconditionError):
        parse_sequent("p, q")


def test_identity_proof_checks():
    derivation = identity_proof()
    assert check(derivation)
    assert derivation.endsequent == Sequent.of((), (Imp(p, p),))
    assert derivation.height == 2
    assert is_cut_free(derivation)


def test_persistence_rule_instance_checks():
    derivation = bot_rhd_proof()
    assert derivation.root.rule is Rule.RHD_P
    assert check(derivation)


def test_persistence_rule_rejected_in_ilms():
    derivation = Derivation(System.ILMS, bot_rhd_proof().root)
    report = check(derivation)
    assert not report
    assert "does not belong" in report.violation.message


def test_bad_initial_sequent_reported():
    report = check(Derivation(System.ILMPS, Node(Rule.INIT, Sequent.of((p,), (q,)))))
    assert not report
    assert report.violation.path == ()


def test_box_constructor_rejected():
    node = Node(Rule.INIT, Sequent.of((Box(p),), (Box(p),)))
    report = check(Derivation(System.ILMPS, node))
    assert "[]" in report.violation.message


def test_violation_path_points_below_root():
    bad = Node(Rule.INIT, Sequent.of((p,), (q,)))
    root = Node(Rule.WL, Sequent.of((p, q), (q,)), (bad,), (q,))
    report = check(Derivation(System.ILMPS, root))
    assert report.violation.path == (0,)


def test_weaken_adds_single_formulas():
    node = weaken(init(p), Sequent.of((p, q), (p, q)))
    assert node.sequent == Sequent.of((p, q), (p, q))
    assert check(Derivation(System.ILMPS, node))
    assert node.height == 3


def test_weaken_cannot_drop_formulas():
    with pytest.raises(DerivationError):
        weaken(init(p), Sequent.of((q,), (q,)))


def test_cut_requires_formula_on_both_sides():
    with pytest.raises(PreconditionError):
        cut(init(p), init(q), p)


def test_compose_cut_checks():
    left = bot_rhd_proof()
    right = Derivation(System.ILMPS, init(Rhd(BOT, q)))
    composed = compose_cut(left, right, Rhd(BOT, q))
    assert check(composed)
    assert not is_cut_free(composed)
    assert composed.endsequent == Sequent.of((), (Rhd(BOT, q),))
    assert [node.cut_formula for node in cuts(composed)] == [Rhd(BOT, q)]
    assert list(cuts(left)) == []


def test_compose_cut_rejects_mixed_systems():
    right = Derivation(System.ILMS, init(Rhd(BOT, q)))
    with pytest.raises(PreconditionError):
        compose_cut(bot_rhd_proof(), right, Rhd(BOT, q))

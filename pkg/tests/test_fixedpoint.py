import random

import pytest

from ilp_workbench.corpus import random_left_modalized
from ilp_workbench.errors import PreconditionError
from ilp_workbench.fixedpoint import (check_ufp_failure, fixpoint, fixpoint_rhd,
                                      fpp_failure_instance, refute_fpp_witness, ufp_instance)
from ilp_workbench.search import decide
from ilp_workbench.semantics import SimplifiedModel, evaluate
from ilp_workbench.syntax import TOP, Neg, Rhd, Var, iff, parse, substitute, variables

p, q = Var("p"), Var("q")


def test_fixpoint_of_rhd():
    assert fixpoint_rhd(p, q) == Rhd(TOP, q)
    assert fixpoint_rhd(parse("p & r"), q) == Rhd(parse("true & r"), q)


def test_fixpoint_rhd_needs_left_modalized_variable():
    with pytest.raises(PreconditionError):
        fixpoint_rhd(q, p)


@pytest.mark.parametrize("text", [
    "p |> q",
    "~(p |> false)",
    "[]p",
    "[]~p",
    "(p |> q) & ((p & r) |> false)",
    "(([]p) |> q) -> r",
    "(~p |> q) | (p |> r)",
])
def test_fixpoint_is_verified(text):
    a = parse(text)
    result = fixpoint(a, "p")
    assert result.verified
    assert "p" not in variables(result.fixpoint)
    assert variables(result.fixpoint) <= variables(a) - {"p"}
    assert decide(iff(result.fixpoint, substitute(a, {"p": result.fixpoint})))


def test_fixpoint_of_box_not_p():
    result = fixpoint(parse("[]~p"), "p", verify=False)
    assert result.verdict is None
    assert not result.verified
    assert variables(result.fixpoint) == frozenset()


def test_fixpoint_without_the_variable():
    assert fixpoint(parse("q |> r"), "p").fixpoint == parse("q |> r")


def test_fixpoint_rejects_right_occurrence():
    with pytest.raises(PreconditionError):
        fixpoint(parse("q |> p"), "p")


def test_fixpoint_rejects_unguarded_occurrence():
    with pytest.raises(PreconditionError):
        fixpoint(parse("p & (p |> q)"), "p")


def test_random_left_modalized_fixpoints():
    rng = random.Random(7)
    for _ in range(15):
        a = random_left_modalized(rng, 3, "p", ("q",))
        assert fixpoint(a, "p").verified


def test_fpp_failure_instances_unprovable():
    refutation = refute_fpp_witness(4)
    assert refutation.ok
    assert refutation.checked > 0
    assert not refutation.over_budget


def test_fpp_failure_instance_shape():
    assert fpp_failure_instance(p) == iff(p, Rhd(TOP, Neg(p)))


def test_uniqueness_fails():
    assert not check_ufp_failure()


def test_uniqueness_countermodel():
    # x R y and y S z with z outside the R-cone of x
    model = SimplifiedModel(("x", "y", "z"), {("x", "y")}, {("y", "z")},
                            {"p": {"x", "y"}, "q": {"y", "z"}})
    instance = ufp_instance(Rhd(TOP, Neg(p)))
    assert not evaluate(model, "x", instance)


def test_ufp_instance_needs_modalized_variable():
    with pytest.raises(PreconditionError):
        ufp_instance(p)

import random

import pytest

from ilp_workbench.corpus import (REFUTABLE, SCHEMES, SCHEMES_BY_NAME, THEOREM,
                                  formulas_of_size, formulas_up_to, instances, random_formula,
                                  random_left_modalized, substitution_lemma_instances)
from ilp_workbench.search import decide
from ilp_workbench.syntax import BOT, Box, Imp, Var, is_left_modalized, parse, size, variables


def test_scheme_table():
    assert {s.expected for s in SCHEMES} == {THEOREM, REFUTABLE}
    assert SCHEMES_BY_NAME["P"].template == parse("(a |> b) -> [](a |> b)")
    assert SCHEMES_BY_NAME["J3"].metavariables == ("a", "b", "c")
    assert SCHEMES_BY_NAME["J5"].metavariables == ("a",)


def test_generic_instance():
    assert SCHEMES_BY_NAME["J1"].generic() == parse("[](p -> q) -> (p |> q)")


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.name)
def test_generic_instance_has_expected_verdict(scheme):
    assert bool(decide(scheme.generic())) == (scheme.expected == THEOREM)


def test_instances():
    pool = [BOT, Var("p")]
    found = list(instances(SCHEMES_BY_NAME["J3"], pool))
    assert len(found) == 8
    assert found[0] == parse("(false |> false) & (false |> false) -> ((false | false) |> false)")
    assert len(list(instances(SCHEMES_BY_NAME["J3"], pool, limit=3))) == 3


def test_formulas_of_size():
    assert formulas_of_size(1, ["p"]) == (BOT, Var("p"))
    assert len(formulas_of_size(2, ["p"])) == 4
    assert len(formulas_of_size(3, ["p"])) == 24
    assert all(size(f) == 3 for f in formulas_of_size(3, ["p"]))
    assert formulas_of_size(0) == ()
    assert len(list(formulas_up_to(2))) == 3


def test_random_formula_is_seeded():
    first = [random_formula(random.Random(2), 4, ["p", "q"]) for _ in range(5)]
    second = [random_formula(random.Random(2), 4, ["p", "q"]) for _ in range(5)]
    assert first == second
    assert all(variables(f) <= {"p", "q"} for f in first)


def test_random_left_modalized():
    rng = random.Random(0)
    for _ in range(50):
        f = random_left_modalized(rng, 4)
        assert is_left_modalized(f, "p")
        assert variables(f) <= {"p", "q", "r"}


def test_substitution_lemma_instances():
    found = substitution_lemma_instances(random.Random(4), 5)
    assert len(found) == 5
    for f in found:
        assert isinstance(f, Imp)
        assert isinstance(f.left, Box)
        assert "p" not in variables(f)

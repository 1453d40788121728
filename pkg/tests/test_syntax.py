import pytest

from ilp_workbench.errors import AssociativityError, ParseError
from ilp_workbench.syntax import (BOT, TOP, And, Box, BoxK, Imp, Neg, Or, Rhd, Var, big_and,
                                  big_or, connectives, degree, diamond, expand_box,
                                  fresh_variable, iff, is_left_modalized, is_modalized, parse,
                                  parse_bimodal, size, substitute, tilde, to_text, variables)

p, q, r = Var("p"), Var("q"), Var("r")


def test_parse_persistence_axiom():
    f = parse("p|>q -> [](p|>q)")
    assert f == Imp(Rhd(p, q), Box(Rhd(p, q)))


def test_precedence_and_over_or_over_rhd():
    assert parse("p & q | r |> q") == Rhd(Or(And(p, q), r), q)


def test_implication_is_right_associative():
    assert parse("p -> q -> r") == Imp(p, Imp(q, r))


def test_constants_and_diamond():
    assert parse("true") == TOP
    assert parse("false") == BOT
    assert parse("<>p") == diamond(p)


def test_iff_is_sugar():
    assert parse("p <-> q") == iff(p, q)


def test_rhd_chain_needs_parentheses():
    with pytest.raises(AssociativityError):
        parse("p |> q |> r")
    assert parse("(p |> q) |> r") == Rhd(Rhd(p, q), r)
    assert parse("p |> (q |> r)") == Rhd(p, Rhd(q, r))


def test_syntax_error_has_position():
    with pytest.raises(ParseError) as info:
        parse("p & & q")
    assert info.value.column is not None


def test_bimodal_operators_rejected_by_parse():
    with pytest.raises(ParseError):
        parse("[0]p")


def test_parse_bimodal():
    assert parse_bimodal("[0](p -> <1>q)") == BoxK(0, Imp(p, Neg(BoxK(1, Neg(q)))))
    with pytest.raises(ParseError):
        parse_bimodal("p |> q")


@pytest.mark.parametrize("text", [
    "p |> q -> [](p |> q)",
    "(p |> q) & (q |> r) -> p |> r",
    "~(p | q) & []<>r",
    "(p -> q) -> r",
    "[](p <-> q) -> (p |> r <-> q |> r)",
    "<>(p |> false) |> ~q",
])
def test_printer_round_trip(text):
    f = parse(text)
    assert parse(to_text(f)) == f
    assert to_text(parse(to_text(f))) == to_text(f)


def test_structural_equality_and_hash():
    assert parse("p |> q") == Rhd(Var("p"), Var("q"))
    assert len({parse("p & q"), And(p, q)}) == 1


def test_size_and_connectives():
    f = parse("p |> ~q")
    assert size(f) == 4
    assert connectives(f) == 2


def test_variables_and_substitution():
    f = parse("p |> (q & p)")
    assert variables(f) == {"p", "q"}
    assert substitute(f, {"p": q, "q": p}) == parse("q |> (p & q)")


def test_big_connectives():
    assert big_or([]) == BOT
    assert big_and([]) == TOP
    assert big_or([p, q, p]) == Or(p, q)
    assert big_and([p, q, r]) == And(p, And(q, r))


def test_tilde():
    assert tilde(Neg(p)) == p
    assert tilde(p) == Neg(p)


def test_expand_box():
    assert expand_box(parse("[][]p")) == Rhd(Neg(Rhd(Neg(p), BOT)), BOT)


def test_left_modalized():
    assert is_left_modalized(parse("p |> q"), "p")
    assert not is_left_modalized(parse("q |> p"), "p")
    assert not is_left_modalized(parse("p & []p"), "p")
    assert is_modalized(parse("q |> p"), "p")
    assert is_left_modalized(parse("[]p -> q"), "p")


def test_degree():
    assert degree(parse("p |> q")) == 1
    assert degree(parse("p |> (q |> r)")) == 2
    assert degree(parse("(p |> q) |> r")) == 1
    assert degree(parse("[]p")) == 0


def test_fresh_variable():
    assert fresh_variable({"q0", "q1", "p"}) == "q2"

#!/usr/bin/env python3
"""
Formulas of the interpretability language and of the bimodal language.

Formulas are immutable trees with structural equality. Text is parsed with a
lark LALR grammar and printed back in canonical ASCII:

    ~  &  |  ->  <->  []  <>  |>  true  false      (interpretability language)
    [0]  [1]  <0>  <1>                               (bimodal language)

Precedence from tightest to loosest: unary operators, &, |, |> (chains need
parentheses), -> (right associative), <->.
"""

from dataclasses import dataclass, fields
from functools import cached_property, lru_cache
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, Optional, Set

from lark import Lark, Transformer, UnexpectedInput

from .errors import AssociativityError, ParseError, PreconditionError


@lru_cache(maxsize=None)
def _field_names(cls) -> tuple:
    return tuple(f.name for f in fields(cls))


class Formula:
    """Base class of all formula nodes; equality is structural."""

    def _key(self) -> tuple:
        return tuple(getattr(self, name) for name in _field_names(type(self)))

    @cached_property
    def _hash(self) -> int:
        return hash((type(self).__name__,) + self._key())

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if type(self) is not type(other) or self._hash != other._hash:
            return False
        return self._key() == other._key()

    def __ne__(self, other) -> bool:
        return not self.__eq__(other)

    @cached_property
    def text(self) -> str:
        return to_text(self)

    def __str__(self) -> str:
        return self.text

    def children(self) -> tuple:
        return tuple(value for value in self._key() if isinstance(value, Formula))


@dataclass(frozen=True, eq=False)
class Var(Formula):
    name: str


@dataclass(frozen=True, eq=False)
class Bot(Formula):
    pass


@dataclass(frozen=True, eq=False)
class Neg(Formula):
    sub: Formula


@dataclass(frozen=True, eq=False)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False)
class Imp(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False)
class Box(Formula):
    sub: Formula


@dataclass(frozen=True, eq=False)
class Rhd(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False)
class BoxK(Formula):
    """The bimodal box [k], k in {0, 1}."""

    k: int
    sub: Formula

    def __post_init__(self):
        if self.k not in (0, 1):
            raise PreconditionError(f"bimodal index must be 0 or 1, got {self.k!r}")


BOT = Bot()
TOP = Neg(BOT)


def diamond(f: Formula) -> Formula:
    return Neg(Box(Neg(f)))


def diamond_k(k: int, f: Formula) -> Formula:
    return Neg(BoxK(k, Neg(f)))


def iff(a: Formula, b: Formula) -> Formula:
    return And(Imp(a, b), Imp(b, a))


def big_or(items: Iterable[Formula]) -> Formula:
    """Right-nested duplicate-free disjunction; the empty disjunction is false."""
    unique = list(dict.fromkeys(items))
    if not unique:
        return BOT
    result = unique[-1]
    for item in reversed(unique[:-1]):
        result = Or(item, result)
    return result


def big_and(items: Iterable[Formula]) -> Formula:
    """Right-nested duplicate-free conjunction; the empty conjunction is true."""
    unique = list(dict.fromkeys(items))
    if not unique:
        return TOP
    result = unique[-1]
    for item in reversed(unique[:-1]):
        result = And(item, result)
    return result


# ---------------------------------------------------------------- parsing

_GRAMMAR = r"""
    ?start: iff

    ?iff: imp _IFF imp -> iff_op
        | imp
    ?imp: rhd _IMP imp -> imp_op
        | rhd
    ?rhd: disj _RHD disj -> rhd_op
        | disj
    ?disj: disj _OR conj -> or_op
         | conj
    ?conj: conj _AND unary -> and_op
         | unary
    ?unary: _NOT unary -> neg
          | _BOX unary -> box
          | _DIA unary -> dia
          | BOXK unary -> boxk
          | DIAK unary -> diak
          | atom
    ?atom: VAR -> var
         | _TRUE -> top
         | _FALSE -> bot
         | _LPAR iff _RPAR

    _IFF: "<->"
    _IMP: "->"
    _RHD: "|>"
    _OR: "|"
    _AND: "&"
    _NOT: "~"
    _BOX: "[]"
    _DIA: "<>"
    _LPAR: "("
    _RPAR: ")"
    _TRUE: "true"
    _FALSE: "false"
    BOXK: /\[[01]\]/
    DIAK: /<[01]>/
    VAR: /[a-z][a-z0-9_]*/

    %import common.WS
    %ignore WS
"""


class _FormulaBuilder(Transformer):
    """Turns parse-tree nodes into formula values."""

    def var(self, children):
        return Var(str(children[0]))

    def top(self, _children):
        return TOP

    def bot(self, _children):
        return BOT

    def neg(self, children):
        return Neg(children[0])

    def box(self, children):
        return Box(children[0])

    def dia(self, children):
        return diamond(children[0])

    def boxk(self, children):
        return BoxK(int(children[0][1]), children[1])

    def diak(self, children):
        return diamond_k(int(children[0][1]), children[1])

    def and_op(self, children):
        return And(children[0], children[1])

    def or_op(self, children):
        return Or(children[0], children[1])

    def rhd_op(self, children):
        return Rhd(children[0], children[1])

    def imp_op(self, children):
        return Imp(children[0], children[1])

    def iff_op(self, children):
        return iff(children[0], children[1])


_PARSER = Lark(_GRAMMAR, parser="lalr", lexer="basic", transformer=_FormulaBuilder())


def _find_rhd_chain(text: str):
    """Return the token of the second |> in an unparenthesised chain, if any."""
    seen = [False]
    try:
        for token in _PARSER.lex(text):
            if token.type == "_LPAR":
                seen.append(False)
            elif token.type == "_RPAR":
                if len(seen) > 1:
                    seen.pop()
            elif token.type in ("_IMP", "_IFF"):
                seen[-1] = False
            elif token.type == "_RHD":
                if seen[-1]:
                    return token
                seen[-1] = True
    except UnexpectedInput:
        return None
    return None


def _parse_any(text: str) -> Formula:
    try:
        return _PARSER.parse(text)
    except UnexpectedInput as exc:
        chained = _find_rhd_chain(text)
        if chained is not None:
            raise AssociativityError("|> is non-associative; parenthesise the chain",
                                     text, chained.line, chained.column) from None
        line = getattr(exc, "line", None)
        column = getattr(exc, "column", None)
        if not isinstance(line, int) or line < 1:
            line = column = None
        raise ParseError(f"syntax error in {text!r}", text, line, column) from None


def _first(f: Formula, predicate: Callable[[Formula], bool]) -> Optional[Formula]:
    for sub in iter_subformulas(f):
        if predicate(sub):
            return sub
    return None


def parse(text: str) -> Formula:
    """
    Parse a formula of the interpretability language.

    Args:
        text: Formula text, e.g. ``"p |> q -> [](p |> q)"``

    Returns:
        The formula value

    Raises:
        ParseError: on malformed text or bimodal operators
        AssociativityError: on an unparenthesised ``|>`` chain
    """
    formula = _parse_any(text)
    if _first(formula, lambda g: isinstance(g, BoxK)) is not None:
        raise ParseError(f"bimodal operator in {text!r}", text)
    return formula


def parse_bimodal(text: str) -> Formula:
    """Parse a formula of the bimodal language ([0], [1], <0>, <1>)."""
    formula = _parse_any(text)
    if _first(formula, lambda g: isinstance(g, (Box, Rhd))) is not None:
        raise ParseError(f"[], <> and |> are not bimodal operators: {text!r}", text)
    return formula


# ---------------------------------------------------------------- printing

_ATOM, _UNARY, _AND_LEVEL, _OR_LEVEL, _RHD_LEVEL, _IMP_LEVEL, _IFF_LEVEL = 7, 6, 5, 4, 3, 2, 1


def _iff_parts(f: Formula):
    if isinstance(f, And) and isinstance(f.left, Imp) and isinstance(f.right, Imp):
        if f.left.left == f.right.right and f.left.right == f.right.left:
            return f.left.left, f.left.right
    return None


def _render(f: Formula):
    """Return (text, level) where level is the binding strength of the top operator."""
    if isinstance(f, Var):
        return f.name, _ATOM
    if isinstance(f, Bot):
        return "false", _ATOM
    if isinstance(f, Neg):
        if isinstance(f.sub, Bot):
            return "true", _ATOM
        if isinstance(f.sub, Box) and isinstance(f.sub.sub, Neg):
            return "<>" + _wrap(f.sub.sub.sub, _UNARY), _UNARY
        if isinstance(f.sub, BoxK) and isinstance(f.sub.sub, Neg):
            return f"<{f.sub.k}>" + _wrap(f.sub.sub.sub, _UNARY), _UNARY
        return "~" + _wrap(f.sub, _UNARY), _UNARY
    if isinstance(f, Box):
        return "[]" + _wrap(f.sub, _UNARY), _UNARY
    if isinstance(f, BoxK):
        return f"[{f.k}]" + _wrap(f.sub, _UNARY), _UNARY
    if isinstance(f, And):
        parts = _iff_parts(f)
        if parts is not None:
            return f"{_wrap(parts[0], _IMP_LEVEL)} <-> {_wrap(parts[1], _IMP_LEVEL)}", _IFF_LEVEL
        return f"{_wrap(f.left, _AND_LEVEL)} & {_wrap(f.right, _UNARY)}", _AND_LEVEL
    if isinstance(f, Or):
        return f"{_wrap(f.left, _OR_LEVEL)} | {_wrap(f.right, _AND_LEVEL)}", _OR_LEVEL
    if isinstance(f, Rhd):
        return f"{_wrap(f.left, _OR_LEVEL)} |> {_wrap(f.right, _OR_LEVEL)}", _RHD_LEVEL
    if isinstance(f, Imp):
        return f"{_wrap(f.left, _RHD_LEVEL)} -> {_wrap(f.right, _IMP_LEVEL)}", _IMP_LEVEL
    raise TypeError(f"not a formula: {f!r}")


def _wrap(f: Formula, required: int) -> str:
    text, level = _render(f)
    return text if level >= required else f"({text})"


def to_text(f: Formula) -> str:
    """Canonical ASCII rendering; parse(to_text(f)) == f."""
    return _render(f)[0]


# ---------------------------------------------------------------- analyses

def iter_subformulas(f: Formula) -> Iterator[Formula]:
    """Pre-order, left to right, with repetitions."""
    stack = [f]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(current.children()))


def subformulas(f: Formula) -> Set[Formula]:
    return set(iter_subformulas(f))


def variables(f: Formula) -> FrozenSet[str]:
    return frozenset(g.name for g in iter_subformulas(f) if isinstance(g, Var))


def size(f: Formula) -> int:
    """Number of nodes."""
    return sum(1 for _ in iter_subformulas(f))


def connectives(f: Formula) -> int:
    """Number of operator nodes; the degree of a cut on f."""
    return sum(1 for g in iter_subformulas(f) if not isinstance(g, (Var, Bot)))


def tilde(f: Formula) -> Formula:
    return f.sub if isinstance(f, Neg) else Neg(f)


def _modalized(f: Formula, p: str, guarded: bool) -> bool:
    if isinstance(f, Var):
        return guarded or f.name != p
    if isinstance(f, Bot):
        return True
    inner = guarded or isinstance(f, (Box, Rhd, BoxK))
    return all(_modalized(child, p, inner) for child in f.children())


def is_modalized(f: Formula, p: str) -> bool:
    """Every occurrence of p lies in the scope of a modal operator."""
    return _modalized(f, p, False)


def is_left_modalized(f: Formula, p: str) -> bool:
    """Modalized, and p never occurs in the right argument of a |>."""
    if not is_modalized(f, p):
        return False
    return all(p not in variables(g.right)
               for g in iter_subformulas(f) if isinstance(g, Rhd))


@lru_cache(maxsize=65536)
def degree(f: Formula) -> int:
    """Nesting depth of |> in right arguments; boxes count as transparent."""
    if isinstance(f, (Var, Bot)):
        return 0
    if isinstance(f, Rhd):
        return max(degree(f.left), degree(f.right) + 1)
    return max(degree(child) for child in f.children())


@lru_cache(maxsize=65536)
def expand_box(f: Formula) -> Formula:
    """Replace every []A by (~A) |> false, innermost first."""
    if isinstance(f, (Var, Bot)):
        return f
    if isinstance(f, Box):
        return Rhd(Neg(expand_box(f.sub)), BOT)
    if isinstance(f, (Neg,)):
        return Neg(expand_box(f.sub))
    if isinstance(f, BoxK):
        return BoxK(f.k, expand_box(f.sub))
    return type(f)(expand_box(f.left), expand_box(f.right))


@lru_cache(maxsize=65536)
def has_box(f: Formula) -> bool:
    return any(isinstance(g, Box) for g in iter_subformulas(f))


def map_formula(f: Formula, rewrite: Callable[[Formula], Optional[Formula]]) -> Formula:
    """Top-down rewrite: where rewrite returns a formula, it replaces the node."""
    replaced = rewrite(f)
    if replaced is not None:
        return replaced
    if isinstance(f, (Var, Bot)):
        return f
    if isinstance(f, (Neg, Box)):
        return type(f)(map_formula(f.sub, rewrite))
    if isinstance(f, BoxK):
        return BoxK(f.k, map_formula(f.sub, rewrite))
    return type(f)(map_formula(f.left, rewrite), map_formula(f.right, rewrite))


def substitute(f: Formula, mapping: Dict[str, Formula]) -> Formula:
    """Simultaneous substitution of formulas for variables."""
    if not mapping:
        return f
    return map_formula(f, lambda g: mapping.get(g.name) if isinstance(g, Var) else None)


def replace_subformula(f: Formula, old: Formula, new: Formula) -> Formula:
    return map_formula(f, lambda g: new if g == old else None)


def fresh_variable(used: Iterable[str], stem: str = "q") -> str:
    taken = set(used)
    index = 0
    while f"{stem}{index}" in taken:
        index += 1
    return f"{stem}{index}"

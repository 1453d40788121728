#!/usr/bin/env python3
"""
Axiom schemes and formula generators for the self-test and the tests.

Schemes are written over the metavariables a, b and c. Theorem schemes hold
in IL-(P) for every instance; refutable schemes have at least one
unprovable instance, the generic one with distinct variables.
"""

import itertools
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterator, List, Mapping, Sequence, Tuple

from .syntax import (BOT, And, Box, Formula, Imp, Neg, Or, Rhd, Var, iff, parse,
                     substitute, variables)

THEOREM = "theorem"
REFUTABLE = "refutable"
METAVARIABLES = ("a", "b", "c")


@dataclass(frozen=True)
class Scheme:
    name: str
    template: Formula
    expected: str

    @classmethod
    def of(cls, name: str, text: str, expected: str) -> "Scheme":
        return cls(name, parse(text), expected)

    @property
    def metavariables(self) -> Tuple[str, ...]:
        present = variables(self.template)
        return tuple(m for m in METAVARIABLES if m in present)

    def instantiate(self, substitution: Mapping[str, Formula]) -> Formula:
        return substitute(self.template, dict(substitution))

    def generic(self) -> Formula:
        """The instance with a, b, c replaced by p, q, r."""
        return self.instantiate({m: Var(v) for m, v in zip(METAVARIABLES, ("p", "q", "r"))})


SCHEMES: Tuple[Scheme, ...] = (
    Scheme.of("G1", "a -> (b -> a)", THEOREM),
    Scheme.of("G2", "[](a -> b) -> ([]a -> []b)", THEOREM),
    Scheme.of("G3", "[]([]a -> a) -> []a", THEOREM),
    Scheme.of("J3", "(a |> c) & (b |> c) -> ((a | b) |> c)", THEOREM),
    Scheme.of("J6", "[]a -> ((~a) |> false)", THEOREM),
    Scheme.of("J6-converse", "((~a) |> false) -> []a", THEOREM),
    Scheme.of("P", "(a |> b) -> [](a |> b)", THEOREM),
    Scheme.of("E2", "[](a <-> b) -> ((a |> c) <-> (b |> c))", THEOREM),
    Scheme.of("IL-fact.1", "[](a -> b) -> ((b |> c) -> (a |> c))", THEOREM),
    Scheme.of("J1", "[](a -> b) -> (a |> b)", REFUTABLE),
    Scheme.of("J2", "(a |> b) & (b |> c) -> (a |> c)", REFUTABLE),
    Scheme.of("J4", "(a |> b) -> (<>a -> <>b)", REFUTABLE),
    Scheme.of("J5", "(<>a) |> a", REFUTABLE),
    Scheme.of("J2+", "(a |> (b | c)) & (b |> c) -> (a |> c)", REFUTABLE),
    Scheme.of("J4+", "[](a -> b) -> ((c |> a) -> (c |> b))", REFUTABLE),
    Scheme.of("E1", "[](a <-> b) -> ((c |> a) <-> (c |> b))", REFUTABLE),
    Scheme.of("J5^2", "(<><>a) |> a", REFUTABLE),
)

SCHEMES_BY_NAME: Dict[str, Scheme] = {s.name: s for s in SCHEMES}


def instances(scheme: Scheme, pool: Sequence[Formula], limit: int = 0) -> Iterator[Formula]:
    """Instances with metavariables drawn from pool, in product order; limit 0 means all."""
    names = scheme.metavariables
    combos = itertools.product(pool, repeat=len(names))
    if limit:
        combos = itertools.islice(combos, limit)
    for combo in combos:
        yield scheme.instantiate(dict(zip(names, combo)))


@lru_cache(maxsize=None)
def _of_size(n: int, names: Tuple[str, ...]) -> Tuple[Formula, ...]:
    if n < 1:
        return ()
    if n == 1:
        return (BOT,) + tuple(Var(v) for v in names)
    found: List[Formula] = []
    for sub in _of_size(n - 1, names):
        found.append(Neg(sub))
        found.append(Box(sub))
    for k in range(1, n - 1):
        for left in _of_size(k, names):
            for right in _of_size(n - 1 - k, names):
                found.extend((And(left, right), Or(left, right), Imp(left, right),
                              Rhd(left, right)))
    return tuple(found)


def formulas_of_size(n: int, names: Sequence[str] = ()) -> Tuple[Formula, ...]:
    """Every formula with exactly n nodes over the given variables."""
    return _of_size(n, tuple(names))


def formulas_up_to(n: int, names: Sequence[str] = ()) -> Iterator[Formula]:
    for k in range(1, n + 1):
        yield from formulas_of_size(k, names)


_UNARY = (Neg, Box)
_BINARY = (And, Or, Imp, Rhd)


def random_formula(rng: random.Random, depth: int, names: Sequence[str]) -> Formula:
    if depth <= 0 or rng.random() < 0.25:
        atoms = [BOT] + [Var(v) for v in names]
        return rng.choice(atoms)
    if rng.random() < 0.3:
        return rng.choice(_UNARY)(random_formula(rng, depth - 1, names))
    op = rng.choice(_BINARY)
    return op(random_formula(rng, depth - 1, names), random_formula(rng, depth - 1, names))


def random_left_modalized(rng: random.Random, depth: int, p: str = "p",
                          extra: Sequence[str] = ("q", "r")) -> Formula:
    """A random formula in which p occurs only inside boxes and left arguments of |>."""

    def build(level: int, allowed: bool, banned: bool) -> Formula:
        if level <= 0 or rng.random() < 0.2:
            atoms = [BOT] + [Var(v) for v in extra]
            if allowed and not banned:
                atoms += [Var(p)] * 2
            return rng.choice(atoms)
        roll = rng.random()
        if roll < 0.15:
            return Neg(build(level - 1, allowed, banned))
        if roll < 0.3:
            return Box(build(level - 1, True, banned))
        if roll < 0.6:
            return Rhd(build(level - 1, True, banned), build(level - 1, False, True))
        op = rng.choice((And, Or, Imp))
        return op(build(level - 1, allowed, banned), build(level - 1, allowed, banned))

    return build(depth, False, False)


def substitution_lemma_instances(rng: random.Random, count: int, depth: int = 2,
                                 names: Sequence[str] = ("q", "r")) -> List[Formula]:
    """[](A <-> B) -> (C(A) <-> C(B)) with p left-modalized in C(p)."""
    found = []
    for _ in range(count):
        a = random_formula(rng, depth, names)
        b = random_formula(rng, depth, names)
        c = random_left_modalized(rng, depth, "p", names)
        found.append(Imp(Box(iff(a, b)), iff(substitute(c, {"p": a}), substitute(c, {"p": b}))))
    return found


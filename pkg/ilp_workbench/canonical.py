#!/usr/bin/env python3
"""
Countermodels for non-theorems of IL-(P) by the canonical construction.

An adequate set is saturated around ~A, maximal consistent subsets are found
with the decision procedure, and the IL- model over pairs (set, |>-argument)
is built and re-checked (P-condition, truth lemma, refutation of A). The model
is then unfolded along R-paths into a simplified model without S-chains and,
for stage "level", copied into levels so that S becomes transitive.

By default only the subfamily generated from the set containing ~A is built:
every set that the truth lemma asks a witness for is added until nothing is
missing. That family starts without the []-implications over the
|>-projection and adds one only when a |>-witness cannot be found without
it. family="full" enumerates all maximal consistent sets over the full
adequate set instead.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import (Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Set, Tuple,
                    Union)

from .calculus import Sequent, System
from .config import DEFAULT_CONFIG
from .errors import BudgetExceeded, PreconditionError, VerificationError
from .search import Prover, decide
from .semantics import (SimplifiedModel, VeltmanModel, World, check_dagger, check_P_condition,
                        evaluate, is_conversely_well_founded, is_transitive, subformula_list,
                        truth_sets)
from .syntax import (BOT, And, Bot, Box, Formula, Imp, Neg, Or, Rhd, Var, big_or, degree,
                     expand_box, iter_subformulas, size, tilde, variables)

logger = logging.getLogger(__name__)

MaxConsSet = FrozenSet[Formula]

STAGES = ("canonical", "simplified", "level")
FAMILIES = ("generated", "full")


def _order(f: Formula):
    return (size(f), f.text)


# ---------------------------------------------------------------- adequate sets

def _projection(formulas: Iterable[Formula]) -> Tuple[Formula, ...]:
    found = set()
    for f in formulas:
        if isinstance(f, Rhd):
            found.update((f.left, f.right))
    return tuple(sorted(found, key=_order))


def canonical_disjunctions(items: Sequence[Formula]) -> Iterable[Formula]:
    """Right-nested disjunctions of the nonempty subsets of items, in items order."""
    for r in range(1, len(items) + 1):
        for combo in itertools.combinations(items, r):
            yield big_or(combo)


@dataclass(frozen=True)
class AdequateSet:
    formulas: FrozenSet[Formula]

    def __contains__(self, f: Formula) -> bool:
        return f in self.formulas

    def __len__(self) -> int:
        return len(self.formulas)

    def __iter__(self):
        return iter(self.ordered)

    @cached_property
    def ordered(self) -> Tuple[Formula, ...]:
        return tuple(sorted(self.formulas, key=_order))

    @cached_property
    def rhd_projection(self) -> Tuple[Formula, ...]:
        """Formulas occurring as an argument of some |>-formula of the set."""
        return _projection(self.formulas)

    @cached_property
    def primes(self) -> Tuple[Formula, ...]:
        """Variables, boxes and |>-formulas; they fix every other member's truth."""
        return tuple(f for f in self.ordered if isinstance(f, (Var, Box, Rhd)))


def adequate_closure(formulas: Iterable[Formula],
                     budget: int = DEFAULT_CONFIG.model_budget,
                     disjunctions: bool = True) -> AdequateSet:
    """
    A finite adequate set containing formulas.

    Box is kept primitive. Disjunctions in the []-implications are the
    canonical ones over the |>-projection, which stays fixed after the first
    round, so saturation stops. With disjunctions=False the []-implications
    are left out; the generated family adds the ones it needs.

    Raises:
        BudgetExceeded: the number of []-implications would exceed budget
    """
    phi: Set[Formula] = set()

    def add(f: Formula):
        stack = [f]
        while stack:
            g = stack.pop()
            if g in phi:
                continue
            phi.add(g)
            stack.extend(g.children())
            stack.append(tilde(g))

    for f in formulas:
        add(f)
    add(Rhd(BOT, BOT))
    while True:
        before = len(phi)
        projection = _projection(phi)
        if disjunctions:
            bound = len(projection) * (2 ** len(projection) - 1)
        else:
            bound = len(projection) ** 2
        if bound > budget:
            raise BudgetExceeded("adequate set", budget)
        for b, c in itertools.product(projection, repeat=2):
            add(Rhd(b, c))
        for g in [g for g in phi if isinstance(g, Rhd)]:
            add(Box(g))
        for b in projection:
            add(Box(tilde(b)))
            if disjunctions:
                for disjunction in canonical_disjunctions(projection):
                    add(Box(Imp(b, disjunction)))
        if len(phi) == before:
            break
    result = AdequateSet(frozenset(phi))
    logger.info("adequate set: %d formulas, %d in the |>-projection, %d primes",
                len(result), len(result.rhd_projection), len(result.primes))
    return result


def adequacy_violations(phi: AdequateSet) -> List[str]:
    """Closure conditions that phi fails; empty for an adequate set."""
    found = []
    projection = phi.rhd_projection
    for f in phi.formulas:
        if any(g not in phi for g in f.children()):
            found.append(f"subformula of {f} missing")
        if tilde(f) not in phi:
            found.append(f"~{f} missing")
        if isinstance(f, Rhd) and Box(f) not in phi:
            found.append(f"[]({f}) missing")
    if BOT not in projection:
        found.append("false is not a |>-argument")
    for b, c in itertools.product(projection, repeat=2):
        if Rhd(b, c) not in phi:
            found.append(f"{Rhd(b, c)} missing")
    for b in projection:
        if Box(tilde(b)) not in phi:
            found.append(f"[]~{b} missing")
        for disjunction in canonical_disjunctions(projection):
            if Box(Imp(b, disjunction)) not in phi:
                found.append(f"{Box(Imp(b, disjunction))} missing")
    return found


# ---------------------------------------------------------------- maximal consistent sets

class _Consistency:
    """
    Consistency of finite sets through one shared prover.

    total bounds the sequents explored by all calls together; the prover's
    memo is cleared whenever it reaches memo_limit.
    """

    def __init__(self, budget: int, total: Optional[int] = None,
                 memo_limit: int = DEFAULT_CONFIG.memo_limit):
        self.prover = Prover(System.ILMPS, budget, memo_limit)
        self.total = total
        self.calls = 0
        self.explored = 0

    def __call__(self, formulas: Iterable[Formula]) -> bool:
        self.calls += 1
        goal = Sequent.of((expand_box(f) for f in formulas), ())
        try:
            verdict = self.prover.prove(goal)
        finally:
            self.explored += self.prover.explored
        if self.total is not None and self.explored > self.total:
            raise BudgetExceeded("consistency", self.total)
        return not verdict


def _members(phi: AdequateSet, true_primes: FrozenSet[Formula]) -> MaxConsSet:
    value: Dict[Formula, bool] = {}

    def holds(f: Formula) -> bool:
        if f not in value:
            if isinstance(f, Bot):
                value[f] = False
            elif isinstance(f, (Var, Box, Rhd)):
                value[f] = f in true_primes
            elif isinstance(f, Neg):
                value[f] = not holds(f.sub)
            elif isinstance(f, And):
                value[f] = holds(f.left) and holds(f.right)
            elif isinstance(f, Or):
                value[f] = holds(f.left) or holds(f.right)
            else:
                value[f] = not holds(f.left) or holds(f.right)
        return value[f]

    return frozenset(f for f in phi.ordered if holds(f))


def max_cons_sets(phi: AdequateSet, budget: int = DEFAULT_CONFIG.family_budget,
                  search_budget: int = DEFAULT_CONFIG.budget) -> List[MaxConsSet]:
    """
    Every phi-maximal consistent set, by a decision tree over the primes.

    Raises:
        BudgetExceeded: more than budget sets
    """
    consistent = _Consistency(search_budget)
    primes = phi.primes
    found: List[MaxConsSet] = []

    def walk(index: int, literals: List[Formula]):
        if index == len(primes):
            found.append(_members(phi, frozenset(f for f in literals if not isinstance(f, Neg))))
            if len(found) > budget:
                raise BudgetExceeded("family", budget)
            return
        for literal in (primes[index], Neg(primes[index])):
            if consistent(literals + [literal]):
                walk(index + 1, literals + [literal])

    walk(0, [])
    logger.info("%d maximal consistent sets, %d consistency checks", len(found), consistent.calls)
    return found


def prec(gamma: MaxConsSet, delta: MaxConsSet) -> bool:
    """B and []B in delta for every []B in gamma, and some []C in delta but not in gamma."""
    for f in gamma:
        if isinstance(f, Box) and (f.sub not in delta or f not in delta):
            return False
    return any(isinstance(f, Box) and f not in gamma for f in delta)


def prec_C(gamma: MaxConsSet, delta: MaxConsSet, c: Formula) -> bool:
    """prec, and ~B in delta for every B |> c in gamma."""
    if not prec(gamma, delta):
        return False
    return all(tilde(f.left) in delta for f in gamma if isinstance(f, Rhd) and f.right == c)


class CanonicalWorld(NamedTuple):
    gamma: MaxConsSet
    rhd: Formula


# ---------------------------------------------------------------- canonical model

class _Refine(Exception):
    """Raised by the generated family when a []-implication has to join phi."""

    def __init__(self, formula: Formula):
        super().__init__(str(formula))
        self.formula = formula


class CanonicalBuilder:
    """
    Canonical IL- model refuting one or more non-theorems.

    With several targets one model refutes each of them, every target at
    its own world of the form (gamma, false).

    Args:
        target: Formula that is not a theorem of IL-(P), or a sequence of them
        family: "generated" or "full"
        budget: Search budget of each consistency check
        family_budget: Maximum number of maximal consistent sets
        model_budget: Maximum number of worlds and S-pairs
        build_budget: Sequents explored by all consistency checks together
    """

    def __init__(self, target: Union[Formula, Sequence[Formula]], family: str = "generated",
                 budget: int = DEFAULT_CONFIG.budget,
                 family_budget: int = DEFAULT_CONFIG.family_budget,
                 model_budget: int = DEFAULT_CONFIG.model_budget,
                 build_budget: int = DEFAULT_CONFIG.build_budget):
        if family not in FAMILIES:
            raise PreconditionError(f"unknown family {family!r}")
        self.targets: List[Formula] = [target] if isinstance(target, Formula) else list(target)
        if not self.targets:
            raise PreconditionError("no target formula")
        self.target = self.targets[0]
        self.family_kind = family
        self.budget = budget
        self.family_budget = family_budget
        self.model_budget = model_budget
        self.phi: Optional[AdequateSet] = None
        self.family: List[MaxConsSet] = []
        self.roots: List[MaxConsSet] = []
        self.refinements: List[Formula] = []
        self._consistent = _Consistency(budget, build_budget)
        self._prec: Dict[Tuple[MaxConsSet, MaxConsSet], bool] = {}
        self._witnessed: Set[MaxConsSet] = set()

    @property
    def gamma0(self) -> Optional[MaxConsSet]:
        return self.roots[0] if self.roots else None

    @property
    def worlds(self) -> Dict[Formula, CanonicalWorld]:
        """The refuting world of each target."""
        return {t: CanonicalWorld(g, BOT) for t, g in zip(self.targets, self.roots)}

    # -------------------------------------------------------------- relations

    def prec(self, gamma: MaxConsSet, delta: MaxConsSet) -> bool:
        key = (gamma, delta)
        if key not in self._prec:
            self._prec[key] = prec(gamma, delta)
        return self._prec[key]

    def prec_C(self, gamma: MaxConsSet, delta: MaxConsSet, c: Formula) -> bool:
        return self.prec(gamma, delta) and prec_C(gamma, delta, c)

    # -------------------------------------------------------------- family

    def _extend(self, required: Iterable[Formula]) -> Optional[MaxConsSet]:
        """A maximal consistent set containing required, preferring primes over their negations."""
        base = sorted(set(required), key=_order)
        if not self._consistent(base):
            return None
        literals: List[Formula] = []
        for prime in self.phi.primes:
            if self._consistent(base + literals + [prime]):
                literals.append(prime)
            else:
                literals.append(Neg(prime))
        gamma = _members(self.phi, frozenset(f for f in literals if not isinstance(f, Neg)))
        if not set(base) <= gamma:
            raise VerificationError("maximal extension lost a required formula")
        return gamma

    def _add(self, gamma: MaxConsSet):
        if gamma not in self.family:
            self.family.append(gamma)
            if len(self.family) > self.family_budget:
                raise BudgetExceeded("family", self.family_budget)

    def _witness(self, required: FrozenSet[Formula]) -> Optional[MaxConsSet]:
        for gamma in self.family:
            if required <= gamma:
                return gamma
        gamma = self._extend(required)
        if gamma is not None:
            self._add(gamma)
        return gamma

    def _successor(self, gamma: MaxConsSet, extra: Iterable[Formula],
                   preferred: Formula) -> Optional[MaxConsSet]:
        """A witness delta with gamma prec delta and extra in delta, or None."""
        carried = set(extra)
        for f in gamma:
            if isinstance(f, Box):
                carried.update((f, f.sub))
        new_boxes = [preferred] + [f for f in self.phi.primes
                                   if isinstance(f, Box) and f not in gamma and f != preferred]
        for box in new_boxes:
            if box in gamma:
                continue
            delta = self._witness(frozenset(carried | {box}))
            if delta is not None:
                return delta
        return None

    def _local_witnesses(self, gamma: MaxConsSet):
        for f in self.phi.primes:
            if f in gamma:
                continue
            if isinstance(f, Box):
                body = tilde(f.sub)
                if not any(self.prec(gamma, d) and body in d for d in self.family):
                    if self._successor(gamma, [body], f) is None:
                        raise VerificationError(f"no successor witness for {body}")
            elif isinstance(f, Rhd):
                c, d = f.left, f.right
                if not any(c in delta and self.prec_C(gamma, delta, d) for delta in self.family):
                    lefts = sorted({g.left for g in gamma if isinstance(g, Rhd) and g.right == d},
                                   key=_order)
                    blocked = [tilde(b) for b in lefts]
                    if self._successor(gamma, [c] + blocked, Box(tilde(c))) is None:
                        self._missing_implication(c, lefts)

    def _missing_implication(self, c: Formula, lefts: Sequence[Formula]):
        """Ask for [](c -> B1 | ... | Bk) in phi, or fail when it is there already."""
        if lefts:
            wanted = Box(Imp(c, big_or(lefts)))
            if self.family_kind == "generated" and wanted not in self.phi:
                raise _Refine(wanted)
        raise VerificationError(f"no successor witness for {c} against {len(lefts)} |>-formulas")

    def _target_witnesses(self, gamma: MaxConsSet):
        projection = self.phi.rhd_projection
        for f in self.phi.primes:
            if not isinstance(f, Rhd) or f not in gamma:
                continue
            for delta in list(self.family):
                if f.left not in delta or not self.prec(gamma, delta):
                    continue
                for e in projection:
                    if self.prec_C(gamma, delta, e):
                        if self._witness(frozenset((f.right, tilde(e)))) is None:
                            raise VerificationError(f"no witness for {f.right} and ~{e}")

    def _saturate(self):
        while True:
            before = len(self.family)
            for gamma in list(self.family):
                if gamma not in self._witnessed:
                    self._local_witnesses(gamma)
                    self._witnessed.add(gamma)
            for gamma in list(self.family):
                self._target_witnesses(gamma)
            if len(self.family) == before:
                return

    def _refine(self, wanted: Formula):
        """Add wanted to phi and extend every set of the family to the new primes."""
        old = self.phi
        self.phi = adequate_closure(list(old.formulas) + [wanted], self.model_budget,
                                    disjunctions=False)
        fresh = [f for f in self.phi.primes if f not in old]
        moved: Dict[MaxConsSet, MaxConsSet] = {}
        for gamma in self.family:
            literals = [f if f in gamma else Neg(f) for f in old.primes]
            for prime in fresh:
                literals.append(prime if self._consistent(literals + [prime]) else Neg(prime))
            moved[gamma] = _members(self.phi,
                                    frozenset(f for f in literals if not isinstance(f, Neg)))
        self.family = [moved[g] for g in self.family]
        self.roots = [moved[g] for g in self.roots]
        self._prec.clear()
        self._witnessed.clear()
        self.refinements.append(wanted)
        logger.info("added %s to the adequate set (%d primes)", wanted, len(self.phi.primes))

    # -------------------------------------------------------------- model

    def build(self) -> Tuple[VeltmanModel, CanonicalWorld]:
        """
        Build and re-check the canonical model; the world refutes the first target.

        Raises:
            PreconditionError: a target is a theorem
            BudgetExceeded: a family, model, consistency or search budget was hit
            VerificationError: a re-check failed
        """
        prover = Prover(System.ILMPS, self.budget)
        for target in self.targets:
            if decide(target, prover=prover):
                raise PreconditionError(f"{target} is a theorem of IL-(P)")
        negated = [tilde(t) for t in self.targets]
        full = self.family_kind == "full"
        self.phi = adequate_closure(negated, self.model_budget, disjunctions=full)
        if full:
            self.family = max_cons_sets(self.phi, self.family_budget, self.budget)
            self.roots = [next(g for g in self.family if n in g) for n in negated]
        else:
            for n in negated:
                gamma = self._witness(frozenset((n,)))
                if gamma is None:
                    raise VerificationError(f"{n} is inconsistent")
                self.roots.append(gamma)
            while True:
                try:
                    self._saturate()
                    break
                except _Refine as e:
                    self._refine(e.formula)
        logger.info("%s family: %d maximal consistent sets, %d consistency checks, "
                    "%d sequents explored", self.family_kind, len(self.family),
                    self._consistent.calls, self._consistent.explored)
        model = self._model()
        if not check_P_condition(model):
            raise VerificationError("canonical model violates the P-condition")
        failure = check_truth_lemma(model, self.phi)
        if failure is not None:
            raise VerificationError(f"truth lemma fails for {failure[1]}")
        for target, world in self.worlds.items():
            if evaluate(model, world, target):
                raise VerificationError(f"canonical model does not refute {target}")
        return model, CanonicalWorld(self.gamma0, BOT)

    def _model(self) -> VeltmanModel:
        projection = self.phi.rhd_projection
        worlds = [CanonicalWorld(g, b) for g in self.family for b in projection]
        if len(worlds) > self.model_budget:
            raise BudgetExceeded("model", self.model_budget)
        above = {w: [x for x in worlds if self.prec(w.gamma, x.gamma)] for w in worlds}
        relation = [(w, x) for w in worlds for x in above[w]]
        family = {}
        count = 0
        for w in worlds:
            pairs = []
            for x in above[w]:
                strict = self.prec_C(w.gamma, x.gamma, x.rhd)
                bound = tilde(x.rhd)
                pairs.extend((x, y) for y in worlds if not strict or bound in y.gamma)
            count += len(pairs)
            if count > self.model_budget:
                raise BudgetExceeded("model", self.model_budget)
            family[w] = pairs
        names = sorted(set().union(*(variables(t) for t in self.targets)))
        valuation = {v: [w for w in worlds if Var(v) in w.gamma] for v in names}
        logger.info("canonical model: %d worlds, %d R-pairs, %d S-pairs",
                    len(worlds), len(relation), count)
        return VeltmanModel(worlds, relation, family, valuation)


def build_canonical(target: Formula, family: str = "generated",
                    budget: int = DEFAULT_CONFIG.budget,
                    family_budget: int = DEFAULT_CONFIG.family_budget,
                    model_budget: int = DEFAULT_CONFIG.model_budget,
                    build_budget: int = DEFAULT_CONFIG.build_budget
                    ) -> Tuple[VeltmanModel, CanonicalWorld]:
    """Canonical IL- model validating P and a world refuting target."""
    return CanonicalBuilder(target, family, budget, family_budget, model_budget,
                            build_budget).build()


def generated_family(phi: AdequateSet, gamma0: MaxConsSet,
                     budget: int = DEFAULT_CONFIG.budget,
                     family_budget: int = DEFAULT_CONFIG.family_budget) -> List[MaxConsSet]:
    """The witness-closed subfamily of a fixed adequate set grown from gamma0."""
    builder = CanonicalBuilder(BOT, "full", budget, family_budget)
    builder.phi = phi
    builder._add(gamma0)
    builder._saturate()
    return builder.family


def projection_groups(targets: Iterable[Formula], limit: int = 32) -> List[List[Formula]]:
    """
    Targets grouped by the |>-projection of their adequate sets, at most limit per group.

    One canonical model per group refutes all of its members.
    """
    groups: Dict[Tuple[Formula, ...], List[Formula]] = {}
    for t in targets:
        key = tuple(sorted(set(_projection(iter_subformulas(t))) | {BOT}, key=_order))
        groups.setdefault(key, []).append(t)
    found = []
    for key in sorted(groups, key=lambda k: (len(k), [g.text for g in k])):
        members = groups[key]
        found.extend(members[i:i + limit] for i in range(0, len(members), limit))
    return found


# ---------------------------------------------------------------- checks

def check_truth_lemma(model: VeltmanModel,
                      phi: AdequateSet) -> Optional[Tuple[CanonicalWorld, Formula]]:
    """A world and a member of phi where membership and forcing differ, or None."""
    extensions = truth_sets(model, phi.ordered)
    for f, forced in extensions.items():
        for w in model.worlds:
            if (w in forced) != (f in w.gamma):
                return w, f
    return None


def check_witness_facts(phi: AdequateSet, family: Sequence[MaxConsSet]) -> List[str]:
    """
    Failures of the two existence facts on family.

    For C |> D not in gamma some delta has C and gamma prec_D delta; for
    C |> D in gamma, gamma prec_E delta and C in delta some theta has D and ~E.
    """
    found = []
    projection = phi.rhd_projection
    for gamma in family:
        for f in phi.primes:
            if not isinstance(f, Rhd):
                continue
            if f not in gamma:
                if not any(f.left in d and prec_C(gamma, d, f.right) for d in family):
                    found.append(f"no successor for {f} outside a set")
                continue
            for delta in family:
                if f.left not in delta or not prec(gamma, delta):
                    continue
                for e in projection:
                    if prec_C(gamma, delta, e) and not any(
                            f.right in t and tilde(e) in t for t in family):
                        found.append(f"no set with {f.right} and ~{e}")
    return found


def check_prec_transfer(phi: AdequateSet, family: Sequence[MaxConsSet]) -> List[str]:
    """Failures of: gamma prec delta prec_C theta implies gamma prec_C theta."""
    found = []
    for gamma, delta, theta in itertools.product(family, repeat=3):
        if not prec(gamma, delta):
            continue
        for c in phi.rhd_projection:
            if prec_C(delta, theta, c) and not prec_C(gamma, theta, c):
                found.append(f"transfer fails for {c}")
    return found


# ---------------------------------------------------------------- unfolding

Path = Tuple[World, ...]


def simplify(model: VeltmanModel, w0: World,
             budget: int = DEFAULT_CONFIG.model_budget,
             roots: Optional[Iterable[World]] = None) -> Tuple[SimplifiedModel, Path]:
    """
    Unfold model along R-chains into a simplified model with no S-chains.

    The worlds are the nonempty R-chains (x_0, ..., x_n): R' extends a
    chain, and a chain ending in x_{n-1}, x_n is S'-related to (y,) when
    x_n S_{x_{n-1}} y. By default every chain is built; with roots only
    the chains reachable from the given one-world chains, which form a
    generated submodel.
    """
    if not check_P_condition(model):
        raise PreconditionError("the P-condition fails on the model")
    model.check_world(w0)
    position = {w: i for i, w in enumerate(model.worlds)}
    starts = model.worlds if roots is None else sorted(set(roots) | {w0}, key=position.get)
    paths: List[Path] = []
    seen: Set[Path] = set()
    pending: List[Path] = [(w,) for w in reversed(list(starts))]
    jumps: List[Tuple[Path, Path]] = []
    while pending:
        path = pending.pop()
        if path in seen:
            continue
        seen.add(path)
        paths.append(path)
        if len(paths) > budget:
            raise BudgetExceeded("model", budget)
        for x in sorted(model.r_successors.get(path[-1], ()), key=position.get):
            pending.append(path + (x,))
        if len(path) > 1:
            local = model.s_successors.get(path[-2], {})
            for y in sorted(local.get(path[-1], ()), key=position.get):
                jumps.append((path, (y,)))
                pending.append((y,))
    relation = [(path[:i], path) for path in paths for i in range(1, len(path))]
    valuation = {v: [p for p in paths if p[-1] in ws] for v, ws in model.valuation.items()}
    logger.info("unfolded %d worlds into %d paths", len(model.worlds), len(paths))
    return SimplifiedModel(paths, relation, jumps, valuation), (w0,)


def check_unfolding_agreement(model: VeltmanModel, unfolded: SimplifiedModel,
                              formulas: Iterable[Formula]) -> Optional[Formula]:
    """First formula forced differently at a path and at its last world, or None."""
    formulas = list(formulas)
    old = truth_sets(model, formulas)
    new = truth_sets(unfolded, formulas)
    for f in formulas:
        if any((path in new[f]) != (path[-1] in old[f]) for path in unfolded.worlds):
            return f
    return None


def level_product(model: SimplifiedModel, target: Formula) -> SimplifiedModel:
    """Copies (x, n), 0 <= n <= degree(target); R keeps the level and S lowers it by one."""
    if not check_dagger(model):
        raise PreconditionError("the model has an S-chain of length two")
    levels = range(degree(target) + 1)
    worlds = [(x, n) for n in levels for x in model.worlds]
    relation = [((x, n), (y, n)) for n in levels for x, y in model.R]
    jumps = [((x, n + 1), (y, n)) for n in levels if n + 1 in levels for x, y in model.S]
    valuation = {v: [(x, n) for n in levels for x in ws] for v, ws in model.valuation.items()}
    return SimplifiedModel(worlds, relation, jumps, valuation)


def check_level_frame(product: SimplifiedModel) -> bool:
    """S transitive and R together with S conversely well-founded."""
    return is_transitive(product.S) and is_conversely_well_founded(product.worlds, product.R,
                                                                   product.S)


def check_level_agreement(model: SimplifiedModel, product: SimplifiedModel,
                          formulas: Iterable[Formula]) -> Optional[Formula]:
    """First formula B with (x, n) and x disagreeing for some n >= degree(B), or None."""
    formulas = list(formulas)
    old = truth_sets(model, formulas)
    new = truth_sets(product, formulas)
    for f in formulas:
        d = degree(f)
        if any(n >= d and ((x, n) in new[f]) != (x in old[f]) for x, n in product.worlds):
            return f
    return None


# ---------------------------------------------------------------- pipeline

@dataclass(frozen=True)
class Countermodel:
    model: Union[VeltmanModel, SimplifiedModel]
    world: World
    stage: str
    family_size: int
    adequate_size: int


def countermodel(target: Formula, stage: str = "simplified", family: str = "generated",
                 budget: int = DEFAULT_CONFIG.budget,
                 family_budget: int = DEFAULT_CONFIG.family_budget,
                 model_budget: int = DEFAULT_CONFIG.model_budget,
                 build_budget: int = DEFAULT_CONFIG.build_budget) -> Countermodel:
    """
    Certified countermodel of a non-theorem.

    Every stage is re-checked: the P-condition and truth lemma on the
    canonical model, no S-chains and agreement on the unfolding, the level
    frame and its agreement, and finally that the returned world refutes
    target. The unfolding keeps the chains reachable from the refuting
    world.
    """
    if stage not in STAGES:
        raise PreconditionError(f"unknown stage {stage!r}")
    builder = CanonicalBuilder(target, family, budget, family_budget, model_budget,
                               build_budget)
    model, world = builder.build()
    subformulas = subformula_list(target)
    if stage != "canonical":
        simple, path = simplify(model, world, model_budget, roots=[world])
        if not check_dagger(simple):
            raise VerificationError("unfolding has an S-chain of length two")
        bad = check_unfolding_agreement(model, simple, subformulas)
        if bad is not None:
            raise VerificationError(f"unfolding disagrees on {bad}")
        model, world = simple, path
        if stage == "level":
            product = level_product(simple, target)
            if not check_level_frame(product):
                raise VerificationError("level product frame conditions fail")
            bad = check_level_agreement(simple, product, subformulas)
            if bad is not None:
                raise VerificationError(f"level product disagrees on {bad}")
            model, world = product, (path, degree(target))
    if evaluate(model, world, target):
        raise VerificationError(f"{stage} model does not refute {target}")
    logger.info("%s countermodel with %d worlds", stage, len(model.worlds))
    return Countermodel(model, world, stage, len(builder.family), len(builder.phi))

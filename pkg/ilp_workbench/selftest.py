#!/usr/bin/env python3
"""
The acceptance corpus: eight suites that exercise every decision procedure
and construction of the workbench against each other.

Each suite returns rows of (suite, item, status, detail, seconds). An item
over budget is reported as "budget" and never as a verdict.
"""

import concurrent.futures
import itertools
import json
import logging
import random
import time
from collections import Counter
from concurrent.futures.process import BrokenProcessPool
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import pandas as pd

from .calculus import Sequent, System, check, compose_cut, is_cut_free
from .canonical import (CanonicalBuilder, build_canonical, check_level_agreement,
                        check_level_frame, check_unfolding_agreement, countermodel,
                        level_product, projection_groups, simplify)
from .config import DEFAULT_CONFIG, Config
from .corpus import (REFUTABLE, SCHEMES, THEOREM, Scheme, formulas_of_size, formulas_up_to,
                     instances, random_formula, random_left_modalized, substitution_lemma_instances)
from .cutelim import CutEliminator
from .embedding import (check_correspondence, check_fpp_failure, check_translation_soundness,
                        random_bimodal_formula, transfer)
from .errors import BudgetExceeded, ConfigError, IlpError, VerificationError
from .fixedpoint import check_ufp_failure, fixpoint, refute_fpp_witness
from .interpolation import interpolate
from .report import results_frame
from .search import (ADMISSIBLE_RULES, NotProvable, Prover, admissibility_witness, decide,
                     formula_goal, hunt_cut_only, prove_fixpoint_oracle)
from .semantics import (check_dagger, countermodel_search, evaluate, frame_correspondence_P,
                        frame_validates, p_instances, random_simplified_frame,
                        subformula_list, veltman_frames)
from .serialization import (derivation_from_dict, derivation_to_dict, model_from_dict,
                            model_to_dict)
from .syntax import (BOT, TOP, And, Box, Formula, Imp, Neg, Or, Rhd, Var, expand_box,
                     iter_subformulas)

logger = logging.getLogger(__name__)

SCHEME_SAMPLE = 200
CUT_TARGET = 50
PRINCIPAL_TARGET = 5
INTERPOLATION_TARGET = 100
FIXPOINT_TARGET = 100
ORACLE_GROUP = 32
FPP_MAX_SIZE = 6
RANDOM_FRAMES = 200
BIMODAL_SAMPLES = 50


def _expect(condition: bool, message: str) -> None:
    if not condition:
        raise VerificationError(message)


class _Suite:
    """Collects timed rows; failures and budget overruns never escape an item."""

    def __init__(self, name: str):
        self.name = name
        self.rows: List[Dict] = []

    def run(self, item: str, check_item: Callable[[], str]) -> str:
        start = time.perf_counter()
        try:
            detail = check_item() or ""
            status = "pass"
        except BudgetExceeded as e:
            status, detail = "budget", str(e)
        except (IlpError, RecursionError) as e:
            status, detail = "fail", f"{type(e).__name__}: {e}"
        seconds = time.perf_counter() - start
        if status != "pass":
            logger.warning("%s / %s: %s (%s)", self.name, item, status, detail)
        self.rows.append({"suite": self.name, "item": item, "status": status,
                          "detail": detail, "seconds": round(seconds, 4)})
        return status


class _Tally:
    """Outcome counts for an item that groups many formulas."""

    def __init__(self):
        self.counts = Counter()
        self.failures: List[str] = []

    def record(self, check_one: Callable[[], bool], label: str) -> None:
        try:
            ok = check_one()
        except BudgetExceeded:
            self.counts["budget"] += 1
            return
        self.counts["pass" if ok else "fail"] += 1
        if not ok:
            self.failures.append(label)

    def close(self) -> str:
        """Raise on failures, BudgetExceeded when only the budget stopped items."""
        detail = ", ".join(f"{self.counts[k]} {k}" for k in ("pass", "fail", "budget"))
        if self.failures:
            raise VerificationError(f"{detail}; first failure {self.failures[0]}")
        if self.counts["budget"]:
            raise BudgetExceeded(f"items ({detail})", self.counts["budget"])
        return detail


def _atoms(config: Config) -> List[Formula]:
    return [BOT] + [Var(v) for v in config.vars]


class _SharedProver:
    """One ILmPs prover reused across items; replaced after a budget overrun."""

    def __init__(self, config: Config):
        self.budget = config.budget
        self.prover = Prover(System.ILMPS, self.budget)

    def decide(self, f: Formula):
        try:
            return decide(f, prover=self.prover)
        except BudgetExceeded:
            self.prover = Prover(System.ILMPS, self.budget)
            raise


# ---------------------------------------------------------------- 1. axioms

def _scheme_instances(scheme: Scheme, pool: Sequence[Formula],
                      rng: random.Random) -> List[Formula]:
    """Every instance when there are few, otherwise a seeded sample."""
    arity = len(scheme.metavariables)
    if len(pool) ** arity <= SCHEME_SAMPLE:
        return list(instances(scheme, pool))
    names = scheme.metavariables
    return [scheme.instantiate({m: rng.choice(pool) for m in names})
            for _ in range(SCHEME_SAMPLE)]


def certify_refutation(f: Formula, config: Config) -> str:
    """Evaluate-verified countermodel of f; small frames first, then the canonical pipeline."""
    found = countermodel_search(f, config.max_worlds, config.valuation_budget)
    if found is not None:
        model, world = found
        _expect(not evaluate(model, world, f), f"countermodel does not refute {f}")
        return f"{len(model.worlds)}-world countermodel by search"
    result = countermodel(f, "simplified", "generated", config.budget, config.family_budget,
                          config.model_budget, config.build_budget)
    _expect(not evaluate(result.model, result.world, f), f"pipeline does not refute {f}")
    return f"{len(result.model.worlds)}-world countermodel from the canonical pipeline"


def suite_axioms(config: Config) -> List[Dict]:
    suite = _Suite("axioms")
    rng = random.Random(config.seed)
    pool = list(formulas_up_to(config.max_size, config.vars))
    shared = _SharedProver(config)

    def provable(f: Formula) -> bool:
        return bool(shared.decide(f))

    for scheme in SCHEMES:
        if scheme.expected == THEOREM:
            def theorem_scheme(scheme=scheme):
                tally = _Tally()
                for f in _scheme_instances(scheme, pool, rng):
                    tally.record(lambda f=f: provable(f), str(f))
                return tally.close()
            suite.run(scheme.name, theorem_scheme)
        else:
            def refutable_scheme(scheme=scheme):
                f = scheme.generic()
                verdict = decide(f, System.ILMPS, config.budget)
                _expect(isinstance(verdict, NotProvable), f"{f} was proved")
                return certify_refutation(f, config)
            suite.run(scheme.name, refutable_scheme)

    def substitution_lemma():
        names = tuple(v for v in config.vars if v != "p")
        tally = _Tally()
        for f in substitution_lemma_instances(rng, 20, 2, names):
            tally.record(lambda f=f: provable(f), str(f))
        return tally.close()

    suite.run("substitution lemma", substitution_lemma)

    def admissibility():
        atoms = _atoms(config)
        tally = _Tally()
        for a, b in itertools.product(atoms + [Neg(x) for x in atoms], repeat=2):
            for rule in ADMISSIBLE_RULES:
                if rule != "J3" and not decide(Imp(a, b), System.ILMS, config.budget):
                    continue
                tally.record(lambda rule=rule, a=a, b=b: bool(
                    admissibility_witness(rule, a, b, atoms[-1], config.budget)),
                    f"{rule} {a}, {b}")
        return tally.close()

    suite.run("admissibility", admissibility)
    return suite.rows


# ---------------------------------------------------------------- 2. cut elimination

def _cut_pairs(config: Config) -> List[Tuple[Formula, Formula, bool]]:
    """(A, B, persistence) with A and A -> B theorems; persistence marks |>-cuts."""
    atoms = _atoms(config)
    pairs: List[Tuple[Formula, Formula, bool]] = []
    for x in (BOT, And(atoms[-1], Neg(atoms[-1]))):
        for y in atoms:
            rhd = Rhd(x, y)
            for extra, wider in itertools.product(atoms[1:] or [TOP], atoms[1:] or [BOT]):
                pairs.append((rhd, Rhd(And(x, extra), Or(y, wider)), True))
            pairs.append((rhd, Box(rhd), False))
    for x in atoms[1:]:
        y = atoms[-1]
        context = And(Rhd(y, x), Rhd(x, y))
        narrow = Rhd(x, Or(y, BOT))
        a = Imp(context, narrow)
        pairs.append((a, Imp(context, Rhd(And(x, y), Or(Or(y, BOT), x))), True))
        pairs.append((a, Imp(context, Box(narrow)), True))
    theorems = [scheme.generic() for scheme in SCHEMES if scheme.expected == THEOREM]
    theorems += [Imp(a, a) for a in atoms] + [TOP]
    for a, other in itertools.product(theorems, atoms):
        pairs.append((a, Or(a, other), False))
        pairs.append((a, Imp(other, a), False))
    return [(expand_box(a), expand_box(b), persistence) for a, b, persistence in pairs]


def suite_cutelim(config: Config) -> List[Dict]:
    suite = _Suite("cutelim")
    principal = []
    for a, b, persistence in _cut_pairs(config):
        def cut_item(a=a, b=b, persistence=persistence):
            prover = Prover(System.ILMPS, config.budget)
            left = prover.prove(Sequent.of((), (a,)))
            right = prover.prove(Sequent.of((a,), (b,)))
            _expect(bool(left) and bool(right), f"search failed on the premises of a cut on {a}")
            composed = compose_cut(left.derivation, right.derivation, a)
            eliminator = CutEliminator()
            result = eliminator.eliminate(composed)
            _expect(is_cut_free(result), "cuts remain")
            _expect(bool(check(result)), "checker rejects the result")
            _expect(result.endsequent == composed.endsequent, "endsequent changed")
            kinds = Counter(r.kind for r in eliminator.reductions)
            if persistence and kinds["principal RhdP"]:
                principal.append(a)
            return ", ".join(f"{k} x{n}" for k, n in sorted(kinds.items()))
        suite.run(f"cut on {a} into {b}", cut_item)

    def principal_cuts():
        _expect(len(suite.rows) >= CUT_TARGET, f"only {len(suite.rows)} cuts built")
        _expect(len(principal) >= PRINCIPAL_TARGET,
                f"only {len(principal)} cuts reduced at a persistence rule")
        return f"{len(principal)} persistence principal cuts"

    suite.run("persistence principal cuts", principal_cuts)

    def ilms_cut_hunt():
        atoms = _atoms(config)
        goals = [Sequent.of((), (f,)) for f in formulas_up_to(min(config.max_size, 3), config.vars)
                 if any(isinstance(g, Rhd) for g in iter_subformulas(f))]
        cut_formulas = [Rhd(x, y) for x, y in itertools.product(atoms, repeat=2)]
        found = hunt_cut_only(goals, cut_formulas, config.budget)
        if found is None:
            return f"no witness among {len(goals)} goals"
        return f"witness {found.endsequent} (cut on {found.root.cut_formula})"

    suite.run("ILms cut-only hunt", ilms_cut_hunt)
    return suite.rows


# ---------------------------------------------------------------- 3. interpolation

def suite_interpolation(config: Config) -> List[Dict]:
    suite = _Suite("interpolation")
    rng = random.Random(config.seed)
    pool = list(formulas_up_to(min(config.max_size, 3), config.vars))
    pairs = list(itertools.product(pool, repeat=2))
    rng.shuffle(pairs)
    shared = _SharedProver(config)
    found = 0
    for a, b in pairs[:20 * INTERPOLATION_TARGET]:
        if found >= INTERPOLATION_TARGET:
            break
        try:
            if not shared.decide(Imp(a, b)):
                continue
        except BudgetExceeded:
            continue
        found += 1

        def interpolant_item(a=a, b=b):
            result = interpolate(a, b, System.ILMPS, config.budget, confirm=True)
            _expect(not isinstance(result, NotProvable), f"{a} -> {b} lost its proof")
            return str(result.formula)
        suite.run(f"{a} -> {b}", interpolant_item)
    return suite.rows


# ---------------------------------------------------------------- 4. fixed points

def suite_fixpoint(config: Config) -> List[Dict]:
    suite = _Suite("fixpoint")
    rng = random.Random(config.seed)
    extra = tuple(v for v in config.vars if v != "p")
    seen = set()
    for _ in range(20 * FIXPOINT_TARGET):
        if len(seen) >= FIXPOINT_TARGET:
            break
        a = random_left_modalized(rng, 3, "p", extra)
        if a in seen:
            continue
        seen.add(a)

        def fixpoint_item(a=a):
            return str(fixpoint(a, "p", config.budget).fixpoint)
        suite.run(str(a), fixpoint_item)

    def no_full_fixpoints():
        refutation = refute_fpp_witness(FPP_MAX_SIZE, config.budget)
        _expect(refutation.ok, f"{refutation.provable[:1]} solves F <-> (true |> ~F)")
        if refutation.over_budget:
            raise BudgetExceeded("search", config.budget)
        return f"{refutation.checked} constant formulas refuted"

    def no_unique_fixpoints():
        _expect(not check_ufp_failure(config.budget), "uniqueness instance was proved")
        return "uniqueness fails for true |> ~p"

    suite.run("F <-> (true |> ~F) unprovable", no_full_fixpoints)
    suite.run("fixed points not unique", no_unique_fixpoints)
    return suite.rows


# ---------------------------------------------------------------- 5. oracle

def suite_oracle(config: Config) -> List[Dict]:
    """Search and oracle agree; the non-theorems are refuted by shared canonical models."""
    suite = _Suite("oracle")
    names = config.vars[:1]
    shared = _SharedProver(config)
    refuted: List[Formula] = []

    def agree(f: Formula) -> bool:
        verdict = shared.decide(f)
        oracle = prove_fixpoint_oracle(formula_goal(f), config.closure_budget)
        if not verdict:
            refuted.append(f)
        return bool(verdict) == bool(oracle)

    for n in range(1, config.max_size + 3):
        def size_item(n=n):
            tally = _Tally()
            for f in formulas_of_size(n, names):
                tally.record(lambda f=f: agree(f), str(f))
            return tally.close()
        suite.run(f"size {n}", size_item)

    def refute_group(group: Sequence[Formula]) -> bool:
        builder = CanonicalBuilder(group, "generated", config.budget, config.family_budget,
                                   config.model_budget, config.build_budget)
        try:
            builder.build()
        except VerificationError as e:
            logger.warning("canonical model for %d formulas from %s: %s", len(group), group[0], e)
            return False
        return True

    def countermodels():
        groups = projection_groups(refuted, ORACLE_GROUP)
        tally = _Tally()
        for group in groups:
            tally.record(lambda group=group: refute_group(group), f"group of {group[0]}")
        return f"{len(refuted)} non-theorems, {len(groups)} canonical models: {tally.close()}"

    suite.run("canonical countermodels", countermodels)
    return suite.rows


# ---------------------------------------------------------------- 6. semantics

def _pipeline_targets() -> List[Formula]:
    return [scheme.generic() for scheme in SCHEMES if scheme.expected == REFUTABLE]


def suite_semantics(config: Config) -> List[Dict]:
    suite = _Suite("semantics")
    rng = random.Random(config.seed)
    names = config.vars[:2]

    def persistence_sound():
        tally = _Tally()
        for index in range(RANDOM_FRAMES):
            frame = random_simplified_frame(rng, rng.randint(1, 5))
            tally.record(lambda frame=frame: all(
                frame_validates(frame, f, budget=config.valuation_budget)
                for f in p_instances(names)), f"frame {index}")
        return tally.close()

    suite.run("P valid on simplified frames", persistence_sound)

    for n in range(1, min(config.max_worlds, 3) + 1):
        def correspondence(n=n):
            tally = _Tally()
            for index, frame in enumerate(veltman_frames(n)):
                tally.record(lambda frame=frame: frame_correspondence_P(
                    frame, names, config.valuation_budget), f"frame {index}")
            return tally.close()
        suite.run(f"P condition on {n}-world frames", correspondence)

    for target in _pipeline_targets():
        def unfolding(target=target):
            model, world = build_canonical(target, "generated", config.budget,
                                           config.family_budget, config.model_budget,
                                           config.build_budget)
            simple, path = simplify(model, world, config.model_budget, roots=[world])
            subs = subformula_list(target)
            _expect(check_dagger(simple), "S-chain of length two after unfolding")
            bad = check_unfolding_agreement(model, simple, subs)
            _expect(bad is None, f"unfolding disagrees on {bad}")
            product = level_product(simple, target)
            _expect(check_level_frame(product), "level frame conditions fail")
            bad = check_level_agreement(simple, product, subs)
            _expect(bad is None, f"level product disagrees on {bad}")
            return (f"{len(model.worlds)} canonical, {len(simple.worlds)} unfolded, "
                    f"{len(product.worlds)} levelled worlds")
        suite.run(f"pipeline {target}", unfolding)
    return suite.rows


# ---------------------------------------------------------------- 7. embedding

def suite_embedding(config: Config) -> List[Dict]:
    suite = _Suite("embedding")
    rng = random.Random(config.seed)

    for target in _pipeline_targets():
        def transferred(target=target):
            result = countermodel(target, "simplified", "generated", config.budget,
                                  config.family_budget, config.model_budget,
                                  config.build_budget)
            bad = check_correspondence(result.model, target)
            _expect(bad is None, f"translation disagrees on {bad}")
            bimodal, _ = transfer(result.model, result.world, target)
            return f"{len(bimodal.worlds)}-world bimodal countermodel"
        suite.run(f"transfer {target}", transferred)

    def fpp_fails():
        names = config.vars[:2]
        samples = [random_bimodal_formula(rng, 3, names) for _ in range(BIMODAL_SAMPLES)]
        failures = check_fpp_failure(samples)
        _expect(not failures, f"{failures[:1]} is a fixed point on the two-world model")
        return f"{len(samples)} samples refuted"

    def theorems_translate():
        theorems = [scheme.generic() for scheme in SCHEMES
                    if scheme.expected == THEOREM and scheme.name in ("J3", "P", "J6")]
        report = check_translation_soundness(theorems, min(config.max_worlds, 2),
                                             config.valuation_budget)
        _expect(report.ok, f"translation of {report.refuted[:1]} refuted")
        return f"{report.checked} theorems on {report.frames} frames"

    suite.run("F <-> [0]~[1]F fails", fpp_fails)
    suite.run("translated theorems valid", theorems_translate)
    return suite.rows


# ---------------------------------------------------------------- 8. determinism

def _dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True)


def suite_determinism(config: Config) -> List[Dict]:
    suite = _Suite("determinism")

    def generators():
        first = [random_formula(random.Random(config.seed), 4, config.vars) for _ in range(2)]
        again = [random_formula(random.Random(config.seed), 4, config.vars) for _ in range(2)]
        _expect(first == again, "seeded generator is not reproducible")
        return "seeded generators reproducible"

    def proofs():
        count = 0
        for scheme in SCHEMES:
            if scheme.expected != THEOREM:
                continue
            f = scheme.generic()
            one = decide(f, System.ILMPS, config.budget)
            two = decide(f, System.ILMPS, config.budget)
            _expect(bool(one) and bool(two), f"{f} not proved")
            text = _dumps(derivation_to_dict(one.derivation))
            _expect(text == _dumps(derivation_to_dict(two.derivation)),
                    f"proof of {f} differs between runs")
            loaded = derivation_from_dict(json.loads(text))
            _expect(_dumps(derivation_to_dict(loaded)) == text, f"proof of {f} does not round-trip")
            count += 1
        return f"{count} proofs reproducible"

    def models():
        count = 0
        for target in _pipeline_targets()[:3]:
            one = countermodel(target, "simplified", "generated", config.budget,
                               config.family_budget, config.model_budget,
                               config.build_budget)
            two = countermodel(target, "simplified", "generated", config.budget,
                               config.family_budget, config.model_budget,
                               config.build_budget)
            text = _dumps(model_to_dict(one.model, one.world))
            _expect(text == _dumps(model_to_dict(two.model, two.world)),
                    f"countermodel of {target} differs between runs")
            loaded = model_from_dict(json.loads(text))
            _expect(_dumps(model_to_dict(loaded, json.loads(text)["world"])) == text,
                    f"countermodel of {target} does not round-trip")
            count += 1
        return f"{count} countermodels reproducible"

    suite.run("generators", generators)
    suite.run("proofs", proofs)
    suite.run("models", models)
    return suite.rows


SUITES: Dict[str, Callable[[Config], List[Dict]]] = {
    "axioms": suite_axioms,
    "cutelim": suite_cutelim,
    "interpolation": suite_interpolation,
    "fixpoint": suite_fixpoint,
    "oracle": suite_oracle,
    "semantics": suite_semantics,
    "embedding": suite_embedding,
    "determinism": suite_determinism,
}


def _run_suite(job: Tuple[str, Config]) -> List[Dict]:
    name, config = job
    logger.info("running suite %s", name)
    return SUITES[name](config)


def run_selftest(config: Config = DEFAULT_CONFIG,
                 suites: Optional[Iterable[str]] = None) -> pd.DataFrame:
    """
    Run the named suites (all by default) and return one row per item.

    With config.jobs > 1 the suites run in a process pool; rows keep the
    suite order either way.

    Raises:
        IlpError: a worker process died, for instance killed for memory
    """
    names = list(suites) if suites is not None else list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ConfigError(f"unknown suites {unknown}")
    jobs = [(name, config) for name in names]
    if config.jobs > 1 and len(jobs) > 1:
        try:
            with concurrent.futures.ProcessPoolExecutor(max_workers=config.jobs) as executor:
                batches = list(executor.map(_run_suite, jobs))
        except BrokenProcessPool as e:
            raise IlpError(f"a self-test worker died ({e}); lower the budgets or --jobs") from e
    else:
        batches = [_run_suite(job) for job in jobs]
    return results_frame(row for batch in batches for row in batch)

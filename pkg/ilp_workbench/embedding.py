#!/usr/bin/env python3
"""
Translation of the interpretability language into the bimodal language of
GL (operator [0]) fused with K (operator [1]).

A |> B becomes [0](A -> <1>B) and []A becomes [0]A. A simplified model
without S-chains is read as a bimodal model with R0 = R and R1 = S; truth is
preserved under the translation and [1][1]false holds on the frame.
"""

import logging
import random
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

from .config import DEFAULT_CONFIG
from .errors import PreconditionError, VerificationError
from .semantics import (BimodalModel, SimplifiedModel, World, bimodal_frames, check_dagger,
                        evaluate, frame_validates, subformula_list, truth_sets, valuations)
from .syntax import (BOT, And, Bot, Box, BoxK, Formula, Imp, Neg, Or, Rhd, Var, diamond_k,
                     iff, variables)

logger = logging.getLogger(__name__)

NO_DOUBLE_STEP = BoxK(1, BoxK(1, BOT))


def chi(f: Formula) -> Formula:
    """The bimodal translation of f."""
    if isinstance(f, (Var, Bot)):
        return f
    if isinstance(f, Neg):
        return Neg(chi(f.sub))
    if isinstance(f, (And, Or, Imp)):
        return type(f)(chi(f.left), chi(f.right))
    if isinstance(f, Box):
        return BoxK(0, chi(f.sub))
    if isinstance(f, Rhd):
        return BoxK(0, Imp(chi(f.left), diamond_k(1, chi(f.right))))
    raise PreconditionError(f"{f} is already bimodal")


def as_bimodal(model: SimplifiedModel) -> BimodalModel:
    return BimodalModel(model.worlds, model.R, model.S, model.valuation)


def transfer(model: SimplifiedModel, world: World, target: Formula) -> Tuple[BimodalModel, World]:
    """
    The countermodel of target read as a bimodal countermodel of chi(target).

    Raises:
        PreconditionError: the model has an S-chain or world forces target
        VerificationError: the bimodal model does not refute chi(target)
    """
    if not check_dagger(model):
        raise PreconditionError("the model has an S-chain of length two")
    if evaluate(model, world, target):
        raise PreconditionError(f"{target} holds at the given world")
    bimodal = as_bimodal(model)
    if evaluate(bimodal, world, chi(target)):
        raise VerificationError(f"the translation of {target} holds after transfer")
    if not frame_validates(bimodal.frame(), NO_DOUBLE_STEP):
        raise VerificationError("[1][1]false fails on the transferred frame")
    return bimodal, world


def check_correspondence(model: SimplifiedModel, f: Formula) -> Optional[Formula]:
    """First subformula B of f whose truth set differs from that of chi(B), or None."""
    subs = subformula_list(f)
    original = truth_sets(model, subs)
    translated = truth_sets(as_bimodal(model), [chi(g) for g in subs])
    for g in subs:
        if original[g] != translated[chi(g)]:
            return g
    return None


@dataclass
class SoundnessReport:
    checked: int = 0
    frames: int = 0
    refuted: List[Tuple[Formula, BimodalModel]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.refuted


def check_translation_soundness(theorems: Iterable[Formula],
                                max_worlds: int = DEFAULT_CONFIG.max_worlds,
                                budget: int = DEFAULT_CONFIG.valuation_budget) -> SoundnessReport:
    """Translations of theorems hold on every bimodal frame up to max_worlds worlds."""
    frames = [frame for n in range(1, max_worlds + 1) for frame in bimodal_frames(n)]
    report = SoundnessReport(frames=len(frames))
    for f in theorems:
        report.checked += 1
        translated = chi(f)
        for frame in frames:
            if not frame_validates(frame, translated, budget=budget):
                report.refuted.append((f, frame))
                logger.warning("translation of %s fails on a %d-world frame", f,
                               len(frame.worlds))
                break
    return report


def fpp_failure_model() -> BimodalModel:
    """x R0 y and y R1 x."""
    return BimodalModel(("x", "y"), {("x", "y")}, {("y", "x")})


def bimodal_fpp_instance(f: Formula) -> Formula:
    return iff(f, BoxK(0, Neg(BoxK(1, f))))


def check_fpp_failure(samples: Iterable[Formula]) -> List[Formula]:
    """Samples F for which F <-> [0]~[1]F holds at x under some valuation; expected empty."""
    frame = fpp_failure_model()
    failures = []
    for f in samples:
        instance = bimodal_fpp_instance(f)
        names = sorted(variables(f))
        for valuation in valuations(frame.worlds, names):
            if "x" in truth_sets(frame.with_valuation(valuation), [instance])[instance]:
                failures.append(f)
                break
    return failures


def random_bimodal_formula(rng: random.Random, depth: int, names=("p", "q")) -> Formula:
    if depth <= 0 or rng.random() < 0.25:
        return rng.choice([BOT] + [Var(v) for v in names])
    roll = rng.random()
    if roll < 0.2:
        return Neg(random_bimodal_formula(rng, depth - 1, names))
    if roll < 0.5:
        return BoxK(rng.randrange(2), random_bimodal_formula(rng, depth - 1, names))
    op = rng.choice((And, Or, Imp))
    return op(random_bimodal_formula(rng, depth - 1, names),
              random_bimodal_formula(rng, depth - 1, names))


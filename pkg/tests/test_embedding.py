import random

import pytest

from ilp_workbench.canonical import countermodel
from ilp_workbench.corpus import REFUTABLE, SCHEMES
from ilp_workbench.embedding import (NO_DOUBLE_STEP, as_bimodal, bimodal_fpp_instance,
                                     check_correspondence, check_fpp_failure,
                                     check_translation_soundness, chi, fpp_failure_model,
                                     random_bimodal_formula, transfer)
from ilp_workbench.errors import PreconditionError
from ilp_workbench.semantics import SimplifiedModel, evaluate, frame_validates
from ilp_workbench.syntax import BOT, BoxK, Imp, Var, diamond_k, parse, parse_bimodal

p, q = Var("p"), Var("q")

REFUTABLE_GENERICS = [scheme.generic() for scheme in SCHEMES if scheme.expected == REFUTABLE]


def refuting_model():
    """w R x and x S y; p at x, q nowhere, so p |> q fails at w."""
    return SimplifiedModel(("w", "x", "y"), {("w", "x")}, {("x", "y")}, {"p": {"x"}, "q": set()})


class TestTranslation:
    def test_rhd(self):
        assert chi(parse("p |> q")) == BoxK(0, Imp(p, diamond_k(1, q)))

    def test_box_and_connectives(self):
        assert chi(parse("[]p & ~q")) == parse_bimodal("[0]p & ~q")
        assert chi(BOT) == BOT

    def test_bimodal_input_rejected(self):
        with pytest.raises(PreconditionError):
            chi(BoxK(1, p))


class TestTransfer:
    def test_transfer_keeps_the_refutation(self):
        model = refuting_model()
        target = parse("p |> q")
        bimodal, world = transfer(model, "w", target)
        assert world == "w"
        assert bimodal.R1 == model.S
        assert not evaluate(bimodal, world, chi(target))
        assert frame_validates(bimodal.frame(), NO_DOUBLE_STEP)

    def test_transfer_needs_dagger(self):
        model = SimplifiedModel(("w", "x", "y"), {("w", "x")}, {("x", "y"), ("y", "x")},
                                {"p": {"x"}, "q": set()})
        with pytest.raises(PreconditionError, match="S-chain"):
            transfer(model, "w", parse("p |> q"))

    def test_transfer_needs_refutation(self):
        with pytest.raises(PreconditionError, match="holds"):
            transfer(refuting_model(), "x", parse("p |> q"))

    def test_correspondence(self):
        model = refuting_model()
        for text in ["p |> q", "[](p |> q) -> ~p", "(p |> q) |> (q |> p)"]:
            assert check_correspondence(model, parse(text)) is None

    def test_as_bimodal(self):
        bimodal = as_bimodal(refuting_model())
        assert bimodal.R0 == frozenset({("w", "x")})
        assert bimodal.kind == "bimodal"


class TestFixedPointFailure:
    def test_model(self):
        model = fpp_failure_model()
        assert model.R0 == frozenset({("x", "y")})
        assert model.R1 == frozenset({("y", "x")})

    def test_instance_shape(self):
        instance = bimodal_fpp_instance(p)
        assert instance == parse_bimodal("p <-> [0]~[1]p")

    def test_samples_never_solve(self):
        samples = [p, BOT, BoxK(1, p), parse_bimodal("[0]p | ~q")]
        assert check_fpp_failure(samples) == []

    def test_random_samples(self):
        rng = random.Random(11)
        samples = [random_bimodal_formula(rng, 3) for _ in range(20)]
        assert check_fpp_failure(samples) == []

    def test_random_formula_is_seeded(self):
        first = [random_bimodal_formula(random.Random(5), 3) for _ in range(3)]
        second = [random_bimodal_formula(random.Random(5), 3) for _ in range(3)]
        assert first == second


class TestSoundness:
    def test_theorems_hold_on_frames(self):
        theorems = [parse("p |> q -> [](p |> q)"), parse("[]p -> ~p |> false"),
                    parse("(p | q) |> q -> p |> q")]
        report = check_translation_soundness(theorems, max_worlds=2)
        assert report.ok
        assert report.checked == 3
        assert report.frames > 0

    def test_non_theorem_is_refuted(self):
        report = check_translation_soundness([parse("p |> q")], max_worlds=2)
        assert not report.ok
        assert report.refuted[0][0] == parse("p |> q")


@pytest.mark.slow
@pytest.mark.parametrize("target", REFUTABLE_GENERICS, ids=str)
def test_refutable_scheme_transfer(target):
    found = countermodel(target, stage="simplified")
    assert check_correspondence(found.model, target) is None
    bimodal, world = transfer(found.model, found.world, target)
    assert not evaluate(bimodal, world, chi(target))

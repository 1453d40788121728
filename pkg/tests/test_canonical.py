import pytest

from ilp_workbench.canonical import (CanonicalBuilder, adequacy_violations, adequate_closure,
                                     build_canonical, check_level_agreement, check_level_frame,
                                     check_prec_transfer, check_truth_lemma, check_witness_facts,
                                     check_unfolding_agreement, countermodel, level_product,
                                     max_cons_sets, prec, prec_C, projection_groups, simplify)
from ilp_workbench.corpus import REFUTABLE, SCHEMES
from ilp_workbench.errors import BudgetExceeded, PreconditionError
from ilp_workbench.semantics import (SimplifiedModel, VeltmanModel, check_dagger,
                                     check_P_condition, evaluate, subformula_list)
from ilp_workbench.syntax import BOT, Box, Imp, Neg, Rhd, Var, parse, tilde

p, q = Var("p"), Var("q")

REFUTABLE_GENERICS = [scheme.generic() for scheme in SCHEMES if scheme.expected == REFUTABLE]


def jump_model():
    """w R x, w R y and x S_w y, with p at x and q at y."""
    return VeltmanModel(("w", "x", "y"), {("w", "x"), ("w", "y")}, {"w": {("x", "y")}},
                        {"p": {"x"}, "q": {"y"}})


class TestAdequateSets:
    def test_closure_of_variable(self):
        phi = adequate_closure([Neg(p)])
        assert adequacy_violations(phi) == []
        assert Neg(p) in phi and p in phi
        assert phi.rhd_projection == (BOT,)
        assert Rhd(BOT, BOT) in phi
        assert Box(Rhd(BOT, BOT)) in phi

    def test_closure_of_rhd(self):
        phi = adequate_closure([tilde(parse("p |> q"))])
        assert adequacy_violations(phi) == []
        assert set(phi.rhd_projection) == {p, q, BOT}
        assert Rhd(q, p) in phi
        assert Box(parse("p -> false | q")) in phi
        assert all(isinstance(f, (Var, Box, Rhd)) for f in phi.primes)

    def test_closure_without_implications(self):
        phi = adequate_closure([tilde(parse("p |> q"))], disjunctions=False)
        assert Rhd(q, p) in phi
        assert Box(Neg(p)) in phi
        assert not any(isinstance(f, Box) and isinstance(f.sub, Imp) for f in phi)

    def test_closure_budget(self):
        with pytest.raises(BudgetExceeded):
            adequate_closure([parse("p |> q")], budget=5)

    def test_missing_tilde_is_reported(self):
        phi = adequate_closure([Neg(p)])
        smaller = type(phi)(phi.formulas - {Neg(Rhd(BOT, BOT))})
        assert any("missing" in line for line in adequacy_violations(smaller))


class TestMaximalConsistentSets:
    def test_full_family_of_variable(self):
        phi = adequate_closure([Neg(p)])
        family = max_cons_sets(phi)
        assert len(family) == 2
        assert sum(p in gamma for gamma in family) == 1
        assert all(Box(Rhd(BOT, BOT)) in gamma for gamma in family)
        assert check_witness_facts(phi, family) == []
        assert check_prec_transfer(phi, family) == []

    def test_family_budget(self):
        phi = adequate_closure([Neg(p)])
        with pytest.raises(BudgetExceeded):
            max_cons_sets(phi, budget=1)

    def test_prec(self):
        gamma = frozenset({Box(p)})
        delta = frozenset({p, Box(p), Box(q)})
        assert prec(gamma, delta)
        assert not prec(gamma, frozenset({p, Box(p)}))
        assert not prec(gamma, frozenset({Box(p), Box(q)}))

    def test_prec_C(self):
        gamma = frozenset({Box(p), Rhd(q, BOT)})
        delta = frozenset({p, Box(p), Box(q), Neg(q)})
        assert prec_C(gamma, delta, BOT)
        assert not prec_C(gamma, delta - {Neg(q)}, BOT)
        assert prec_C(gamma, delta - {Neg(q)}, p)


class TestCanonicalModel:
    @pytest.mark.parametrize("text", ["p", "[]p -> p"])
    def test_refutes_target(self, text):
        target = parse(text)
        model, world = build_canonical(target)
        assert check_P_condition(model)
        assert not evaluate(model, world, target)
        assert world.rhd == BOT

    def test_full_family(self):
        model, world = build_canonical(p, family="full")
        assert len(model.worlds) == 2
        assert not evaluate(model, world, p)

    def test_theorem_rejected(self):
        with pytest.raises(PreconditionError, match="theorem"):
            build_canonical(parse("p -> p"))

    def test_unknown_family(self):
        with pytest.raises(PreconditionError):
            CanonicalBuilder(p, family="partial")

    @pytest.mark.slow
    def test_rhd_target(self):
        target = parse("p |> q")
        builder = CanonicalBuilder(target)
        model, world = builder.build()
        assert check_truth_lemma(model, builder.phi) is None
        assert check_witness_facts(builder.phi, builder.family) == []
        assert check_prec_transfer(builder.phi, builder.family) == []
        assert not evaluate(model, world, target)


class TestUnfolding:
    def test_simplify(self):
        model = jump_model()
        unfolded, root = simplify(model, "w")
        assert root == ("w",)
        chains = {("w",), ("x",), ("y",), ("w", "x"), ("w", "y")}
        assert set(unfolded.worlds) == chains
        assert len(unfolded.worlds) == len(chains)
        assert unfolded.R == frozenset({(("w",), ("w", "x")), (("w",), ("w", "y"))})
        assert unfolded.S == frozenset({(("w", "x"), ("y",))})
        assert check_dagger(unfolded)
        f = parse("p |> q")
        assert evaluate(unfolded, root, f)
        assert check_unfolding_agreement(model, unfolded, subformula_list(f)) is None

    def test_simplify_counts_every_chain(self):
        chain = {("w", "x"), ("x", "y"), ("w", "y")}
        model = VeltmanModel(("w", "x", "y"), chain, {})
        unfolded, _ = simplify(model, "y")
        # w, x, y, wx, wy, xy, wxy
        assert len(unfolded.worlds) == 7
        assert ("w", "x", "y") in unfolded.worlds

    def test_simplify_from_roots(self):
        model = jump_model()
        unfolded, root = simplify(model, "w", roots=["w"])
        assert set(unfolded.worlds) == {("w",), ("w", "x"), ("w", "y"), ("y",)}
        assert evaluate(unfolded, root, parse("p |> q"))

    def test_simplify_budget(self):
        with pytest.raises(BudgetExceeded):
            simplify(jump_model(), "w", budget=4)

    def test_simplify_needs_p_condition(self):
        chain = {("w", "x"), ("x", "y"), ("w", "y")}
        broken = VeltmanModel(("w", "x", "y"), chain, {"w": {("y", "y")}})
        with pytest.raises(PreconditionError):
            simplify(broken, "w")

    def test_level_product(self):
        unfolded, root = simplify(jump_model(), "w")
        f = parse("p |> q")
        product = level_product(unfolded, f)
        assert len(product.worlds) == 2 * len(unfolded.worlds)
        assert product.S == frozenset({((("w", "x"), 1), (("y",), 0))})
        assert check_level_frame(product)
        assert check_level_agreement(unfolded, product, subformula_list(f)) is None
        assert evaluate(product, (root, 1), f)
        assert not evaluate(product, (root, 0), f)

    def test_level_product_needs_no_s_chains(self):
        model = SimplifiedModel(("x", "y", "z"), set(), {("x", "y"), ("y", "z")})
        with pytest.raises(PreconditionError):
            level_product(model, p)


class TestCountermodel:
    @pytest.mark.parametrize("stage", ["canonical", "simplified", "level"])
    def test_stages(self, stage):
        target = parse("[]p -> p")
        found = countermodel(target, stage=stage)
        assert found.stage == stage
        assert found.family_size >= 1
        assert found.adequate_size > 0
        assert not evaluate(found.model, found.world, target)

    def test_level_world_is_top_level(self):
        found = countermodel(p, stage="level")
        path, level = found.world
        assert level == 0
        assert len(path) == 1

    def test_unknown_stage(self):
        with pytest.raises(PreconditionError):
            countermodel(p, stage="bimodal")

    def test_theorem(self):
        with pytest.raises(PreconditionError):
            countermodel(parse("p |> q -> [](p |> q)"))

    @pytest.mark.slow
    def test_rhd_countermodel_is_dagger_free(self):
        found = countermodel(parse("p |> q"))
        assert isinstance(found.model, SimplifiedModel)
        assert check_dagger(found.model)


class TestSharedModels:
    def test_one_model_refutes_every_target(self):
        targets = [p, Neg(p), parse("[]p -> p")]
        builder = CanonicalBuilder(targets)
        model, world = builder.build()
        assert world == builder.worlds[p]
        assert set(builder.worlds) == set(targets)
        for target, refuting in builder.worlds.items():
            assert not evaluate(model, refuting, target)
        assert check_truth_lemma(model, builder.phi) is None

    def test_theorem_among_targets(self):
        with pytest.raises(PreconditionError, match="theorem"):
            CanonicalBuilder([p, parse("p -> p")]).build()

    def test_no_targets(self):
        with pytest.raises(PreconditionError):
            CanonicalBuilder([])

    def test_projection_groups(self):
        targets = [p, parse("p |> q"), q, parse("~(p |> q)"), parse("q |> p")]
        assert projection_groups(targets, limit=2) == [
            [p, q], [parse("p |> q"), parse("~(p |> q)")], [parse("q |> p")]]


class TestBuildBudget:
    def test_consistency_checks_share_one_budget(self):
        with pytest.raises(BudgetExceeded, match="consistency budget of 1 exceeded"):
            CanonicalBuilder(parse("p |> q"), build_budget=1).build()

    def test_budget_passes_through_countermodel(self):
        with pytest.raises(BudgetExceeded, match="consistency"):
            countermodel(parse("p |> q"), build_budget=1)

    @pytest.mark.slow
    def test_j2_plus_instance(self):
        target = parse("(p |> q | r) & (q |> r) -> p |> r")
        builder = CanonicalBuilder(target)
        model, world = builder.build()
        assert check_truth_lemma(model, builder.phi) is None
        assert not evaluate(model, world, target)
        found = countermodel(target, stage="level")
        assert not evaluate(found.model, found.world, target)


@pytest.mark.slow
@pytest.mark.parametrize("target", REFUTABLE_GENERICS, ids=str)
def test_refutable_scheme_pipeline(target):
    model, world = build_canonical(target)
    assert check_P_condition(model)
    assert not evaluate(model, world, target)
    unfolded, root = simplify(model, world, roots=[world])
    assert check_dagger(unfolded)
    subs = subformula_list(target)
    assert check_unfolding_agreement(model, unfolded, subs) is None
    product = level_product(unfolded, target)
    assert check_level_frame(product)
    assert check_level_agreement(unfolded, product, subs) is None
    found = countermodel(target, stage="level")
    assert not evaluate(found.model, found.world, target)

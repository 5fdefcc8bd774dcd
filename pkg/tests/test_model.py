import itertools
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given

from qtax.errors import ImpossibleScenario, InvalidArgument, NotApplicable, ZeroEvidence
from qtax.inference import behavior, condition, joint, marginal, world_joint
from qtax.model import (
    Constraint,
    Mechanism,
    Prior,
    Scenario,
    relabel_values,
    rename,
    reverse,
    scenarios,
    translate,
    validate,
)
from qtax.structure import detect_aao, input_dependence

from .strategies import build, copy_kernel, random_models, suite, variable

HALF = Fraction(1, 2)


def coins(with_constraint=False):
    variables = [variable("a", "output", at=(0, 0)), variable("b", "output", at=(1, 0))]
    fair = {(): {"0": HALF, "1": HALF}}
    constraints = [Constraint(("a", "b"), {("0", "0"): Fraction(1), ("1", "1"): Fraction(1)})] if with_constraint else []
    return build("coins", variables, [Mechanism("a", (), fair), Mechanism("b", (), fair)], constraints)


def copy_model():
    variables = [variable("x", at=(0, 0), controllable=True), variable("a", "output", at=(0, 1), observable=True)]
    return build("copy", variables, [Mechanism("a", ("x",), copy_kernel())])


def codes(m):
    return [d.code for d in validate(m)]


def test_corpus_models_validate_cleanly(corpus):
    for name, m in corpus.items():
        tolerance = Fraction(1, 10**9) if m.decimal else None
        assert validate(m, tolerance) == [], name


def test_unnormalized_row_is_reported():
    m = copy_model()
    bad = Mechanism("a", ("x",), {("0",): {"0": Fraction(9, 10)}, ("1",): {"1": Fraction(1)}})
    assert "KERNEL_NOT_NORMALIZED" in codes(m.evolve(mechanisms=(bad,)))


def test_second_mechanism_for_an_output_is_reported():
    m = copy_model()
    assert "DUPLICATE_MECHANISM" in codes(m.evolve(mechanisms=m.mechanisms * 2))


def test_flag_conflicts_are_reported():
    m = copy_model()
    x, a = m.variables
    conflicted = m.evolve(variables=(variable("x", at=(0, 0), hidden=True, observable=True), a))
    assert "HIDDEN_OBSERVABLE_CONFLICT" in codes(conflicted)
    outside = m.evolve(variables=(variable("x", at=(9, 0), controllable=True), a))
    assert "LOCALIZATION_OUT_OF_BOUNDS" in codes(outside)
    alocal = m.evolve(lattice=None)
    assert "LOCALIZED_WITHOUT_LATTICE" in codes(alocal)


def test_missing_row_and_bad_prior_are_reported():
    m = copy_model()
    partial = Mechanism("a", ("x",), {("0",): {"0": Fraction(1)}})
    assert "KERNEL_MISSING_ROW" in codes(m.evolve(mechanisms=(partial,)))
    lopsided = Prior(("x",), {("0",): HALF})
    assert "PRIOR_NOT_NORMALIZED" in codes(m.evolve(prior=lopsided))


def test_copy_mechanism_gives_a_point_mass():
    table = joint(copy_model(), {"x": "1"})
    assert dict(table.entries) == {("1", "1"): Fraction(1)}


def test_fair_coin_and_correlated_coins():
    fair = marginal(joint(coins(), {}), ["a"])
    assert dict(fair.entries) == {("0",): HALF, ("1",): HALF}
    correlated = joint(coins(with_constraint=True), {})
    assert dict(correlated.entries) == {("0", "0"): HALF, ("1", "1"): HALF}


def test_marginal_edge_cases():
    table = joint(coins(with_constraint=True), {})
    assert marginal(table, ["a", "b"]) == table
    assert dict(marginal(table, []).entries) == {(): Fraction(1)}
    with pytest.raises(InvalidArgument):
        marginal(table, ["zzz"])


def test_conditioning():
    table = joint(coins(with_constraint=True), {})
    assert dict(condition(table, {"a": "0"}).entries) == {("0", "0"): Fraction(1)}
    assert dict(condition(table, {"a": "1", "b": "1"}).entries) == {("1", "1"): Fraction(1)}
    with pytest.raises(ZeroEvidence):
        condition(table, {"a": "0", "b": "1"})


def test_excluding_constraint_makes_the_scenario_impossible():
    m = coins().evolve(constraints=(Constraint(("a",), {("0",): Fraction(0), ("1",): Fraction(0)}),))
    with pytest.raises(ImpossibleScenario):
        joint(m, {})
    with pytest.raises(ImpossibleScenario):
        world_joint(m)


def test_zero_prior_scenarios_need_the_hypothetical_flag():
    m = copy_model().evolve(prior=Prior(("x",), {("0",): Fraction(1)}))
    with pytest.raises(InvalidArgument):
        joint(m, Scenario({"x": "1"}))
    assert joint(m, Scenario({"x": "1"}, hypothetical=True)).probability({"a": "1"}) == 1
    assert [s.hypothetical for s in scenarios(m)] == [False, True]
    assert list(behavior(m).table) == [("0",)]


def test_incomplete_scenario_is_rejected():
    with pytest.raises(InvalidArgument):
        joint(copy_model(), {})


def test_lhv_behavior_is_the_built_correlation_table(corpus):
    b = behavior(corpus["lhv"])
    assert b.inputs == ("x", "y")
    assert b.outputs == ("a", "b")
    assert b.distribution(("0", "0")) == {("+1", "-1"): HALF, ("-1", "+1"): HALF}
    assert b.distribution(("0", "1")) == {("+1", "+1"): HALF, ("-1", "-1"): HALF}
    assert b.distribution(("1", "0")) == {("+1", "+1"): HALF, ("-1", "-1"): HALF}


def test_hidden_relabeling_leaves_behavior_unchanged(corpus):
    m = corpus["lhv"]
    relabeled = relabel_values(m, {"lam": {"+1": "up", "-1": "down"}})
    assert behavior(relabeled) == behavior(m)
    assert behavior(rename(m, {"lam": "kappa"})) == behavior(m)


def test_reverse_and_translate_move_localizations(corpus):
    m = corpus["retro"]
    flipped = reverse(m)
    assert flipped.variable("s").localization.min_time == 0
    assert flipped.variable("ml").localization.min_time == 2
    assert reverse(flipped).name == m.name
    moved = translate(m, 2, 1)
    assert moved.lattice.x_min == m.lattice.x_min + 2
    assert moved.variable("c").localization == m.variable("c").localization.shifted(2, 1)


def aao_model(weights):
    variables = [
        variable("p", at=(0, 0)),
        variable("u", "output", at=(0, 0)),
        variable("v", "output", at=(0, 2)),
        variable("w", "output", at=(1, 2)),
    ]
    mechanisms = [Mechanism("u", ("p",), copy_kernel())] + [
        Mechanism(n, (), {(): {"0": HALF, "1": HALF}}) for n in ("v", "w")
    ]
    return build("aao", variables, mechanisms, [Constraint(("u", "v"), weights)])


def test_equality_across_times_is_all_at_once():
    equal = {("0", "0"): Fraction(1), ("1", "1"): Fraction(1)}
    m = aao_model(equal)
    assert detect_aao(m) == list(m.constraints)


def test_product_constraint_across_times_is_not_all_at_once():
    product = {("0", "0"): Fraction(1, 4), ("0", "1"): HALF, ("1", "0"): HALF, ("1", "1"): Fraction(1)}
    assert detect_aao(aao_model(product)) == []


def test_same_time_constraint_is_not_all_at_once():
    m = aao_model({("0", "0"): Fraction(1), ("1", "1"): Fraction(1)})
    same_time = m.evolve(constraints=(Constraint(("v", "w"), {("0", "0"): Fraction(1), ("1", "1"): Fraction(1)}),))
    assert detect_aao(same_time) == []
    with pytest.raises(NotApplicable):
        detect_aao(m.evolve(lattice=None, variables=tuple(replace(v, localization=None) for v in m.variables)))


def brute_force_joint(m, assignment):
    """Enumerate every completion of the inputs and multiply the factors."""
    names = m.names
    outputs = [v for v in m.outputs]
    weights = {}
    for combo in itertools.product(*(v.domain for v in outputs)):
        full = dict(assignment) | {v.name: value for v, value in zip(outputs, combo)}
        w = Fraction(1)
        for mech in m.mechanisms:
            w *= mech.weight(tuple(full[p] for p in mech.parents), full[mech.target])
        for constraint in m.constraints:
            w *= constraint.weight(tuple(full[n] for n in constraint.scope))
        if w:
            weights[tuple(full[n] for n in names)] = w
    total = sum(weights.values(), Fraction(0))
    return {key: w / total for key, w in weights.items()}


@suite(200)
@given(random_models())
def test_joint_matches_brute_force_enumeration(m):
    assert validate(m) == []
    for scenario in scenarios(m):
        expected = brute_force_joint(m, scenario.assignment)
        assert dict(joint(m, Scenario(scenario.assignment, hypothetical=True)).entries) == expected


def test_dependence_follows_directed_paths(corpus):
    lhv = input_dependence(corpus["lhv"])
    assert lhv["la"] == {"lam"}
    assert lhv["a"] == {"lam", "x"}
    assert lhv["b"] == {"lam", "y"}
    assert "s" in input_dependence(corpus["retro"])["ml"]


def test_constraint_couples_its_scope(corpus):
    dependence = input_dependence(corpus["pseudo-retro"])
    assert {"p", "f", "k"} <= dependence["ml"]

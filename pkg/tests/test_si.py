import logging
from fractions import Fraction

import pytest

from qtax.checkers import (
    Status,
    check_statistical_independence,
    check_superdeterministic,
    common_cause_note,
    identify_additional_variables,
)
from qtax.checkers.si import ONE_WORLD_NOTE
from qtax.equivalence import p_equivalent
from qtax.errors import InvalidArgument
from qtax.inference import Behavior, behavior


def test_lhv_satisfies_statistical_independence(corpus):
    verdict = check_statistical_independence(corpus["lhv"])
    assert verdict.held
    assert verdict.items == ("lam",)


def test_superdet_prior_depends_on_the_settings(corpus):
    verdict = check_statistical_independence(corpus["superdet"])
    assert verdict.failed
    assert verdict.witness.context == {"lambda": "lam=pp", "settings": "x=0, y=0"}
    assert verdict.witness.probabilities == {
        "P(lambda|xy)": Fraction(4267767, 10000000),
        "P(lambda)": Fraction(10517767, 30000000),
    }


def test_common_cause_seed_is_reported(corpus):
    m = corpus["common-cause-sd"]
    assert check_statistical_independence(m).failed
    note = common_cause_note(m)
    assert note is not None
    assert "mu" in note
    assert common_cause_note(corpus["lhv"]) is None


def test_explicit_lambda_and_settings(corpus):
    m = corpus["superdet"]
    assert check_statistical_independence(m, ["lam"], ["y"]).failed
    with pytest.raises(InvalidArgument):
        check_statistical_independence(m, ["x"], ["x", "y"])
    with pytest.raises(InvalidArgument):
        check_statistical_independence(m, ["la"])


def test_hidden_pair_is_the_additional_variable(corpus):
    assert identify_additional_variables(corpus["superdet"], corpus["sqm-bell"]) == ["lam"]
    assert identify_additional_variables(corpus["bohm-toy"], corpus["bohm-ref"]) == ["q"]


def test_superdet_is_superdeterministic(corpus):
    verdict = check_superdeterministic(corpus["superdet"], corpus["sqm-bell"])
    assert verdict.held, verdict.to_dict()
    assert set(verdict.details) == {
        "deterministic",
        "local_causality",
        "statistical_independence_violated",
        "additional_variables",
        "empirical_equivalence",
    }
    assert all(detail.held for detail in verdict.details.values())
    assert ONE_WORLD_NOTE in verdict.notes
    assert any(note.startswith("hard superdeterminism") for note in verdict.notes)


def test_lhv_is_not_superdeterministic(corpus):
    verdict = check_superdeterministic(corpus["lhv"], corpus["sqm-bell"])
    assert verdict.status is Status.FAILS
    assert verdict.details["statistical_independence_violated"].failed
    assert verdict.details["empirical_equivalence"].failed
    assert "statistical_independence_violated" in verdict.reason


def test_unmatched_behavior_falls_back_with_a_warning(corpus, caplog):
    with caplog.at_level(logging.WARNING, logger="qtax.checkers.si"):
        assert identify_additional_variables(corpus["lhv"], corpus["sqm-bell"]) == ["lam"]
    assert "no input matching of lhv reproduces the behavior of sqm_bell" in caplog.text
    caplog.clear()
    with caplog.at_level(logging.WARNING, logger="qtax.checkers.si"):
        identify_additional_variables(corpus["superdet"], corpus["sqm-bell"])
    assert "no input matching" not in caplog.text


def test_reference_may_be_a_bare_behavior(corpus):
    data = behavior(corpus["sqm-bell"])
    assert identify_additional_variables(corpus["superdet"], data) == ["lam"]
    verdict = check_superdeterministic(corpus["superdet"], data)
    assert verdict.held, verdict.to_dict()
    assert verdict.details["additional_variables"].items == ("lam",)
    assert check_superdeterministic(corpus["lhv"], data).failed


def test_behavior_reference_equivalence(corpus):
    data = behavior(corpus["sqm-bell"])
    assert p_equivalent(corpus["superdet"], data).held
    verdict = p_equivalent(corpus["lhv"], data)
    assert verdict.failed
    assert verdict.witness.context["model_2"] == "reference behavior"
    narrow = Behavior(("x",), ("a", "b"), {("0",): {("+1", "+1"): Fraction(1)}})
    with pytest.raises(InvalidArgument, match="reference behavior has 1 settings"):
        p_equivalent(corpus["lhv"], narrow)

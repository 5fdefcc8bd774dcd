from fractions import Fraction

import pytest
from hypothesis import given

from qtax.checkers import check_irreducible
from qtax.equivalence import (
    ChshSettings,
    chsh,
    default_chsh_settings,
    e_equivalent,
    match_signatures,
    model_chsh,
    p_equivalent,
    reduce,
)
from qtax.errors import InvalidArgument
from qtax.inference import behavior

from .strategies import random_models, suite, with_dead_input


def test_chsh_values_of_the_bell_models(corpus):
    assert model_chsh(corpus["lhv"]) == 2
    assert model_chsh(corpus["pr-completion"]) == 4
    assert abs(float(model_chsh(corpus["sqm-bell"])) - 2.828427) < 1e-5


def test_default_chsh_settings_use_the_first_two_values(corpus):
    settings = default_chsh_settings(corpus["lhv"])
    assert (settings.x, settings.y, settings.a, settings.b) == ("x", "y", "a", "b")
    assert settings.y_values == ("0", "1")
    aligned = ChshSettings("x", "y", "a", "b", ("0", "1"), ("2", "1"))
    assert chsh(behavior(corpus["lhv"]), aligned) == 2


def test_chsh_needs_a_bell_pair(corpus):
    with pytest.raises(InvalidArgument):
        default_chsh_settings(corpus["bohm-toy"])
    with pytest.raises(InvalidArgument):
        model_chsh(corpus["retro"])


def test_signatures_must_line_up(corpus):
    signature = match_signatures(corpus["lhv"], corpus["sqm-bell"])
    assert signature.inputs == (("x", "x"), ("y", "y"))
    with pytest.raises(InvalidArgument):
        match_signatures(corpus["lhv"], corpus["pr-completion"])


def test_superdet_reproduces_the_quantum_behavior(corpus):
    assert p_equivalent(corpus["superdet"], corpus["sqm-bell"]).held
    assert p_equivalent(corpus["bohm-toy"], corpus["bohm-ref"]).held


def test_lhv_differs_from_the_quantum_behavior(corpus):
    verdict = p_equivalent(corpus["lhv"], corpus["sqm-bell"])
    assert verdict.failed
    assert verdict.witness.context["scenario"] == "x=0, y=0"


def test_listed_experiments_only(corpus):
    lhv, sqm = corpus["lhv"], corpus["sqm-bell"]
    assert e_equivalent(lhv, sqm, [{"x": "0", "y": "2"}]).held
    assert e_equivalent(lhv, sqm, [{"x": "0", "y": "2"}, {"x": "0", "y": "0"}]).failed
    empty = e_equivalent(lhv, sqm, [])
    assert empty.held
    assert empty.reason == "no experiments listed"
    with pytest.raises(InvalidArgument):
        e_equivalent(lhv, sqm, [{"x": "0"}])
    with pytest.raises(InvalidArgument):
        e_equivalent(lhv, sqm, [{"x": "0", "y": "7"}])


def test_reduce_removes_a_planted_dead_input(corpus):
    m = with_dead_input(corpus["lhv"])
    reduced, changelog = reduce(m)
    assert changelog == ["removed input dead"]
    assert "dead" not in reduced.names
    assert check_irreducible(reduced).held
    assert behavior(reduced) == behavior(corpus["lhv"])


def test_reduce_is_idempotent_on_the_corpus(corpus):
    for name, m in corpus.items():
        reduced, changelog = reduce(m)
        assert changelog == [], name
        assert reduced == m


@suite(100)
@given(random_models())
def test_reduce_preserves_behavior_and_is_idempotent(m):
    original = behavior(m)
    reduced, _ = reduce(m)
    again, changelog = reduce(reduced)
    assert changelog == []
    assert again == reduced
    mine = behavior(reduced)
    index = [original.inputs.index(n) for n in mine.inputs]
    for key, dist in original.table.items():
        assert mine.table[tuple(key[i] for i in index)] == dist


def test_equivalence_tolerance_is_respected(corpus):
    sqm = corpus["sqm-bell"]
    assert p_equivalent(sqm, sqm, epsilon=Fraction(0)).held

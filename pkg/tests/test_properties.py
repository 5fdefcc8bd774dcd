"""Randomized checks: implications between properties, the Bell bound and invariances."""

from hypothesis import given
from hypothesis import strategies as st

from qtax.checkers import (
    Session,
    check_coa,
    check_deterministic,
    check_fid,
    check_fir,
    check_local_causality,
    check_predictable,
    check_statistical_independence,
    check_strong_coa,
    check_superdeterministic,
    check_temporal_determinism,
    check_time_reversible,
)
from qtax.config import QtaxConfig
from qtax.corpus import CORPUS, load_corpus
from qtax.equivalence import model_chsh
from qtax.errors import ImpossibleScenario, InvalidArgument
from qtax.inference import behavior
from qtax.model import relabel_values, rename, translate
from qtax.report import evaluate

from .strategies import bell_models, random_models, suite, superdeterministic_models

MODELS = {name: load_corpus(name) for name in CORPUS}


@suite(200)
@given(random_models())
def test_implications(m):
    s = Session(m)
    if check_predictable(m, s).held:
        assert check_deterministic(m, s).held
    if check_strong_coa(m, s).held:
        assert check_coa(m, s).held
    fir = check_fir(m, s)
    if fir.held:
        assert check_fid(m, s).held
        assert not check_temporal_determinism(m, s).held
    if check_time_reversible(m, s).held:
        assert check_temporal_determinism(m, s).held


@suite(100)
@given(superdeterministic_models())
def test_setting_correlated_hidden_sign_is_superdeterministic(m):
    s = Session(m)
    verdict = check_superdeterministic(m, behavior(m), session=s)
    assert verdict.held, verdict.to_dict()
    assert verdict.details["additional_variables"].items == ("lam",)
    assert check_deterministic(m, s).held
    assert check_statistical_independence(m, session=s).failed
    assert check_local_causality(m, s).held


@suite(200)
@given(st.one_of(random_models(), bell_models(), superdeterministic_models()))
def test_superdeterminism_implies_its_conjuncts(m):
    s = Session(m)
    try:
        reference = behavior(m)
    except ImpossibleScenario:
        return
    verdict = check_superdeterministic(m, reference, session=s)
    if verdict.held:
        assert check_deterministic(m, s).held
        assert check_statistical_independence(m, session=s).failed
        assert check_local_causality(m, s).held
    elif verdict.failed:
        assert not all(detail.held for detail in verdict.details.values())


def test_superdet_is_the_corpus_witness_of_superdeterminism():
    verdict = check_superdeterministic(MODELS["superdet"], MODELS["sqm-bell"])
    assert verdict.held


@suite(100)
@given(bell_models())
def test_locally_causal_independent_models_obey_the_bell_bound(m):
    s = Session(m)
    try:
        local = check_local_causality(m, s).held
        independent = check_statistical_independence(m, session=s).held
        value = model_chsh(m)
    except InvalidArgument:
        return
    if local and independent:
        assert value <= 2


def fingerprint(m, config):
    report = evaluate(m, None, config)
    statuses = {name: verdict.status for name, verdict in report.properties.items()}
    return statuses, report.labels


@suite(50)
@given(random_models())
def test_invariance_under_renaming_relabeling_and_translation(m):
    config = QtaxConfig()
    statuses, labels = fingerprint(m, config)

    renamed = rename(m, {name: f"v_{name}" for name in m.names})
    assert fingerprint(renamed, config) == (statuses, labels)

    relabeled = relabel_values(m, {name: {"0": "lo", "1": "hi"} for name in m.names})
    relabeled_statuses, relabeled_labels = fingerprint(relabeled, config)
    assert relabeled_statuses == statuses
    # the CHSH label reads +1/-1 outcome values, so relabeling can switch it off
    assert {k: v for k, v in relabeled_labels.items() if k != "chsh"} == {
        k: v for k, v in labels.items() if k != "chsh"
    }

    assert fingerprint(translate(m, 3, 5), config) == (statuses, labels)

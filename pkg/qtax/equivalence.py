"""Empirical comparison of models: p- and e-equivalence, the CHSH value, and reduction."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .checkers.atemporal import removable_assumptions
from .checkers.session import Session
from .checkers.verdict import Verdict, Witness, format_fraction
from .config import QtaxConfig
from .errors import ImpossibleScenario, InvalidArgument
from .inference import REFERENCE_BEHAVIOR, Behavior, behavior, distributions_equal
from .model import Model, Scenario, Values

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class Signature:
    """Positional correspondence between the settings and observables of two models."""

    inputs: tuple[tuple[str, str], ...]
    outputs: tuple[tuple[str, str], ...]
    values: Mapping[str, Mapping[str, str]]

    def translate_key(self, key: Values) -> Values:
        return tuple(self.values[a][v] for (a, _), v in zip(self.inputs, key))

    def translate_outcome(self, outcome: Values) -> Values:
        return tuple(self.values[a][v] for (a, _), v in zip(self.outputs, outcome))


def match_signatures(m1: Model, m2: Model) -> Signature:
    """Biject settings and observables by declaration order; domains must have equal sizes."""
    pairs = []
    for kind, left, right in (
        ("settings", m1.visible_inputs, m2.visible_inputs),
        ("observables", m1.observable_outputs, m2.observable_outputs),
    ):
        if len(left) != len(right):
            raise InvalidArgument(
                f"Signature mismatch: {m1.name} has {len(left)} {kind}, {m2.name} has {len(right)}."
            )
        for a, b in zip(left, right):
            if len(a.domain) != len(b.domain):
                raise InvalidArgument(
                    f"Signature mismatch: {a.name} has {len(a.domain)} values, {b.name} has {len(b.domain)}."
                )
            if a.controllable != b.controllable:
                raise InvalidArgument(f"Signature mismatch: {a.name} and {b.name} differ in controllability.")
        pairs.append(tuple((a.name, b.name) for a, b in zip(left, right)))
    values = {
        a.name: dict(zip(a.domain, b.domain))
        for a, b in zip(
            (*m1.visible_inputs, *m1.observable_outputs), (*m2.visible_inputs, *m2.observable_outputs)
        )
    }
    return Signature(pairs[0], pairs[1], values)


def behavior_signature(m: Model, reference: Behavior) -> Signature:
    """Positional correspondence with a bare behavior; value labels are taken as they are."""
    for kind, left, right in (
        ("settings", m.visible_inputs, reference.inputs),
        ("observables", m.observable_outputs, reference.outputs),
    ):
        if len(left) != len(right):
            raise InvalidArgument(
                f"Signature mismatch: {m.name} has {len(left)} {kind}, the reference behavior has {len(right)}."
            )
    return Signature(
        tuple((v.name, n) for v, n in zip(m.visible_inputs, reference.inputs)),
        tuple((v.name, n) for v, n in zip(m.observable_outputs, reference.outputs)),
        {v.name: {x: x for x in v.domain} for v in (*m.visible_inputs, *m.observable_outputs)},
    )


def _tolerance(
    m1: Model, m2: Model | Behavior, epsilon: Fraction | None, config: QtaxConfig | None
) -> Fraction | None:
    if epsilon is not None:
        return epsilon
    if m1.decimal or (isinstance(m2, Model) and m2.decimal):
        return (config or QtaxConfig()).epsilon
    return None


def _describe(names: Sequence[str], values: Values) -> str:
    return ", ".join(f"{n}={v}" for n, v in zip(names, values)) or "-"


def _compare(
    name1: str,
    name2: str,
    keys: Iterable[Values],
    left: Behavior,
    right: Behavior,
    signature: Signature,
    tolerance: Fraction | None,
) -> Verdict:
    for key in keys:
        mine = left.table[key]
        theirs = right.table[signature.translate_key(key)]
        translated = {signature.translate_outcome(o): p for o, p in mine.items()}
        if distributions_equal(translated, theirs, tolerance):
            continue
        probabilities = {
            f"P({_describe(left.outputs, o)}|{name1})": p for o, p in mine.items()
        } | {f"P({_describe(right.outputs, o)}|{name2})": p for o, p in theirs.items()}
        return Verdict.fails(
            Witness({"scenario": _describe(left.inputs, key), "model_1": name1, "model_2": name2}, probabilities)
        )
    return Verdict.holds()


def p_equivalent(
    m1: Model, m2: Model | Behavior, epsilon: Fraction | None = None, config: QtaxConfig | None = None
) -> Verdict:
    """Same observable distributions on every setting that both models make possible.

    ``m2`` may also be a bare behavior, e.g. tabulated data; its inputs and outputs
    pair with the settings and observables of ``m1`` by position.
    """
    if isinstance(m2, Behavior):
        signature, name2, right = behavior_signature(m1, m2), REFERENCE_BEHAVIOR, m2
    else:
        signature, name2, right = match_signatures(m1, m2), m2.name, behavior(m2)
    left = behavior(m1)
    shared = [key for key in left.table if signature.translate_key(key) in right.table]
    logger.debug("Comparing %s and %s on %d shared settings", m1.name, name2, len(shared))
    return _compare(m1.name, name2, shared, left, right, signature, _tolerance(m1, m2, epsilon, config))


def _experiment_key(m: Model, experiment: Scenario | Mapping[str, str]) -> Values:
    assignment = experiment.assignment if isinstance(experiment, Scenario) else experiment
    names = [v.name for v in m.visible_inputs]
    unknown = sorted(set(assignment) - set(names))
    if unknown:
        raise InvalidArgument(f"Experiment names unknown settings {unknown} of {m.name}.")
    key = []
    for var in m.visible_inputs:
        if var.name not in assignment:
            raise InvalidArgument(f"Experiment does not fix {var.name!r}.")
        if assignment[var.name] not in var.domain:
            raise InvalidArgument(f"Experiment value {assignment[var.name]!r} is outside the domain of {var.name!r}.")
        key.append(assignment[var.name])
    return tuple(key)


def e_equivalent(
    m1: Model,
    m2: Model,
    experiments: Sequence[Scenario | Mapping[str, str]],
    epsilon: Fraction | None = None,
    config: QtaxConfig | None = None,
) -> Verdict:
    """Agreement of the behaviors on the listed experiments only."""
    if not experiments:
        return Verdict.holds(reason="no experiments listed")
    signature = match_signatures(m1, m2)
    left, right = behavior(m1), behavior(m2)
    keys = []
    for experiment in experiments:
        key = _experiment_key(m1, experiment)
        if key not in left.table or signature.translate_key(key) not in right.table:
            raise InvalidArgument(f"Experiment {_describe(left.inputs, key)} is not a possible scenario of both models.")
        if key not in keys:
            keys.append(key)
    return _compare(m1.name, m2.name, keys, left, right, signature, _tolerance(m1, m2, epsilon, config))


@dataclass(frozen=True, slots=True)
class ChshSettings:
    """Two wings (setting input and outcome) and the two setting values used on each."""

    x: str
    y: str
    a: str
    b: str
    x_values: tuple[str, str]
    y_values: tuple[str, str]
    fixed: Mapping[str, str] = field(default_factory=dict)


def default_chsh_settings(m: Model) -> ChshSettings:
    """First two controllable inputs and observables, first two values of each setting."""
    settings = m.controllable_inputs
    observables = m.observable_outputs
    if len(settings) < 2 or len(observables) < 2:
        raise InvalidArgument(f"{m.name} needs two controllable inputs and two observable outputs for CHSH.")
    x, y = settings[:2]
    if len(x.domain) < 2 or len(y.domain) < 2:
        raise InvalidArgument("CHSH needs at least two values per setting.")
    fixed = {v.name: v.domain[0] for v in m.visible_inputs if v.name not in (x.name, y.name)}
    return ChshSettings(x.name, y.name, observables[0].name, observables[1].name, x.domain[:2], y.domain[:2], fixed)


def _sign(value: str) -> int:
    if value in ("+1", "1", "+"):
        return 1
    if value in ("-1", "-"):
        return -1
    raise InvalidArgument(f"CHSH needs outcomes +1/-1, got {value!r}.")


def correlator(b: Behavior, settings: ChshSettings, x: str, y: str) -> Fraction:
    """E(x, y) = sum of a*b*P(a, b | x, y)."""
    assignment = dict(settings.fixed) | {settings.x: x, settings.y: y}
    try:
        key = tuple(assignment[name] for name in b.inputs)
    except KeyError as exc:
        raise InvalidArgument(f"CHSH settings leave input {exc.args[0]!r} unfixed.") from exc
    return sum(
        (_sign(a) * _sign(o) * p for (a, o), p in b.marginal(key, [settings.a, settings.b]).items()),
        Fraction(0),
    )


def chsh(b: Behavior, settings: ChshSettings) -> Fraction:
    """S = E(x0,y0) + E(x0,y1) + E(x1,y0) - E(x1,y1)."""
    (x0, x1), (y0, y1) = settings.x_values, settings.y_values
    value = (
        correlator(b, settings, x0, y0)
        + correlator(b, settings, x0, y1)
        + correlator(b, settings, x1, y0)
        - correlator(b, settings, x1, y1)
    )
    logger.debug("CHSH(%s,%s;%s,%s) = %s", x0, x1, y0, y1, format_fraction(value))
    return value


def model_chsh(m: Model, settings: ChshSettings | None = None) -> Fraction:
    return chsh(behavior(m), settings or default_chsh_settings(m))


def _exactly_preserved(original: Behavior, reduced: Model) -> bool:
    try:
        new = behavior(reduced)
    except ImpossibleScenario:
        return False
    if new.outputs != original.outputs:
        return False
    index = [original.inputs.index(n) for n in new.inputs]
    if {tuple(k[i] for i in index) for k in original.table} != set(new.table):
        return False
    return all(
        distributions_equal(dist, new.table[tuple(k[i] for i in index)]) for k, dist in original.table.items()
    )


def reduce(m: Model, config: QtaxConfig | None = None) -> tuple[Model, list[str]]:
    """Greedily delete removable assumptions; the behavior never changes."""
    original = behavior(m)
    current = m
    changelog: list[str] = []
    while True:
        session = Session(current, config)
        for removal in removable_assumptions(current, session):
            if _exactly_preserved(original, removal.model):
                logger.info("REDUCE: %s removed %s", m.name, removal.label)
                changelog.append(f"removed {removal.label}")
                current = removal.model
                break
        else:
            return current, changelog

"""Exact rational semantics of a model: joints, marginals, conditioning, behavior."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Mapping, Sequence

from .errors import ImpossibleScenario, InvalidArgument, ZeroEvidence
from .model import Model, Scenario, Values, prior_probability, scenarios

logger = logging.getLogger(__name__)

REFERENCE_BEHAVIOR = "reference behavior"

Assignment = Mapping[str, str]


@dataclass(frozen=True, slots=True)
class JointTable:
    """Exact distribution over full assignments of ``variables``; only the support is stored."""

    variables: tuple[str, ...]
    entries: Mapping[Values, Fraction]

    def rows(self) -> Iterator[tuple[dict[str, str], Fraction]]:
        for values, p in self.entries.items():
            yield dict(zip(self.variables, values)), p

    def probability(self, partial: Assignment) -> Fraction:
        index = _indices(self, partial.keys())
        wanted = tuple(partial.values())
        return sum(
            (p for values, p in self.entries.items() if tuple(values[i] for i in index) == wanted),
            Fraction(0),
        )

    def value_of(self, name: str) -> dict[str, Fraction]:
        return {values[0]: p for values, p in marginal(self, [name]).entries.items()}


def _indices(jt: JointTable, names) -> list[int]:
    index = []
    for name in names:
        if name not in jt.variables:
            raise InvalidArgument(f"Joint table has no variable {name!r}.")
        index.append(jt.variables.index(name))
    return index


def marginal(jt: JointTable, names: Sequence[str]) -> JointTable:
    """Sum out every variable not listed in ``names``."""
    names = tuple(names)
    index = _indices(jt, names)
    entries: dict[Values, Fraction] = {}
    for values, p in jt.entries.items():
        key = tuple(values[i] for i in index)
        entries[key] = entries.get(key, Fraction(0)) + p
    return JointTable(names, entries)


def condition(jt: JointTable, evidence: Assignment) -> JointTable:
    """Bayes conditioning on a partial assignment."""
    index = _indices(jt, evidence.keys())
    wanted = tuple(evidence.values())
    kept = {
        values: p for values, p in jt.entries.items() if tuple(values[i] for i in index) == wanted
    }
    total = sum(kept.values(), Fraction(0))
    if not total:
        raise ZeroEvidence(f"Evidence {dict(evidence)} has probability zero.")
    return JointTable(jt.variables, {values: p / total for values, p in kept.items()})


Factor = Callable[[dict[str, str]], Fraction]


class Plan:
    """Enumeration order of the outputs with each factor attached to the step that completes it."""

    __slots__ = ("names", "order", "domains", "initial", "steps")

    def __init__(self, m: Model) -> None:
        self.names = m.names
        self.order = tuple(var.name for var in m.outputs)
        self.domains = {var.name: var.domain for var in m.variables}
        position = {name: i for i, name in enumerate(self.order)}
        self.initial: list[Factor] = []
        self.steps: list[list[Factor]] = [[] for _ in self.order]

        def attach(scope: Sequence[str], factor: Factor) -> None:
            step = max((position[n] for n in scope if n in position), default=-1)
            (self.initial if step < 0 else self.steps[step]).append(factor)

        for mech in m.mechanisms:
            attach(mech.scope, _mechanism_factor(mech.parents, mech.target, mech.kernel))
        for constraint in m.constraints:
            attach(constraint.scope, _constraint_factor(constraint.scope, constraint.weights))


def _mechanism_factor(parents, target, kernel) -> Factor:
    def weight(a: dict[str, str]) -> Fraction:
        row = kernel.get(tuple(a[p] for p in parents))
        return row.get(a[target], Fraction(0)) if row else Fraction(0)

    return weight


def _constraint_factor(scope, weights) -> Factor:
    def weight(a: dict[str, str]) -> Fraction:
        return weights.get(tuple(a[n] for n in scope), Fraction(0))

    return weight


def _unnormalized(plan: Plan, inputs: Assignment) -> dict[Values, Fraction]:
    assignment = dict(inputs)
    base = Fraction(1)
    for factor in plan.initial:
        base *= factor(assignment)
        if not base:
            return {}

    weights: dict[Values, Fraction] = {}

    def descend(step: int, weight: Fraction) -> None:
        if step == len(plan.order):
            weights[tuple(assignment[n] for n in plan.names)] = weight
            return
        name = plan.order[step]
        for value in plan.domains[name]:
            assignment[name] = value
            w = weight
            for factor in plan.steps[step]:
                w *= factor(assignment)
                if not w:
                    break
            if w:
                descend(step + 1, w)
        del assignment[name]

    descend(0, base)
    return weights


def _check_scenario(m: Model, s: Scenario | Assignment) -> tuple[dict[str, str], bool]:
    if isinstance(s, Scenario):
        assignment, hypothetical = dict(s.assignment), s.hypothetical
    else:
        assignment, hypothetical = dict(s), True
    for var in m.inputs:
        if var.name not in assignment:
            raise InvalidArgument(f"Scenario misses input {var.name!r}.")
        if assignment[var.name] not in var.domain:
            raise InvalidArgument(f"Value {assignment[var.name]!r} is outside the domain of {var.name!r}.")
    extra = set(assignment) - {var.name for var in m.inputs}
    if extra:
        raise InvalidArgument(f"Scenario assigns non-inputs {sorted(extra)}.")
    return assignment, hypothetical


def joint(m: Model, s: Scenario | Assignment, plan: Plan | None = None) -> JointTable:
    """Renormalized product of kernels and constraint weights given the scenario inputs."""
    assignment, hypothetical = _check_scenario(m, s)
    if not hypothetical and not prior_probability(m, assignment):
        raise InvalidArgument(
            f"Scenario {assignment} has zero prior probability; mark it hypothetical to evaluate it."
        )
    weights = _unnormalized(plan or Plan(m), assignment)
    total = sum(weights.values(), Fraction(0))
    if not total:
        raise ImpossibleScenario(f"Constraints exclude scenario {assignment} entirely.")
    return JointTable(m.names, {values: w / total for values, w in weights.items()})


def possible_scenarios(m: Model, plan: Plan | None = None) -> list[tuple[Scenario, Fraction, JointTable]]:
    """Positive-prior scenarios that the constraints allow, with prior weight and joint."""
    plan = plan or Plan(m)
    found = []
    for scenario in scenarios(m):
        if scenario.hypothetical:
            continue
        try:
            table = joint(m, scenario, plan)
        except ImpossibleScenario:
            logger.info("Excluding impossible scenario %s of %s", scenario.describe(), m.name)
            continue
        found.append((scenario, prior_probability(m, scenario.assignment), table))
    return found


def world_joint(m: Model, plan: Plan | None = None) -> JointTable:
    """Joint over every variable with inputs drawn from the prior, restricted to possible scenarios."""
    possible = possible_scenarios(m, plan)
    if not possible:
        raise ImpossibleScenario(f"Model {m.name!r} has no physically possible scenario.")
    total = sum((p for _, p, _ in possible), Fraction(0))
    entries: dict[Values, Fraction] = {}
    for _, p, table in possible:
        for values, q in table.entries.items():
            entries[values] = entries.get(values, Fraction(0)) + p * q / total
    return JointTable(m.names, entries)


@dataclass(frozen=True, slots=True)
class Behavior:
    """Map from settings of the non-hidden inputs to distributions over observable outputs."""

    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    table: Mapping[Values, Mapping[Values, Fraction]]

    def keys(self) -> list[Values]:
        return list(self.table)

    def distribution(self, key: Values) -> Mapping[Values, Fraction]:
        try:
            return self.table[key]
        except KeyError as exc:
            raise InvalidArgument(f"Behavior has no setting {key}.") from exc

    def marginal(self, key: Values, outputs: Sequence[str]) -> dict[Values, Fraction]:
        index = [self.outputs.index(name) for name in outputs]
        result: dict[Values, Fraction] = {}
        for values, p in self.distribution(key).items():
            sub = tuple(values[i] for i in index)
            result[sub] = result.get(sub, Fraction(0)) + p
        return result


def behavior_from_joint(m: Model, world: JointTable) -> Behavior:
    keys = tuple(var.name for var in m.visible_inputs)
    outs = tuple(var.name for var in m.observable_outputs)
    key_index = [world.variables.index(n) for n in keys]
    out_index = [world.variables.index(n) for n in outs]
    grouped: dict[Values, dict[Values, Fraction]] = {}
    for values, p in world.entries.items():
        key = tuple(values[i] for i in key_index)
        out = tuple(values[i] for i in out_index)
        row = grouped.setdefault(key, {})
        row[out] = row.get(out, Fraction(0)) + p
    table = {}
    for key in sorted(grouped, key=lambda k: _domain_rank(m, keys, k)):
        row = grouped[key]
        total = sum(row.values(), Fraction(0))
        table[key] = {
            out: p / total for out, p in sorted(row.items(), key=lambda kv: _domain_rank(m, outs, kv[0]))
        }
    return Behavior(keys, outs, table)


def behavior(m: Model, plan: Plan | None = None) -> Behavior:
    """Observable behavior with hidden inputs averaged under the prior given the settings."""
    return behavior_from_joint(m, world_joint(m, plan))


def _domain_rank(m: Model, names: Sequence[str], values: Values) -> tuple[int, ...]:
    return tuple(m.variable(n).domain.index(v) for n, v in zip(names, values))


def distributions_equal(
    left: Mapping[Values, Fraction], right: Mapping[Values, Fraction], epsilon: Fraction | None = None
) -> bool:
    """Compare two distributions exactly, or within ``epsilon`` per entry."""
    for key in set(left) | set(right):
        a = left.get(key, Fraction(0))
        b = right.get(key, Fraction(0))
        if epsilon is None:
            if a != b:
                return False
        elif abs(a - b) > epsilon:
            return False
    return True

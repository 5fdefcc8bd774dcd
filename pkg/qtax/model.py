"""The c-model: variables, mechanisms, constraints and prior, plus validation."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .errors import InvalidArgument
from .lattice import Lattice, Region

logger = logging.getLogger(__name__)

Values = tuple[str, ...]
Distribution = Mapping[str, Fraction]


class Kind(str, Enum):
    INPUT = "input"
    OUTPUT = "output"


@dataclass(frozen=True, slots=True)
class Variable:
    name: str
    domain: Values
    kind: Kind
    localization: Region | None = None
    hidden: bool = False
    controllable: bool = False
    observable: bool = False

    @property
    def is_input(self) -> bool:
        return self.kind is Kind.INPUT

    @property
    def is_output(self) -> bool:
        return self.kind is Kind.OUTPUT

    @property
    def localized(self) -> bool:
        return self.localization is not None

    @property
    def role(self) -> str:
        if self.hidden:
            return "hidden"
        if self.controllable:
            return "controllable"
        return "plain"


@dataclass(frozen=True, slots=True)
class Mechanism:
    """Stochastic kernel from parent values to a distribution over the target."""

    target: str
    parents: tuple[str, ...]
    kernel: Mapping[Values, Distribution]

    @property
    def scope(self) -> tuple[str, ...]:
        return (*self.parents, self.target)

    def weight(self, parent_values: Values, value: str) -> Fraction:
        return self.kernel.get(parent_values, {}).get(value, Fraction(0))

    @property
    def is_deterministic(self) -> bool:
        return all(
            sum(1 for p in row.values() if p) == 1 for row in self.kernel.values()
        )


@dataclass(frozen=True, slots=True)
class Constraint:
    """Weight table over a scope; tuples without an entry weigh zero."""

    scope: tuple[str, ...]
    weights: Mapping[Values, Fraction]

    def weight(self, values: Values) -> Fraction:
        return self.weights.get(values, Fraction(0))

    def label(self) -> str:
        return f"constraint({', '.join(self.scope)})"


@dataclass(frozen=True, slots=True)
class Prior:
    """Joint distribution over the input variables named in ``scope``."""

    scope: tuple[str, ...]
    table: Mapping[Values, Fraction]

    def probability(self, values: Values) -> Fraction:
        return self.table.get(values, Fraction(0))


@dataclass(frozen=True, slots=True)
class Scenario:
    """Complete assignment of the model inputs."""

    assignment: Mapping[str, str]
    hypothetical: bool = False

    def describe(self) -> str:
        return ", ".join(f"{k}={v}" for k, v in self.assignment.items())


@dataclass(frozen=True, slots=True)
class Diagnostic:
    code: str
    message: str
    entity: str

    def __str__(self) -> str:
        return f"{self.code} [{self.entity}] {self.message}"


@dataclass(frozen=True, slots=True)
class Model:
    name: str
    lattice: Lattice | None
    variables: tuple[Variable, ...]
    mechanisms: tuple[Mechanism, ...]
    constraints: tuple[Constraint, ...] = ()
    prior: Prior = field(default_factory=lambda: Prior((), {(): Fraction(1)}))
    decimal: bool = False

    def variable(self, name: str) -> Variable:
        for var in self.variables:
            if var.name == name:
                return var
        raise InvalidArgument(f"Model {self.name!r} has no variable {name!r}.")

    def has_variable(self, name: str) -> bool:
        return any(var.name == name for var in self.variables)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(var.name for var in self.variables)

    @property
    def inputs(self) -> tuple[Variable, ...]:
        return tuple(var for var in self.variables if var.is_input)

    @property
    def outputs(self) -> tuple[Variable, ...]:
        return tuple(var for var in self.variables if var.is_output)

    @property
    def visible_inputs(self) -> tuple[Variable, ...]:
        return tuple(var for var in self.inputs if not var.hidden)

    @property
    def hidden_inputs(self) -> tuple[Variable, ...]:
        return tuple(var for var in self.inputs if var.hidden)

    @property
    def controllable_inputs(self) -> tuple[Variable, ...]:
        return tuple(var for var in self.inputs if var.controllable)

    @property
    def observable_outputs(self) -> tuple[Variable, ...]:
        return tuple(var for var in self.outputs if var.observable)

    def mechanism_for(self, target: str) -> Mechanism | None:
        for mech in self.mechanisms:
            if mech.target == target:
                return mech
        return None

    def evolve(self, **changes) -> "Model":
        return replace(self, **changes)


def uniform_prior(inputs: Iterable[Variable]) -> Prior:
    """Uniform product prior over ``inputs`` in the given order."""
    inputs = tuple(inputs)
    combos = list(itertools.product(*(var.domain for var in inputs)))
    weight = Fraction(1, len(combos))
    return Prior(tuple(var.name for var in inputs), {combo: weight for combo in combos})


def scenarios(m: Model) -> Iterator[Scenario]:
    """Every complete input assignment in domain order; zero-prior ones are hypothetical."""
    names = tuple(var.name for var in m.inputs)
    for combo in itertools.product(*(var.domain for var in m.inputs)):
        assignment = dict(zip(names, combo))
        yield Scenario(assignment, hypothetical=not prior_probability(m, assignment))


def prior_probability(m: Model, assignment: Mapping[str, str]) -> Fraction:
    return m.prior.probability(tuple(assignment[name] for name in m.prior.scope))


def marginal_prior(m: Model, keep: Iterable[str]) -> Prior:
    """Marginalize the prior onto the input names in ``keep`` (declaration order)."""
    keep_set = set(keep)
    scope = tuple(name for name in m.prior.scope if name in keep_set)
    index = [m.prior.scope.index(name) for name in scope]
    table: dict[Values, Fraction] = {}
    for values, p in m.prior.table.items():
        if p:
            key = tuple(values[i] for i in index)
            table[key] = table.get(key, Fraction(0)) + p
    return Prior(scope, table)


def validate(m: Model, tolerance: Fraction | None = None) -> list[Diagnostic]:
    """Check every structural invariant; an empty list means the model is valid.

    ``tolerance`` relaxes the sum-to-one checks for decimal models.
    """
    diagnostics: list[Diagnostic] = []

    def report(code: str, entity: str, message: str) -> None:
        diagnostics.append(Diagnostic(code, message, entity))

    seen: set[str] = set()
    for var in m.variables:
        if var.name in seen:
            report("DUPLICATE_VARIABLE", var.name, "variable declared more than once")
        seen.add(var.name)
        if not var.domain:
            report("EMPTY_DOMAIN", var.name, "domain must be nonempty")
        if len(set(var.domain)) != len(var.domain):
            report("DUPLICATE_VALUE", var.name, "domain values must be distinct")
        if var.hidden and var.observable:
            report("HIDDEN_OBSERVABLE_CONFLICT", var.name, "a hidden variable cannot be observable")
        if var.hidden and var.is_output:
            report("HIDDEN_OUTPUT", var.name, "only inputs can be hidden")
        if var.controllable and var.hidden:
            report("CONTROLLABLE_HIDDEN_CONFLICT", var.name, "a controllable input cannot be hidden")
        if var.controllable and var.is_output:
            report("CONTROLLABLE_OUTPUT", var.name, "only inputs can be controllable")
        if var.localization is not None:
            if m.lattice is None:
                report("LOCALIZED_WITHOUT_LATTICE", var.name, "localized variable in an alocal model")
            elif var.localization.is_empty():
                report("EMPTY_LOCALIZATION", var.name, "localization region is empty")
            elif not m.lattice.covers(var.localization):
                report(
                    "LOCALIZATION_OUT_OF_BOUNDS",
                    var.name,
                    f"region {var.localization.label()} leaves the lattice",
                )

    domains = {var.name: var.domain for var in m.variables}
    kinds = {var.name: var.kind for var in m.variables}

    targets: set[str] = set()
    for mech in m.mechanisms:
        entity = f"mech {mech.target}"
        if mech.target not in domains:
            report("UNKNOWN_VARIABLE", entity, f"unknown target {mech.target!r}")
            continue
        if kinds[mech.target] is not Kind.OUTPUT:
            report("MECHANISM_TARGET_NOT_OUTPUT", entity, "mechanism targets must be outputs")
        if mech.target in targets:
            report("DUPLICATE_MECHANISM", entity, "output has more than one mechanism")
        targets.add(mech.target)
        unknown = [p for p in mech.parents if p not in domains]
        if unknown:
            report("UNKNOWN_VARIABLE", entity, f"unknown parents {', '.join(unknown)}")
            continue
        if mech.target in mech.parents:
            report("SELF_PARENT", entity, "a mechanism cannot list its target as a parent")
        _check_kernel(mech, domains, entity, report, tolerance)

    for var in m.outputs:
        if var.name not in targets:
            report("MISSING_MECHANISM", var.name, "output has no mechanism")

    for index, constraint in enumerate(m.constraints):
        entity = f"constraint[{index}]"
        unknown = [name for name in constraint.scope if name not in domains]
        if unknown:
            report("UNKNOWN_VARIABLE", entity, f"unknown scope variables {', '.join(unknown)}")
            continue
        for values, w in constraint.weights.items():
            if len(values) != len(constraint.scope) or any(
                v not in domains[n] for n, v in zip(constraint.scope, values)
            ):
                report("VALUE_NOT_IN_DOMAIN", entity, f"tuple {values} is outside the scope domains")
            if w < 0 or w > 1:
                report("WEIGHT_OUT_OF_RANGE", entity, f"weight {w} is outside [0, 1]")
        if not any(w > 0 for w in constraint.weights.values()):
            report("CONSTRAINT_ALL_ZERO", entity, "at least one tuple needs positive weight")

    _check_prior(m, domains, report, tolerance)
    return diagnostics


def _off_one(total: Fraction, tolerance: Fraction | None) -> bool:
    return total != 1 if tolerance is None else abs(total - 1) > tolerance


def _check_kernel(mech: Mechanism, domains, entity: str, report, tolerance: Fraction | None) -> None:
    target_domain = domains[mech.target]
    for parent_values in itertools.product(*(domains[p] for p in mech.parents)):
        row = mech.kernel.get(parent_values)
        if row is None:
            report("KERNEL_MISSING_ROW", entity, f"no row for parent values {parent_values}")
            continue
        if any(v not in target_domain for v in row):
            report("VALUE_NOT_IN_DOMAIN", entity, f"row {parent_values} mentions values outside the domain")
        if any(p < 0 for p in row.values()):
            report("NEGATIVE_PROBABILITY", entity, f"row {parent_values} has a negative entry")
        total = sum(row.values(), Fraction(0))
        if _off_one(total, tolerance):
            report("KERNEL_NOT_NORMALIZED", entity, f"row {parent_values} sums to {total}")
    extra = [k for k in mech.kernel if len(k) != len(mech.parents)]
    if extra:
        report("ARITY_MISMATCH", entity, f"rows {extra} do not match the parent list")


def _check_prior(m: Model, domains, report, tolerance: Fraction | None) -> None:
    inputs = {var.name for var in m.inputs}
    scope = m.prior.scope
    if set(scope) != inputs or len(scope) != len(set(scope)):
        report("PRIOR_SCOPE_MISMATCH", "prior", "prior scope must list every input exactly once")
        return
    for values, p in m.prior.table.items():
        if len(values) != len(scope) or any(v not in domains[n] for n, v in zip(scope, values)):
            report("VALUE_NOT_IN_DOMAIN", "prior", f"tuple {values} is outside the input domains")
        if p < 0:
            report("NEGATIVE_PROBABILITY", "prior", f"tuple {values} has negative probability")
    total = sum(m.prior.table.values(), Fraction(0))
    if _off_one(total, tolerance):
        report("PRIOR_NOT_NORMALIZED", "prior", f"prior sums to {total}")


def rename(m: Model, mapping: Mapping[str, str], name: str | None = None) -> Model:
    """Apply a variable renaming; names missing from ``mapping`` are kept."""

    def ren(n: str) -> str:
        return mapping.get(n, n)

    return Model(
        name=name or m.name,
        lattice=m.lattice,
        variables=tuple(replace(v, name=ren(v.name)) for v in m.variables),
        mechanisms=tuple(
            Mechanism(ren(mech.target), tuple(ren(p) for p in mech.parents), mech.kernel)
            for mech in m.mechanisms
        ),
        constraints=tuple(
            Constraint(tuple(ren(n) for n in c.scope), c.weights) for c in m.constraints
        ),
        prior=Prior(tuple(ren(n) for n in m.prior.scope), m.prior.table),
        decimal=m.decimal,
    )


def relabel_values(m: Model, mapping: Mapping[str, Mapping[str, str]]) -> Model:
    """Rename domain values per variable, keeping domain order."""

    def val(name: str, value: str) -> str:
        return mapping.get(name, {}).get(value, value)

    def key(names: Iterable[str], values: Values) -> Values:
        return tuple(val(n, v) for n, v in zip(names, values))

    return Model(
        name=m.name,
        lattice=m.lattice,
        variables=tuple(replace(v, domain=tuple(val(v.name, d) for d in v.domain)) for v in m.variables),
        mechanisms=tuple(
            Mechanism(
                mech.target,
                mech.parents,
                {
                    key(mech.parents, k): {val(mech.target, v): p for v, p in row.items()}
                    for k, row in mech.kernel.items()
                },
            )
            for mech in m.mechanisms
        ),
        constraints=tuple(
            Constraint(c.scope, {key(c.scope, k): w for k, w in c.weights.items()})
            for c in m.constraints
        ),
        prior=Prior(m.prior.scope, {key(m.prior.scope, k): p for k, p in m.prior.table.items()}),
        decimal=m.decimal,
    )


def translate(m: Model, dx: int, dt: int) -> Model:
    """Shift the lattice and every localization by ``(dx, dt)``."""
    if m.lattice is None:
        return m
    return m.evolve(
        lattice=m.lattice.shifted(dx, dt),
        variables=tuple(
            replace(v, localization=v.localization.shifted(dx, dt)) if v.localization else v
            for v in m.variables
        ),
    )


def reverse(m: Model) -> Model:
    """Time-reverse every localization: ``(x, t) -> (x, t_max + t_min - t)``."""
    if m.lattice is None:
        raise InvalidArgument("Only models on a lattice can be time-reversed.")
    name = m.name.removesuffix("_reversed") if m.name.endswith("_reversed") else f"{m.name}_reversed"
    return m.evolve(
        name=name,
        variables=tuple(
            replace(v, localization=m.lattice.mirror(v.localization)) if v.localization else v
            for v in m.variables
        ),
    )

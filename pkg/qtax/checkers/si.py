"""Statistical independence, additional variables and the superdeterminism conjunction."""

from __future__ import annotations

import itertools
import logging
from fractions import Fraction
from typing import Iterator, Sequence

from ..errors import InvalidArgument, NotApplicable
from ..inference import REFERENCE_BEHAVIOR, Behavior, behavior, distributions_equal, marginal
from ..lattice import Arrow, ConePart, Region, lightcone
from ..model import Model, Variable
from .atemporal import check_deterministic
from .locality import check_local_causality
from .session import Session, session_for
from .temporal import check_pseudo_retrocausal
from .verdict import Verdict, Witness

logger = logging.getLogger(__name__)

ONE_WORLD_NOTE = "one-world requirement: satisfied by construction (one outcome per support point)"


def common_past(m: Model, settings: Sequence[Variable]) -> Region | None:
    """Intersection of the past lightcones of the setting regions."""
    if m.lattice is None:
        return None
    regions = [v.localization for v in settings if v.localization is not None]
    if not regions or len(regions) != len(settings):
        return None
    cones = [lightcone(r, m.lattice, ConePart.PAST).sites for r in regions]
    return Region(frozenset.intersection(*cones))


def default_lambda(m: Model, settings: Sequence[Variable]) -> list[str]:
    """Hidden inputs inside the common past of the settings, else every hidden input."""
    hidden = list(m.hidden_inputs)
    try:
        past = common_past(m, settings)
    except NotApplicable:
        past = None
    if past is not None:
        inside = [v.name for v in hidden if v.localization is not None and v.localization.issubset(past)]
        if inside:
            return inside
    return [v.name for v in hidden]


def check_statistical_independence(
    m: Model,
    lambda_vars: Sequence[str] | None = None,
    setting_vars: Sequence[str] | None = None,
    session: Session | None = None,
) -> Verdict:
    s = session_for(m, session)
    settings = [m.variable(n) for n in setting_vars] if setting_vars is not None else list(m.controllable_inputs)
    lambdas = list(lambda_vars) if lambda_vars is not None else default_lambda(m, settings)
    _validate_si_arguments(m, lambdas, settings)
    key = ("statistical_independence", tuple(lambdas), tuple(v.name for v in settings))
    return s.verdict(key, lambda: _statistical_independence(s, lambdas, [v.name for v in settings]))


def _validate_si_arguments(m: Model, lambdas: Sequence[str], settings: Sequence[Variable]) -> None:
    for name in lambdas:
        if not m.variable(name).is_input:
            raise InvalidArgument(f"{name!r} is not an input variable.")
    for var in settings:
        if not var.controllable:
            raise InvalidArgument(f"Setting {var.name!r} is not controllable.")
    overlap = set(lambdas) & {v.name for v in settings}
    if overlap:
        raise InvalidArgument(f"Hidden and setting variables overlap: {sorted(overlap)}.")


def _statistical_independence(s: Session, lambdas: list[str], settings: list[str]) -> Verdict:
    if not lambdas:
        raise NotApplicable("no hidden variables to test")
    if not settings:
        raise NotApplicable("no setting variables")
    inputs = marginal(s.world(), lambdas + settings)
    n = len(lambdas)
    p_lambda: dict[tuple, Fraction] = {}
    p_settings: dict[tuple, Fraction] = {}
    for values, p in inputs.entries.items():
        p_lambda[values[:n]] = p_lambda.get(values[:n], Fraction(0)) + p
        p_settings[values[n:]] = p_settings.get(values[n:], Fraction(0)) + p
    m = s.model
    lambda_space = list(itertools.product(*(m.variable(v).domain for v in lambdas)))
    setting_space = list(itertools.product(*(m.variable(v).domain for v in settings)))
    for xy in setting_space:
        weight = p_settings.get(xy, Fraction(0))
        if not weight:
            continue
        for lam in lambda_space:
            conditional = inputs.entries.get(lam + xy, Fraction(0)) / weight
            unconditional = p_lambda.get(lam, Fraction(0))
            if not s.equal(conditional, unconditional):
                return Verdict.fails(
                    Witness(
                        {
                            "lambda": _join(lambdas, lam),
                            "settings": _join(settings, xy),
                        },
                        {"P(lambda|xy)": conditional, "P(lambda)": unconditional},
                    ),
                    items=tuple(lambdas),
                )
    return Verdict.holds(items=tuple(lambdas))


def _join(names: Sequence[str], values: Sequence[str]) -> str:
    return ", ".join(f"{n}={v}" for n, v in zip(names, values))


def _injections(mine: list[str], theirs: list[str]) -> Iterator[dict[str, str]]:
    """Maximum matchings of ``mine`` into ``theirs`` in a deterministic order."""
    size = min(len(mine), len(theirs))
    for chosen in itertools.combinations(mine, size):
        for target in itertools.permutations(theirs, size):
            yield dict(zip(chosen, target))


def _signature(var: Variable, bare: bool = False) -> tuple[str, int]:
    """Role and domain size; against a bare behavior every non-hidden input is just visible."""
    if bare and not var.hidden:
        return "visible", len(var.domain)
    return var.role, len(var.domain)


def _reference_inputs(reference: Model | Behavior) -> list[tuple[str, tuple[str, int]]]:
    if isinstance(reference, Model):
        return [(v.name, _signature(v)) for v in reference.inputs]
    return [
        (name, ("visible", len({key[i] for key in reference.table})))
        for i, name in enumerate(reference.inputs)
    ]


def _matchings(m: Model, reference: Model | Behavior, limit: int) -> Iterator[dict[str, str]]:
    bare = isinstance(reference, Behavior)
    groups: dict[tuple, tuple[list[str], list[str]]] = {}
    for var in m.inputs:
        groups.setdefault(_signature(var, bare), ([], []))[0].append(var.name)
    for name, signature in _reference_inputs(reference):
        groups.setdefault(signature, ([], []))[1].append(name)
    ordered = [groups[key] for key in sorted(groups)]
    if len(m.inputs) > limit:
        logger.warning(
            "ADDITIONAL VARIABLES: %s has %d inputs (> %d); using declaration-order matching",
            m.name,
            len(m.inputs),
            limit,
        )
        merged: dict[str, str] = {}
        for mine, theirs in ordered:
            merged.update(zip(mine, theirs))
        yield merged
        return
    for combo in itertools.product(*(list(_injections(mine, theirs)) for mine, theirs in ordered)):
        merged = {}
        for part in combo:
            merged.update(part)
        yield merged


def _behavior_matches(
    mine: Behavior, theirs: Behavior, mapping: dict[str, str], epsilon: Fraction | None
) -> bool:
    """Behaviors agree on shared settings once matched inputs are renamed."""
    if len(mine.outputs) != len(theirs.outputs):
        return False
    renamed = [mapping.get(n) for n in mine.inputs]
    if None in renamed or set(renamed) != set(theirs.inputs):
        return False
    order = [renamed.index(n) for n in theirs.inputs]
    shared = False
    for key, dist in mine.table.items():
        other = theirs.table.get(tuple(key[i] for i in order))
        if other is None:
            continue
        shared = True
        if not distributions_equal(dist, other, epsilon):
            return False
    return shared


def identify_additional_variables(
    m: Model, reference: Model | Behavior, session: Session | None = None
) -> list[str]:
    """Inputs of ``m`` with no role- and domain-preserving counterpart in ``reference``.

    Prefers a matching under which the behaviors agree; when none does, the first
    maximum matching is used and a warning is logged.
    """
    s = session_for(m, session)
    limit = s.config.match_limit
    mine = s.behavior()
    theirs = reference if isinstance(reference, Behavior) else behavior(reference)
    decimal = m.decimal or (isinstance(reference, Model) and reference.decimal)
    epsilon = s.epsilon if decimal else None
    first: dict[str, str] | None = None
    best: dict[str, str] | None = None
    for mapping in _matchings(m, reference, limit):
        if _behavior_matches(mine, theirs, mapping, epsilon):
            best = mapping
            break
        if first is None:
            first = mapping
    if best is None:
        logger.warning(
            "ADDITIONAL VARIABLES: no input matching of %s reproduces the behavior of %s; using %s",
            m.name,
            _reference_name(reference),
            first or {},
        )
        best = first
    matched = best or {}
    return [v.name for v in m.inputs if v.name not in matched]


def _reference_name(reference: Model | Behavior) -> str:
    return reference.name if isinstance(reference, Model) else REFERENCE_BEHAVIOR


def common_cause_note(m: Model, session: Session | None = None) -> str | None:
    """Describe a hidden seed in the common past that fixes every setting, if present."""
    s = session_for(m, session)
    settings = list(m.controllable_inputs)
    if not settings or m.lattice is None:
        return None
    past = common_past(m, settings)
    if past is None:
        return None
    prior = marginal(s.world(), [v.name for v in m.inputs])
    for seed in m.hidden_inputs:
        if seed.localization is None or not seed.localization.issubset(past):
            continue
        seed_index = prior.variables.index(seed.name)
        fixed = True
        for setting in settings:
            index = prior.variables.index(setting.name)
            seen: dict[str, str] = {}
            for values in prior.entries:
                if seen.setdefault(values[seed_index], values[index]) != values[index]:
                    fixed = False
                    break
            if not fixed:
                break
        if fixed:
            names = ", ".join(v.name for v in settings)
            return f"common-cause structure: hidden seed {seed.name} in the common past fixes settings {names}"
    return None


def check_superdeterministic(
    m: Model,
    reference: Model | Behavior,
    epsilon: Fraction | None = None,
    session: Session | None = None,
) -> Verdict:
    """Deterministic, locally causal, SI-violating, with additional variables, and
    p-equivalent to ``reference`` (a model or a bare behavior)."""
    s = session_for(m, session)
    key = ("superdeterministic", _reference_name(reference), id(reference), epsilon)
    return s.verdict(key, lambda: _superdeterministic(s, reference, epsilon))


def _superdeterministic(s: Session, reference: Model | Behavior, epsilon: Fraction | None) -> Verdict:
    from ..equivalence import p_equivalent

    m = s.model
    if m.lattice is None or m.lattice.arrow is not Arrow.FORWARD:
        raise NotApplicable("acausal: local causality needs an arrow of time")
    details: dict[str, Verdict] = {
        "deterministic": check_deterministic(m, s),
        "local_causality": check_local_causality(m, s),
    }
    si = check_statistical_independence(m, session=s)
    if si.applicable:
        details["statistical_independence_violated"] = (
            Verdict.holds(witness=si.witness) if si.failed else Verdict.fails(Witness({"statistical_independence": "holds"}))
        )
    else:
        details["statistical_independence_violated"] = si

    extra = identify_additional_variables(m, reference, s)
    details["additional_variables"] = (
        Verdict.holds(items=tuple(extra)) if extra else Verdict.fails(Witness({"additional_variables": "none"}))
    )
    try:
        details["empirical_equivalence"] = p_equivalent(m, reference, epsilon=epsilon)
    except InvalidArgument as exc:
        details["empirical_equivalence"] = Verdict.fails(Witness({"signature": str(exc)}))

    notes = [ONE_WORLD_NOTE]
    failing = [name for name, verdict in details.items() if not verdict.held]
    if failing:
        first = details[failing[0]]
        return Verdict.fails(
            first.witness or Witness({"conjunct": failing[0]}),
            reason=f"conjuncts not satisfied: {', '.join(failing)}",
            details=details,
            notes=tuple(notes),
        )
    pseudo = check_pseudo_retrocausal(m, s)
    notes.append(
        "soft superdeterminism: the model is also pseudo-retrocausal"
        if pseudo.held
        else "hard superdeterminism: the model is not pseudo-retrocausal"
    )
    return Verdict.holds(details=details, notes=tuple(notes))

"""Checks that need no temporal order: determinism, predictability, flags, irreducibility."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

from ..errors import ImpossibleScenario
from ..inference import Behavior, behavior
from ..lattice import Arrow
from ..model import Constraint, Mechanism, Model, marginal_prior
from .session import Session, session_for
from .verdict import Verdict, Witness

logger = logging.getLogger(__name__)


def check_deterministic(m: Model, session: Session | None = None) -> Verdict:
    s = session_for(m, session)
    return s.verdict("deterministic", lambda: _deterministic(s))


def _deterministic(s: Session) -> Verdict:
    observable = [var.name for var in s.model.observable_outputs]
    for scenario, _, table in s.possible():
        for name in observable:
            for value, p in table.value_of(name).items():
                if not s.equal(p, Fraction(0)) and not s.equal(p, Fraction(1)):
                    return Verdict.fails(
                        Witness(
                            {"scenario": scenario.describe(), "output": name, "value": value},
                            {f"P({name}={value}|scenario)": p},
                        )
                    )
    return Verdict.holds()


def _inference_failure(s: Session, name: str) -> Witness | None:
    """Witness that hidden input ``name`` is not a function of the observed variables."""
    m = s.model
    world = s.world()
    observed = [var.name for var in m.visible_inputs] + [var.name for var in m.observable_outputs]
    obs_index = [world.variables.index(n) for n in observed]
    target = world.variables.index(name)
    seen: dict[tuple, tuple[str, Fraction]] = {}
    for values, p in world.entries.items():
        key = tuple(values[i] for i in obs_index)
        value = values[target]
        if key not in seen:
            seen[key] = (value, p)
        elif seen[key][0] != value:
            context = ", ".join(f"{n}={v}" for n, v in zip(observed, key)) or "no observation"
            first_value, first_p = seen[key]
            return Witness(
                {"hidden": name, "observation": context, "values": f"{first_value}, {value}"},
                {f"P({name}={first_value},observation)": first_p, f"P({name}={value},observation)": p},
            )
    return None


def check_hidden_variables(m: Model, session: Session | None = None) -> Verdict:
    """Holds when some hidden input cannot be inferred from any observation."""
    s = session_for(m, session)
    return s.verdict("hidden_variables", lambda: _hidden_variables(s))


def _hidden_variables(s: Session) -> Verdict:
    blocking = []
    first: Witness | None = None
    for var in s.model.hidden_inputs:
        witness = _inference_failure(s, var.name)
        if witness is not None:
            blocking.append(var.name)
            first = first or witness
    if blocking:
        return Verdict.holds(items=tuple(blocking), witness=first)
    return Verdict.fails(Witness({"hidden_inputs": "all inferable from observations"}))


def check_predictable(m: Model, session: Session | None = None) -> Verdict:
    s = session_for(m, session)
    return s.verdict("predictable", lambda: _predictable(s))


def _predictable(s: Session) -> Verdict:
    deterministic = check_deterministic(s.model, s)
    if not deterministic.held:
        return Verdict.fails(
            deterministic.witness or Witness({}),
            reason="not deterministic",
            details={"deterministic": deterministic},
        )
    hidden = check_hidden_variables(s.model, s)
    if hidden.held:
        return Verdict.fails(hidden.witness or Witness({}), items=hidden.items)
    return Verdict.holds(details={"deterministic": deterministic})


def check_structural_flags(m: Model, session: Session | None = None) -> dict[str, Verdict]:
    """alocal, atemporal and acausal flags; atemporal implies acausal."""
    lat = m.lattice
    context = {"lattice": lat.describe() if lat else "none"}
    alocal = lat is None
    atemporal = alocal or lat.t_min == lat.t_max
    acausal = atemporal or lat.arrow is Arrow.NONE
    return {
        "alocal": Verdict.of(alocal, Witness(context)),
        "atemporal": Verdict.of(atemporal, Witness(context)),
        "acausal": Verdict.of(acausal, Witness(context)),
    }


@dataclass(frozen=True, slots=True)
class Removal:
    """A deletable assumption and the model left after deleting it."""

    label: str
    model: Model


def _referenced(m: Model) -> set[str]:
    names: set[str] = set()
    for mech in m.mechanisms:
        names.update(mech.parents)
    for constraint in m.constraints:
        names.update(constraint.scope)
    return names


def deletion_candidates(m: Model) -> list[Removal]:
    """Single inputs, constraints and unused hidden mechanisms that could be deleted."""
    referenced = _referenced(m)
    candidates = []
    for var in m.inputs:
        if var.name not in referenced:
            keep = [v.name for v in m.inputs if v.name != var.name]
            candidates.append(
                Removal(
                    f"input {var.name}",
                    m.evolve(
                        variables=tuple(v for v in m.variables if v.name != var.name),
                        prior=marginal_prior(m, keep),
                    ),
                )
            )
    for mech in m.mechanisms:
        target = m.variable(mech.target)
        if not target.observable and target.name not in referenced:
            candidates.append(
                Removal(
                    f"mechanism {mech.target}",
                    m.evolve(
                        variables=tuple(v for v in m.variables if v.name != mech.target),
                        mechanisms=tuple(x for x in m.mechanisms if x is not mech),
                    ),
                )
            )
    for index, constraint in enumerate(m.constraints):
        candidates.append(
            Removal(
                f"{constraint.label()}#{index}",
                m.evolve(constraints=m.constraints[:index] + m.constraints[index + 1 :]),
            )
        )
    return candidates


def behavior_preserved(original: Behavior, reduced: Model, s: Session) -> bool:
    """True when ``reduced`` reproduces ``original`` on every setting, keys projected."""
    try:
        new = behavior(reduced)
    except ImpossibleScenario:
        return False
    if new.outputs != original.outputs:
        return False
    index = [original.inputs.index(n) for n in new.inputs]
    projected = {tuple(key[i] for i in index) for key in original.table}
    if projected != set(new.table):
        return False
    return all(
        s.same_distribution(dist, new.table[tuple(key[i] for i in index)])
        for key, dist in original.table.items()
    )


def removable_assumptions(m: Model, session: Session | None = None) -> list[Removal]:
    """Deletion test: assumptions whose removal leaves the behavior unchanged."""
    s = session_for(m, session)

    def scan() -> list[Removal]:
        original = s.behavior()
        return [r for r in deletion_candidates(m) if behavior_preserved(original, r.model, s)]

    return s.memo("removable", scan)


def _block_model(m: Model, block: list[Mechanism | Constraint], tag: str) -> Model:
    mechanisms = tuple(a for a in block if isinstance(a, Mechanism))
    constraints = tuple(a for a in block if isinstance(a, Constraint))
    used: set[str] = set()
    for a in block:
        used.update(a.scope)
    inputs = [v.name for v in m.inputs if v.name in used]
    return m.evolve(
        name=f"{m.name}_{tag}",
        variables=tuple(v for v in m.variables if v.name in used),
        mechanisms=mechanisms,
        constraints=constraints,
        prior=marginal_prior(m, inputs),
    )


def _valid_block(block: list[Mechanism | Constraint], outputs: set[str]) -> bool:
    targets = {a.target for a in block if isinstance(a, Mechanism)}
    for a in block:
        if any(n in outputs and n not in targets for n in a.scope):
            return False
    return True


def _label(a: Mechanism | Constraint) -> str:
    return f"mechanism {a.target}" if isinstance(a, Mechanism) else a.label()


def _factorizes(s: Session, first: Model, second: Model) -> bool:
    original = s.behavior()
    try:
        parts = [behavior(first), behavior(second)]
    except ImpossibleScenario:
        return False
    for key, dist in original.table.items():
        subs = []
        for part in parts:
            sub_key = tuple(key[original.inputs.index(n)] for n in part.inputs)
            if sub_key not in part.table:
                return False
            subs.append((part, part.table[sub_key]))
        product: dict[tuple, Fraction] = {}
        (p1, d1), (p2, d2) = subs
        for o1, q1 in d1.items():
            for o2, q2 in d2.items():
                named = dict(zip(p1.outputs, o1)) | dict(zip(p2.outputs, o2))
                out = tuple(named[n] for n in original.outputs)
                product[out] = product.get(out, Fraction(0)) + q1 * q2
        if not s.same_distribution(dist, product):
            return False
    return True


def partition_split(m: Model, session: Session | None = None) -> Witness | None:
    """Partition test: a split of the assumptions into two independent valid setups."""
    s = session_for(m, session)
    assumptions: list[Mechanism | Constraint] = [*m.mechanisms, *m.constraints]
    outputs = {v.name for v in m.outputs}
    n = len(assumptions)
    for mask in range(1, 2 ** (n - 1)) if n >= 2 else ():
        first = [a for i, a in enumerate(assumptions) if i < n - 1 and mask >> i & 1]
        second = [a for i, a in enumerate(assumptions) if not (i < n - 1 and mask >> i & 1)]
        if not (_valid_block(first, outputs) and _valid_block(second, outputs)):
            continue
        if _factorizes(s, _block_model(m, first, "a"), _block_model(m, second, "b")):
            return Witness(
                {
                    "block_1": ", ".join(_label(a) for a in first),
                    "block_2": ", ".join(_label(a) for a in second),
                }
            )
    return None


def check_irreducible(m: Model, session: Session | None = None) -> Verdict:
    s = session_for(m, session)
    return s.verdict("irreducible", lambda: _irreducible(s))


def _irreducible(s: Session) -> Verdict:
    m = s.model
    removable = removable_assumptions(m, s)
    labels = tuple(r.label for r in removable)
    size = len(m.mechanisms) + len(m.constraints) + len(m.inputs)
    limit = s.config.partition_limit
    if size > limit:
        logger.warning(
            "IRREDUCIBILITY: partition test skipped for %s (%d assumptions and inputs > %d)",
            m.name,
            size,
            limit,
        )
        reason = f"partition test skipped: {size} assumptions and inputs exceed the limit of {limit}"
        if removable:
            return Verdict.fails(Witness({"removable": ", ".join(labels)}), items=labels, reason=reason)
        return Verdict.holds(reason=reason)

    if removable:
        return Verdict.fails(Witness({"removable": ", ".join(labels)}), items=labels)
    split = partition_split(m, s)
    if split is not None:
        return Verdict.fails(split)
    return Verdict.holds()

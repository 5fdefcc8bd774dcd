"""Arrow-of-time properties: temporal determinism, reversibility, FID/FIR, causal order, signalling."""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Sequence

from ..errors import NotApplicable
from ..inference import marginal
from ..lattice import Arrow, spacelike_separated
from ..model import Model, Variable
from ..structure import detect_aao, input_dependence
from .atemporal import check_deterministic
from .locality import (
    LOCALLY_SUBLUMINAL,
    LOCALLY_SUPERLUMINAL,
    NON_LOCALLY_SUBLUMINAL,
    NON_LOCALLY_SUPERLUMINAL,
    check_local_causality,
    check_strong_coa,
    classify_locality,
)
from .session import Session, session_for
from .verdict import Classification, Verdict, Witness

logger = logging.getLogger(__name__)

CAUSAL_ORDER = {
    LOCALLY_SUBLUMINAL: ("locally-causal", "locally-retrocausal"),
    LOCALLY_SUPERLUMINAL: ("locally-superluminal-temporal", "locally-superluminal-retrotemporal"),
    NON_LOCALLY_SUBLUMINAL: ("non-locally-causal", "non-locally-retrocausal"),
    NON_LOCALLY_SUPERLUMINAL: (
        "non-locally-superluminal-temporal",
        "non-locally-superluminal-retrotemporal",
    ),
}

PSEUDO_ORDER = {
    LOCALLY_SUBLUMINAL: "pseudo-retrocausal",
    NON_LOCALLY_SUBLUMINAL: "non-local pseudo-retrocausal",
    LOCALLY_SUPERLUMINAL: "locally-superluminal pseudo-retrotemporal",
    NON_LOCALLY_SUPERLUMINAL: "non-locally-superluminal pseudo-retrotemporal",
}


def _require_arrow(s: Session) -> None:
    s.require_lattice()
    if s.model.lattice.arrow is Arrow.NONE:
        raise NotApplicable("acausal: no arrow of time")


def _available(var: Variable, t: int) -> bool:
    """Inputs without localization count as given at every time."""
    return var.localization is None or var.localization.min_time <= t


def _past_inputs(m: Model, t: int) -> list[str]:
    return [v.name for v in m.inputs if _available(v, t)]


def _support(s: Session, dist) -> list[tuple]:
    return [values for values, p in dist.items() if not s.equal(p, Fraction(0))]


def check_temporal_determinism(m: Model, session: Session | None = None) -> Verdict:
    s = session_for(m, session)
    return s.verdict("temporal_determinism", lambda: _temporal_determinism(s))


def _temporal_determinism(s: Session) -> Verdict:
    _require_arrow(s)
    m = s.model
    deterministic = check_deterministic(m, s)
    if not deterministic.held:
        return Verdict.fails(
            deterministic.witness or Witness({}),
            reason="not deterministic",
            details={"deterministic": deterministic},
        )
    for t in m.lattice.times():
        keys = _past_inputs(m, t)
        outs = [v.name for v in m.outputs if v.localization is not None and v.localization.min_time <= t]
        if not outs:
            continue
        fixed: dict[tuple, tuple[str, tuple]] = {}
        for scenario, _, table in s.possible():
            support = _support(s, marginal(table, outs).entries)
            if len(support) != 1:
                return Verdict.fails(
                    Witness(
                        {"time": str(t), "scenario": scenario.describe(), "outputs": ", ".join(outs)},
                        {f"P({_join(outs, v)}|scenario)": _table_probability(table, outs, v) for v in support[:2]},
                    )
                )
            key = tuple(scenario.assignment[n] for n in keys)
            if key not in fixed:
                fixed[key] = (scenario.describe(), support[0])
            elif fixed[key][1] != support[0]:
                return Verdict.fails(
                    Witness(
                        {
                            "time": str(t),
                            "past_inputs": _join(keys, key),
                            "scenario_1": fixed[key][0],
                            "scenario_2": scenario.describe(),
                            "values_1": _join(outs, fixed[key][1]),
                            "values_2": _join(outs, support[0]),
                        }
                    )
                )
    return Verdict.holds()


def _table_probability(table, names: Sequence[str], values: tuple) -> Fraction:
    return marginal(table, names).entries.get(values, Fraction(0))


def _join(names: Sequence[str], values: Sequence[str]) -> str:
    return ", ".join(f"{n}={v}" for n, v in zip(names, values)) or "-"


def check_time_reversible(m: Model, session: Session | None = None) -> Verdict:
    s = session_for(m, session)
    return s.verdict("time_reversible", lambda: _time_reversible(s))


def _time_reversible(s: Session) -> Verdict:
    _require_arrow(s)
    forward = check_temporal_determinism(s.model, s)
    if not forward.applicable:
        return forward
    backward_session = s.reversed()
    backward = check_temporal_determinism(backward_session.model, backward_session)
    details = {"temporal_determinism": forward, "reversed_temporal_determinism": backward}
    if forward.failed:
        return Verdict.fails(forward.witness, reason="not temporally deterministic", details=details)
    if not backward.held:
        return Verdict.fails(
            backward.witness or Witness({}), reason="reversed model is not temporally deterministic", details=details
        )
    return Verdict.holds(details=details)


def check_fid(m: Model, session: Session | None = None) -> Verdict:
    s = session_for(m, session)
    return s.verdict("future_input_dependence", lambda: _fid(s))


def _fid(s: Session) -> Verdict:
    _require_arrow(s)
    m = s.model
    dependence = input_dependence(m)
    for out in m.outputs:
        if out.localization is None:
            continue
        for var in (m.variable(n) for n in m.names if n in dependence[out.name]):
            if var.localization is not None and var.localization.min_time > out.localization.min_time:
                return Verdict.holds(
                    witness=Witness(
                        {
                            "output": f"{out.name} at t={out.localization.min_time}",
                            "input": f"{var.name} at t={var.localization.min_time}",
                        }
                    )
                )
    return Verdict.fails(Witness({"future_inputs": "no output depends on a later input"}))


def check_fir(m: Model, session: Session | None = None) -> Verdict:
    s = session_for(m, session)
    return s.verdict("future_input_requirement", lambda: _fir(s))


def _fir(s: Session) -> Verdict:
    _require_arrow(s)
    m = s.model
    for t in m.lattice.times():
        keys = _past_inputs(m, t)
        outs = [
            v.name for v in m.observable_outputs if v.localization is not None and t in v.localization.times()
        ]
        if not outs:
            continue
        seen: dict[tuple, tuple[str, dict]] = {}
        for scenario, _, table in s.possible():
            dist = marginal(table, outs).entries
            key = tuple(scenario.assignment[n] for n in keys)
            if key not in seen:
                seen[key] = (scenario.describe(), dist)
                continue
            first_name, first = seen[key]
            if not s.same_distribution(first, dist):
                value = next(
                    v for v in list(first) + list(dist)
                    if not s.equal(first.get(v, Fraction(0)), dist.get(v, Fraction(0)))
                )
                return Verdict.holds(
                    witness=Witness(
                        {
                            "time": str(t),
                            "past_inputs": _join(keys, key),
                            "scenario_1": first_name,
                            "scenario_2": scenario.describe(),
                        },
                        {
                            f"P({_join(outs, value)}|scenario_1)": first.get(value, Fraction(0)),
                            f"P({_join(outs, value)}|scenario_2)": dist.get(value, Fraction(0)),
                        },
                    )
                )
    return Verdict.fails(Witness({"future_inputs": "observables at every time are fixed by earlier inputs"}))


def classify_causal_order(m: Model, session: Session | None = None) -> Classification:
    s = session_for(m, session)
    return s.memo(("label", "causal_order"), lambda: _causal_order(s))


def _causal_order(s: Session) -> Classification:
    m = s.model
    if m.lattice is None or m.lattice.arrow is Arrow.NONE:
        return Classification(None, reason="acausal: no arrow of time")
    locality = classify_locality(m, s)
    fir = check_fir(m, s)
    details = dict(locality.details) | {"future_input_requirement": fir}
    if locality.label is None:
        return Classification(None, reason=locality.reason, details=details)
    if not fir.applicable:
        return Classification(None, reason=fir.reason, details=details)
    label = CAUSAL_ORDER[locality.label][fir.held]
    if label != "locally-causal":
        return Classification(label, details=details)
    lc = check_local_causality(m, s)
    details["local_causality"] = lc
    if lc.held:
        return Classification(label, details=details)
    logger.warning("CAUSAL ORDER: %s has strong CoA and no FIR but local causality %s", m.name, lc.status.value)
    return Classification(
        label,
        details=details,
        anomaly=True,
        notes=("strong continuity of action without a future input requirement, yet local causality does not hold",),
    )


def check_pseudo_retrocausal(m: Model, session: Session | None = None) -> Verdict:
    s = session_for(m, session)
    return s.verdict("pseudo_retrocausal", lambda: _pseudo(s))


def _pseudo(s: Session) -> Verdict:
    _require_arrow(s)
    strong = check_strong_coa(s.model, s)
    fid = check_fid(s.model, s)
    fir = check_fir(s.model, s)
    details = {"strong_continuity_of_action": strong, "future_input_dependence": fid, "future_input_requirement": fir}
    for verdict in details.values():
        if not verdict.applicable:
            return Verdict.not_applicable(verdict.reason or "constituent not applicable", details=details)
    if strong.failed:
        return Verdict.fails(strong.witness, reason="strong continuity of action fails", details=details)
    if fid.failed:
        return Verdict.fails(fid.witness, reason="no future input dependence", details=details)
    if fir.held:
        return Verdict.fails(fir.witness, reason="future input requirement present", details=details)
    return Verdict.holds(witness=fid.witness, details=details)


def classify_pseudo_order(m: Model, session: Session | None = None) -> Classification:
    """Pseudo-retrocausal variant of each locality quadrant (FID without FIR)."""
    s = session_for(m, session)
    return s.memo(("label", "pseudo_order"), lambda: _pseudo_order(s))


def _pseudo_order(s: Session) -> Classification:
    m = s.model
    if m.lattice is None or m.lattice.arrow is Arrow.NONE:
        return Classification(None, reason="acausal: no arrow of time")
    locality = classify_locality(m, s)
    fid = check_fid(m, s)
    fir = check_fir(m, s)
    details = {"future_input_dependence": fid, "future_input_requirement": fir}
    if locality.label is None:
        return Classification(None, reason=locality.reason, details=details)
    if not (fid.held and fir.failed):
        return Classification(None, reason="requires a future input dependence without a requirement", details=details)
    return Classification(PSEUDO_ORDER[locality.label], details=details)


def check_counter_causal(m: Model, session: Session | None = None) -> Verdict:
    s = session_for(m, session)
    return s.verdict("counter_causal", lambda: _counter_causal(s))


def _counter_causal(s: Session) -> Verdict:
    _require_arrow(s)
    forward = check_local_causality(s.model, s)
    backward_session = s.reversed()
    backward = check_local_causality(backward_session.model, backward_session)
    details = {"local_causality": forward, "reversed_local_causality": backward}
    if not forward.applicable:
        return Verdict.not_applicable(forward.reason or "local causality undefined", details=details)
    if not backward.applicable:
        return Verdict.not_applicable(backward.reason or "reversed local causality undefined", details=details)
    if forward.held:
        return Verdict.fails(Witness({"local_causality": "holds"}), reason="already locally causal", details=details)
    if backward.failed:
        return Verdict.fails(backward.witness, reason="reversed model is not locally causal", details=details)
    return Verdict.holds(details=details)


def check_dynamical_retrocausal(m: Model, session: Session | None = None) -> Verdict:
    return Verdict.not_applicable("integer-time lattices are always orientable")


def _setting_dependence(s: Session, setting: Variable, observable: Variable) -> Witness | None:
    """Two settings of ``setting`` (other non-hidden inputs fixed) with different marginals of ``observable``."""
    beh = s.behavior()
    position = beh.inputs.index(setting.name)
    groups: dict[tuple, list[tuple]] = {}
    for key in beh.table:
        groups.setdefault(key[:position] + key[position + 1 :], []).append(key)
    for keys in groups.values():
        reference = beh.marginal(keys[0], [observable.name])
        for key in keys[1:]:
            other = beh.marginal(key, [observable.name])
            if s.same_distribution(reference, other):
                continue
            value = next(
                v for v in list(reference) + list(other)
                if not s.equal(reference.get(v, Fraction(0)), other.get(v, Fraction(0)))
            )
            first = f"{setting.name}={keys[0][position]}"
            second = f"{setting.name}={key[position]}"
            outcome = f"{observable.name}={value[0]}"
            return Witness(
                {"setting": setting.name, "observable": observable.name, "fixed": _join(
                    [n for n in beh.inputs if n != setting.name], keys[0][:position] + keys[0][position + 1 :]
                )},
                {
                    f"P({outcome}|{first})": reference.get(value, Fraction(0)),
                    f"P({outcome}|{second})": other.get(value, Fraction(0)),
                },
            )
    return None


def check_superluminal_signalling(m: Model, session: Session | None = None) -> Verdict:
    s = session_for(m, session)
    return s.verdict("superluminal_signalling", lambda: _superluminal(s))


def _superluminal(s: Session) -> Verdict:
    s.require_lattice()
    m = s.model
    settings = m.controllable_inputs
    if not settings:
        raise NotApplicable("no controllable inputs")
    locality = classify_locality(m, s)
    if locality.label is None:
        raise NotApplicable(locality.reason or "locality undefined")
    if locality.label not in (LOCALLY_SUPERLUMINAL, NON_LOCALLY_SUPERLUMINAL):
        return Verdict.fails(
            Witness({"locality": locality.label}), reason="model is not superluminal"
        )
    for setting in settings:
        if setting.localization is None:
            continue
        for observable in m.observable_outputs:
            if observable.localization is None:
                continue
            if not spacelike_separated(setting.localization, observable.localization, m.lattice):
                continue
            witness = _setting_dependence(s, setting, observable)
            if witness is not None:
                context = dict(witness.context) | {"locality": locality.label}
                return Verdict.holds(witness=Witness(context, witness.probabilities))
    return Verdict.fails(
        Witness({"locality": locality.label, "signalling": "no observable outside a setting's lightcone depends on it"})
    )


def check_retrocausal_signalling(m: Model, session: Session | None = None) -> Verdict:
    s = session_for(m, session)
    return s.verdict("retrocausal_signalling", lambda: _retrocausal(s))


def _retrocausal(s: Session) -> Verdict:
    _require_arrow(s)
    m = s.model
    fir = check_fir(m, s)
    if not fir.applicable:
        return fir
    details = {"future_input_requirement": fir}
    if not m.controllable_inputs:
        return Verdict.fails(Witness({"controllable_inputs": "none"}), details=details)
    if fir.failed:
        return Verdict.fails(fir.witness, reason="no future input requirement", details=details)
    for setting in m.controllable_inputs:
        if setting.localization is None:
            continue
        for observable in m.observable_outputs:
            if observable.localization is None:
                continue
            if observable.localization.min_time >= setting.localization.min_time:
                continue
            witness = _setting_dependence(s, setting, observable)
            if witness is not None:
                return Verdict.holds(witness=witness, details=details)
    return Verdict.fails(
        Witness({"signalling": "no earlier observable depends on a later controllable input"}), details=details
    )


def check_aao_model(m: Model, session: Session | None = None) -> Verdict:
    """Holds when some constraint acts as an all-at-once input."""
    s = session_for(m, session)
    return s.verdict("aao_model", lambda: _aao(s))


def _aao(s: Session) -> Verdict:
    found = detect_aao(s.model)
    if found:
        return Verdict.holds(items=tuple(c.label() for c in found))
    return Verdict.fails(Witness({"constraints": "no constraint couples several times non-separably"}))

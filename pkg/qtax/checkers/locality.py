"""Continuity-of-action family: CoA, strong and weak CoA, the locality quadrant, local causality.

Every check is a screening test on the world joint.  For an output region A
and another beable region B, the beables on a surface around A (restricted to
the lightcone or past lightcone of A for the stronger notions) together with
the inputs inside A must make the outputs at A independent of the beables in B.
Conditioning assignments of probability zero are skipped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from ..errors import NotApplicable
from ..lattice import Arrow, ConePart, Region, Shell, enclosing_shells, lightcone, spacelike_separated
from ..model import Model
from .session import Session, session_for
from .verdict import Classification, Verdict, Witness

logger = logging.getLogger(__name__)

SURFACE = "surface"
LIGHTCONE = "lightcone"
PAST = "past"


def _region_key(region: Region) -> tuple:
    return tuple(sorted(region.sites))


def output_regions(m: Model) -> list[Region]:
    regions = {v.localization for v in m.outputs if v.localization is not None}
    return sorted(regions, key=_region_key)


def beable_regions(m: Model) -> list[Region]:
    regions = {v.localization for v in m.variables if v.localization is not None}
    return sorted(regions, key=_region_key)


def outputs_meeting(m: Model, region: Region) -> tuple[str, ...]:
    return tuple(
        v.name for v in m.outputs if v.localization is not None and v.localization.intersects(region)
    )


def beables_within(m: Model, region: Region, exclude: Sequence[str] = ()) -> tuple[str, ...]:
    return tuple(
        v.name
        for v in m.variables
        if v.localization is not None and v.localization.issubset(region) and v.name not in exclude
    )


def inputs_within(m: Model, region: Region) -> tuple[str, ...]:
    return tuple(
        v.name for v in m.inputs if v.localization is not None and v.localization.issubset(region)
    )


@dataclass(frozen=True, slots=True)
class ScreeningCase:
    """One (A, B, surface) condition: ``outputs`` independent of ``others`` given ``given``."""

    a: Region
    b: Region
    surface: Region
    outputs: tuple[str, ...]
    given: tuple[str, ...]
    others: tuple[str, ...]

    @property
    def key(self) -> tuple:
        return (self.outputs, self.given, self.others)


def _cases(s: Session, mode: str) -> Iterator[ScreeningCase]:
    m = s.model
    lat = m.lattice
    for a in output_regions(m):
        outs = outputs_meeting(m, a)
        local = inputs_within(m, a)
        cone_a = lightcone(a, lat)
        past_a = lightcone(a, lat, ConePart.PAST) if mode == PAST else None
        for b in beable_regions(m):
            if b.intersects(a):
                continue
            others = beables_within(m, b, exclude=outs)
            if not others:
                continue
            cone_b = lightcone(b, lat)
            for shell in enclosing_shells(a, b, lat):
                if not shell.cuts_lightcone(a, lat):
                    continue
                surface = _surface(shell, mode, cone_a, past_a, cone_b)
                if surface is None:
                    continue
                given = local + beables_within(m, surface, exclude=outs + local)
                yield ScreeningCase(a, b, surface, outs, given, others)


def _surface(shell: Shell, mode: str, cone_a: Region, past_a: Region | None, cone_b: Region) -> Region | None:
    if mode == SURFACE:
        return shell.region
    if mode == LIGHTCONE:
        surface = shell.region.intersection(cone_a)
        return None if surface.intersects(cone_b) else surface
    if shell.region.intersects(cone_b):
        return None
    return shell.region.intersection(past_a)


def _values(names: Sequence[str], values: Sequence[str]) -> str:
    return ", ".join(f"{n}={v}" for n, v in zip(names, values)) or "-"


def screening_failure(
    s: Session, targets: Sequence[str], given: Sequence[str], others: Sequence[str]
) -> tuple[tuple, tuple, tuple, Fraction, Fraction] | None:
    """First assignment where P(targets | given, others) differs from P(targets | given)."""
    world = s.world()
    ti = [world.variables.index(n) for n in targets]
    gi = [world.variables.index(n) for n in given]
    oi = [world.variables.index(n) for n in others]
    p_tgo: dict[tuple, Fraction] = {}
    p_go: dict[tuple, Fraction] = {}
    p_tg: dict[tuple, Fraction] = {}
    p_g: dict[tuple, Fraction] = {}
    seen_t: dict[tuple, list[tuple]] = {}
    for values, p in world.entries.items():
        if not p:
            continue
        t = tuple(values[i] for i in ti)
        g = tuple(values[i] for i in gi)
        o = tuple(values[i] for i in oi)
        p_tgo[t, g, o] = p_tgo.get((t, g, o), Fraction(0)) + p
        p_go[g, o] = p_go.get((g, o), Fraction(0)) + p
        p_tg[t, g] = p_tg.get((t, g), Fraction(0)) + p
        p_g[g] = p_g.get(g, Fraction(0)) + p
        bucket = seen_t.setdefault(g, [])
        if t not in bucket:
            bucket.append(t)
    for (g, o), weight in p_go.items():
        if s.equal(weight, Fraction(0)):
            continue
        for t in seen_t[g]:
            joint_side = p_tgo.get((t, g, o), Fraction(0)) / weight
            marginal_side = p_tg[t, g] / p_g[g]
            if not s.equal(joint_side, marginal_side):
                return t, g, o, joint_side, marginal_side
    return None


def _witness(case: ScreeningCase, failure, surface_name: str) -> Witness:
    t, g, o, with_b, without_b = failure
    outcome = _values(case.outputs, t)
    return Witness(
        {
            "A": case.a.label(),
            "B": case.b.label(),
            surface_name: case.surface.label(),
            "outputs": outcome,
            "conditioning": _values(case.given, g),
            "B_values": _values(case.others, o),
        },
        {
            f"P({outcome}|{surface_name},B)": with_b,
            f"P({outcome}|{surface_name})": without_b,
        },
    )


def _screen(s: Session, mode: str) -> tuple[Witness | None, int]:
    checked: set[tuple] = set()
    names = {SURFACE: "S1", LIGHTCONE: "S2", PAST: "S3"}
    for case in _cases(s, mode):
        if case.key in checked:
            continue
        checked.add(case.key)
        failure = screening_failure(s, case.outputs, case.given, case.others)
        if failure is not None:
            return _witness(case, failure, names[mode]), len(checked)
    return None, len(checked)


def _require_localized_outputs(s: Session) -> None:
    s.require_lattice()
    if not output_regions(s.model):
        raise NotApplicable("no localized outputs")


def check_coa(m: Model, session: Session | None = None) -> Verdict:
    s = session_for(m, session)
    return s.verdict("continuity_of_action", lambda: _coa(s))


def _coa(s: Session) -> Verdict:
    _require_localized_outputs(s)
    witness, count = _screen(s, SURFACE)
    if witness is not None:
        return Verdict.fails(witness)
    if not count:
        raise NotApplicable("no shell separates an output region from another beable region")
    logger.debug("CoA holds for %s over %d screening conditions", s.model.name, count)
    return Verdict.holds()


def check_strong_coa(m: Model, session: Session | None = None) -> Verdict:
    s = session_for(m, session)
    return s.verdict("strong_continuity_of_action", lambda: _strong(s))


def _strong(s: Session) -> Verdict:
    coa = check_coa(s.model, s)
    if not coa.applicable:
        return coa
    if coa.failed:
        return Verdict.fails(
            coa.witness, reason="continuity of action fails", details={"continuity_of_action": coa}
        )
    witness, count = _screen(s, LIGHTCONE)
    if witness is not None:
        return Verdict.fails(witness, details={"continuity_of_action": coa})
    if not count:
        raise NotApplicable("LIGHTCONES_ALWAYS_OVERLAP")
    return Verdict.holds(details={"continuity_of_action": coa})


def check_weak_coa(m: Model, session: Session | None = None) -> Verdict:
    """Continuity of action without its strong form."""
    s = session_for(m, session)
    return s.verdict("weak_continuity_of_action", lambda: _weak(s))


def _weak(s: Session) -> Verdict:
    coa = check_coa(s.model, s)
    strong = check_strong_coa(s.model, s)
    details = {"continuity_of_action": coa, "strong_continuity_of_action": strong}
    if not coa.applicable:
        return coa
    if coa.failed:
        return Verdict.fails(coa.witness, details=details)
    if not strong.applicable:
        return Verdict.not_applicable(strong.reason or "strong continuity of action undefined", details=details)
    if strong.held:
        return Verdict.fails(Witness({"strong_continuity_of_action": "holds"}), details=details)
    return Verdict.holds(details=details)


def check_local_causality(m: Model, session: Session | None = None) -> Verdict:
    s = session_for(m, session)
    return s.verdict("local_causality", lambda: _local_causality(s))


def _local_causality(s: Session) -> Verdict:
    s.require_lattice()
    if s.model.lattice.arrow is Arrow.NONE:
        raise NotApplicable("acausal: the past lightcone needs an arrow of time")
    strong = check_strong_coa(s.model, s)
    if not strong.applicable:
        return strong
    if strong.failed:
        return Verdict.fails(
            strong.witness,
            reason="strong continuity of action fails",
            details={"strong_continuity_of_action": strong},
        )
    witness, count = _screen(s, PAST)
    if witness is not None:
        return Verdict.fails(witness, details={"strong_continuity_of_action": strong})
    if not count:
        raise NotApplicable("no past-cone surface avoids the lightcone of another region")
    return Verdict.holds(details={"strong_continuity_of_action": strong})


LOCALLY_SUBLUMINAL = "locally-subluminal"
LOCALLY_SUPERLUMINAL = "locally-superluminal"
NON_LOCALLY_SUBLUMINAL = "non-locally-subluminal"
NON_LOCALLY_SUPERLUMINAL = "non-locally-superluminal"


def check_lightcone_screening(m: Model, session: Session | None = None) -> Verdict:
    """Beables outside the lightcone of A play no role once I(L(A)) is known."""
    s = session_for(m, session)
    return s.verdict("lightcone_screening", lambda: _lightcone_screening(s))


def _lightcone_screening(s: Session) -> Verdict:
    _require_localized_outputs(s)
    m = s.model
    lat = m.lattice
    checked: set[tuple] = set()
    for a in output_regions(m):
        outs = outputs_meeting(m, a)
        cone_a = lightcone(a, lat)
        given = inputs_within(m, a)
        given = given + beables_within(m, cone_a, exclude=outs + given)
        for b in beable_regions(m):
            if b.intersects(a) or not spacelike_separated(a, b, lat):
                continue
            others = beables_within(m, lightcone(b, lat), exclude=outs + given)
            if not others or (outs, given, others) in checked:
                continue
            checked.add((outs, given, others))
            failure = screening_failure(s, outs, given, others)
            if failure is not None:
                surface = cone_a
                case = ScreeningCase(a, b, surface, outs, given, others)
                return Verdict.fails(_witness(case, failure, "L(A)"))
    return Verdict.holds()


def classify_locality(m: Model, session: Session | None = None) -> Classification:
    s = session_for(m, session)
    return s.memo(("label", "locality"), lambda: _classify(s))


def _classify(s: Session) -> Classification:
    coa = check_coa(s.model, s)
    strong = check_strong_coa(s.model, s)
    details = {"continuity_of_action": coa, "strong_continuity_of_action": strong}
    if not coa.applicable:
        return Classification(None, reason=coa.reason, details=details)
    if strong.held:
        return Classification(LOCALLY_SUBLUMINAL, details=details)
    if coa.held:
        if strong.failed:
            return Classification(LOCALLY_SUPERLUMINAL, details=details)
        return Classification(None, reason=strong.reason, details=details)
    screening = check_lightcone_screening(s.model, s)
    details = details | {"lightcone_screening": screening}
    if not screening.applicable:
        return Classification(None, reason=screening.reason, details=details)
    label = NON_LOCALLY_SUBLUMINAL if screening.held else NON_LOCALLY_SUPERLUMINAL
    return Classification(label, details=details)

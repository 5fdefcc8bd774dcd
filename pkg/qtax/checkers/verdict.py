"""Uniform result type for every property check."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Mapping


class Status(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    NOT_APPLICABLE = "not_applicable"


def format_fraction(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Witness:
    """Context of a counterexample plus the exact probabilities that disagree."""

    context: Mapping[str, str]
    probabilities: Mapping[str, Fraction] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {key: self.context[key] for key in sorted(self.context)}
        if self.probabilities:
            data["probabilities"] = {
                key: format_fraction(self.probabilities[key]) for key in sorted(self.probabilities)
            }
        return data


@dataclass(frozen=True)
class Verdict:
    status: Status
    witness: Witness | None = None
    reason: str | None = None
    details: Mapping[str, "Verdict"] = field(default_factory=dict)
    notes: tuple[str, ...] = ()
    items: tuple[str, ...] = ()

    @classmethod
    def holds(cls, **kwargs: Any) -> "Verdict":
        return cls(Status.HOLDS, **kwargs)

    @classmethod
    def fails(cls, witness: Witness, **kwargs: Any) -> "Verdict":
        return cls(Status.FAILS, witness=witness, **kwargs)

    @classmethod
    def not_applicable(cls, reason: str, **kwargs: Any) -> "Verdict":
        return cls(Status.NOT_APPLICABLE, reason=reason, **kwargs)

    @classmethod
    def of(cls, flag: bool, witness: Witness | None = None, **kwargs: Any) -> "Verdict":
        """Holds when ``flag`` is true; otherwise Fails with ``witness``."""
        if flag:
            return cls(Status.HOLDS, **kwargs)
        return cls(Status.FAILS, witness=witness or Witness({}), **kwargs)

    @property
    def held(self) -> bool:
        return self.status is Status.HOLDS

    @property
    def failed(self) -> bool:
        return self.status is Status.FAILS

    @property
    def applicable(self) -> bool:
        return self.status is not Status.NOT_APPLICABLE

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"status": self.status.value}
        if self.witness is not None:
            data["witness"] = self.witness.to_dict()
        if self.reason:
            data["reason"] = self.reason
        if self.items:
            data["items"] = list(self.items)
        if self.details:
            data["details"] = {key: self.details[key].to_dict() for key in sorted(self.details)}
        if self.notes:
            data["notes"] = list(self.notes)
        return data


@dataclass(frozen=True)
class Classification:
    """Derived label with the verdicts it was computed from."""

    label: str | None
    reason: str | None = None
    details: Mapping[str, Verdict] = field(default_factory=dict)
    anomaly: bool = False
    notes: tuple[str, ...] = ()

    @property
    def applicable(self) -> bool:
        return self.label is not None

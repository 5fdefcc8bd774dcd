"""Exception types shared by the taxonomy engine."""

from __future__ import annotations

from typing import Any, Sequence


class QtaxError(RuntimeError):
    """Base class for engine failures."""


class InvalidArgument(QtaxError, ValueError):
    """Raised when an operation receives arguments outside its domain."""


class NotApplicable(QtaxError):
    """Raised when a property is undefined for the model at hand."""

    def __init__(self, reason: str) -> None:
        super().__init__(reason)
        self.reason = reason


class ImpossibleScenario(QtaxError):
    """Raised when constraints give every completion of a scenario zero weight."""


class ZeroEvidence(QtaxError):
    """Raised when conditioning on evidence of probability zero."""


class DSLError(QtaxError):
    """Raised when a .qtx source cannot be turned into a model."""

    def __init__(self, message: str, diagnostics: Sequence[Any] = ()) -> None:
        super().__init__(message)
        self.diagnostics = list(diagnostics)


class ReducibleSetup(QtaxError):
    """Raised by the classification pipeline when the setup can be reduced."""

    def __init__(self, message: str, verdict: Any) -> None:
        super().__init__(message)
        self.verdict = verdict

"""Configuration helpers for the qtax engine."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction

_MODES = ("rational", "decimal")


@dataclass(slots=True)
class QtaxConfig:
    """Runtime settings shared by the CLI and analysis sessions."""

    mode: str = "rational"
    epsilon: Fraction = field(default_factory=lambda: Fraction(1, 10**9))
    jobs: int = 1
    partition_limit: int = 16
    match_limit: int = 8
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls) -> "QtaxConfig":
        """Build configuration from environment variables."""
        mode = os.environ.get("QTAX_MODE", "rational").strip().lower()
        if mode not in _MODES:
            raise RuntimeError(f"QTAX_MODE must be one of {', '.join(_MODES)}, got {mode!r}.")

        return cls(
            mode=mode,
            epsilon=_fraction_env("QTAX_EPSILON", "1e-9"),
            jobs=_int_env("QTAX_JOBS", 1),
            partition_limit=_int_env("QTAX_PARTITION_LIMIT", 16),
            match_limit=_int_env("QTAX_MATCH_LIMIT", 8),
            log_level=os.environ.get("QTAX_LOG_LEVEL", "WARNING").strip().upper(),
        )


def parse_epsilon(raw: str) -> Fraction:
    """Parse a tolerance such as ``1e-9`` or ``1/1000`` exactly."""
    try:
        value = Fraction(raw.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise RuntimeError(f"Invalid tolerance {raw!r}.") from exc
    if value < 0:
        raise RuntimeError(f"Tolerance must be non-negative, got {raw!r}.")
    return value


def _fraction_env(name: str, default: str) -> Fraction:
    raw = os.environ.get(name, default)
    try:
        return parse_epsilon(raw)
    except RuntimeError as exc:
        raise RuntimeError(f"{name}: {exc}") from exc


def _int_env(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError as exc:
        raise RuntimeError(f"{name} must be an integer, got {raw!r}.") from exc
    if value < 1:
        raise RuntimeError(f"{name} must be at least 1, got {value}.")
    return value

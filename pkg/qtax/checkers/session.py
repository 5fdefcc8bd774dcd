"""Per-model analysis session shared by the checkers."""

from __future__ import annotations

import logging
import threading
from fractions import Fraction
from typing import Any, Callable, Hashable, Mapping

from ..config import QtaxConfig
from ..errors import ImpossibleScenario, InvalidArgument, NotApplicable
from ..inference import (
    Behavior,
    JointTable,
    Plan,
    behavior_from_joint,
    distributions_equal,
    possible_scenarios,
    world_joint,
)
from ..model import Model, Scenario, reverse
from .verdict import Verdict

logger = logging.getLogger(__name__)


class Session:
    """Memo table for one model; safe to share between worker threads."""

    def __init__(
        self, model: Model, config: QtaxConfig | None = None, epsilon: Fraction | None = None
    ) -> None:
        self.model = model
        self.config = config or QtaxConfig()
        self.epsilon = epsilon if epsilon is not None else self.config.epsilon
        self._values: dict[Hashable, Any] = {}
        self._key_locks: dict[Hashable, threading.RLock] = {}
        self._lock = threading.Lock()

    def memo(self, key: Hashable, compute: Callable[[], Any]) -> Any:
        with self._lock:
            if key in self._values:
                return self._values[key]
            key_lock = self._key_locks.setdefault(key, threading.RLock())
        with key_lock:
            with self._lock:
                if key in self._values:
                    return self._values[key]
            value = compute()
            with self._lock:
                self._values[key] = value
        return value

    def verdict(self, key: Hashable, compute: Callable[[], Verdict]) -> Verdict:
        """Memoized check; a NotApplicable signal becomes a NotApplicable verdict."""

        def run() -> Verdict:
            try:
                return compute()
            except NotApplicable as exc:
                return Verdict.not_applicable(exc.reason)
            except ImpossibleScenario as exc:
                return Verdict.not_applicable(f"no physically possible scenario: {exc}")

        return self.memo(("verdict", key), run)

    @property
    def tolerance(self) -> Fraction | None:
        """Comparison tolerance: exact for rational models."""
        return self.epsilon if self.model.decimal else None

    def equal(self, left: Fraction, right: Fraction) -> bool:
        tolerance = self.tolerance
        return left == right if tolerance is None else abs(left - right) <= tolerance

    def same_distribution(self, left: Mapping, right: Mapping) -> bool:
        return distributions_equal(left, right, self.tolerance)

    def plan(self) -> Plan:
        return self.memo("plan", lambda: Plan(self.model))

    def possible(self) -> list[tuple[Scenario, Fraction, JointTable]]:
        return self.memo("possible", lambda: possible_scenarios(self.model, self.plan()))

    def world(self) -> JointTable:
        return self.memo("world", lambda: world_joint(self.model, self.plan()))

    def behavior(self) -> Behavior:
        return self.memo("behavior", lambda: behavior_from_joint(self.model, self.world()))

    def reversed(self) -> "Session":
        return self.memo("reversed", lambda: Session(reverse(self.model), self.config, self.epsilon))

    def require_lattice(self) -> None:
        if self.model.lattice is None:
            raise NotApplicable("alocal: the model has no spacetime lattice")


def session_for(m: Model, session: Session | None) -> Session:
    if session is None:
        return Session(m)
    if session.model is not m:
        raise InvalidArgument("Session belongs to a different model.")
    return session

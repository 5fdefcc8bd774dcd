"""Structural equality of models up to a renaming of variables."""

from __future__ import annotations

import itertools
import logging
from typing import Iterator

from ..config import QtaxConfig
from ..model import Model, Variable, rename
from .serializer import serialize

logger = logging.getLogger(__name__)


def _signature(var: Variable) -> tuple:
    region = tuple(sorted(var.localization.sites)) if var.localization else None
    return var.kind.value, var.domain, var.hidden, var.controllable, var.observable, region


def _groups(m: Model) -> dict[tuple, list[str]]:
    groups: dict[tuple, list[str]] = {}
    for var in m.variables:
        groups.setdefault(_signature(var), []).append(var.name)
    return groups


def _bijections(left: dict[tuple, list[str]], right: dict[tuple, list[str]]) -> Iterator[dict[str, str]]:
    keys = sorted(left, key=repr)
    choices = [itertools.permutations(right[key]) for key in keys]
    for combo in itertools.product(*choices):
        mapping: dict[str, str] = {}
        for key, targets in zip(keys, combo):
            mapping.update(zip(left[key], targets))
        yield mapping


def _guided(left: dict[tuple, list[str]], right: dict[tuple, list[str]]) -> dict[str, str]:
    """Same names first, then the remaining names of each group in sorted order."""
    mapping: dict[str, str] = {}
    for key, names in left.items():
        targets = right[key]
        rest_left = sorted(n for n in names if n not in targets)
        rest_right = sorted(n for n in targets if n not in names)
        mapping.update({n: n for n in names if n in targets})
        mapping.update(zip(rest_left, rest_right))
    return mapping


def canonical_equal(m1: Model, m2: Model, config: QtaxConfig | None = None) -> bool:
    """Byte-identical canonical text under some variable bijection.

    Sound but incomplete: different factorizations of one joint compare unequal.
    """
    if len(m1.variables) != len(m2.variables):
        return False
    left, right = _groups(m1), _groups(m2)
    if {k: len(v) for k, v in left.items()} != {k: len(v) for k, v in right.items()}:
        return False
    target = serialize(m2.evolve(name="canonical"))
    limit = (config or QtaxConfig()).match_limit
    if len(m1.variables) > limit:
        logger.warning(
            "CANONICAL: %d variables exceed the exhaustive limit %d; using name-guided matching",
            len(m1.variables),
            limit,
        )
        candidates: Iterator[dict[str, str]] = iter([_guided(left, right)])
    else:
        candidates = _bijections(left, right)
    return any(serialize(rename(m1, mapping, name="canonical")) == target for mapping in candidates)

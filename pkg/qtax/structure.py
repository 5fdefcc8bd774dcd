"""Structural analysis of factor tables: separability, all-at-once constraints, dependency graphs."""

from __future__ import annotations

import itertools
import logging
from fractions import Fraction
from typing import Sequence

import networkx as nx

from .errors import NotApplicable
from .model import Constraint, Model

logger = logging.getLogger(__name__)


def is_rank_one(matrix: Sequence[Sequence[Fraction]]) -> bool:
    """Exact rank <= 1 test through all 2x2 minors."""
    for i, k in itertools.combinations(range(len(matrix)), 2):
        row_i, row_k = matrix[i], matrix[k]
        for j, l in itertools.combinations(range(len(row_i)), 2):
            if row_i[j] * row_k[l] != row_i[l] * row_k[j]:
                return False
    return True


def _block_matrix(m: Model, constraint: Constraint, block: Sequence[int]) -> list[list[Fraction]]:
    rest = [i for i in range(len(constraint.scope)) if i not in block]
    domains = [m.variable(name).domain for name in constraint.scope]
    matrix = []
    for row_values in itertools.product(*(domains[i] for i in block)):
        row = []
        for col_values in itertools.product(*(domains[i] for i in rest)):
            values = [""] * len(constraint.scope)
            for i, v in zip(block, row_values):
                values[i] = v
            for i, v in zip(rest, col_values):
                values[i] = v
            row.append(constraint.weight(tuple(values)))
        matrix.append(row)
    return matrix


def separable(m: Model, constraint: Constraint, block: Sequence[int]) -> bool:
    """True when the weights factor as f(block) * g(rest)."""
    if not block or len(block) == len(constraint.scope):
        return True
    return is_rank_one(_block_matrix(m, constraint, block))


def coupled_variables(m: Model, constraint: Constraint) -> tuple[str, ...]:
    """Scope variables that cannot be split off the constraint as a separate factor."""
    return tuple(
        name for i, name in enumerate(constraint.scope) if not separable(m, constraint, [i])
    )


def is_aao(m: Model, constraint: Constraint) -> bool:
    """Constraint spanning two or more times that is not a product of single-time factors."""
    blocks: dict[object, list[int]] = {}
    times: set[int] = set()
    for i, name in enumerate(constraint.scope):
        loc = m.variable(name).localization
        if loc is None:
            blocks.setdefault(("free", i), []).append(i)
            continue
        times.update(loc.times())
        key = ("time", loc.min_time) if len(loc.times()) == 1 else ("span", i)
        blocks.setdefault(key, []).append(i)
    if len(times) < 2:
        return False
    return any(not separable(m, constraint, block) for block in blocks.values())


def detect_aao(m: Model) -> list[Constraint]:
    """Constraints acting as all-at-once inputs."""
    if m.lattice is None:
        raise NotApplicable("alocal: all-at-once inputs need a notion of time")
    found = [c for c in m.constraints if is_aao(m, c)]
    if found:
        logger.debug("AAO constraints in %s: %s", m.name, [c.label() for c in found])
    return found


def dependency_graph(m: Model) -> tuple[nx.DiGraph, set]:
    """Mechanism DAG plus one observed child per constraint factor.

    Coupled scope variables share a factor node; separable ones get their own.
    Returns the graph and the set of factor nodes.
    """
    graph = nx.DiGraph()
    graph.add_nodes_from(m.names)
    for mech in m.mechanisms:
        graph.add_edges_from((parent, mech.target) for parent in mech.parents)
    factors = set()
    for index, constraint in enumerate(m.constraints):
        coupled = coupled_variables(m, constraint)
        groups = [coupled] if coupled else []
        groups += [(name,) for name in constraint.scope if name not in coupled]
        for k, group in enumerate(groups):
            node = ("constraint", index, k)
            factors.add(node)
            graph.add_edges_from((name, node) for name in group)
    return graph, factors


def input_dependence(m: Model) -> dict[str, set[str]]:
    """Inputs each output can depend on once the other inputs are fixed."""
    graph, factors = dependency_graph(m)
    inputs = [var.name for var in m.inputs]
    acyclic = nx.is_directed_acyclic_graph(graph)
    if not acyclic:
        logger.warning("DEPENDENCE: mechanisms of %s form a cycle; using undirected reachability", m.name)
        undirected = graph.to_undirected()
    dependence: dict[str, set[str]] = {}
    for out in (var.name for var in m.outputs):
        found = set()
        for name in inputs:
            fixed = factors | {other for other in inputs if other != name}
            if acyclic:
                connected = not nx.is_d_separator(graph, {name}, {out}, fixed)
            else:
                connected = nx.has_path(undirected, name, out)
            if connected:
                found.add(name)
        dependence[out] = found
    return dependence

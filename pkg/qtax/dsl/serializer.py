"""Canonical .qtx text for a model."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from ..model import Model, Values, Variable

FLAG_ORDER = ("hidden", "controllable", "observable")


def _terminates(denominator: int) -> bool:
    for factor in (2, 5):
        while denominator % factor == 0:
            denominator //= factor
    return denominator == 1


def format_number(value: Fraction, decimal: bool = False) -> str:
    """Lowest-terms ``p/q``; decimal models print terminating fractions as decimals."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    if decimal and _terminates(value.denominator):
        digits = 0
        scaled = value
        while scaled.denominator != 1:
            scaled *= 10
            digits += 1
        whole, frac = divmod(scaled.numerator, 10**digits)
        return f"{whole}.{frac:0{digits}d}"
    return f"{value.numerator}/{value.denominator}"


def _location(var: Variable) -> str:
    if var.localization is None:
        return "nowhere"
    sites = sorted(var.localization.sites)
    if len(sites) == 1:
        return f"at ({sites[0].x},{sites[0].t})"
    return "at {" + ", ".join(f"({s.x},{s.t})" for s in sites) + "}"


def _var_line(var: Variable) -> str:
    flags = [flag for flag in FLAG_ORDER if getattr(var, flag)]
    parts = [f"var {var.name} domain {{{','.join(var.domain)}}}", _location(var), *flags, f"kind:{var.kind.value}"]
    return " ".join(parts)


def _key(values: Values) -> str:
    return "(" + ", ".join(values) + ")"


def _sorted_scope(m: Model, scope: Sequence[str]) -> tuple[list[str], list[int]]:
    order = sorted(range(len(scope)), key=lambda i: scope[i])
    return [scope[i] for i in order], order


def _rank(m: Model, names: Sequence[str], values: Values) -> tuple[int, ...]:
    return tuple(m.variable(n).domain.index(v) for n, v in zip(names, values))


def _table_rows(m: Model, scope: Sequence[str], table: Mapping[Values, Fraction]) -> list[tuple[Values, Fraction]]:
    names, order = _sorted_scope(m, scope)
    rows = [(tuple(key[i] for i in order), w) for key, w in table.items() if w]
    return sorted(rows, key=lambda row: _rank(m, names, row[0]))


def serialize(m: Model) -> str:
    """Canonical text: sorted declarations, domain-ordered rows, lowest-terms numbers."""

    def num(value: Fraction) -> str:
        return format_number(value, m.decimal)

    lines = [f"model {m.name}", f"mode {'decimal' if m.decimal else 'rational'}"]
    if m.lattice is not None:
        lines.append(m.lattice.describe())
    lines.append("")
    for var in sorted(m.variables, key=lambda v: v.name):
        lines.append(_var_line(var))

    for mech in sorted(m.mechanisms, key=lambda x: x.target):
        parents, order = _sorted_scope(m, mech.parents)
        lines.append("")
        lines.append(f"mech {mech.target} from ({', '.join(parents)}) {{")
        target = m.variable(mech.target)
        rows = sorted(
            ((tuple(key[i] for i in order), row) for key, row in mech.kernel.items()),
            key=lambda item: _rank(m, parents, item[0]),
        )
        for key, row in rows:
            entries = ", ".join(f"{v}: {num(row[v])}" for v in target.domain if row.get(v))
            lines.append(f"  {_key(key)} -> {{{entries}}};")
        lines.append("}")

    constraints = []
    for constraint in m.constraints:
        names, _ = _sorted_scope(m, constraint.scope)
        body = [f"  {_key(key)} -> {num(w)};" for key, w in _table_rows(m, constraint.scope, constraint.weights)]
        constraints.append("\n".join([f"constraint ({', '.join(names)}) {{", *body, "}"]))
    for block in sorted(constraints):
        lines.append("")
        lines.append(block)

    names, _ = _sorted_scope(m, m.prior.scope)
    lines.append("")
    lines.append(f"prior ({', '.join(names)}) {{")
    for key, p in _table_rows(m, m.prior.scope, m.prior.table):
        lines.append(f"  {_key(key)} -> {num(p)};")
    lines.append("}")
    return "\n".join(lines) + "\n"

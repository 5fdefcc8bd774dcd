"""Parse .qtx text into a validated model with positioned diagnostics."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Sequence

from lark import Token, Transformer, v_args
from lark.exceptions import LarkError, UnexpectedEOF, UnexpectedInput

from ..config import QtaxConfig
from ..errors import DSLError, InvalidArgument
from ..lattice import Arrow, Lattice, Region, Site
from ..model import Constraint, Kind, Mechanism, Model, Prior, Variable, uniform_prior, validate
from .grammar import qtx_parser

logger = logging.getLogger(__name__)

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True, slots=True)
class SourceSpan:
    file: str
    line: int
    col: int
    end_line: int
    end_col: int

    def __post_init__(self) -> None:
        if (self.end_line, self.end_col) < (self.line, self.col):
            raise InvalidArgument(f"Span ends before it starts: {self}.")

    @classmethod
    def at(cls, file: str, line: int, col: int) -> "SourceSpan":
        return cls(file, line, col, line, col)

    def to_dict(self) -> dict[str, Any]:
        return {"file": self.file, "line": self.line, "col": self.col, "end_line": self.end_line, "end_col": self.end_col}


@dataclass(frozen=True, slots=True)
class ParseDiagnostic:
    severity: str
    code: str
    message: str
    span: SourceSpan

    def render(self) -> str:
        return f"{self.span.file}:{self.span.line}:{self.span.col}: {self.severity} {self.code} {self.message}"

    def to_dict(self) -> dict[str, Any]:
        return {"severity": self.severity, "code": self.code, "message": self.message, "span": self.span.to_dict()}


@dataclass(frozen=True)
class ParseResult:
    model: Model | None
    diagnostics: tuple[ParseDiagnostic, ...] = ()
    experiments: tuple[Mapping[str, str], ...] = ()

    @property
    def errors(self) -> tuple[ParseDiagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity == ERROR)

    @property
    def ok(self) -> bool:
        return self.model is not None and not self.errors


def render_text(diagnostics: Sequence[ParseDiagnostic]) -> str:
    return "\n".join(d.render() for d in diagnostics)


def render_json(diagnostics: Sequence[ParseDiagnostic]) -> str:
    return json.dumps([d.to_dict() for d in diagnostics], indent=2, sort_keys=True)


# Statements produced by the tree transformer; ``span`` points at the source.


@dataclass(slots=True)
class _Stmt:
    span: SourceSpan


@dataclass(slots=True)
class _ModelName(_Stmt):
    name: str


@dataclass(slots=True)
class _Mode(_Stmt):
    mode: str


@dataclass(slots=True)
class _Lattice(_Stmt):
    x: tuple[int, int]
    t: tuple[int, int]
    c: int
    arrow: str


@dataclass(slots=True)
class _Var(_Stmt):
    name: str
    domain: list[str]
    location: list[tuple[int, int]] | None
    flags: list[str]
    kind: str


@dataclass(slots=True)
class _Row:
    span: SourceSpan
    key: tuple[str, ...]
    value: Any


@dataclass(slots=True)
class _Mech(_Stmt):
    target: str
    parents: list[str]
    rows: list[_Row]


@dataclass(slots=True)
class _Table(_Stmt):
    kind: str
    scope: list[str] | None
    rows: list[_Row]


@dataclass(slots=True)
class _Experiment(_Stmt):
    bindings: list[tuple[str, str, SourceSpan]] = field(default_factory=list)


class _ToStatements(Transformer):
    def __init__(self, file: str) -> None:
        super().__init__()
        self.file = file

    def _span(self, meta) -> SourceSpan:
        if getattr(meta, "empty", True):
            return SourceSpan.at(self.file, 1, 1)
        return SourceSpan(self.file, meta.line, meta.column, meta.end_line, meta.end_column)

    def _token_span(self, token: Token) -> SourceSpan:
        return SourceSpan(self.file, token.line, token.column, token.end_line, token.end_column)

    def start(self, children):
        return list(children)

    @v_args(meta=True)
    def model_stmt(self, meta, children):
        return _ModelName(self._span(meta), str(children[0]))

    @v_args(meta=True)
    def mode_stmt(self, meta, children):
        return _Mode(self._span(meta), str(children[0]))

    def interval(self, children):
        return int(children[0]), int(children[1])

    @v_args(meta=True)
    def lattice_stmt(self, meta, children):
        x, t, c, arrow = children
        return _Lattice(self._span(meta), x, t, int(c), str(arrow))

    def value_list(self, children):
        return [str(c) for c in children]

    def site(self, children):
        return int(children[0]), int(children[1])

    def at_site(self, children):
        return [children[0]]

    def at_region(self, children):
        return list(children)

    def nowhere(self, children):
        return None

    def flag(self, children):
        return str(children[0])

    @v_args(meta=True)
    def var_stmt(self, meta, children):
        name, domain, location, *flags, kind = children
        return _Var(self._span(meta), str(name), domain, location, flags, str(kind))

    def name_list(self, children):
        return [str(c) for c in children]

    def scope(self, children):
        return children[0] or []

    def tuple_key(self, children):
        return tuple(str(c) for c in children if c is not None)

    def single_key(self, children):
        return (str(children[0]),)

    def entry(self, children):
        return str(children[0]), children[1]

    def dist(self, children):
        return list(children)

    @v_args(meta=True)
    def row(self, meta, children):
        return _Row(self._span(meta), children[0], children[1])

    @v_args(meta=True)
    def weight_row(self, meta, children):
        return _Row(self._span(meta), children[0], children[1])

    @v_args(meta=True)
    def mech_stmt(self, meta, children):
        target, parents, *rows = children
        return _Mech(self._span(meta), str(target), parents or [], rows)

    @v_args(meta=True)
    def constraint_stmt(self, meta, children):
        scope, *rows = children
        return _Table(self._span(meta), "constraint", scope, rows)

    @v_args(meta=True)
    def prior_stmt(self, meta, children):
        scope, *rows = children
        return _Table(self._span(meta), "prior", scope, rows)

    def binding(self, children):
        name, value = children
        return str(name), str(value), self._token_span(name)

    @v_args(meta=True)
    def experiment_stmt(self, meta, children):
        return _Experiment(self._span(meta), [c for c in children if c is not None])


class _Builder:
    """Semantic pass: statements to a model, collecting diagnostics."""

    def __init__(self, file: str, default_mode: str, epsilon: Fraction) -> None:
        self.file = file
        self.mode = default_mode
        self.epsilon = epsilon
        self.diagnostics: list[ParseDiagnostic] = []
        self.spans: dict[str, SourceSpan] = {}

    def error(self, code: str, message: str, span: SourceSpan) -> None:
        self.diagnostics.append(ParseDiagnostic(ERROR, code, message, span))

    def warning(self, code: str, message: str, span: SourceSpan) -> None:
        self.diagnostics.append(ParseDiagnostic(WARNING, code, message, span))

    @property
    def failed(self) -> bool:
        return any(d.severity == ERROR for d in self.diagnostics)

    @property
    def decimal(self) -> bool:
        return self.mode == "decimal"

    def number(self, token: Token, span: SourceSpan) -> Fraction | None:
        text = str(token)
        if "/" in text:
            numerator, denominator = text.split("/")
            if int(denominator) == 0:
                self.error("ZERO_DENOMINATOR", f"{text} has a zero denominator", span)
                return None
            return Fraction(int(numerator), int(denominator))
        if "." in text and not self.decimal:
            self.error("DECIMAL_IN_RATIONAL_MODE", f"decimal {text} needs 'mode decimal'", span)
            return None
        return Fraction(text)

    def single(self, statements, kind: type, label: str) -> Any:
        found = [s for s in statements if isinstance(s, kind)]
        for extra in found[1:]:
            self.error("DUPLICATE_DECLARATION", f"repeated {label} declaration", extra.span)
        return found[0] if found else None

    def build(self, statements: list[_Stmt]) -> tuple[Model | None, list[Mapping[str, str]]]:
        mode = self.single(statements, _Mode, "mode")
        if mode is not None:
            self.mode = mode.mode
        header = self.single(statements, _ModelName, "model")
        if header is None:
            self.warning("MISSING_MODEL_NAME", "no 'model' declaration; using the file name", SourceSpan.at(self.file, 1, 1))
            name = Path(self.file).stem.replace("-", "_") if self.file != "<string>" else "model"
        else:
            name = header.name
            self.spans["model"] = header.span
        lattice = self.lattice(self.single(statements, _Lattice, "lattice"))
        variables = self.variables([s for s in statements if isinstance(s, _Var)])
        domains = {v.name: v.domain for v in variables}
        mechanisms = [m for m in (self.mechanism(s, domains) for s in statements if isinstance(s, _Mech)) if m]
        tables = [s for s in statements if isinstance(s, _Table)]
        constraints = []
        for s in (t for t in tables if t.kind == "constraint"):
            self.spans[f"constraint[{len(constraints)}]"] = s.span
            constraints.append(self.constraint(s, domains))
        priors = [t for t in tables if t.kind == "prior"]
        for extra in priors[1:]:
            self.error("DUPLICATE_DECLARATION", "repeated prior declaration", extra.span)
        inputs = [v for v in variables if v.is_input]
        prior = self.prior(priors[0], domains, inputs) if priors else uniform_prior(inputs)
        experiments = [self.experiment(s, variables) for s in statements if isinstance(s, _Experiment)]
        if self.failed or any(c is None for c in constraints) or prior is None:
            return None, experiments
        model = Model(
            name=name,
            lattice=lattice,
            variables=tuple(variables),
            mechanisms=tuple(mechanisms),
            constraints=tuple(constraints),
            prior=prior,
            decimal=self.decimal,
        )
        for diagnostic in validate(model, self.epsilon if self.decimal else None):
            span = self.spans.get(diagnostic.entity, SourceSpan.at(self.file, 1, 1))
            self.error(diagnostic.code, f"{diagnostic.entity}: {diagnostic.message}", span)
        return (None if self.failed else model), experiments

    def lattice(self, stmt: _Lattice | None) -> Lattice | None:
        if stmt is None:
            return None
        try:
            return Lattice(stmt.x[0], stmt.x[1], stmt.t[0], stmt.t[1], stmt.c, Arrow(stmt.arrow))
        except InvalidArgument as exc:
            self.error("INVALID_LATTICE", str(exc), stmt.span)
            return None

    def variables(self, statements: list[_Var]) -> list[Variable]:
        variables = []
        seen: set[str] = set()
        for s in statements:
            if s.name in seen:
                self.error("DUPLICATE_VARIABLE", f"variable {s.name} declared more than once", s.span)
                continue
            seen.add(s.name)
            self.spans[s.name] = s.span
            if len(set(s.domain)) != len(s.domain):
                self.error("DUPLICATE_VALUE", f"domain of {s.name} repeats a value", s.span)
            for flag in s.flags:
                if s.flags.count(flag) > 1:
                    self.warning("REPEATED_FLAG", f"flag {flag} repeated on {s.name}", s.span)
                    break
            variables.append(
                Variable(
                    name=s.name,
                    domain=tuple(s.domain),
                    kind=Kind(s.kind),
                    localization=Region.of(Site(x, t) for x, t in s.location) if s.location else None,
                    hidden="hidden" in s.flags,
                    controllable="controllable" in s.flags,
                    observable="observable" in s.flags,
                )
            )
        return variables

    def key(self, row: _Row, scope: Sequence[str], domains) -> tuple[str, ...] | None:
        if len(row.key) != len(scope):
            self.error("ARITY_MISMATCH", f"row {row.key} has {len(row.key)} values for {len(scope)} variables", row.span)
            return None
        for name, value in zip(scope, row.key):
            if value not in domains[name]:
                self.error("VALUE_NOT_IN_DOMAIN", f"{value} is not in the domain of {name}", row.span)
                return None
        return row.key

    def known(self, names: Sequence[str], domains, span: SourceSpan) -> bool:
        unknown = [n for n in names if n not in domains]
        if unknown:
            self.error("UNKNOWN_VARIABLE", f"unknown variables {', '.join(unknown)}", span)
        return not unknown

    def mechanism(self, s: _Mech, domains) -> Mechanism | None:
        entity = f"mech {s.target}"
        if entity in self.spans:
            self.error("DUPLICATE_MECHANISM", f"{s.target} has more than one mechanism", s.span)
            return None
        self.spans[entity] = s.span
        if not self.known([s.target, *s.parents], domains, s.span):
            return None
        kernel: dict[tuple[str, ...], dict[str, Fraction]] = {}
        for row in s.rows:
            key = self.key(row, s.parents, domains)
            if key is None:
                continue
            if key in kernel:
                self.error("DUPLICATE_ROW", f"row {key} repeated", row.span)
                continue
            dist: dict[str, Fraction] = {}
            for value, token in row.value:
                if value not in domains[s.target]:
                    self.error("VALUE_NOT_IN_DOMAIN", f"{value} is not in the domain of {s.target}", row.span)
                    continue
                if value in dist:
                    self.error("DUPLICATE_ROW", f"outcome {value} repeated in row {key}", row.span)
                    continue
                p = self.number(token, row.span)
                if p is not None:
                    dist[value] = p
            total = sum(dist.values(), Fraction(0))
            off = total != 1 if not self.decimal else abs(total - 1) > self.epsilon
            if off:
                self.error("KERNEL_NOT_NORMALIZED", f"row {key} sums to {total}", row.span)
            kernel[key] = dist
        return Mechanism(s.target, tuple(s.parents), kernel)

    def weights(self, s: _Table, scope: Sequence[str], domains) -> dict[tuple[str, ...], Fraction] | None:
        table: dict[tuple[str, ...], Fraction] = {}
        for row in s.rows:
            key = self.key(row, scope, domains)
            if key is None:
                continue
            if key in table:
                self.error("DUPLICATE_ROW", f"row {key} repeated", row.span)
                continue
            value = self.number(row.value, row.span)
            if value is not None:
                table[key] = value
        return table

    def constraint(self, s: _Table, domains) -> Constraint | None:
        if not self.known(s.scope, domains, s.span):
            return None
        return Constraint(tuple(s.scope), self.weights(s, s.scope, domains))

    def prior(self, s: _Table, domains, inputs: list[Variable]) -> Prior | None:
        self.spans["prior"] = s.span
        scope = s.scope if s.scope is not None else [v.name for v in inputs]
        if not self.known(scope, domains, s.span):
            return None
        return Prior(tuple(scope), self.weights(s, scope, domains))

    def experiment(self, s: _Experiment, variables: list[Variable]) -> dict[str, str]:
        settings = {v.name: v for v in variables if v.is_input and not v.hidden}
        assignment = {}
        for name, value, span in s.bindings:
            if name not in settings:
                self.error("UNKNOWN_VARIABLE", f"{name} is not a non-hidden input", span)
            elif value not in settings[name].domain:
                self.error("VALUE_NOT_IN_DOMAIN", f"{value} is not in the domain of {name}", span)
            elif name in assignment:
                self.error("DUPLICATE_DECLARATION", f"{name} bound twice", span)
            else:
                assignment[name] = value
        return assignment


def _syntax_diagnostic(exc: UnexpectedInput, text: str, file: str) -> ParseDiagnostic:
    line, col = getattr(exc, "line", -1), getattr(exc, "column", -1)
    if isinstance(exc, UnexpectedEOF) or line is None or line < 1:
        lines = text.split("\n")
        line, col = len(lines), len(lines[-1]) + 1
    token = getattr(exc, "token", None)
    found = f"unexpected {str(token)!r}" if token is not None and str(token) else "unexpected input"
    expected = sorted(getattr(exc, "expected", None) or getattr(exc, "allowed", None) or ())
    message = found + (f", expected one of {', '.join(expected[:8])}" if expected else "")
    return ParseDiagnostic(ERROR, "SYNTAX_ERROR", message, SourceSpan.at(file, line, max(col, 1)))


def parse(text: str, path: str | None = None, mode: str | None = None, config: QtaxConfig | None = None) -> ParseResult:
    """Parse ``text``; never raises, every failure becomes a diagnostic."""
    file = path or "<string>"
    config = config or QtaxConfig()
    try:
        tree = qtx_parser().parse(text)
        statements = _ToStatements(file).transform(tree)
        builder = _Builder(file, mode or config.mode, config.epsilon)
        model, experiments = builder.build(statements)
    except UnexpectedInput as exc:
        return ParseResult(None, (_syntax_diagnostic(exc, text, file),))
    except LarkError as exc:
        logger.debug("Parser failure in %s: %s", file, exc)
        return ParseResult(None, (ParseDiagnostic(ERROR, "SYNTAX_ERROR", str(exc).splitlines()[0], SourceSpan.at(file, 1, 1)),))
    except Exception as exc:
        logger.exception("Unexpected failure while parsing %s", file)
        return ParseResult(None, (ParseDiagnostic(ERROR, "INTERNAL_ERROR", repr(exc), SourceSpan.at(file, 1, 1)),))
    diagnostics = tuple(builder.diagnostics)
    return ParseResult(model, diagnostics, tuple(experiments))


def load_model(path: str | Path, mode: str | None = None, config: QtaxConfig | None = None) -> Model:
    """Read and parse a .qtx file; raises DSLError carrying the diagnostics."""
    result = load(path, mode, config)
    if not result.ok:
        raise DSLError(f"{path}: {len(result.errors)} error(s)", result.diagnostics)
    return result.model


def load(path: str | Path, mode: str | None = None, config: QtaxConfig | None = None) -> ParseResult:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DSLError(f"Cannot read {path}: {exc}") from exc
    return parse(text, str(path), mode, config)


def parse_experiments(text: str, model: Model, path: str | None = None) -> list[dict[str, str]]:
    """Experiment statements checked against the settings of ``model``."""
    file = path or "<string>"
    try:
        statements = _ToStatements(file).transform(qtx_parser().parse(text))
    except UnexpectedInput as exc:
        diagnostic = _syntax_diagnostic(exc, text, file)
        raise DSLError(diagnostic.render(), [diagnostic]) from exc
    except LarkError as exc:
        raise DSLError(f"{file}: {exc}") from exc
    builder = _Builder(file, "rational", QtaxConfig().epsilon)
    for s in statements:
        if not isinstance(s, _Experiment):
            builder.error("NOT_AN_EXPERIMENT", "experiment files may only hold experiment statements", s.span)
    experiments = [builder.experiment(s, list(model.variables)) for s in statements if isinstance(s, _Experiment)]
    if builder.failed:
        raise DSLError(f"{file}: invalid experiments", builder.diagnostics)
    return experiments

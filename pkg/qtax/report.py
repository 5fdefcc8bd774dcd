"""Classification pipeline, report emission and the corpus verdict matrix."""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from io import BytesIO
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

from . import checkers as ck
from .checkers import Session, Status, Verdict, Witness
from .config import QtaxConfig
from .corpus import CORPUS, REFERENCES, load_corpus
from .dsl import canonical_equal, format_number, load_model, parse_experiments
from .equivalence import chsh, default_chsh_settings, e_equivalent, p_equivalent, reduce
from .errors import ImpossibleScenario, InvalidArgument, NotApplicable, ReducibleSetup
from .inference import behavior
from .model import Model

logger = logging.getLogger(__name__)

REPRESENTATION = "representation-candidate"
INTERPRETATION = "interpretation-candidate"
MODIFICATION = "modification-candidate"

PROXY_NOTES = (
    "m-equivalence proxied by canonical_equal (sound, incomplete: renamings only)",
    "p-equivalence proxied by behavior() on shared positive-prior settings",
)

Check = Callable[[Model, Session, "Model | None"], Verdict]


def _flag(name: str) -> Check:
    return lambda m, s, ref: ck.check_structural_flags(m, s)[name]


def _needs_reference(fn: Callable[[Model, Model, Session], Verdict]) -> Check:
    def run(m: Model, s: Session, ref: Model | None) -> Verdict:
        if ref is None:
            return Verdict.not_applicable("needs a reference model")
        try:
            return fn(m, ref, s)
        except (InvalidArgument, ImpossibleScenario) as exc:
            return Verdict.not_applicable(str(exc))

    return run


def _additional_variables(m: Model, ref: Model, s: Session) -> Verdict:
    extra = ck.identify_additional_variables(m, ref, s)
    if extra:
        return Verdict.holds(items=tuple(extra))
    return Verdict.fails(Witness({"additional_variables": "none"}))


def _p_equivalent(m: Model, ref: Model, s: Session) -> Verdict:
    return p_equivalent(m, ref, epsilon=s.epsilon if (m.decimal or ref.decimal) else None)


def _statistical_independence(m: Model, s: Session, ref: Model | None) -> Verdict:
    return ck.check_statistical_independence(m, session=s)


# Every property reported by ``classify``, in report order.
CHECKS: dict[str, Check] = {
    "alocal": _flag("alocal"),
    "atemporal": _flag("atemporal"),
    "acausal": _flag("acausal"),
    "deterministic": lambda m, s, ref: ck.check_deterministic(m, s),
    "hidden_variables": lambda m, s, ref: ck.check_hidden_variables(m, s),
    "predictable": lambda m, s, ref: ck.check_predictable(m, s),
    "irreducible": lambda m, s, ref: ck.check_irreducible(m, s),
    "continuity_of_action": lambda m, s, ref: ck.check_coa(m, s),
    "strong_continuity_of_action": lambda m, s, ref: ck.check_strong_coa(m, s),
    "weak_continuity_of_action": lambda m, s, ref: ck.check_weak_coa(m, s),
    "lightcone_screening": lambda m, s, ref: ck.check_lightcone_screening(m, s),
    "local_causality": lambda m, s, ref: ck.check_local_causality(m, s),
    "temporal_determinism": lambda m, s, ref: ck.check_temporal_determinism(m, s),
    "time_reversible": lambda m, s, ref: ck.check_time_reversible(m, s),
    "future_input_dependence": lambda m, s, ref: ck.check_fid(m, s),
    "future_input_requirement": lambda m, s, ref: ck.check_fir(m, s),
    "pseudo_retrocausal": lambda m, s, ref: ck.check_pseudo_retrocausal(m, s),
    "counter_causal": lambda m, s, ref: ck.check_counter_causal(m, s),
    "dynamical_retrocausal": lambda m, s, ref: ck.check_dynamical_retrocausal(m, s),
    "aao_model": lambda m, s, ref: ck.check_aao_model(m, s),
    "superluminal_signalling": lambda m, s, ref: ck.check_superluminal_signalling(m, s),
    "retrocausal_signalling": lambda m, s, ref: ck.check_retrocausal_signalling(m, s),
    "statistical_independence": _statistical_independence,
    "additional_variables": _needs_reference(_additional_variables),
    "superdeterministic": _needs_reference(lambda m, ref, s: ck.check_superdeterministic(m, ref, session=s)),
    "p_equivalent": _needs_reference(_p_equivalent),
}


@dataclass
class TaxonomyReport:
    model: str
    reference: str | None
    properties: dict[str, Verdict]
    labels: dict[str, str | None]
    notes: list[str] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "model": self.model,
            "reference": self.reference,
            "properties": {name: self.properties[name].to_dict() for name in sorted(self.properties)},
            "labels": {name: self.labels[name] for name in sorted(self.labels)},
            "notes": list(self.notes),
        }


def run_checks(
    m: Model,
    reference: Model | None,
    session: Session,
    names: Sequence[str] | None = None,
    jobs: int = 1,
) -> tuple[dict[str, Verdict], dict[str, float]]:
    """Evaluate checks on a worker pool; results come back in registry order."""
    names = list(names or CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise InvalidArgument(f"Unknown properties: {', '.join(unknown)}.")

    def timed(name: str) -> tuple[Verdict, float]:
        started = time.perf_counter()
        verdict = CHECKS[name](m, session, reference)
        elapsed = time.perf_counter() - started
        logger.debug("CHECK %s on %s took %.3fs", name, m.name, elapsed)
        return verdict, elapsed

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = list(pool.map(timed, names))
    verdicts = {name: verdict for name, (verdict, _) in zip(names, results)}
    timings = {name: elapsed for name, (_, elapsed) in zip(names, results)}
    return verdicts, timings


def chsh_label(m: Model) -> str | None:
    """CHSH value of the default settings, or None when the behavior is not a Bell pair."""
    try:
        value = chsh(behavior(m), default_chsh_settings(m))
    except (InvalidArgument, ImpossibleScenario):
        return None
    return format_number(value, m.decimal)


def _labels(m: Model, session: Session) -> tuple[dict[str, str | None], list[str]]:
    notes: list[str] = []
    locality = ck.classify_locality(m, session)
    causal = ck.classify_causal_order(m, session)
    pseudo = ck.classify_pseudo_order(m, session)
    if causal.anomaly:
        notes.extend(causal.notes)
    labels = {
        "locality": locality.label,
        "causal_order": causal.label,
        "pseudo_order": pseudo.label,
        "chsh": chsh_label(m),
    }
    return labels, notes


def evaluate(
    m: Model,
    reference: Model | None,
    config: QtaxConfig | None = None,
    experiments: Sequence[Mapping[str, str]] | None = None,
) -> TaxonomyReport:
    """Property map and labels for ``m`` without the irreducibility gate."""
    config = config or QtaxConfig()
    session = Session(m, config)
    verdicts, timings = run_checks(m, reference, session, jobs=config.jobs)
    labels, notes = _labels(m, session)
    if experiments is not None and reference is not None:
        verdicts["e_equivalent"] = e_equivalent(m, reference, experiments, config=config)
    superdet = verdicts["superdeterministic"]
    if superdet.held:
        notes.extend(superdet.notes)
    if verdicts["statistical_independence"].failed:
        try:
            note = ck.common_cause_note(m, session)
        except NotApplicable:
            note = None
        if note:
            notes.append(note)
    return TaxonomyReport(m.name, reference.name if reference else None, verdicts, labels, notes, timings)


def _outcome(m: Model, reference: Model, verdicts: Mapping[str, Verdict], config: QtaxConfig) -> tuple[str, list[str]]:
    notes = []
    if canonical_equal(m, reference, config):
        return REPRESENTATION, notes
    if verdicts["p_equivalent"].held:
        return INTERPRETATION, notes
    e = verdicts.get("e_equivalent")
    if e is not None and e.held:
        notes.append("not p-equivalent, yet indistinguishable on the listed experiments")
    return MODIFICATION, notes


def classify(
    model_path: str | Path,
    reference_path: str | Path,
    experiments_path: str | Path | None = None,
    *,
    auto_reduce: bool = False,
    config: QtaxConfig | None = None,
) -> TaxonomyReport:
    """Irreducibility gate, equivalence against the reference, then the full property map."""
    config = config or QtaxConfig()
    m = load_model(model_path, config=config)
    reference = load_model(reference_path, config=config)
    experiments = None
    if experiments_path is not None:
        text = Path(experiments_path).read_text(encoding="utf-8")
        experiments = parse_experiments(text, m, str(experiments_path))

    notes: list[str] = []
    gate = ck.check_irreducible(m, Session(m, config))
    if gate.failed:
        if not auto_reduce:
            removable = _detail(gate)
            raise ReducibleSetup(
                f"{m.name} is reducible ({removable}); run 'qtax reduce' or pass --auto-reduce",
                gate,
            )
        m, changelog = reduce(m, config)
        gate = ck.check_irreducible(m, Session(m, config))
        if gate.failed:
            raise ReducibleSetup(f"{m.name} is still reducible after removing dead assumptions", gate)
        notes.append(f"auto-reduced: {'; '.join(changelog)}")

    report = evaluate(m, reference, config, experiments)
    outcome, outcome_notes = _outcome(m, reference, report.properties, config)
    report.labels["classification"] = outcome
    report.notes = notes + list(PROXY_NOTES) + outcome_notes + report.notes
    return report


def _detail(verdict: Verdict) -> str:
    if verdict.reason:
        return verdict.reason
    if verdict.items:
        return ", ".join(verdict.items)
    if verdict.witness is not None:
        context = verdict.witness.to_dict()
        context.pop("probabilities", None)
        return "; ".join(f"{k}={v}" for k, v in context.items())
    return ""


def emit(report: TaxonomyReport, fmt: str = "text", timings: bool = False) -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    if fmt != "text":
        raise InvalidArgument(f"Unknown format {fmt!r}.")
    width = max(len(name) for name in report.properties) + 2
    lines = [f"model: {report.model}", f"reference: {report.reference or '-'}", ""]
    header = f"{'PROPERTY':<{width}}{'STATUS':<16}"
    lines.append(header + ("SECONDS   " if timings else "") + "DETAIL")
    for name, verdict in report.properties.items():
        row = f"{name:<{width}}{verdict.status.value:<16}"
        if timings:
            row += f"{report.timings.get(name, 0.0):<10.3f}"
        lines.append((row + _detail(verdict)).rstrip())
    lines.append("")
    lines.append("labels:")
    for name in sorted(report.labels):
        lines.append(f"  {name:<{width - 2}}{report.labels[name] or '-'}")
    if report.notes:
        lines.append("")
        lines.append("notes:")
        lines.extend(f"  - {note}" for note in report.notes)
    return "\n".join(lines) + "\n"


MATRIX_LABELS = ("locality", "causal_order", "pseudo_order", "chsh")


def corpus_matrix(config: QtaxConfig | None = None) -> tuple[list[str], list[list[str]]]:
    """Verdict matrix of the bundled corpus: one row per model."""
    config = config or QtaxConfig()
    header = ["Model", *CHECKS, *MATRIX_LABELS]
    rows = []
    for name in CORPUS:
        m = load_corpus(name, config)
        reference = load_corpus(REFERENCES[name], config)
        report = evaluate(m, reference, config)
        rows.append(
            [name]
            + [report.properties[p].status.value for p in CHECKS]
            + [report.labels[label] or "" for label in MATRIX_LABELS]
        )
    return header, rows


def matrix_xlsx(header: Sequence[str], rows: Sequence[Sequence[str]]) -> BytesIO:
    """Styled workbook of a verdict matrix. Returns BytesIO object."""
    from openpyxl import Workbook
    from openpyxl.styles import Alignment, Font, PatternFill
    from openpyxl.utils import get_column_letter

    wb = Workbook()
    ws = wb.active
    ws.title = "Verdict Matrix"

    ws.append(list(header))
    header_fill = PatternFill("solid", fgColor="222222")
    header_font = Font(color="FFFFFF", bold=True)
    for col in range(1, len(header) + 1):
        cell = ws.cell(row=1, column=col)
        cell.fill = header_fill
        cell.font = header_font
        cell.alignment = Alignment(horizontal="center")

    red_fill = PatternFill("solid", fgColor="F8D7DA")
    red_font = Font(color="842029")
    for row in rows:
        ws.append(list(row))
        r_idx = ws.max_row
        for c, value in enumerate(row, start=1):
            if value == Status.FAILS.value:
                cell = ws.cell(row=r_idx, column=c)
                cell.fill = red_fill
                cell.font = red_font

    for col_idx, title in enumerate(header, start=1):
        width = max(10, min(28, len(title) + 2))
        if col_idx == 1:
            width = 18
        ws.column_dimensions[get_column_letter(col_idx)].width = width

    # Freeze header row and the model column
    ws.freeze_panes = "B2"
    last_col_letter = get_column_letter(len(header))
    ws.auto_filter.ref = f"A1:{last_col_letter}{ws.max_row}"

    bio = BytesIO()
    wb.save(bio)
    bio.seek(0)
    return bio

import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qtax.config import QtaxConfig
from qtax.corpus import CORPUS, corpus_text
from qtax.dsl import (
    SourceSpan,
    canonical_equal,
    format_number,
    load_model,
    parse,
    parse_experiments,
    render_json,
    render_text,
    serialize,
)
from qtax.errors import DSLError, InvalidArgument
from qtax.inference import world_joint
from qtax.model import rename

from .strategies import suite

MINIMAL = """\
model minimal
lattice x:[0,1] t:[0,1] c:1 arrow:forward
var x domain {0,1} at (0,0) controllable kind:input
var a domain {0,1} at (0,1) observable kind:output
mech a from (x) {
  0 -> {0: 1};
  1 -> {1: 1};
}
"""


def codes(result):
    return [d.code for d in result.diagnostics]


def world_rows(m):
    return {frozenset(row.items()): p for row, p in world_joint(m).rows()}


def test_minimal_model_parses():
    result = parse(MINIMAL)
    assert result.ok
    assert result.model.names == ("x", "a")
    assert result.model.prior.table == {("0",): Fraction(1, 2), ("1",): Fraction(1, 2)}


def test_unnormalized_row_points_at_its_line():
    text = MINIMAL.replace("0 -> {0: 1};", "0 -> {0: 1/2, 1: 1/3};")
    result = parse(text, "bad.qtx")
    assert not result.ok
    [diagnostic] = [d for d in result.errors if d.code == "KERNEL_NOT_NORMALIZED"]
    assert diagnostic.span.file == "bad.qtx"
    assert diagnostic.span.line == 6
    assert diagnostic.render().startswith("bad.qtx:6:")


def test_hidden_observable_conflict_is_an_error():
    text = MINIMAL.replace("at (0,0) controllable", "at (0,0) hidden observable")
    result = parse(text)
    assert "HIDDEN_OBSERVABLE_CONFLICT" in codes(result)
    [diagnostic] = [d for d in result.errors if d.code == "HIDDEN_OBSERVABLE_CONFLICT"]
    assert diagnostic.span.line == 3


@pytest.mark.parametrize(
    ("old", "new", "code"),
    [
        ("from (x)", "from (z)", "UNKNOWN_VARIABLE"),
        ("  1 -> {1: 1};\n", "  1 -> {1: 1};\n  1 -> {0: 1};\n", "DUPLICATE_ROW"),
        ("{0: 1};", "{0: 0.5, 1: 0.5};", "DECIMAL_IN_RATIONAL_MODE"),
        ("{1: 1};", "{1: 1/0};", "ZERO_DENOMINATOR"),
        ("0 -> {0: 1};", "(0, 1) -> {0: 1};", "ARITY_MISMATCH"),
        ("1 -> {1: 1};", "2 -> {1: 1};", "VALUE_NOT_IN_DOMAIN"),
        ("model minimal", "model minimal\nmodel again", "DUPLICATE_DECLARATION"),
        ("x:[0,1] t:[0,1]", "x:[1,0] t:[0,1]", "INVALID_LATTICE"),
        ("at (0,1)", "at (5,1)", "LOCALIZATION_OUT_OF_BOUNDS"),
    ],
)
def test_semantic_errors(old, new, code):
    result = parse(MINIMAL.replace(old, new))
    assert not result.ok
    assert code in codes(result)


def test_duplicate_variable_and_mechanism():
    doubled = MINIMAL + "var a domain {0,1} nowhere kind:output\n"
    assert "DUPLICATE_VARIABLE" in codes(parse(doubled))
    extra = MINIMAL + "mech a from (x) {\n  0 -> {0: 1};\n  1 -> {0: 1};\n}\n"
    assert "DUPLICATE_MECHANISM" in codes(parse(extra))


def test_missing_model_name_is_a_warning():
    result = parse(MINIMAL.replace("model minimal\n", ""), "my-model.qtx")
    assert result.ok
    assert codes(result) == ["MISSING_MODEL_NAME"]
    assert result.model.name == "my_model"


def test_syntax_error_has_a_position():
    result = parse(MINIMAL.replace("kind:output", "kind output"))
    [diagnostic] = result.errors
    assert diagnostic.code == "SYNTAX_ERROR"
    assert diagnostic.span.line == 4
    assert diagnostic.span.col > 1


def test_truncated_file_reports_the_last_line():
    text = MINIMAL[: MINIMAL.index("  1 -> {1: 1};")]
    [diagnostic] = parse(text).errors
    assert diagnostic.code == "SYNTAX_ERROR"
    assert diagnostic.span.line >= text.count("\n")


def test_mode_directive_wins_over_the_default():
    decimal = MINIMAL.replace("model minimal", "model minimal\nmode decimal").replace("{0: 1};", "{0: 0.5, 1: 0.5};")
    assert parse(decimal).model.decimal
    assert parse(MINIMAL.replace("{0: 1};", "{0: 0.5, 1: 0.5};"), mode="decimal").ok
    forced = parse(MINIMAL.replace("model minimal", "model minimal\nmode rational"), mode="decimal")
    assert not forced.model.decimal


def test_decimal_rows_use_the_tolerance():
    text = MINIMAL.replace("model minimal", "model minimal\nmode decimal").replace("{0: 1};", "{0: 0.3333, 1: 0.6666};")
    assert "KERNEL_NOT_NORMALIZED" in codes(parse(text))
    loose = QtaxConfig(epsilon=Fraction(1, 1000))
    assert parse(text, config=loose).ok


def test_span_must_not_end_before_it_starts():
    with pytest.raises(InvalidArgument):
        SourceSpan("f", 3, 1, 2, 1)


def test_diagnostics_render_as_text_and_json():
    result = parse(MINIMAL.replace("from (x)", "from (z)"), "m.qtx")
    text = render_text(result.diagnostics)
    assert text.startswith("m.qtx:5:1: error UNKNOWN_VARIABLE")
    [entry] = json.loads(render_json(result.diagnostics))
    assert entry["code"] == "UNKNOWN_VARIABLE"
    assert entry["span"]["line"] == 5


def test_load_model_raises_with_diagnostics(qtx_file):
    path = qtx_file(MINIMAL.replace("from (x)", "from (z)"))
    with pytest.raises(DSLError) as excinfo:
        load_model(path)
    assert [d.code for d in excinfo.value.diagnostics] == ["UNKNOWN_VARIABLE"]
    with pytest.raises(DSLError):
        load_model(path.with_name("missing.qtx"))


def test_lowest_terms_and_decimal_formatting():
    assert format_number(Fraction(2, 4)) == "1/2"
    assert format_number(Fraction(3)) == "3"
    assert format_number(Fraction(1, 8), decimal=True) == "0.125"
    assert format_number(Fraction(1, 3), decimal=True) == "1/3"
    text = MINIMAL.replace("{0: 1};", "{0: 2/4, 1: 2/4};")
    assert "0 -> {0: 1/2, 1: 1/2};" in serialize(parse(text).model).replace("(0)", "0")


def test_declaration_order_does_not_change_the_canonical_text():
    lines = MINIMAL.splitlines(keepends=True)
    swapped = "".join(lines[:2] + [lines[3], lines[2]] + lines[4:])
    assert serialize(parse(swapped).model) == serialize(parse(MINIMAL).model)


@pytest.mark.parametrize("name", CORPUS)
def test_corpus_round_trip_is_a_fixpoint(name):
    first = parse(corpus_text(name), f"{name}.qtx")
    assert first.ok, render_text(first.diagnostics)
    text = serialize(first.model)
    second = parse(text)
    assert second.ok, render_text(second.diagnostics)
    assert serialize(second.model) == text
    assert canonical_equal(first.model, second.model)
    assert world_rows(second.model) == world_rows(first.model)


def test_renamed_model_is_canonically_equal(corpus):
    m = corpus["lhv"]
    renamed = rename(m, {"lam": "mu", "la": "left", "lb": "right"}, name="other")
    assert canonical_equal(m, renamed)
    assert canonical_equal(renamed, m)


FACTORIZATION_HEADER = "var a domain {0,1} nowhere kind:output\nvar b domain {u,v} nowhere kind:output\n"


def test_different_factorizations_are_not_canonically_equal():
    forward = parse(
        "model f\n" + FACTORIZATION_HEADER + "mech a from () {\n  () -> {0: 1/2, 1: 1/2};\n}\n"
        "mech b from (a) {\n  0 -> {u: 1};\n  1 -> {v: 1};\n}\n"
    ).model
    backward = parse(
        "model g\n" + FACTORIZATION_HEADER + "mech b from () {\n  () -> {u: 1/2, v: 1/2};\n}\n"
        "mech a from (b) {\n  u -> {0: 1};\n  v -> {1: 1};\n}\n"
    ).model
    assert world_rows(forward) == world_rows(backward)
    assert not canonical_equal(forward, backward)


def test_different_domains_are_not_canonically_equal(corpus):
    assert not canonical_equal(corpus["lhv"], corpus["pr-completion"])


def test_experiments_are_checked_against_the_settings(corpus):
    m = corpus["lhv"]
    assert parse_experiments("experiment (x=0, y=2)\nexperiment ()\n", m) == [{"x": "0", "y": "2"}, {}]
    with pytest.raises(DSLError) as excinfo:
        parse_experiments("experiment (lam=+1)\n", m)
    assert [d.code for d in excinfo.value.diagnostics] == ["UNKNOWN_VARIABLE"]
    with pytest.raises(DSLError):
        parse_experiments("model lhv\n", m)


MUTATION_ALPHABET = "(){}[],;:->/.#+ 0123456789abxyz\n"


@st.composite
def mutated_sources(draw):
    text = corpus_text(draw(st.sampled_from(CORPUS)))
    for _ in range(draw(st.integers(1, 3))):
        position = draw(st.integers(0, len(text)))
        action = draw(st.sampled_from(("delete", "insert", "replace", "duplicate_line", "drop_line")))
        if action == "delete":
            text = text[:position] + text[position + 1 :]
        elif action == "insert":
            text = text[:position] + draw(st.sampled_from(MUTATION_ALPHABET)) + text[position:]
        elif action == "replace":
            text = text[:position] + draw(st.sampled_from(MUTATION_ALPHABET)) + text[position + 1 :]
        else:
            lines = text.split("\n")
            index = draw(st.integers(0, len(lines) - 1))
            if action == "duplicate_line":
                lines.insert(index, lines[index])
            else:
                del lines[index]
            text = "\n".join(lines)
    return text


@suite(1000)
@given(mutated_sources())
def test_mutated_sources_never_crash_the_parser(text):
    result = parse(text, "fuzz.qtx")
    if not result.ok:
        assert result.errors
    for diagnostic in result.diagnostics:
        assert diagnostic.code != "INTERNAL_ERROR", diagnostic.message
        assert diagnostic.span.line >= 1
        assert diagnostic.span.col >= 1

import json

import pytest
from click.testing import CliRunner
from openpyxl import load_workbook

from qtax.corpus import CORPUS
from qtax.dsl import serialize
from qtax.main import EXIT_INVALID, EXIT_REDUCIBLE, cli

from .strategies import with_dead_input


@pytest.fixture()
def runner(monkeypatch):
    for name in ("QTAX_MODE", "QTAX_EPSILON", "QTAX_JOBS", "QTAX_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    return CliRunner(mix_stderr=False)


@pytest.fixture()
def dead_file(corpus, qtx_file):
    return qtx_file(serialize(with_dead_input(corpus["lhv"])), "dead.qtx")


def test_classify_prints_the_report(runner, corpus_file):
    result = runner.invoke(cli, ["classify", str(corpus_file("lhv")), "--reference", str(corpus_file("sqm-bell"))])
    assert result.exit_code == 0, result.stderr
    assert result.stdout.startswith("model: lhv")
    assert "modification-candidate" in result.stdout


def test_classify_json_is_identical_across_job_counts(runner, corpus_file):
    outputs = []
    for jobs in ("1", "8"):
        result = runner.invoke(
            cli,
            [
                "classify",
                str(corpus_file("superdet")),
                "--reference",
                str(corpus_file("sqm-bell")),
                "--format",
                "json",
                "--jobs",
                jobs,
            ],
        )
        assert result.exit_code == 0, result.stderr
        outputs.append(result.stdout)
    assert outputs[0] == outputs[1]
    assert json.loads(outputs[0])["properties"]["superdeterministic"]["status"] == "holds"


def test_parse_error_exits_with_two(runner, corpus_file, qtx_file):
    bad = qtx_file("model broken\nvar x domain {0,1 nowhere kind:input\n")
    result = runner.invoke(cli, ["classify", str(bad), "--reference", str(corpus_file("sqm-bell"))])
    assert result.exit_code == EXIT_INVALID
    assert "SYNTAX_ERROR" in result.stderr


def test_reducible_model_exits_with_three(runner, corpus_file, dead_file):
    args = ["classify", str(dead_file), "--reference", str(corpus_file("sqm-bell"))]
    result = runner.invoke(cli, args)
    assert result.exit_code == EXIT_REDUCIBLE
    assert "removable: input dead" in result.stderr
    reduced = runner.invoke(cli, args + ["--auto-reduce"])
    assert reduced.exit_code == 0, reduced.stderr
    assert "auto-reduced: removed input dead" in reduced.stdout


def test_parse_prints_the_canonical_text(runner, corpus_file):
    result = runner.invoke(cli, ["parse", str(corpus_file("lhv"))])
    assert result.exit_code == 0
    assert result.stdout.startswith("model lhv")


def test_parse_reports_diagnostics_as_json(runner, qtx_file):
    bad = qtx_file("model m\nvar a domain {0,1} nowhere kind:output\nmech a from (z) {\n  0 -> {0: 1};\n}\n")
    result = runner.invoke(cli, ["parse", str(bad), "--format", "json"])
    assert result.exit_code == EXIT_INVALID
    assert "\"code\": \"UNKNOWN_VARIABLE\"" in result.stderr


def test_check_single_property(runner, corpus_file):
    result = runner.invoke(cli, ["check", "deterministic", str(corpus_file("bohm-toy"))])
    assert result.exit_code == 0
    assert result.stdout.startswith("deterministic: holds")
    result = runner.invoke(cli, ["check", "predictable", str(corpus_file("bohm-toy")), "--format", "json"])
    assert json.loads(result.stdout)["predictable"]["status"] == "fails"


def test_check_with_reference(runner, corpus_file):
    result = runner.invoke(
        cli, ["check", "superdeterministic", str(corpus_file("superdet")), "--reference", str(corpus_file("sqm-bell"))]
    )
    assert result.exit_code == 0
    assert result.stdout.startswith("superdeterministic: holds")


def test_compare_levels(runner, corpus_file, qtx_file):
    lhv, sqm = str(corpus_file("lhv")), str(corpus_file("sqm-bell"))
    result = runner.invoke(cli, ["compare", lhv, sqm, "--level", "p"])
    assert result.exit_code == 0
    assert result.stdout.startswith("p_equivalent: fails")
    experiments = qtx_file("experiment (x=0, y=2)\n", "experiments.qtx")
    result = runner.invoke(cli, ["compare", lhv, sqm, "--level", "e", "--experiments", str(experiments)])
    assert result.exit_code == 0
    assert result.stdout.startswith("e_equivalent: holds")
    missing = runner.invoke(cli, ["compare", lhv, sqm, "--level", "e"])
    assert missing.exit_code == 2


def test_compare_signature_mismatch_is_invalid(runner, corpus_file):
    result = runner.invoke(cli, ["compare", str(corpus_file("lhv")), str(corpus_file("pr-completion"))])
    assert result.exit_code == EXIT_INVALID
    assert "Signature mismatch" in result.stderr


def test_reduce_writes_the_reduced_model(runner, dead_file, tmp_path):
    out = tmp_path / "reduced.qtx"
    result = runner.invoke(cli, ["reduce", str(dead_file), "-o", str(out)])
    assert result.exit_code == 0
    assert "removed input dead" in result.stderr
    assert "var dead" not in out.read_text(encoding="utf-8")
    again = runner.invoke(cli, ["reduce", str(out)])
    assert "already irreducible by deletion" in again.stderr


def test_matrix_writes_a_workbook(runner, tmp_path):
    out = tmp_path / "matrix.xlsx"
    result = runner.invoke(cli, ["matrix", str(out)])
    assert result.exit_code == 0, result.stderr
    ws = load_workbook(out)["Verdict Matrix"]
    assert [row[0].value for row in ws.iter_rows(min_row=2)] == list(CORPUS)


def test_bad_epsilon_is_a_usage_error(runner, corpus_file):
    result = runner.invoke(cli, ["parse", str(corpus_file("lhv")), "--epsilon", "abc"])
    assert result.exit_code == 2
    result = runner.invoke(cli, ["parse", str(corpus_file("lhv")), "--jobs", "0"])
    assert result.exit_code == 2


def test_bad_environment_is_a_usage_error(runner, corpus_file, monkeypatch):
    monkeypatch.setenv("QTAX_MODE", "imaginary")
    result = runner.invoke(cli, ["parse", str(corpus_file("lhv"))])
    assert result.exit_code == 2
    assert "QTAX_MODE" in result.stderr

"""Command-line entrypoint for the qtax taxonomy engine."""

from __future__ import annotations

import functools
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import click
from dotenv import load_dotenv

from .checkers import Session, Verdict
from .config import QtaxConfig, parse_epsilon
from .dsl import load, load_model, parse_experiments, render_json, render_text, serialize
from .equivalence import e_equivalent, p_equivalent, reduce
from .errors import DSLError, InvalidArgument, QtaxError, ReducibleSetup
from .report import CHECKS, classify, corpus_matrix, emit, matrix_xlsx, run_checks

logger = logging.getLogger(__name__)

EXIT_INTERNAL = 1
EXIT_INVALID = 2
EXIT_REDUCIBLE = 3

FORMATS = click.Choice(["text", "json"])


def _exit_codes(command):
    """Map engine exceptions to the documented exit codes."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return command(*args, **kwargs)
        except click.exceptions.Exit:
            raise
        except DSLError as exc:
            if exc.diagnostics:
                click.echo(render_text(exc.diagnostics), err=True)
            else:
                click.echo(f"error: {exc}", err=True)
            ctx.exit(EXIT_INVALID)
        except InvalidArgument as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(EXIT_INVALID)
        except ReducibleSetup as exc:
            click.echo(f"reducible setup: {exc}", err=True)
            for item in exc.verdict.items:
                click.echo(f"  removable: {item}", err=True)
            ctx.exit(EXIT_REDUCIBLE)
        except (QtaxError, RuntimeError) as exc:
            logger.exception("Command failed")
            click.echo(f"internal error: {exc}", err=True)
            ctx.exit(EXIT_INTERNAL)

    return wrapper


def _engine_options(command):
    command = click.option("--jobs", type=int, default=None, help="Worker threads for independent checks.")(command)
    command = click.option("--epsilon", default=None, help="Tolerance for decimal models, e.g. 1e-9 or 1/1000.")(command)
    command = click.option("--mode", type=click.Choice(["rational", "decimal"]), default=None,
                           help="Arithmetic mode for files without a 'mode' directive.")(command)
    return command


def _config(ctx: click.Context, mode: str | None, epsilon: str | None, jobs: int | None) -> QtaxConfig:
    config: QtaxConfig = ctx.obj
    changes = {}
    if mode is not None:
        changes["mode"] = mode
    if epsilon is not None:
        try:
            changes["epsilon"] = parse_epsilon(epsilon)
        except RuntimeError as exc:
            raise click.BadParameter(str(exc), param_hint="--epsilon") from exc
    if jobs is not None:
        if jobs < 1:
            raise click.BadParameter("must be at least 1", param_hint="--jobs")
        changes["jobs"] = jobs
    return replace(config, **changes)


def _echo_verdict(name: str, verdict: Verdict, fmt: str) -> None:
    if fmt == "json":
        click.echo(json.dumps({name: verdict.to_dict()}, indent=2, sort_keys=True))
        return
    click.echo(f"{name}: {verdict.status.value}")
    for key, value in verdict.to_dict().items():
        if key != "status":
            click.echo(f"  {key}: {json.dumps(value, sort_keys=True)}")


@click.group()
@click.option("--log-level", default=None, help="Logging level (overrides QTAX_LOG_LEVEL).")
@click.pass_context
def cli(ctx: click.Context, log_level: str | None) -> None:
    """Classify probabilistic models of physical setups by their structural properties."""
    load_dotenv()
    try:
        config = QtaxConfig.from_env()
    except RuntimeError as exc:
        raise click.UsageError(str(exc)) from exc
    if log_level:
        config = replace(config, log_level=log_level.upper())
    logging.basicConfig(
        level=getattr(logging, config.log_level, logging.WARNING),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        stream=sys.stderr,
    )
    ctx.obj = config


@cli.command("classify")
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--reference", "reference_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--experiments", "experiments_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--auto-reduce", is_flag=True, help="Delete removable assumptions instead of stopping.")
@click.option("--format", "fmt", type=FORMATS, default="text")
@click.option("--timings", is_flag=True, help="Show per-check timings (text format only).")
@_engine_options
@click.pass_context
@_exit_codes
def classify_command(ctx, model_path, reference_path, experiments_path, auto_reduce, fmt, timings, mode, epsilon, jobs):
    """Run the four-step classification of MODEL_PATH against a reference model."""
    config = _config(ctx, mode, epsilon, jobs)
    report = classify(model_path, reference_path, experiments_path, auto_reduce=auto_reduce, config=config)
    click.echo(emit(report, fmt, timings=timings), nl=False)


@cli.command("parse")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=FORMATS, default="text")
@_engine_options
@click.pass_context
@_exit_codes
def parse_command(ctx, path, fmt, mode, epsilon, jobs):
    """Validate PATH and print its canonical form."""
    result = load(path, config=_config(ctx, mode, epsilon, jobs))
    if result.diagnostics:
        click.echo(render_json(result.diagnostics) if fmt == "json" else render_text(result.diagnostics), err=True)
    if not result.ok:
        ctx.exit(EXIT_INVALID)
    click.echo(serialize(result.model), nl=False)


@cli.command("check")
@click.argument("prop", metavar="PROPERTY", type=click.Choice(sorted(CHECKS)))
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--reference", "reference_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--format", "fmt", type=FORMATS, default="text")
@_engine_options
@click.pass_context
@_exit_codes
def check_command(ctx, prop, model_path, reference_path, fmt, mode, epsilon, jobs):
    """Evaluate a single PROPERTY of MODEL_PATH."""
    config = _config(ctx, mode, epsilon, jobs)
    m = load_model(model_path, config=config)
    reference = load_model(reference_path, config=config) if reference_path else None
    verdicts, _ = run_checks(m, reference, Session(m, config), [prop])
    _echo_verdict(prop, verdicts[prop], fmt)


@cli.command("compare")
@click.argument("first", type=click.Path(exists=True, dir_okay=False))
@click.argument("second", type=click.Path(exists=True, dir_okay=False))
@click.option("--level", type=click.Choice(["p", "e"]), default="p")
@click.option("--experiments", "experiments_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--format", "fmt", type=FORMATS, default="text")
@_engine_options
@click.pass_context
@_exit_codes
def compare_command(ctx, first, second, level, experiments_path, fmt, mode, epsilon, jobs):
    """Compare two models empirically (p: all settings, e: listed experiments)."""
    config = _config(ctx, mode, epsilon, jobs)
    m1 = load_model(first, config=config)
    m2 = load_model(second, config=config)
    if level == "p":
        verdict = p_equivalent(m1, m2, config=config)
    else:
        if experiments_path is None:
            raise click.UsageError("--level e needs --experiments")
        text = Path(experiments_path).read_text(encoding="utf-8")
        verdict = e_equivalent(m1, m2, parse_experiments(text, m1, experiments_path), config=config)
    _echo_verdict(f"{level}_equivalent", verdict, fmt)


@cli.command("reduce")
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None, help="Write the reduced model here.")
@_engine_options
@click.pass_context
@_exit_codes
def reduce_command(ctx, model_path, output, mode, epsilon, jobs):
    """Delete removable assumptions and print the reduced model."""
    config = _config(ctx, mode, epsilon, jobs)
    reduced, changelog = reduce(load_model(model_path, config=config), config)
    for entry in changelog:
        click.echo(entry, err=True)
    if not changelog:
        click.echo("already irreducible by deletion", err=True)
    text = serialize(reduced)
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@cli.command("matrix")
@click.argument("output", type=click.Path(dir_okay=False))
@_engine_options
@click.pass_context
@_exit_codes
def matrix_command(ctx, output, mode, epsilon, jobs):
    """Write the verdict matrix of the bundled corpus to an .xlsx workbook."""
    config = _config(ctx, mode, epsilon, jobs)
    header, rows = corpus_matrix(config)
    Path(output).write_bytes(matrix_xlsx(header, rows).getvalue())
    click.echo(f"wrote {len(rows)} models x {len(header) - 1} columns to {output}", err=True)


def main() -> None:
    cli(prog_name="qtax")


if __name__ == "__main__":
    main()

"""Bundled .qtx models used by the acceptance suite and the ``matrix`` command."""

from __future__ import annotations

from importlib.resources import files

from ..config import QtaxConfig
from ..errors import DSLError
from ..model import Model

CORPUS = (
    "lhv",
    "sqm-bell",
    "pr-completion",
    "superdet",
    "retro",
    "pseudo-retro",
    "common-cause-sd",
    "bohm-toy",
    "bohm-ref",
)

# Reference each corpus model is classified against.
REFERENCES = {name: "sqm-bell" for name in CORPUS} | {"bohm-toy": "bohm-ref", "bohm-ref": "bohm-ref"}


def corpus_text(name: str) -> str:
    if name not in CORPUS:
        raise DSLError(f"Unknown corpus model {name!r}; known: {', '.join(CORPUS)}.")
    return (files(__name__) / f"{name}.qtx").read_text(encoding="utf-8")


def load_corpus(name: str, config: QtaxConfig | None = None) -> Model:
    from ..dsl import parse

    result = parse(corpus_text(name), f"{name}.qtx", config=config)
    if not result.ok:
        raise DSLError(f"Corpus model {name} does not parse", result.diagnostics)
    return result.model

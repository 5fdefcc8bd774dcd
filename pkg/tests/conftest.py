import pytest

from qtax.config import QtaxConfig
from qtax.corpus import CORPUS, corpus_text, load_corpus


@pytest.fixture(scope="session")
def config():
    return QtaxConfig()


@pytest.fixture(scope="session")
def corpus(config):
    """Every bundled model, parsed once per test run."""
    return {name: load_corpus(name, config) for name in CORPUS}


@pytest.fixture()
def corpus_file(tmp_path):
    """Write a corpus model to disk and return its path."""

    def write(name: str):
        path = tmp_path / f"{name}.qtx"
        path.write_text(corpus_text(name), encoding="utf-8")
        return path

    return write


@pytest.fixture()
def qtx_file(tmp_path):
    """Write arbitrary .qtx text to disk and return its path."""

    def write(text: str, name: str = "model.qtx"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return write

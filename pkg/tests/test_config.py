from fractions import Fraction

import pytest

from qtax.config import QtaxConfig, parse_epsilon


def test_defaults(monkeypatch):
    for name in ("QTAX_MODE", "QTAX_EPSILON", "QTAX_JOBS", "QTAX_PARTITION_LIMIT", "QTAX_MATCH_LIMIT", "QTAX_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    config = QtaxConfig.from_env()
    assert config == QtaxConfig()
    assert config.epsilon == Fraction(1, 10**9)


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("QTAX_MODE", "Decimal")
    monkeypatch.setenv("QTAX_EPSILON", "1/1000")
    monkeypatch.setenv("QTAX_JOBS", "4")
    monkeypatch.setenv("QTAX_LOG_LEVEL", "debug")
    config = QtaxConfig.from_env()
    assert config.mode == "decimal"
    assert config.epsilon == Fraction(1, 1000)
    assert config.jobs == 4
    assert config.log_level == "DEBUG"


@pytest.mark.parametrize(
    ("name", "value"),
    [("QTAX_MODE", "complex"), ("QTAX_JOBS", "many"), ("QTAX_JOBS", "0"), ("QTAX_EPSILON", "-1")],
)
def test_invalid_environment(monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(RuntimeError, match=name):
        QtaxConfig.from_env()


def test_epsilon_is_parsed_exactly():
    assert parse_epsilon("1e-9") == Fraction(1, 10**9)
    assert parse_epsilon(" 0.25 ") == Fraction(1, 4)
    with pytest.raises(RuntimeError):
        parse_epsilon("tiny")

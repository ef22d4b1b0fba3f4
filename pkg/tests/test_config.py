"""Environment-driven configuration."""

from __future__ import annotations

import pytest

from src.config import ServiceConfig, get_config, parse_bind


@pytest.fixture(autouse=True)
def _fresh_config():
    yield
    get_config(reload=True)


def test_parse_bind():
    assert parse_bind("127.0.0.1:8000") == ("127.0.0.1", 8000)
    assert parse_bind("0.0.0.0:1") == ("0.0.0.0", 1)
    assert ServiceConfig(bind="localhost:9001").host_port() == ("localhost", 9001)


@pytest.mark.parametrize("bind", ["8000", ":8000", "host:", "host:http", "host:70000"])
def test_parse_bind_rejects(bind):
    with pytest.raises(ValueError):
        parse_bind(bind)


def test_defaults(monkeypatch):
    for name in ("DERM_BIND", "DERM_MAX_BODY_BYTES", "DERM_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    cfg = get_config(reload=True)
    assert cfg.service.bind == "127.0.0.1:8000"
    assert cfg.service.max_body_bytes == 10 * 1024 * 1024
    assert cfg.logging.level == "INFO"


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("DERM_BIND", "0.0.0.0:9000")
    monkeypatch.setenv("DERM_MAX_BODY_BYTES", "2048")
    monkeypatch.setenv("DERM_LOG_LEVEL", "debug")
    cfg = get_config(reload=True)
    assert cfg.service.host_port() == ("0.0.0.0", 9000)
    assert cfg.service.max_body_bytes == 2048
    assert cfg.logging.level == "DEBUG"
    assert get_config() is cfg


@pytest.mark.parametrize("raw", ["lots", "0", "-5"])
def test_bad_body_limit(monkeypatch, raw):
    monkeypatch.setenv("DERM_MAX_BODY_BYTES", raw)
    with pytest.raises(ValueError, match="DERM_MAX_BODY_BYTES"):
        get_config(reload=True)

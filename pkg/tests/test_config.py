import logging

import pytest

from diracwg.config import configure_logging, get_settings
from diracwg.errors import ArgumentError


def test_defaults():
    settings = get_settings()
    assert settings.root_tol == 1e-15
    assert settings.quadrature_nodes == 64
    assert settings.truncation_tol == 1e-6
    assert settings.workers == 1


def test_environment_override(monkeypatch):
    monkeypatch.setenv("DIRACWG_QUADRATURE_NODES", "96")
    monkeypatch.setenv("DIRACWG_GAP_GUARD", "1e-4")
    settings = get_settings()
    assert settings.quadrature_nodes == 96
    assert settings.gap_guard == 1e-4


def test_settings_are_cached(monkeypatch):
    first = get_settings()
    monkeypatch.setenv("DIRACWG_WORKERS", "4")
    assert get_settings() is first
    get_settings.cache_clear()
    assert get_settings().workers == 4


@pytest.mark.parametrize(
    "name, value",
    [("DIRACWG_WORKERS", "0"), ("DIRACWG_ROOT_TOL", "-1"), ("DIRACWG_GAP_GUARD", "1.5"), ("DIRACWG_SMALL_K", "tiny")],
)
def test_invalid_environment(monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(ArgumentError):
        get_settings()


def test_configure_logging_levels():
    logger = logging.getLogger("diracwg")
    configure_logging(verbose=True)
    assert logger.level == logging.DEBUG
    configure_logging()
    assert logger.level == logging.WARNING
    assert len(logger.handlers) == 1

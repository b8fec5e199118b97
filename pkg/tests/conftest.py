from pathlib import Path

import pytest

from diracwg.config import get_settings

GEOMETRIES = Path(__file__).resolve().parent.parent / "geometries"


@pytest.fixture(autouse=True)
def fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def geometry_dir():
    return GEOMETRIES

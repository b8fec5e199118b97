import logging
import os
from functools import lru_cache
from typing import Any, Dict

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError
from rich.console import Console
from rich.logging import RichHandler

from diracwg.errors import ArgumentError

ENV_PREFIX = "DIRACWG_"

# stderr so that CSV and JSON on stdout stay clean
console = Console(stderr=True)


class Settings(BaseModel):
    """Numerical tolerances and runtime knobs, overridable through DIRACWG_* variables."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    root_tol: float = Field(1e-15, gt=0)
    hermitian_rtol: float = Field(1e-13, gt=0)
    assembly_rtol: float = Field(1e-12, gt=0)
    pole_offset: float = Field(1e-9, gt=0)
    degenerate_mu_tol: float = Field(1e-12, ge=0)
    small_k: float = Field(1e-4, gt=0)
    quadrature_nodes: int = Field(64, ge=1)
    gap_guard: float = Field(1e-6, ge=0, lt=1)
    truncation_tol: float = Field(1e-6, gt=0)
    refinement_factor: float = Field(1.5, gt=1)
    workers: int = Field(1, ge=1)


def _environment_overrides() -> Dict[str, Any]:
    overrides = {}
    for name in Settings.model_fields:
        value = os.getenv(ENV_PREFIX + name.upper())
        if value is not None and value.strip():
            overrides[name] = value.strip()
    return overrides


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    load_dotenv()
    try:
        return Settings(**_environment_overrides())
    except ValidationError as exc:
        raise ArgumentError(f"invalid {ENV_PREFIX}* environment setting: {exc}") from exc


def configure_logging(verbose: bool = False) -> None:
    """Route diracwg log records to a rich handler on stderr."""
    logger = logging.getLogger("diracwg")
    logger.handlers.clear()
    handler = RichHandler(console=console, show_path=False, markup=False)
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)
    logger.propagate = False

"""Planar curves described by their curvature as a function of arc length.

Closed curves carry samples of kappa on a uniform periodic grid s_j = j*ell/Ns
(the endpoint s = ell is the same point as s = 0 and is not stored twice).
Open curves carry a Gaussian bump profile on the window [-L, L].
"""
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError
from scipy.interpolate import PchipInterpolator

from diracwg.errors import ArgumentError, GeometryValidationError
from diracwg.numerics import fft_forward, gauss_legendre

logger = logging.getLogger(__name__)

MIN_SAMPLES = 8


@dataclass(frozen=True, eq=False)
class ClosedCurve:
    length: float
    kappa_samples: np.ndarray
    name: str = "closed"

    def __post_init__(self) -> None:
        samples = np.array(self.kappa_samples, dtype=float)
        if not (math.isfinite(self.length) and self.length > 0):
            raise ArgumentError(f"curve length must be positive, got {self.length}")
        if samples.ndim != 1 or samples.size < MIN_SAMPLES:
            raise ArgumentError(f"need at least {MIN_SAMPLES} curvature samples")
        if not np.all(np.isfinite(samples)):
            raise ArgumentError("curvature samples must be finite")
        samples.setflags(write=False)
        object.__setattr__(self, "kappa_samples", samples)

    @property
    def ns(self) -> int:
        return self.kappa_samples.size

    @property
    def period(self) -> float:
        return self.length

    @property
    def kappa_max(self) -> float:
        return float(np.max(np.abs(self.kappa_samples)))

    @property
    def s_grid(self) -> np.ndarray:
        return self.length * np.arange(self.ns) / self.ns

    def periodic_samples(self) -> np.ndarray:
        """Samples on the closed grid [0, ell], first and last value equal."""
        return np.append(self.kappa_samples, self.kappa_samples[0])

    def total_curvature(self) -> float:
        # trapezoid rule on the periodic grid
        return float(self.length * np.mean(self.kappa_samples))

    def fourier_coefficients(self, values: Optional[np.ndarray] = None) -> np.ndarray:
        return fft_forward(self.kappa_samples if values is None else values)


@dataclass(frozen=True, eq=False)
class OpenCurve:
    """Gaussian curvature bump amp*exp(-s^2/width^2) on [-L, L]."""

    half_window: float
    amp: float
    width: float
    ns: int = 512
    name: str = "bump"

    def __post_init__(self) -> None:
        if not self.width > 0:
            raise ArgumentError(f"bump width must be positive, got {self.width}")
        if not math.isfinite(self.amp):
            raise ArgumentError(f"bump amplitude must be finite, got {self.amp}")
        if self.half_window < 8 * self.width:
            raise ArgumentError(f"window L={self.half_window} must be at least 8*width={8 * self.width}")
        if self.ns < MIN_SAMPLES:
            raise ArgumentError(f"need at least {MIN_SAMPLES} curvature samples")
        tail = abs(self.kappa(self.half_window))
        if self.amp != 0 and tail >= 1e-10 * abs(self.amp):
            raise ArgumentError(f"curvature at the window edge is {tail:.3e}, not negligible")

    def kappa(self, s):
        return self.amp * np.exp(-((np.asarray(s, dtype=float) / self.width) ** 2))

    @property
    def period(self) -> float:
        return 2 * self.half_window

    @property
    def kappa_max(self) -> float:
        return abs(self.amp)

    @property
    def s_grid(self) -> np.ndarray:
        return -self.half_window + self.period * np.arange(self.ns) / self.ns

    @property
    def kappa_samples(self) -> np.ndarray:
        return self.kappa(self.s_grid)

    def kappa_squared_integral(self) -> float:
        return self.amp**2 * self.width * math.sqrt(math.pi / 2)

    def fourier_coefficients(self, values: Optional[np.ndarray] = None) -> np.ndarray:
        return fft_forward(self.kappa_samples if values is None else values)


CurveGeometry = Union[ClosedCurve, OpenCurve]


def circle(R: float, Ns: int = 256) -> ClosedCurve:
    if not R > 0:
        raise ArgumentError(f"circle radius must be positive, got {R}")
    return ClosedCurve(length=2 * math.pi * R, kappa_samples=np.full(Ns, 1.0 / R), name=f"circle(R={R:g})")


def _ellipse_speed(theta: np.ndarray, a: float, b: float) -> np.ndarray:
    return np.sqrt((a * np.sin(theta)) ** 2 + (b * np.cos(theta)) ** 2)


def _ellipse_kappa(theta: np.ndarray, a: float, b: float) -> np.ndarray:
    return a * b / _ellipse_speed(theta, a, b) ** 3


def _arc_length_between(start: np.ndarray, stop: np.ndarray, a: float, b: float) -> np.ndarray:
    """Arc length from start to stop, 16-point Gauss-Legendre on each interval."""
    rule = gauss_legendre(16)
    half = 0.5 * (stop - start)
    middle = 0.5 * (stop + start)
    theta = middle[..., None] + half[..., None] * rule.nodes
    return half * rule.apply(_ellipse_speed(theta, a, b))


def ellipse(a: float, b: float, Ns: int = 256, oversample: int = 16) -> ClosedCurve:
    """Ellipse (a cos t, b sin t), resampled onto a uniform arc-length grid."""
    if not (a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b)):
        raise ArgumentError(f"ellipse axes must be positive, got a={a}, b={b}")

    fine = np.linspace(0.0, 2 * math.pi, oversample * Ns + 1)
    cumulative = np.concatenate([[0.0], np.cumsum(_arc_length_between(fine[:-1], fine[1:], a, b))])
    length = float(cumulative[-1])

    targets = length * np.arange(Ns) / Ns
    theta = PchipInterpolator(cumulative, fine)(targets)
    # Newton polish of the interpolated inverse against the exact arc length
    index = np.clip(np.searchsorted(fine, theta, side="right") - 1, 0, fine.size - 2)
    for _ in range(3):
        arc = cumulative[index] + _arc_length_between(fine[index], theta, a, b)
        theta = theta - (arc - targets) / _ellipse_speed(theta, a, b)

    samples = _ellipse_kappa(theta, a, b)
    curve = ClosedCurve(length=length, kappa_samples=samples, name=f"ellipse(a={a:g}, b={b:g})")
    logger.debug("ellipse a=%g b=%g: length %.17g, total curvature %.17g", a, b, length, curve.total_curvature())
    return curve


def bump_line(amp: float, width: float, L: float, Ns: int = 512) -> OpenCurve:
    return OpenCurve(half_window=L, amp=amp, width=width, ns=Ns, name=f"bump(amp={amp:g}, width={width:g}, L={L:g})")


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    epsilon: Optional[float]
    kappa_max: float
    failures: List[str] = field(default_factory=list)
    total_curvature: Optional[float] = None

    @property
    def passed(self) -> bool:
        return not self.failures


def validate(geom: CurveGeometry, epsilon: Optional[float] = None) -> ValidationReport:
    """Check metric positivity (epsilon*kappa_max < 1) and closure of closed curves."""
    report = ValidationReport(epsilon=epsilon, kappa_max=geom.kappa_max)
    if epsilon is not None:
        if not epsilon > 0:
            raise ArgumentError(f"epsilon must be positive, got {epsilon}")
        if epsilon * geom.kappa_max >= 1.0:
            report.failures.append(
                f"metric positivity: epsilon*kappa_max = {epsilon * geom.kappa_max:.6g} >= 1"
            )
    if isinstance(geom, ClosedCurve):
        report.total_curvature = geom.total_curvature()
        tolerance = 1e-8 * (1 + geom.length)
        if abs(report.total_curvature - 2 * math.pi) > tolerance:
            report.failures.append(
                f"total curvature: {report.total_curvature:.12g} differs from 2*pi by more than {tolerance:.1e}"
            )
    return report


def ensure_valid(geom: CurveGeometry, epsilon: Optional[float] = None) -> ValidationReport:
    report = validate(geom, epsilon)
    if not report.passed:
        raise GeometryValidationError(report)
    return report


# ---------------------------------------------------------------------------
# JSON documents


class _Document(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ClosedDocument(_Document):
    variant: Literal["closed"]
    ell: float = Field(gt=0)
    samples: List[float] = Field(min_length=MIN_SAMPLES)
    name: str = "closed"


class OpenDocument(_Document):
    variant: Literal["open"]
    L: float = Field(gt=0)
    amp: float
    width: float = Field(gt=0)
    ns: int = Field(512, ge=MIN_SAMPLES)


class CircleDocument(_Document):
    variant: Literal["circle"]
    R: float = Field(gt=0)
    ns: int = Field(256, ge=MIN_SAMPLES)


class EllipseDocument(_Document):
    variant: Literal["ellipse"]
    a: float = Field(gt=0)
    b: float = Field(gt=0)
    ns: int = Field(256, ge=MIN_SAMPLES)


GeometryDocument = Annotated[
    Union[ClosedDocument, OpenDocument, CircleDocument, EllipseDocument], Field(discriminator="variant")
]
_DOCUMENTS = TypeAdapter(GeometryDocument)


def from_document(document) -> CurveGeometry:
    if isinstance(document, ClosedDocument):
        return ClosedCurve(length=document.ell, kappa_samples=np.array(document.samples), name=document.name)
    if isinstance(document, OpenDocument):
        return bump_line(document.amp, document.width, document.L, Ns=document.ns)
    if isinstance(document, CircleDocument):
        return circle(document.R, Ns=document.ns)
    return ellipse(document.a, document.b, Ns=document.ns)


def load_geometry(source: Union[str, Path]) -> CurveGeometry:
    """Build a geometry from inline JSON or from the path of a JSON file."""
    text = str(source)
    if not text.lstrip().startswith("{"):
        path = Path(text)
        if not path.is_file():
            raise ArgumentError(f"geometry file not found: {path}")
        text = path.read_text(encoding="utf-8")
    try:
        document = _DOCUMENTS.validate_json(text)
    except ValidationError as exc:
        raise ArgumentError(f"invalid geometry document: {exc}") from exc
    return from_document(document)


def to_document(geom: CurveGeometry):
    if isinstance(geom, ClosedCurve):
        return ClosedDocument(variant="closed", ell=geom.length, samples=geom.kappa_samples.tolist(), name=geom.name)
    return OpenDocument(variant="open", L=geom.half_window, amp=geom.amp, width=geom.width, ns=geom.ns)


def dump_geometry(geom: CurveGeometry) -> str:
    # float repr is the shortest string that round-trips, at most 17 significant digits
    return json.dumps(to_document(geom).model_dump(), indent=2)

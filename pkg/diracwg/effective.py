"""One-dimensional effective operators and their low spectrum.

Two models share the Fourier window p in {-P-1, ..., P}:

* ``schrodinger_taylor``: (D_s + flux)^2 - kappa^2/pi^2, the gauge-reduced
  second-order model, with flux (pi+2)/ell by default.  Open curves use
  centered finite differences on [-L, L] with Dirichlet ends and no flux.
* ``full_symbol_weyl``: the Weyl quantization of
  n_eff(s, xi) = nu_1(xi, eps m) + eps kappa(s) xi M(xi, eps m)
  on a closed curve, with momenta xi_p = eps (2 pi p + pi)/ell.

The window is closed under p -> -1-p, which maps the momentum (2 pi p + pi)/ell
to its negative.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np

from diracwg.errors import ArgumentError, ResolutionError
from diracwg.geometry import ClosedCurve, CurveGeometry, OpenCurve, ensure_valid
from diracwg.numerics import HermitianMatrix, fft_inverse, hermitian_eigenvalues
from diracwg.transverse import momentum_m, nu, nu0

logger = logging.getLogger(__name__)

FLUX_CANDIDATES: Dict[str, Callable[[float], float]] = {
    "pi+2": lambda ell: (math.pi + 2) / ell,
    "2-pi": lambda ell: (2 - math.pi) / ell,
    "pi-2": lambda ell: (math.pi - 2) / ell,
}
DEFAULT_FLUX = "pi+2"
# Fourier window used when a caller does not pick one
EFFECTIVE_WINDOW = 48


class EffectiveModel(str, Enum):
    SCHRODINGER_TAYLOR = "schrodinger_taylor"
    FULL_SYMBOL_WEYL = "full_symbol_weyl"


@dataclass(frozen=True)
class FourierBasis:
    P: int
    length: float

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.P - 1, self.P + 1)

    @property
    def dimension(self) -> int:
        return 2 * self.P + 2

    def momenta(self, shift: float = 0.0) -> np.ndarray:
        return 2 * math.pi * self.indices / self.length + shift


@dataclass(frozen=True)
class GridBasis:
    cells: int
    half_window: float

    @property
    def h(self) -> float:
        return 2 * self.half_window / self.cells

    @property
    def nodes(self) -> np.ndarray:
        return -self.half_window + self.h * np.arange(1, self.cells)

    @property
    def dimension(self) -> int:
        return self.cells - 1


@dataclass(frozen=True, eq=False)
class EffectiveOperator:
    model: EffectiveModel
    matrix: HermitianMatrix
    basis: Union[FourierBasis, GridBasis]
    flux: float
    epsilon: Optional[float] = None
    m: Optional[float] = None
    sign_choice: Optional[int] = None

    @property
    def dimension(self) -> int:
        return self.matrix.dimension


def flux_value(name: str, ell: float) -> float:
    try:
        return FLUX_CANDIDATES[name](ell)
    except KeyError:
        raise ArgumentError(f"unknown flux {name!r}; choose one of {sorted(FLUX_CANDIDATES)}") from None


def max_fourier_window(geom: CurveGeometry) -> int:
    """Largest P whose coefficient differences p'-p are resolved without aliasing."""
    return (geom.ns - 3) // 4


def _check_window(geom: CurveGeometry, P: int) -> None:
    if int(P) != P or P < 0:
        raise ArgumentError(f"Fourier window P must be a nonnegative integer, got {P}")
    if P > max_fourier_window(geom):
        raise ArgumentError(
            f"Fourier window P={P} needs more than the {geom.ns} curvature samples "
            f"(at most P={max_fourier_window(geom)})"
        )


def toeplitz(coefficients: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """Matrix with entry (p', p) = coefficients[(p' - p) mod N]."""
    differences = indices[:, None] - indices[None, :]
    return coefficients[differences % len(coefficients)]


def schrodinger_matrix(
    geom: CurveGeometry, resolution: int, flux_override: Optional[float] = None
) -> EffectiveOperator:
    """(D_s + flux)^2 - kappa^2/pi^2 in a Fourier window (closed) or on a grid (open)."""
    ensure_valid(geom)
    if isinstance(geom, ClosedCurve):
        _check_window(geom, resolution)
        basis = FourierBasis(P=int(resolution), length=geom.length)
        flux = flux_value(DEFAULT_FLUX, geom.length) if flux_override is None else float(flux_override)
        potential = geom.fourier_coefficients(-(geom.kappa_samples**2) / math.pi**2)
        entries = toeplitz(potential, basis.indices) + np.diag(basis.momenta(flux) ** 2)
        logger.debug("closed Schrodinger model: P=%d, flux=%.17g", resolution, flux)
        return EffectiveOperator(
            model=EffectiveModel.SCHRODINGER_TAYLOR,
            matrix=HermitianMatrix(entries, symmetrize=True),
            basis=basis,
            flux=flux,
        )

    if flux_override not in (None, 0, 0.0):
        raise ArgumentError("open curves carry no flux term")
    if int(resolution) != resolution or resolution < 3:
        raise ArgumentError(f"grid resolution must be at least 3 cells, got {resolution}")
    basis = GridBasis(cells=int(resolution), half_window=geom.half_window)
    inverse_h2 = 1.0 / basis.h**2
    entries = (
        np.diag(2 * inverse_h2 - geom.kappa(basis.nodes) ** 2 / math.pi**2)
        - inverse_h2 * np.eye(basis.dimension, k=1)
        - inverse_h2 * np.eye(basis.dimension, k=-1)
    )
    logger.debug("open Schrodinger model: %d cells, h=%.6g", resolution, basis.h)
    return EffectiveOperator(
        model=EffectiveModel.SCHRODINGER_TAYLOR, matrix=HermitianMatrix(entries), basis=basis, flux=0.0
    )


def full_symbol_matrix(
    geom: CurveGeometry, epsilon: float, m: float, P: int, sign_choice: int = 1
) -> EffectiveOperator:
    if not isinstance(geom, ClosedCurve):
        raise ArgumentError("the Weyl-quantized symbol is built on closed curves only")
    if sign_choice not in (1, -1):
        raise ArgumentError(f"sign_choice must be +1 or -1, got {sign_choice}")
    ensure_valid(geom, epsilon)
    _check_window(geom, P)

    mu = epsilon * m
    basis = FourierBasis(P=int(P), length=geom.length)
    indices = basis.indices
    xi = epsilon * basis.momenta(math.pi / geom.length)
    nu_first = nu0(1, mu)

    # the overlap depends on p + p' only
    sums = indices[:, None] + indices[None, :]
    xi_mid = epsilon * (math.pi * sums / geom.length + math.pi / geom.length)
    overlaps = {total: momentum_m(epsilon * (math.pi * total + math.pi) / geom.length, mu) for total in np.unique(sums)}
    momentum = np.vectorize(overlaps.__getitem__, otypes=[float])(sums)

    kappa_hat = toeplitz(geom.fourier_coefficients(), indices)
    entries = epsilon * kappa_hat * xi_mid * (sign_choice * momentum)
    entries[np.diag_indices_from(entries)] += np.hypot(xi, nu_first)
    logger.debug("full symbol: eps=%g, m=%g, P=%d, sign=%+d", epsilon, m, P, sign_choice)
    return EffectiveOperator(
        model=EffectiveModel.FULL_SYMBOL_WEYL,
        matrix=HermitianMatrix(entries, symmetrize=True),
        basis=basis,
        flux=math.pi / geom.length,
        epsilon=epsilon,
        m=m,
        sign_choice=sign_choice,
    )


def effective_eigs(op: EffectiveOperator, count: int) -> np.ndarray:
    if int(count) != count or count < 1 or count > op.dimension:
        raise ArgumentError(f"count must lie in [1, {op.dimension}], got {count}")
    return hermitian_eigenvalues(op.matrix)[: int(count)]


def effective_symbol(kappa: float, xi: float, epsilon: float, m: float) -> float:
    """n_eff(s, xi) at a point where the curvature equals kappa."""
    mu = epsilon * m
    return nu(1, xi, mu) + epsilon * kappa * xi * momentum_m(xi, mu)


def gauge_phase(geom: ClosedCurve) -> np.ndarray:
    """K_1(s) = int_0^s (kappa/pi - 2/ell) on the curve grid, periodic because the total curvature is 2 pi."""
    if not isinstance(geom, ClosedCurve):
        raise ArgumentError("the gauge phase is defined on closed curves")
    ensure_valid(geom)
    coefficients = geom.fourier_coefficients(geom.kappa_samples / math.pi - 2 / geom.length)
    frequencies = 2j * math.pi * np.fft.fftfreq(geom.ns, d=1.0 / geom.ns) / geom.length
    antiderivative = np.zeros_like(coefficients)
    nonzero = frequencies != 0
    antiderivative[nonzero] = coefficients[nonzero] / frequencies[nonzero]
    phase = np.real(fft_inverse(antiderivative))
    return phase - phase[0]


def _line_negative_count(geom: OpenCurve, cells: int) -> int:
    """Negative eigenvalues of the difference operator on the whole line.

    Counts the sign changes of the zero-energy solution that is constant to the
    left of the window, plus one if its linear continuation to the right of the
    window crosses zero.
    """
    if int(cells) != cells or cells < 3:
        raise ArgumentError(f"grid resolution must be at least 3 cells, got {cells}")
    h = geom.period / cells
    nodes = -geom.half_window + h * np.arange(cells)
    factors = 2 + h * h * (-geom.kappa(nodes) ** 2 / math.pi**2)

    previous, current = 1.0, 1.0
    last_sign, changes = 1.0, 0
    for factor in factors:
        previous, current = current, factor * current - previous
        if current != 0.0:
            sign = math.copysign(1.0, current)
            if sign != last_sign:
                changes += 1
            last_sign = sign
    if current * (current - previous) < 0:
        changes += 1
    return changes


def count_negative(geom: CurveGeometry, resolution_schedule: Sequence[int]) -> int:
    """Number of negative eigenvalues of the Schrodinger model, stable under refinement."""
    schedule = list(resolution_schedule)
    if len(schedule) < 2:
        raise ArgumentError("count_negative needs at least two resolutions to check stability")
    ensure_valid(geom)

    counts = []
    for resolution in schedule:
        if isinstance(geom, ClosedCurve):
            values = hermitian_eigenvalues(schrodinger_matrix(geom, resolution).matrix)
            counts.append(int(np.sum(values < 0)))
        else:
            counts.append(_line_negative_count(geom, resolution))
    logger.debug("negative counts %s for resolutions %s", counts, schedule)
    if counts[-1] != counts[-2]:
        raise ResolutionError(
            f"negative eigenvalue count changed from {counts[-2]} to {counts[-1]} between resolutions "
            f"{schedule[-2]} and {schedule[-1]}; refine further"
        )
    return counts[-1]

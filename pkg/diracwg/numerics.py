"""Numerical kernels shared by the rest of the package.

Thin, validated wrappers around numpy/scipy: bracketed root finding (Brent),
Gauss-Legendre rules, the normalized discrete Fourier transform and the dense
Hermitian eigensolver (LAPACK Householder tridiagonalization).
"""
import logging
import math
from dataclasses import InitVar, dataclass
from functools import lru_cache
from typing import Callable, Optional, Tuple, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import eigh
from scipy.optimize import brentq

from diracwg.config import get_settings
from diracwg.errors import ArgumentError, BracketError, ConvergenceError, EvaluationError, NotHermitianError

logger = logging.getLogger(__name__)

_MACHINE_RTOL = 4 * np.finfo(float).eps


def _finite_value(f: Callable[[float], float], x: float) -> float:
    value = float(f(x))
    if not math.isfinite(value):
        raise EvaluationError(f"non-finite function value {value!r} at x={x:.17g}")
    return value


def find_root_bracketed(
    f: Callable[[float], float], a: float, b: float, tol: Optional[float] = None
) -> float:
    """Root of f inside [a, b] given a sign change at the ends."""
    tol = get_settings().root_tol if tol is None else tol
    if not tol > 0:
        raise ArgumentError(f"tolerance must be positive, got {tol}")
    a, b = (float(a), float(b)) if a <= b else (float(b), float(a))

    fa = _finite_value(f, a)
    fb = _finite_value(f, b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0) == (fb > 0):
        raise BracketError("no sign change on bracket", {"a": a, "b": b, "f(a)": fa, "f(b)": fb})

    try:
        root = brentq(lambda x: _finite_value(f, x), a, b, xtol=tol, rtol=_MACHINE_RTOL, maxiter=500)
    except RuntimeError as exc:
        raise ConvergenceError(f"Brent iteration did not converge on [{a:.17g}, {b:.17g}]") from exc
    logger.debug("root %.17g on [%.6g, %.6g]", root, a, b)
    return float(root)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.nodes)

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> Union[float, np.ndarray]:
        """Integral over [-1, 1] of a vectorized callable."""
        return self.apply(f(self.nodes), axis=0)

    def apply(self, values: np.ndarray, axis: int = -1) -> np.ndarray:
        """Weighted sum of node values along one axis."""
        return np.tensordot(np.moveaxis(np.asarray(values), axis, -1), self.weights, axes=([-1], [0]))


@lru_cache(maxsize=32)
def gauss_legendre(n: int) -> QuadratureRule:
    if n < 1:
        raise ArgumentError(f"Gauss-Legendre rule needs at least one node, got {n}")
    nodes, weights = leggauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes=nodes, weights=weights)


def fft_forward(samples) -> np.ndarray:
    """Coefficient r = (1/N) sum_m samples[m] exp(-2 pi i r m / N)."""
    values = np.asarray(samples, dtype=complex)
    if values.ndim == 0 or values.shape[0] == 0:
        raise ArgumentError("fft_forward needs at least one sample")
    return np.fft.fft(values, axis=0) / values.shape[0]


def fft_inverse(coefficients) -> np.ndarray:
    values = np.asarray(coefficients, dtype=complex)
    if values.ndim == 0 or values.shape[0] == 0:
        raise ArgumentError("fft_inverse needs at least one coefficient")
    return np.fft.ifft(values, axis=0) * values.shape[0]


def hermiticity_residual(entries: np.ndarray) -> float:
    """max |A - A^H| relative to max |A|."""
    scale = float(np.max(np.abs(entries))) if entries.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(entries - entries.conj().T))) / scale


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """Immutable, validated Hermitian matrix.

    ``symmetrize`` replaces the entries by (A + A^H)/2 once the asymmetry has been
    checked against ``rtol``.
    """

    entries: np.ndarray
    rtol: InitVar[Optional[float]] = None
    symmetrize: InitVar[bool] = False

    def __post_init__(self, rtol: Optional[float], symmetrize: bool) -> None:
        entries = np.array(self.entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] == 0:
            raise ArgumentError(f"expected a non-empty square matrix, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise ArgumentError("matrix has non-finite entries")
        rtol = get_settings().hermitian_rtol if rtol is None else rtol
        residual = hermiticity_residual(entries)
        if residual > rtol:
            raise NotHermitianError(f"relative Hermiticity residual {residual:.3e} exceeds {rtol:.1e}")
        if symmetrize:
            entries = 0.5 * (entries + entries.conj().T)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.entries, 2))


def hermitian_eigenvalues(
    H: HermitianMatrix, want_vectors: bool = False
) -> Union[np.ndarray, Tuple[np.ndarray, np.ndarray]]:
    """Ascending eigenvalues, plus orthonormal eigenvectors as columns when requested."""
    if not isinstance(H, HermitianMatrix):
        H = HermitianMatrix(H)
    logger.debug("dense eigensolve, dimension %d", H.dimension)
    if want_vectors:
        values, vectors = eigh(H.entries, check_finite=False)
        return values, vectors
    return eigh(H.entries, eigvals_only=True, check_finite=False)

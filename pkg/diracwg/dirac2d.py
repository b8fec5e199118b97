"""Spectral Galerkin discretization of the two-dimensional Dirac operator.

The operator on the straightened strip (s, t) in curve x (-1, 1) is

    eps sigma_1/2 [g^-1 (D_s + pi/ell) + (D_s + pi/ell) g^-1] + sigma_2 D_t + eps m sigma_3,

with g = 1 - eps t kappa(s) and the infinite-mass condition psi_2(s, +-1) = -+psi_1(s, +-1).
It is discretized in the basis exp(2 pi i p s/ell)/sqrt(ell) phi_{n,sigma}(t), where
phi_{n,sigma} are the transverse eigenmodes, so the boundary condition holds exactly.
Open curves are periodized on their window [-L, L].
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from diracwg.config import get_settings
from diracwg.effective import (
    DEFAULT_FLUX,
    EFFECTIVE_WINDOW,
    FLUX_CANDIDATES,
    effective_eigs,
    flux_value,
    max_fourier_window,
    schrodinger_matrix,
)
from diracwg.errors import ArgumentError, AssemblyError, TruncationError
from diracwg.geometry import ClosedCurve, CurveGeometry, ensure_valid
from diracwg.numerics import (
    HermitianMatrix,
    fft_forward,
    gauss_legendre,
    hermitian_eigenvalues,
    hermiticity_residual,
)
from diracwg.transverse import mode, nu0

logger = logging.getLogger(__name__)

# the two flux values compared against the 2D spectrum of a closed curve
ARBITRATED_FLUXES = ("pi+2", "2-pi")
OPEN_GRID_CELLS = 2048
GRAM_TOLERANCE = 1e-10
SYMMETRY_TOLERANCE = 1e-10
TIE_MARGIN = 1e-9


class ModeIndex(NamedTuple):
    p: int
    n: int
    sigma: int


def transverse_labels(Nt: int) -> List[Tuple[int, int]]:
    """(n, sigma) in row order: n = 1..Nt, sigma = +1 before -1."""
    return [(n, sigma) for n in range(1, Nt + 1) for sigma in (1, -1)]


def transverse_samples(Nt: int, mu: float, nodes: np.ndarray) -> np.ndarray:
    """Array phi[a, q, c] of transverse mode a at quadrature node q, component c."""
    return np.stack([mode(n, sigma, mu)(nodes) for n, sigma in transverse_labels(Nt)])


def basis_gram(Nt: int, mu: float, Nq_t: Optional[int] = None) -> np.ndarray:
    """Gram matrix of the 2*Nt signed transverse modes under Gauss-Legendre quadrature."""
    rule = gauss_legendre(Nq_t or get_settings().quadrature_nodes)
    phi = transverse_samples(Nt, mu, rule.nodes)
    return np.einsum("aqc,bqc,q->ab", phi, phi, rule.weights)


@dataclass(frozen=True, eq=False)
class DiracMatrix:
    matrix: HermitianMatrix
    index: Tuple[ModeIndex, ...]
    epsilon: float
    m: float
    geometry: CurveGeometry
    P: int
    Nt: int
    Nq_t: int
    Ns: int
    period: float
    omegas: np.ndarray
    transverse_diagonal: np.ndarray
    hermiticity_residual: float

    @property
    def mu(self) -> float:
        return self.epsilon * self.m

    @property
    def threshold(self) -> float:
        """nu_1(0, eps m): bottom of the essential spectrum of the straight waveguide."""
        return nu0(1, self.mu)

    @property
    def dimension(self) -> int:
        return self.matrix.dimension

    def row_of(self, p: int, n: int, sigma: int) -> int:
        return self.index.index(ModeIndex(p, n, sigma))

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return hermitian_eigenvalues(self.matrix)


def assemble(
    geom: CurveGeometry, epsilon: float, m: float, P: int = 24, Nt: int = 8, Nq_t: Optional[int] = None
) -> DiracMatrix:
    ensure_valid(geom, epsilon)
    if int(P) != P or P < 0 or P > max_fourier_window(geom):
        raise ArgumentError(f"Fourier window P must lie in [0, {max_fourier_window(geom)}], got {P}")
    if int(Nt) != Nt or Nt < 1:
        raise ArgumentError(f"transverse truncation Nt must be a positive integer, got {Nt}")
    settings = get_settings()
    Nq_t = Nq_t or settings.quadrature_nodes
    mu = epsilon * m

    rule = gauss_legendre(Nq_t)
    labels = transverse_labels(Nt)
    phi = transverse_samples(Nt, mu, rule.nodes)

    gram = np.einsum("aqc,bqc,q->ab", phi, phi, rule.weights)
    gram_defect = float(np.max(np.abs(gram - np.eye(len(labels)))))
    if gram_defect > GRAM_TOLERANCE:
        raise AssemblyError(
            f"transverse basis is not orthonormal under {Nq_t}-point quadrature "
            f"(defect {gram_defect:.2e}); raise Nq_t"
        )

    # A(s)[a, b] = int phi_a . sigma_1 phi_b / (1 - eps t kappa(s)) dt
    pairing = np.einsum("aqc,bqc->abq", phi, phi[..., ::-1])
    weights = rule.weights[None, :] / (1.0 - epsilon * np.outer(geom.kappa_samples, rule.nodes))
    coupling = np.einsum("sq,abq->sab", weights, pairing)
    asymmetry = float(np.max(np.abs(coupling - coupling.transpose(0, 2, 1))))
    if asymmetry > SYMMETRY_TOLERANCE:
        raise AssemblyError(f"transverse coupling A(s) is not symmetric (defect {asymmetry:.2e})")
    coefficients = fft_forward(coupling)

    window = np.arange(-P - 1, P + 1)
    period = geom.period
    omegas = (2 * math.pi * window + math.pi) / period
    differences = (window[:, None] - window[None, :]) % geom.ns
    blocks = 0.5 * epsilon * (omegas[:, None] + omegas[None, :])[:, :, None, None] * coefficients[differences]

    transverse_diagonal = np.array([sigma * mode(n, sigma, mu).nu for n, sigma in labels])
    size = window.size * len(labels)
    entries = blocks.transpose(0, 2, 1, 3).reshape(size, size)
    entries[np.diag_indices(size)] += np.tile(transverse_diagonal, window.size)

    raw_residual = hermiticity_residual(entries)
    matrix = HermitianMatrix(entries, rtol=settings.assembly_rtol, symmetrize=True)
    index = tuple(ModeIndex(int(p), n, sigma) for p in window for n, sigma in labels)
    logger.debug(
        "assembled %s: eps=%g m=%g P=%d Nt=%d Nq_t=%d, dimension %d",
        getattr(geom, "name", "curve"), epsilon, m, P, Nt, Nq_t, size,
    )
    return DiracMatrix(
        matrix=matrix,
        index=index,
        epsilon=epsilon,
        m=m,
        geometry=geom,
        P=int(P),
        Nt=int(Nt),
        Nq_t=int(Nq_t),
        Ns=geom.ns,
        period=period,
        omegas=omegas,
        transverse_diagonal=transverse_diagonal,
        hermiticity_residual=raw_residual,
    )


def discrete_spectrum(D: DiracMatrix, guard: Optional[float] = None) -> np.ndarray:
    """Eigenvalues strictly inside the guarded gap (-nu_1 (1 - guard), nu_1 (1 - guard)), ascending."""
    guard = get_settings().gap_guard if guard is None else guard
    bound = D.threshold * (1.0 - guard)
    values = D.eigenvalues
    return values[np.abs(values) < bound]


def symmetry_defect(values: np.ndarray) -> float:
    """Largest distance between an eigenvalue and the negative of its mirror partner."""
    ordered = np.sort(values)
    return float(np.max(np.abs(ordered + ordered[::-1]))) if ordered.size else 0.0


# ---------------------------------------------------------------------------
# asymptotic comparison


class SpectrumReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    geometry: str
    epsilon: float
    m: float
    threshold: float
    gap_eigenvalues: List[float]
    computed: List[float]
    effective: Dict[str, List[float]]
    predicted: Dict[str, List[float]]
    residuals: Dict[str, List[float]]
    winning_flux: Optional[str] = None
    converged: Optional[List[bool]] = None
    symmetry_defect: float
    hermiticity_residual: float
    truncation_shift: Optional[float] = None
    periodization_length: Optional[float] = None
    P: int
    Nt: int
    Nq_t: int
    note: str


_CLOSED_NOTE = (
    "closed curve: the 2D spectrum is purely discrete; gap eigenvalues are the ones below the "
    "essential threshold nu_1(0, eps m) of the straight waveguide"
)
_OPEN_NOTE = (
    "open curve periodized on [-L, L]; the exponentially small periodization error is not bounded, "
    "only the periodization length is reported"
)


def _effective_spectra(geom: CurveGeometry, count: int) -> Dict[str, np.ndarray]:
    if isinstance(geom, ClosedCurve):
        window = min(EFFECTIVE_WINDOW, max_fourier_window(geom))
        return {
            name: effective_eigs(schrodinger_matrix(geom, window, flux_value(name, geom.length)), count)
            for name in ARBITRATED_FLUXES
        }
    return {"line": effective_eigs(schrodinger_matrix(geom, OPEN_GRID_CELLS), count)}


def _tracked_eigenvalues(D: DiracMatrix, count: int) -> np.ndarray:
    """The count lowest positive eigenvalues; for open curves only those inside the gap."""
    if isinstance(D.geometry, ClosedCurve):
        values = D.eigenvalues
    else:
        values = discrete_spectrum(D)
    return values[values > 0][:count]


def _truncation_shift(D: DiracMatrix, tracked: np.ndarray, count: int) -> float:
    settings = get_settings()
    factor = settings.refinement_factor
    refined_P = math.ceil(factor * D.P)
    limit = max_fourier_window(D.geometry)
    if refined_P > limit:
        logger.warning("refined Fourier window %d clipped to the sampling limit %d", refined_P, limit)
        refined_P = limit
    refined_Nt = math.ceil(factor * D.Nt)
    refined = assemble(D.geometry, D.epsilon, D.m, P=refined_P, Nt=refined_Nt, Nq_t=D.Nq_t)
    refined_tracked = _tracked_eigenvalues(refined, count)
    common = min(len(tracked), len(refined_tracked))
    shift = float(np.max(np.abs(tracked[:common] - refined_tracked[:common]))) if common else 0.0
    logger.debug("refinement P %d->%d, Nt %d->%d moved tracked eigenvalues by %.3e", D.P, refined_P, D.Nt, refined_Nt, shift)
    if shift > settings.truncation_tol:
        raise TruncationError(
            f"eigenvalues moved by {shift:.3e} when refining P {D.P}->{refined_P} and Nt {D.Nt}->{refined_Nt} "
            f"(tolerance {settings.truncation_tol:.1e}); enlarge the truncation"
        )
    return shift


def _report_at(
    geom: CurveGeometry,
    m: float,
    epsilon: float,
    jmax: int,
    effective: Dict[str, np.ndarray],
    P: int,
    Nt: int,
    Nq_t: Optional[int],
    check_truncation: bool,
) -> SpectrumReport:
    D = assemble(geom, epsilon, m, P=P, Nt=Nt, Nq_t=Nq_t)
    tracked = _tracked_eigenvalues(D, jmax)
    gap = discrete_spectrum(D)
    shift = _truncation_shift(D, tracked, jmax) if check_truncation else None

    threshold = D.threshold
    predicted, residuals = {}, {}
    for name, values in effective.items():
        expected = threshold + (2 * epsilon**2 / math.pi) * values[: len(tracked)]
        predicted[name] = expected.tolist()
        residuals[name] = ((tracked - expected) / epsilon**2).tolist()

    logger.info(
        "eps=%g: %d gap eigenvalues, lowest positive %s",
        epsilon, int(np.sum(gap > 0)), ", ".join(f"{value:.12g}" for value in tracked),
    )
    closed = isinstance(geom, ClosedCurve)
    return SpectrumReport(
        geometry=getattr(geom, "name", "curve"),
        epsilon=epsilon,
        m=m,
        threshold=threshold,
        gap_eigenvalues=gap[gap > 0].tolist(),
        computed=tracked.tolist(),
        effective={name: values.tolist() for name, values in effective.items()},
        predicted=predicted,
        residuals=residuals,
        symmetry_defect=symmetry_defect(D.eigenvalues),
        hermiticity_residual=D.hermiticity_residual,
        truncation_shift=shift,
        periodization_length=None if closed else D.period,
        P=D.P,
        Nt=D.Nt,
        Nq_t=D.Nq_t,
        note=_CLOSED_NOTE if closed else _OPEN_NOTE,
    )


def winning_flux(report: SpectrumReport) -> Optional[str]:
    """Flux with the smallest largest residual; ties go to the default."""
    if not all(name in report.residuals for name in ARBITRATED_FLUXES):
        return None
    scores = {name: max((abs(r) for r in report.residuals[name]), default=0.0) for name in ARBITRATED_FLUXES}
    winner = DEFAULT_FLUX
    for name, score in scores.items():
        if score < scores[winner] - TIE_MARGIN:
            winner = name
    return winner


def _residual_decrease(reports: Sequence[SpectrumReport], flux: str) -> List[bool]:
    jmax = min(len(report.residuals[flux]) for report in reports)
    flags = []
    for j in range(jmax):
        magnitudes = [abs(report.residuals[flux][j]) for report in reports]
        flags.append(all(later < earlier for earlier, later in zip(magnitudes, magnitudes[1:])))
    return flags


def asymptotic_report(
    geom: CurveGeometry,
    m: float,
    epsilons: Sequence[float],
    jmax: int,
    P: int = 24,
    Nt: int = 8,
    Nq_t: Optional[int] = None,
    workers: Optional[int] = None,
    check_truncation: bool = True,
) -> List[SpectrumReport]:
    """Compare the lowest positive 2D eigenvalues with nu_1(0, eps m) + (2 eps^2/pi) lambda_j, one report per eps."""
    epsilons = [float(eps) for eps in epsilons]
    if not epsilons:
        raise ArgumentError("need at least one epsilon")
    if any(later >= earlier for earlier, later in zip(epsilons, epsilons[1:])):
        raise ArgumentError(f"epsilons must be strictly descending, got {epsilons}")
    for epsilon in epsilons:
        ensure_valid(geom, epsilon)
    if int(jmax) != jmax or jmax < 1:
        raise ArgumentError(f"jmax must be a positive integer, got {jmax}")

    effective = _effective_spectra(geom, int(jmax))
    workers = workers or get_settings().workers
    logger.info("sweeping %d values of eps with %d worker(s)", len(epsilons), workers)

    def job(epsilon: float) -> SpectrumReport:
        return _report_at(geom, m, epsilon, int(jmax), effective, P, Nt, Nq_t, check_truncation)

    if workers > 1 and len(epsilons) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(job, epsilons))
    else:
        reports = [job(epsilon) for epsilon in epsilons]

    winner = winning_flux(reports[-1])
    flux = winner or next(iter(effective))
    converged = _residual_decrease(reports, flux) if len(reports) > 1 else None
    if winner is not None:
        logger.info("winning flux %s (candidates %s)", winner, ", ".join(FLUX_CANDIDATES))
    return [report.model_copy(update={"winning_flux": winner, "converged": converged}) for report in reports]

"""Spectral toolkit for the Dirac operator on thin curved waveguides."""
from diracwg.dirac2d import DiracMatrix, SpectrumReport, assemble, asymptotic_report, discrete_spectrum
from diracwg.effective import (
    EffectiveOperator,
    count_negative,
    effective_eigs,
    full_symbol_matrix,
    schrodinger_matrix,
)
from diracwg.errors import ArgumentError, DiracWGError, NumericsError
from diracwg.geometry import ClosedCurve, OpenCurve, bump_line, circle, ellipse, load_geometry, validate
from diracwg.series import series_k1, series_nu1
from diracwg.transverse import k_branch, k_tilde, mode, mode_xi, momentum_m, nu, nu0, threshold

__version__ = "0.1.0"

__all__ = [
    "ArgumentError",
    "ClosedCurve",
    "DiracMatrix",
    "DiracWGError",
    "EffectiveOperator",
    "NumericsError",
    "OpenCurve",
    "SpectrumReport",
    "assemble",
    "asymptotic_report",
    "bump_line",
    "circle",
    "count_negative",
    "discrete_spectrum",
    "effective_eigs",
    "ellipse",
    "full_symbol_matrix",
    "k_branch",
    "k_tilde",
    "load_geometry",
    "mode",
    "mode_xi",
    "momentum_m",
    "nu",
    "nu0",
    "schrodinger_matrix",
    "series_k1",
    "series_nu1",
    "threshold",
    "validate",
]

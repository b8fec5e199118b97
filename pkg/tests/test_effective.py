import math

import numpy as np
import pytest

from diracwg.effective import (
    FLUX_CANDIDATES,
    EffectiveModel,
    count_negative,
    effective_eigs,
    effective_symbol,
    flux_value,
    full_symbol_matrix,
    gauge_phase,
    max_fourier_window,
    schrodinger_matrix,
)
from diracwg.errors import ArgumentError, GeometryValidationError, ResolutionError
from diracwg.geometry import ClosedCurve, bump_line, circle, ellipse
from diracwg.numerics import HermitianMatrix, hermitian_eigenvalues
from diracwg.transverse import momentum_m, nu, nu0


def circle_spectrum(R, P):
    ell = 2 * math.pi * R
    n = np.arange(-P - 1, P + 1)
    return np.sort(((2 * math.pi * n + math.pi + 2) ** 2 - 4) / ell**2)


@pytest.fixture(scope="module")
def oval():
    return ellipse(1.5, 1.0)


@pytest.fixture(scope="module")
def deep_bump():
    return bump_line(2.0, 1.0, 30.0)


@pytest.mark.parametrize("R", [1.0, 1.3])
def test_circle_spectrum(R):
    op = schrodinger_matrix(circle(R, Ns=64), 10)
    assert op.model is EffectiveModel.SCHRODINGER_TAYLOR
    assert op.flux == pytest.approx((math.pi + 2) / (2 * math.pi * R))
    np.testing.assert_allclose(hermitian_eigenvalues(op.matrix), circle_spectrum(R, 10), atol=1e-10)


def test_constant_curvature_gives_diagonal_matrix():
    entries = schrodinger_matrix(circle(1.0, Ns=64), 6).matrix.entries
    off_diagonal = entries - np.diag(np.diag(entries))
    assert np.max(np.abs(off_diagonal)) < 1e-14


def test_flux_quantum_leaves_spectrum_invariant(oval):
    shifted = flux_value("pi+2", oval.length) - 2 * math.pi / oval.length
    assert shifted == pytest.approx(flux_value("2-pi", oval.length))
    default = effective_eigs(schrodinger_matrix(oval, 40), 5)
    moved = effective_eigs(schrodinger_matrix(oval, 40, flux_override=shifted), 5)
    np.testing.assert_allclose(moved, default, atol=1e-10)


def test_opposite_flux_has_the_same_spectrum(oval):
    # complex conjugation maps (D + a)^2 to (D - a)^2
    first = effective_eigs(schrodinger_matrix(oval, 40, flux_value("pi-2", oval.length)), 5)
    second = effective_eigs(schrodinger_matrix(oval, 40, flux_value("2-pi", oval.length)), 5)
    np.testing.assert_allclose(first, second, atol=1e-10)


def test_flux_candidates():
    assert set(FLUX_CANDIDATES) == {"pi+2", "2-pi", "pi-2"}
    with pytest.raises(ArgumentError):
        flux_value("pi", 1.0)


def test_window_is_limited_by_sampling():
    curve = circle(1.0, Ns=64)
    assert max_fourier_window(curve) == 15
    with pytest.raises(ArgumentError):
        schrodinger_matrix(curve, 16)


def test_unvalidated_geometry_is_rejected():
    broken = ClosedCurve(length=2 * math.pi, kappa_samples=np.full(64, 0.5))
    with pytest.raises(GeometryValidationError):
        schrodinger_matrix(broken, 4)


def test_flat_line():
    short = effective_eigs(schrodinger_matrix(bump_line(0.0, 1.0, 12.0), 400), 1)[0]
    long = effective_eigs(schrodinger_matrix(bump_line(0.0, 1.0, 48.0), 1600), 1)[0]
    assert 0 < long < short
    assert short == pytest.approx((math.pi / 24) ** 2, rel=1e-4)


def test_open_curves_carry_no_flux():
    with pytest.raises(ArgumentError):
        schrodinger_matrix(bump_line(0.5, 1.0, 12.0), 100, flux_override=0.3)
    assert schrodinger_matrix(bump_line(0.5, 1.0, 12.0), 100).flux == 0.0


def test_deep_bump_binds(deep_bump):
    assert effective_eigs(schrodinger_matrix(deep_bump, 1200), 1)[0] < 0


def test_open_grid_convergence_order(deep_bump):
    values = [effective_eigs(schrodinger_matrix(deep_bump, cells), 1)[0] for cells in (300, 600, 1200)]
    order = math.log2(abs(values[0] - values[1]) / abs(values[1] - values[2]))
    assert order >= 1.8


def test_effective_eigs_bounds():
    op = schrodinger_matrix(circle(1.0, Ns=64), 3)
    assert len(effective_eigs(op, op.dimension)) == 8
    with pytest.raises(ArgumentError):
        effective_eigs(op, 0)
    with pytest.raises(ArgumentError):
        effective_eigs(op, op.dimension + 1)


def test_count_negative():
    assert count_negative(circle(1.0, Ns=64), [8, 12]) == 1
    assert count_negative(bump_line(0.0, 1.0, 12.0), [512, 1024]) == 0
    assert count_negative(bump_line(0.5, 1.0, 12.0), [1024, 2048]) == 1


def test_count_negative_needs_two_resolutions():
    with pytest.raises(ArgumentError):
        count_negative(circle(1.0), [8])


def test_count_negative_detects_unresolved_counts():
    # a well this deep holds several bound states; four cells only see one
    curve = bump_line(20.0, 1.0, 8.0, Ns=64)
    assert count_negative(curve, [256, 512]) >= 2
    with pytest.raises(ResolutionError):
        count_negative(curve, [256, 4])


def test_full_symbol_on_a_circle_is_diagonal():
    epsilon, m, P = 0.1, 0.4, 6
    curve = circle(1.0, Ns=64)
    op = full_symbol_matrix(curve, epsilon, m, P)
    p = np.arange(-P - 1, P + 1)
    xi = epsilon * (2 * math.pi * p + math.pi) / curve.length
    expected = [nu(1, x, epsilon * m) + epsilon * x * momentum_m(x, epsilon * m) for x in xi]
    np.testing.assert_allclose(hermitian_eigenvalues(op.matrix), np.sort(expected), atol=1e-12)


def test_full_symbol_reduces_to_threshold_as_width_vanishes():
    op = full_symbol_matrix(circle(1.0, Ns=64), 1e-4, 0.0, 4)
    assert effective_eigs(op, 1)[0] == pytest.approx(math.pi / 4, abs=1e-6)


def test_full_symbol_sign_choice_does_not_change_spectrum(oval):
    plus = effective_eigs(full_symbol_matrix(oval, 0.1, 0.0, 16, sign_choice=1), 6)
    minus = effective_eigs(full_symbol_matrix(oval, 0.1, 0.0, 16, sign_choice=-1), 6)
    np.testing.assert_allclose(plus, minus, atol=1e-12)


def test_full_symbol_argument_checks(oval):
    with pytest.raises(ArgumentError):
        full_symbol_matrix(bump_line(0.5, 1.0, 12.0), 0.1, 0.0, 8)
    with pytest.raises(ArgumentError):
        full_symbol_matrix(oval, 0.1, 0.0, 8, sign_choice=0)
    with pytest.raises(GeometryValidationError):
        full_symbol_matrix(oval, 0.9, 0.0, 8)


def test_full_symbol_agrees_with_taylor_model_at_second_order(oval):
    taylor = effective_eigs(schrodinger_matrix(oval, 24), 1)[0]
    remainders = []
    for epsilon in (0.1, 0.05):
        full = effective_eigs(full_symbol_matrix(oval, epsilon, 0.0, 24), 1)[0]
        remainders.append(abs(full - nu0(1, 0.0) - 2 * epsilon**2 / math.pi * taylor) / epsilon**2)
    assert remainders[1] < remainders[0]


def test_effective_symbol():
    assert effective_symbol(0.0, 0.0, 0.1, 0.0) == pytest.approx(math.pi / 4)
    value = effective_symbol(1.0, 0.5, 0.1, 0.0)
    assert value == pytest.approx(nu(1, 0.5, 0.0) + 0.1 * 0.5 * momentum_m(0.5, 0.0))


def test_gauge_phase_of_circle_vanishes():
    np.testing.assert_allclose(gauge_phase(circle(1.0, Ns=64)), 0.0, atol=1e-14)


def test_gauge_phase_integrates_curvature():
    ell, ns = 5.0, 128
    s = ell * np.arange(ns) / ns
    curve = ClosedCurve(length=ell, kappa_samples=2 * math.pi / ell + 0.3 * np.cos(2 * math.pi * s / ell))
    expected = 0.3 / math.pi * ell / (2 * math.pi) * np.sin(2 * math.pi * s / ell)
    np.testing.assert_allclose(gauge_phase(curve), expected, atol=1e-13)


def test_gauge_phase_needs_a_closed_curve():
    with pytest.raises(ArgumentError):
        gauge_phase(bump_line(0.5, 1.0, 12.0))


def test_effective_matrix_is_hermitian(oval):
    op = schrodinger_matrix(oval, 12)
    assert isinstance(op.matrix, HermitianMatrix)
    np.testing.assert_allclose(op.matrix.entries, op.matrix.entries.conj().T, atol=0)

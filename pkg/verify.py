import math
import sys
from pathlib import Path

# Add project root to path
sys.path.append(str(Path(__file__).parent))

import numpy as np

from diracwg.dirac2d import assemble, discrete_spectrum, symmetry_defect
from diracwg.effective import count_negative, effective_eigs, schrodinger_matrix
from diracwg.geometry import circle, load_geometry
from diracwg.series import series_nu1
from diracwg.transverse import mode, momentum_m


def test_transverse():
    print("Testing transverse modes...")
    ground = mode(1, 1, 0.0)
    assert abs(ground.k - math.pi / 4) < 1e-12
    assert np.max(np.abs(ground.residual(np.linspace(-1, 1, 21)))) < 1e-9
    print(f"  k_1(0) = {ground.k:.15f}")

    assert abs(momentum_m(0.0, 0.0) + 4 / math.pi**2) < 1e-10
    print(f"  M(0, 0) = {momentum_m(0.0, 0.0):.15f}")

    expansion = series_nu1(2)
    assert abs(expansion.coefficients[2] - (2 / math.pi - 16 / math.pi**3)) < 1e-12
    print(f"  nu_1 second order coefficient = {expansion.coefficients[2]:.6f}")
    print("Transverse checks passed!")


def test_effective():
    print("\nTesting effective operator...")
    curve = load_geometry(Path(__file__).parent / "geometries" / "circle1.json")
    lowest = effective_eigs(schrodinger_matrix(curve, 16), 1)[0]
    expected = ((2 - math.pi) ** 2 - 4) / (2 * math.pi) ** 2
    assert abs(lowest - expected) < 1e-10
    print(f"  lowest eigenvalue on the unit circle = {lowest:.12f}")

    assert count_negative(curve, [16, 24]) == 1
    print("  negative count N = 1")
    print("Effective operator checks passed!")


def test_dirac2d():
    print("\nTesting 2D assembly...")
    D = assemble(circle(1.0, Ns=64), 0.1, 0.0, P=4, Nt=4)
    assert D.hermiticity_residual <= 1e-12
    assert symmetry_defect(D.eigenvalues) <= 1e-8
    gap = discrete_spectrum(D)
    assert gap.size > 0 and np.all(np.abs(gap) < D.threshold)
    print(f"  dimension {D.dimension}, {gap.size} gap eigenvalues below {D.threshold:.6f}")
    print("2D assembly checks passed!")


if __name__ == "__main__":
    try:
        test_transverse()
        test_effective()
        test_dirac2d()
        print("\nAll systems go!")
    except Exception as e:
        print(f"\nVerification failed: {e}")
        import traceback

        traceback.print_exc()
        sys.exit(1)

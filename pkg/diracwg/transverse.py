"""The fibered one-dimensional Dirac operator on (-1, 1).

For a longitudinal momentum xi and rescaled mass mu the operator is
xi*sigma_1 + sigma_2*D_t + mu*sigma_3 with the infinite-mass boundary condition
psi_2(+-1) = -+psi_1(+-1).  Its eigenvalues come in pairs +-nu_j(xi, mu) with
nu_j(xi, mu)^2 = xi^2 + nu_j(0, mu)^2, and nu_j(0, mu) is fixed by the dispersion
relation mu = -k/tan(2k) (oscillatory branches) or mu = -k~/tanh(2k~)
(the hyperbolic first branch below mu = -1/2).

Every evaluator here is real valued and closed form; spinors are returned as
arrays of shape (..., 2).
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.special import bernoulli

from diracwg.config import get_settings
from diracwg.errors import ArgumentError, BranchDomainError, ConvergenceError
from diracwg.numerics import find_root_bracketed, gauss_legendre

logger = logging.getLogger(__name__)

DEGENERATE_MU = -0.5
_SERIES_CUTOFF = 0.5
_SERIES_TERMS = 12


class ModeKind(str, Enum):
    OSCILLATORY = "oscillatory"
    HYPERBOLIC = "hyperbolic"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class TransverseParams:
    mu: float
    xi: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mu) and math.isfinite(self.xi)):
            raise ArgumentError(f"transverse parameters must be finite, got mu={self.mu}, xi={self.xi}")


# ---------------------------------------------------------------------------
# small-argument kernels


@lru_cache(maxsize=1)
def _cot_series() -> np.ndarray:
    """Coefficients a_j with x*cot(x) = sum_j a_j x^(2j)."""
    b = bernoulli(2 * _SERIES_TERMS)
    return np.array([(-1) ** j * 4**j * b[2 * j] / math.factorial(2 * j) for j in range(_SERIES_TERMS + 1)])


def _even_series(coefficients: np.ndarray, x: float) -> float:
    return float(np.polynomial.polynomial.polyval(x * x, coefficients))


def _one_minus_x_cot_x(x: float) -> float:
    if abs(x) < _SERIES_CUTOFF:
        return -_even_series(_cot_series()[1:], x) * x * x
    return 1.0 - x / math.tan(x)


def _x_coth_x_minus_one(x: float) -> float:
    # x*coth(x) has the same Bernoulli coefficients without the alternating sign
    if abs(x) < _SERIES_CUTOFF:
        coefficients = np.abs(_cot_series()[1:]) * np.array([(-1) ** j for j in range(_SERIES_TERMS)])
        return _even_series(coefficients, x) * x * x
    return x / math.tanh(x) - 1.0


def _odd_remainder(x: float, alternating: bool) -> float:
    """x - sin(x) (alternating) or sinh(x) - x, summed by series for |x| < 1."""
    if abs(x) >= 1.0:
        return x - math.sin(x) if alternating else math.sinh(x) - x
    total, term, j = 0.0, x, 1
    while True:
        term *= x * x / ((2 * j) * (2 * j + 1))
        contribution = term if (not alternating or j % 2 == 1) else -term
        total += contribution
        if abs(term) <= 1e-18 * abs(total):
            return total
        j += 1


def _c_squared_oscillatory(k: float) -> float:
    if k < get_settings().small_k:
        return 0.375 * (1.0 - 8.0 * k * k / 15.0)
    return k * math.sin(2 * k) ** 2 / _odd_remainder(4 * k, alternating=True)


def _c_squared_hyperbolic(kt: float) -> float:
    if kt < get_settings().small_k:
        return 0.375 * (1.0 + 8.0 * kt * kt / 15.0)
    if kt < 5.0:
        return kt * math.sinh(2 * kt) ** 2 / _odd_remainder(4 * kt, alternating=False)
    # sinh^2(2x)/(sinh 4x - 4x) = tanh(2x) / (2 (1 - 4x/sinh 4x)), no overflow
    x = 4 * kt
    ratio = 2 * x * math.exp(-x) / -math.expm1(-2 * x)
    return kt * math.tanh(2 * kt) / (2.0 * (1.0 - ratio))


def _nu_hyperbolic(kt: float) -> float:
    """kt / sinh(2 kt), the first eigenvalue below mu = -1/2."""
    if kt == 0.0:
        return 0.5
    x = 2 * kt
    return x * math.exp(-x) / -math.expm1(-2 * x)


# ---------------------------------------------------------------------------
# dispersion branches


def _check_branch_index(n: int) -> None:
    if int(n) != n or n < 1:
        raise ArgumentError(f"branch index must be a positive integer, got {n}")


def _check_mu(mu: float) -> None:
    if not math.isfinite(mu):
        raise ArgumentError(f"mass parameter must be finite, got {mu}")


def is_degenerate(mu: float) -> bool:
    return abs(mu - DEGENERATE_MU) <= get_settings().degenerate_mu_tol


def k_branch(n: int, mu: float) -> float:
    """n-th positive root of mu = -k/tan(2k), located in ((n-1)pi/2, n pi/2)."""
    _check_branch_index(n)
    _check_mu(mu)
    settings = get_settings()
    if n == 1:
        if is_degenerate(mu) and mu > DEGENERATE_MU:
            return 0.0
        if mu <= DEGENERATE_MU:
            raise BranchDomainError(f"oscillatory first branch needs mu > -1/2, got {mu}; use k_tilde")

    # k/tan(2k) blows up where tan(2k) vanishes, at the multiples of pi/2
    delta = settings.pole_offset
    lower = (n - 1) * math.pi / 2 + delta
    upper = n * math.pi / 2 - delta
    return find_root_bracketed(lambda k: mu + k / math.tan(2 * k), lower, upper)


def k_tilde(mu: float) -> float:
    """Nonnegative root of mu = -k~/tanh(2k~) for mu <= -1/2."""
    _check_mu(mu)
    if is_degenerate(mu):
        return 0.0
    if mu > DEGENERATE_MU:
        raise BranchDomainError(f"hyperbolic branch needs mu <= -1/2, got {mu}")
    # k~/tanh(2k~) >= k~, so |mu| + 1 has the opposite sign to the small-k end
    return find_root_bracketed(lambda kt: mu + kt / math.tanh(2 * kt), get_settings().pole_offset, abs(mu) + 1.0)


def nu0(j: int, mu: float) -> float:
    _check_branch_index(j)
    _check_mu(mu)
    if j == 1 and mu <= DEGENERATE_MU + get_settings().degenerate_mu_tol:
        if is_degenerate(mu):
            return 0.5
        return _nu_hyperbolic(k_tilde(mu))
    return math.hypot(mu, k_branch(j, mu))


def nu(j: int, xi: float, mu: float) -> float:
    if not math.isfinite(xi):
        raise ArgumentError(f"momentum must be finite, got {xi}")
    return math.hypot(xi, nu0(j, mu))


def dispersion_residual(kind: ModeKind, k: float, mu: float) -> float:
    if kind is ModeKind.OSCILLATORY:
        return abs(mu + k / math.tan(2 * k))
    if kind is ModeKind.HYPERBOLIC:
        return abs(mu + k / math.tanh(2 * k))
    return abs(mu - DEGENERATE_MU)


def threshold(epsilon: float, m: float) -> float:
    """Essential-spectrum threshold of the unscaled operator, nu_1(0, eps m)/eps."""
    if not epsilon > 0:
        raise ArgumentError(f"epsilon must be positive, got {epsilon}")
    return nu0(1, epsilon * m) / epsilon


def threshold_expansion(epsilon: float, m: float) -> float:
    """Small-epsilon expansion of threshold() through order epsilon."""
    if not epsilon > 0:
        raise ArgumentError(f"epsilon must be positive, got {epsilon}")
    pi = math.pi
    return pi / (4 * epsilon) + 2 * m / pi + m * m * (2 / pi - 16 / pi**3) * epsilon


# ---------------------------------------------------------------------------
# eigenvectors


def _swap(spinor: np.ndarray) -> np.ndarray:
    """sigma_1 applied to an array of spinors."""
    return spinor[..., ::-1]


@dataclass(frozen=True)
class TransverseMode:
    """Normalized eigenvector of sigma_2 D_t + mu sigma_3 with eigenvalue sign*nu."""

    branch: int
    kind: ModeKind
    k: float
    nu: float
    sign: int
    c: float
    mu: float
    swapped: bool = False

    @property
    def eigenvalue(self) -> float:
        return self.sign * self.nu

    @property
    def evaluator(self):
        return self.__call__

    def _profiles(self, t: np.ndarray):
        """(a, b, a', b') with the spinor c*(a, -b) before any sigma_1 swap."""
        k = self.k
        if self.kind is ModeKind.DEGENERATE:
            return np.ones_like(t), t, np.zeros_like(t), np.ones_like(t)
        if self.kind is ModeKind.OSCILLATORY:
            cos_k, sin_k = math.cos(k), math.sin(k)
            return (
                np.cos(k * t) / cos_k,
                np.sin(k * t) / sin_k,
                -k * np.sin(k * t) / cos_k,
                k * np.cos(k * t) / sin_k,
            )
        # hyperbolic, written with decaying exponentials so that large k~ cannot overflow
        abs_t = np.abs(t)
        envelope = np.exp(k * (abs_t - 1.0))
        tail = np.exp(-2 * k * abs_t)
        grow = -np.expm1(-2 * k * abs_t)
        cosh_den = 1.0 + math.exp(-2 * k)
        sinh_den = -math.expm1(-2 * k)
        return (
            envelope * (1.0 + tail) / cosh_den,
            np.sign(t) * envelope * grow / sinh_den,
            k * np.sign(t) * envelope * grow / cosh_den,
            k * envelope * (1.0 + tail) / sinh_den,
        )

    def _orient(self, spinor: np.ndarray) -> np.ndarray:
        return _swap(spinor) if self.swapped else spinor

    def __call__(self, t) -> np.ndarray:
        t_arr = np.asarray(t, dtype=float)
        a, b, _, _ = self._profiles(np.atleast_1d(t_arr))
        values = self._orient(self.c * np.stack([a, -b], axis=-1))
        return values[0] if t_arr.ndim == 0 else values

    def derivative(self, t) -> np.ndarray:
        t_arr = np.asarray(t, dtype=float)
        _, _, da, db = self._profiles(np.atleast_1d(t_arr))
        values = self._orient(self.c * np.stack([da, -db], axis=-1))
        return values[0] if t_arr.ndim == 0 else values

    def residual(self, t) -> np.ndarray:
        """(sigma_2 D_t + mu sigma_3 - sign*nu) applied to the mode."""
        return _dirac_residual(self(t), self.derivative(t), 0.0, self.mu, self.eigenvalue)


def _dirac_residual(phi: np.ndarray, dphi: np.ndarray, xi: float, mu: float, eigenvalue: float) -> np.ndarray:
    # sigma_2 D_t acts as (u, v) -> (-v', u')
    first = xi * phi[..., 1] + mu * phi[..., 0] - dphi[..., 1]
    second = xi * phi[..., 0] + dphi[..., 0] - mu * phi[..., 1]
    return np.stack([first, second], axis=-1) - eigenvalue * phi


@lru_cache(maxsize=512)
def mode(n: int, sigma: int, mu: float) -> TransverseMode:
    _check_branch_index(n)
    _check_mu(mu)
    if sigma not in (1, -1):
        raise ArgumentError(f"sign must be +1 or -1, got {sigma}")

    if n == 1 and is_degenerate(mu):
        kind, k, nu_value, c = ModeKind.DEGENERATE, 0.0, 0.5, math.sqrt(0.375)
        orientation = 1
    elif n == 1 and mu < DEGENERATE_MU:
        k = k_tilde(mu)
        kind, nu_value, c = ModeKind.HYPERBOLIC, _nu_hyperbolic(k), math.sqrt(_c_squared_hyperbolic(k))
        orientation = 1
    else:
        k = k_branch(n, mu)
        kind, nu_value, c = ModeKind.OSCILLATORY, math.hypot(mu, k), math.sqrt(_c_squared_oscillatory(k))
        # the unswapped spinor has eigenvalue k/sin(2k)
        orientation = 1 if math.sin(2 * k) > 0 else -1

    return TransverseMode(
        branch=n, kind=kind, k=k, nu=nu_value, sign=sigma, c=c, mu=mu, swapped=orientation * sigma < 0
    )


@dataclass(frozen=True)
class RotatedMode:
    """First-branch eigenvector of xi sigma_1 + sigma_2 D_t + mu sigma_3."""

    xi: float
    mu: float
    sign: int
    base: TransverseMode
    c_xi: float
    c1: float

    @property
    def eigenvalue(self) -> float:
        return self.sign * math.hypot(self.xi, self.base.nu)

    def _rotate(self, phi0: np.ndarray) -> np.ndarray:
        if self.sign > 0:
            return self.c_xi * (phi0 + self.c1 * _swap(phi0))
        return self.c_xi * (_swap(phi0) - self.c1 * phi0)

    def __call__(self, t) -> np.ndarray:
        return self._rotate(self.base(t))

    def derivative(self, t) -> np.ndarray:
        return self._rotate(self.base.derivative(t))

    def residual(self, t) -> np.ndarray:
        return _dirac_residual(self(t), self.derivative(t), self.xi, self.mu, self.eigenvalue)


def mode_xi(xi: float, mu: float, sigma: int = 1) -> RotatedMode:
    TransverseParams(mu=mu, xi=xi)
    if sigma not in (1, -1):
        raise ArgumentError(f"sign must be +1 or -1, got {sigma}")
    base = mode(1, 1, mu)
    root = math.hypot(xi, base.nu)
    return RotatedMode(
        xi=xi,
        mu=mu,
        sign=sigma,
        base=base,
        c_xi=math.sqrt((root + base.nu) / (2 * root)),
        c1=xi / (root + base.nu),
    )


# ---------------------------------------------------------------------------
# momentum overlap <phi, sigma_1 t phi>


@dataclass(frozen=True)
class MomentumOverlap:
    xi: float
    mu: float
    closed_form: float
    quadrature: float

    @property
    def value(self) -> float:
        return self.quadrature


def _unrotated_overlap_magnitude(base: TransverseMode) -> float:
    """|<phi_0, sigma_1 t phi_0>| = 2 c^2 (1 - 2k cot 2k) / (2k^2) and its analogues."""
    k = base.k
    if base.kind is ModeKind.DEGENERATE:
        return 0.5
    if base.kind is ModeKind.HYPERBOLIC:
        return 2 * _c_squared_hyperbolic(k) * _x_coth_x_minus_one(2 * k) / (2 * k * k)
    if 2 * k < _SERIES_CUTOFF:
        return 2 * _c_squared_oscillatory(k) * _one_minus_x_cot_x(2 * k) / (2 * k * k)
    # c^2 folded in to stay finite as sin(2k) -> 0
    s, co = math.sin(2 * k), math.cos(2 * k)
    return (s * s - 2 * k * s * co) / (k * _odd_remainder(4 * k, alternating=True))


def momentum_overlap(xi: float, mu: float, nodes: Optional[int] = None) -> MomentumOverlap:
    rotated = mode_xi(xi, mu, 1)
    closed = rotated.c_xi**2 * (1 + rotated.c1**2) * _unrotated_overlap_magnitude(rotated.base)

    rule = gauss_legendre(nodes or get_settings().quadrature_nodes)
    phi = rotated(rule.nodes)
    quadrature = float(rule.apply(2 * rule.nodes * phi[:, 0] * phi[:, 1]))
    return MomentumOverlap(xi=xi, mu=mu, closed_form=closed, quadrature=quadrature)


def momentum_m(xi: float, mu: float) -> float:
    """<phi_{xi,mu,1}, sigma_1 t phi_{xi,mu,1}> with the sign given by quadrature."""
    overlap = momentum_overlap(xi, mu)
    if abs(abs(overlap.quadrature) - abs(overlap.closed_form)) > 1e-10:
        raise ConvergenceError(
            f"momentum overlap mismatch at xi={xi}, mu={mu}: "
            f"closed form {overlap.closed_form:.17g}, quadrature {overlap.quadrature:.17g}"
        )
    return overlap.value

"""Power series of k_1(mu) and nu_1(0, mu) about mu = 0, in exact arithmetic.

k_1 solves dk/dmu = k / (mu + 2 mu^2 + 2 k^2) with k(0) = pi/4; substituting a
truncated series and matching powers of mu fixes one coefficient at a time.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np
import sympy as sp

from diracwg.errors import ArgumentError

MU = sp.Symbol("mu")


@dataclass(frozen=True)
class SeriesExpansion:
    name: str
    order: int
    coefficients: Tuple[float, ...]
    exact: Tuple[sp.Expr, ...]

    def __post_init__(self) -> None:
        if len(self.coefficients) != self.order + 1 or len(self.exact) != self.order + 1:
            raise ArgumentError(f"{self.name}: expected {self.order + 1} coefficients")

    def __call__(self, mu: float) -> float:
        return float(np.polynomial.polynomial.polyval(mu, self.coefficients))

    def exact_strings(self) -> Tuple[str, ...]:
        return tuple(sp.sstr(term) for term in self.exact)


def _check_order(order: int) -> None:
    if int(order) != order or order < 0:
        raise ArgumentError(f"series order must be a nonnegative integer, got {order}")


def _as_float(term: sp.Expr) -> float:
    return float(sp.N(term, 30))


@lru_cache(maxsize=16)
def _k1_terms(order: int) -> Tuple[sp.Expr, ...]:
    terms = [sp.pi / 4]
    unknown = sp.Symbol("a")
    for j in range(1, order + 1):
        k = sum(coefficient * MU**i for i, coefficient in enumerate(terms)) + unknown * MU**j
        ode = sp.expand(sp.diff(k, MU) * (MU + 2 * MU**2 + 2 * k**2) - k)
        # a_j enters the mu^(j-1) coefficient linearly, through j a_j pi^2/8
        (solution,) = sp.solve(ode.coeff(MU, j - 1), unknown)
        terms.append(sp.expand(solution))
    return tuple(terms)


@lru_cache(maxsize=16)
def _nu1_terms(order: int) -> Tuple[sp.Expr, ...]:
    k_terms = _k1_terms(order)
    k = sum(coefficient * MU**i for i, coefficient in enumerate(k_terms))
    target = sp.expand(MU**2 + k**2)
    terms = [k_terms[0]]
    for j in range(1, order + 1):
        convolution = sum(terms[i] * terms[j - i] for i in range(1, j))
        terms.append(sp.expand((target.coeff(MU, j) - convolution) / (2 * terms[0])))
    return tuple(terms)


def series_k1(order: int) -> SeriesExpansion:
    _check_order(order)
    exact = _k1_terms(order)
    return SeriesExpansion("k1", order, tuple(_as_float(term) for term in exact), exact)


def series_nu1(order: int) -> SeriesExpansion:
    _check_order(order)
    exact = _nu1_terms(order)
    return SeriesExpansion("nu1", order, tuple(_as_float(term) for term in exact), exact)

"""Pump-signal overlap integrals and the coupling ladder of a transverse family.

The overlap I_l is kept as an exact rational; floats are projections of it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .constants import EPSILON_0, HBAR
from .errors import ValidationError
from .modes import family_oams


def laguerre_coefficients(n: int, l: int) -> list[Fraction]:
    """Exact coefficients c_k of L_n^l(u) = sum_k c_k u^k."""
    return [
        Fraction((-1) ** k * math.comb(n + l, n - k), math.factorial(k))
        for k in range(n + 1)
    ]


def _check_member(f, l):
    if f < 0 or l < 0 or l > f or (f - l) % 2:
        raise ValidationError(f"l = {l} is not a member of family {f}")


@lru_cache(maxsize=None)
def _overlap_exact(f: int, l: int) -> Fraction:
    n = (f - l) // 2
    c = laguerre_coefficients(n, l)
    total = Fraction(0)
    # (sum c_i u^i)^2 u^l, integrated against e^{-2u}: int u^k e^{-2u} = k!/2^{k+1}
    for i, ci in enumerate(c):
        for j, cj in enumerate(c):
            k = i + j + l
            total += ci * cj * Fraction(math.factorial(k), 2 ** (k + 1))
    return Fraction(math.factorial(n), math.factorial(n + l)) * total


def _overlap_quadrature(f: int, l: int, nodes: int | None = None) -> float:
    n = (f - l) // 2
    nodes = max(f + 2, nodes or 0)
    v, wts = np.polynomial.laguerre.laggauss(nodes)
    u = 0.5 * v  # v = 2u turns e^{-2u} into the Gauss-Laguerre weight
    coeffs = [float(c) for c in laguerre_coefficients(n, l)]
    poly = np.polynomial.polynomial.polyval(u, coeffs)
    integral = 0.5 * np.sum(wts * u**l * poly**2)
    return math.factorial(n) / math.factorial(n + l) * float(integral)


def overlap_integral(f: int, l: int, method: str = "exact"):
    """Overlap I_l of the pump mode with the signal pair +-l of family ``f``.

    ``method="exact"`` returns a :class:`fractions.Fraction`;
    ``method="quadrature"`` returns a float from Gauss-Laguerre quadrature.
    """
    l = abs(l)
    _check_member(f, l)
    if method == "exact":
        return _overlap_exact(f, l)
    if method == "quadrature":
        return _overlap_quadrature(f, l)
    raise ValidationError(f"unknown method {method!r}")


@dataclass(frozen=True)
class CouplingLadder:
    family: int
    overlaps: dict = field(repr=False)
    kappas: dict

    @property
    def l0(self) -> int:
        return self.family % 2

    @property
    def oams(self) -> list[int]:
        return family_oams(self.family)

    def kappa(self, l: int) -> float:
        return float(self.kappas[abs(l)])

    def overlap(self, l: int) -> float:
        return float(self.overlaps[abs(l)])

    def empty_oams(self) -> list[int]:
        return [l for l in self.oams if l != self.l0]

    def rows(self):
        for l in self.oams:
            I, k = self.overlaps[l], self.kappas[l]
            yield {
                "family": self.family,
                "l": l,
                "I_l_num": I.numerator,
                "I_l_den": I.denominator,
                "kappa_num": k.numerator,
                "kappa_den": k.denominator,
                "kappa_float": float(k),
            }


@lru_cache(maxsize=None)
def kappa_ladder(f: int) -> CouplingLadder:
    """Coupling ratios kappa_l = I_l / I_{l0} for every member of family ``f``."""
    if f < 0:
        raise ValidationError(f"family must be >= 0, got {f}")
    oams = family_oams(f)
    overlaps = {l: _overlap_exact(f, l) for l in oams}
    ref = overlaps[f % 2]
    return CouplingLadder(f, overlaps, {l: overlaps[l] / ref for l in oams})


@dataclass(frozen=True)
class PhysicalCoupling:
    """Inputs of the absolute coupling rate chi_l (SI units).

    chi2 in m/V, lengths in m, omega0 (signal carrier) in rad/s.
    """

    chi2: float
    l_c: float
    w_p: float
    omega0: float
    n_c: float
    L_eff: float

    def __post_init__(self):
        for name in ("chi2", "l_c", "w_p", "omega0", "n_c", "L_eff"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")

    @property
    def F_s(self) -> float:
        """Single-photon field voltage of the signal (V/m)."""
        return math.sqrt(HBAR * self.omega0 / (EPSILON_0 * self.n_c * self.L_eff))

    @property
    def F_p(self) -> float:
        return math.sqrt(2.0) * self.F_s

    def prefactor(self) -> float:
        return (
            12.0 * self.chi2 * self.l_c / self.w_p
            * (self.omega0 / (self.n_c * self.L_eff)) ** 1.5
            * math.sqrt(HBAR / (math.pi * EPSILON_0))
        )


def coupling_constant(phys: PhysicalCoupling, f: int, l: int) -> float:
    """Nonlinear coupling rate chi_l in 1/s."""
    return phys.prefactor() * float(overlap_integral(f, l))


def dimensionless_g(chi_l0: float, gamma_p: float, gamma_s: float) -> float:
    if chi_l0 <= 0 or gamma_p <= 0 or gamma_s <= 0:
        raise ValidationError("rates must be positive")
    return chi_l0 / math.sqrt(gamma_p * gamma_s)

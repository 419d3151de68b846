"""Laguerre-Gauss cavity modes at the waist plane of a two-mirror resonator.

Modes are normalized over the transverse plane, so amplitudes carry units of
1/length. Only the waist plane (z = 0) is modelled.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .constants import C
from .errors import GeometryError, ValidationError


class RationalSpacingWarning(UserWarning):
    """Transverse mode spacing is (close to) a rational fraction of the FSR.

    Families belonging to different longitudinal orders may then coincide in
    frequency, breaking the single-family assumption.
    """


@dataclass(frozen=True, order=True)
class TransverseModeId:
    family: int
    oam: int

    def __post_init__(self):
        f, l = self.family, self.oam
        if f < 0:
            raise ValidationError(f"family must be >= 0, got {f}")
        if abs(l) > f or (f - abs(l)) % 2:
            raise ValidationError(f"OAM {l} is not a member of family {f}")

    @property
    def radial(self) -> int:
        return (self.family - abs(self.oam)) // 2

    @property
    def l0(self) -> int:
        return self.family % 2


@dataclass(frozen=True)
class CavityGeometry:
    """Two spherical mirrors with a crystal of length ``l_c`` inside.

    ``R1``/``R2`` may be ``math.inf`` for a planar mirror.
    """

    R1: float
    R2: float
    L: float
    l_c: float = 0.0
    n_c: float = 1.0

    def __post_init__(self):
        if self.L <= 0 or self.l_c < 0 or self.n_c <= 0:
            raise ValidationError("L > 0, l_c >= 0 and n_c > 0 are required")
        if self.L_eff <= 0:
            raise ValidationError(f"effective length must be positive, got {self.L_eff}")

    @property
    def L_eff(self) -> float:
        return self.L - (1.0 - 1.0 / self.n_c) * self.l_c

    @property
    def g1(self) -> float:
        return 1.0 - self.L_eff / self.R1

    @property
    def g2(self) -> float:
        return 1.0 - self.L_eff / self.R2

    @property
    def g_product(self) -> float:
        return self.g1 * self.g2

    def check_stable(self):
        gg = self.g_product
        if not 0.0 < gg < 1.0:
            raise GeometryError(f"g1*g2 = {gg:g} outside the open stability interval (0, 1)")

    @classmethod
    def symmetric(cls, g: float, L_eff: float = 1.0) -> "CavityGeometry":
        """Symmetric resonator with g1 = g2 = g and no crystal."""
        R = math.inf if g == 1.0 else L_eff / (1.0 - g)
        return cls(R1=R, R2=R, L=L_eff)


def laguerre_poly(n: int, l: int, x):
    """Generalized Laguerre polynomial L_n^l(x) by the three-term recurrence."""
    if n < 0 or l < 0:
        raise ValidationError("n and l must be non-negative")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + l - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + l - x) * cur - (k + l) * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def normalization(n: int, l: int) -> float:
    l = abs(l)
    return math.sqrt(2.0 / math.pi * math.factorial(n) / math.factorial(n + l))


def radial_profile(n: int, l: int, w: float, r):
    """u_n^l(r) at the waist, without the normalization factor."""
    l = abs(l)
    r = np.asarray(r, dtype=float)
    s = r / w
    return (np.sqrt(2.0) * s) ** l * laguerre_poly(n, l, 2.0 * s * s) * np.exp(-s * s) / w


def mode_amplitude(mode: TransverseModeId, w: float, r, phi):
    """Complex amplitude of the Laguerre-Gauss mode ``mode`` at polar (r, phi)."""
    if w <= 0:
        raise ValidationError("waist must be positive")
    n, l = mode.radial, mode.oam
    radial = normalization(n, l) * radial_profile(n, l, w, r)
    return radial * np.exp(1j * l * np.asarray(phi, dtype=float))


def hybrid_amplitude(kind: str, n: int, l: int, w: float, r, phi, beta: float = 0.0):
    """Real hybrid mode: sqrt(2) N u cos(l(phi - beta)) or the sine analog.

    With ``beta = 0`` this is exactly H_c (``kind="cosine"``) or H_s
    (``kind="sine"``).
    """
    if l < 1:
        raise ValidationError("hybrid modes need l >= 1; use the l = 0 Laguerre-Gauss mode")
    if w <= 0:
        raise ValidationError("waist must be positive")
    angle = l * (np.asarray(phi, dtype=float) - beta)
    if kind in ("cosine", "c"):
        ang = np.cos(angle)
    elif kind in ("sine", "s"):
        ang = np.sin(angle)
    else:
        raise ValidationError(f"unknown hybrid kind {kind!r}")
    return math.sqrt(2.0) * normalization(n, l) * radial_profile(n, l, w, r) * ang


def _stability_factor(geom: CavityGeometry) -> float:
    geom.check_stable()
    g1, g2 = geom.g1, geom.g2
    denom = g1 + g2 - 2.0 * g1 * g2
    if denom == 0.0:
        raise GeometryError("degenerate geometry: g1 + g2 - 2 g1 g2 = 0")
    return math.sqrt(g1 * g2 * (1.0 - g1 * g2)) / denom


def beam_waist(geom: CavityGeometry, omega: float) -> float:
    """Spot size at the cavity waist for a beam of angular frequency ``omega``."""
    if omega <= 0:
        raise ValidationError("omega must be positive")
    w2 = 2.0 * C * geom.L_eff / omega * _stability_factor(geom)
    if w2 <= 0:
        raise GeometryError(f"non-positive waist^2 ({w2:g}) for this geometry")
    return math.sqrt(w2)


def check_rational_spacing(g_product: float, tol: float = 1e-6, max_den: int = 16):
    """Warn when arccos(sqrt(g1 g2))/pi lies within ``tol`` of p/q, q <= max_den.

    Returns the offending fraction or ``None``.
    """
    ratio = math.acos(math.sqrt(g_product)) / math.pi
    frac = Fraction(ratio).limit_denominator(max_den)
    if abs(ratio - frac) < tol:
        warnings.warn(
            f"transverse spacing arccos(sqrt(g1 g2))/pi = {ratio:.9f} ~ {frac}; "
            "families of different longitudinal orders can become degenerate",
            RationalSpacingWarning,
            stacklevel=3,
        )
        return frac
    return None


def transverse_shift(geom: CavityGeometry, n: int, l: int) -> float:
    """Transverse part of the resonance frequency, in units of c/L_eff."""
    geom.check_stable()
    return (1 + 2 * n + abs(l)) * math.acos(math.sqrt(geom.g_product))


def resonance_frequency(geom: CavityGeometry, q: int, n: int, l: int) -> float:
    """Angular resonance frequency of mode (q, n, l)."""
    if q < 1:
        raise ValidationError("longitudinal index q must be >= 1")
    if n < 0:
        raise ValidationError("radial index must be >= 0")
    check_rational_spacing(geom.g_product)
    scale = C / geom.L_eff
    return q * math.pi * scale + scale * transverse_shift(geom, n, l)


def family_members(f: int) -> list[TransverseModeId]:
    """All f+1 modes of family ``f``, ordered by decreasing |l|, + before -."""
    if f < 0:
        raise ValidationError(f"family must be >= 0, got {f}")
    out = []
    for l in range(f, -1, -2):
        if l == 0:
            out.append(TransverseModeId(f, 0))
        else:
            out.append(TransverseModeId(f, l))
            out.append(TransverseModeId(f, -l))
    return out


def family_oams(f: int) -> list[int]:
    """Non-negative OAM values of family ``f``: f, f-2, ..., l0."""
    if f < 0:
        raise ValidationError(f"family must be >= 0, got {f}")
    return list(range(f, -1, -2))


def cartesian_grid(n_points: int, extent: float):
    """Square grid over [-extent, extent]^2; returns x, y, r, phi arrays (row = y)."""
    if n_points < 2:
        raise ValidationError("grid needs at least 2 points per side")
    ax = np.linspace(-extent, extent, n_points)
    x, y = np.meshgrid(ax, ax)
    r = np.hypot(x, y)
    phi = np.mod(np.arctan2(y, x), 2 * np.pi)
    return x, y, r, phi

"""Linearized quantum fluctuations and squeezing spectra.

All rates and noise frequencies are in units of gamma_s. Fluctuation vectors
live in the doubled positive-P space; a pair l != 0 uses the basis
``(a_{+l}, a_{+l}^+, a_{-l}, a_{-l}^+)`` and l = 0 uses ``(a_0, a_0^+)``.
Quadratures are X = a^+ + a and Y = i (a^+ - a).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SpectrumDivergenceError, ValidationError

SQ2 = math.sqrt(2.0)


@dataclass(frozen=True)
class LinearSystem:
    drift: np.ndarray
    diffusion: np.ndarray
    labels: tuple

    def __post_init__(self):
        J, D = np.asarray(self.drift), np.asarray(self.diffusion)
        n = len(self.labels)
        if J.shape != (n, n) or D.shape != (n, n):
            raise ValidationError("drift/diffusion shapes do not match the basis")
        if not np.allclose(D, D.T, atol=1e-14):
            raise ValidationError("diffusion matrix must be symmetric")


@dataclass(frozen=True)
class QuadratureSelector:
    """One quadrature of one mode of the OAM pair ``l``.

    ``kind`` is ``"c"``/``"s"`` for hybrid modes (optionally rotated by
    ``beta``), ``"+"``/``"-"`` for a single Laguerre-Gauss mode, and must be
    ``"0"`` when l = 0.
    """

    l: int
    kind: str = "c"
    quadrature: str = "y"
    beta: float = 0.0

    def __post_init__(self):
        if self.l < 0:
            raise ValidationError("use l >= 0; sign is carried by kind '+'/'-'")
        if self.quadrature not in ("x", "y"):
            raise ValidationError("quadrature must be 'x' or 'y'")
        allowed = ("0",) if self.l == 0 else ("c", "s", "+", "-")
        if self.kind not in allowed:
            raise ValidationError(f"kind {self.kind!r} invalid for l = {self.l}")

    @property
    def name(self) -> str:
        rot = f"@{self.beta:g}" if self.beta else ""
        return f"{self.quadrature.upper()}_{self.kind}{rot},l={self.l}"

    def mode_weights(self):
        """Coefficients (u, u_plus) of the mode over the pair basis.

        The mode amplitude is a = u . (a_{+l}, a_{-l}) and its positive-P
        partner a^+ = u_plus . (a_{+l}^+, a_{-l}^+).
        """
        if self.l == 0:
            return np.array([1.0 + 0j]), np.array([1.0 + 0j])
        if self.kind == "+":
            return np.array([1, 0], complex), np.array([1, 0], complex)
        if self.kind == "-":
            return np.array([0, 1], complex), np.array([0, 1], complex)
        c = np.array([1, 1], complex) / SQ2
        s = np.array([1j, -1j]) / SQ2
        cb, sb = math.cos(self.l * self.beta), math.sin(self.l * self.beta)
        if self.kind == "c":
            u = cb * c + sb * s
        else:
            u = cb * s - sb * c
        return u, np.conj(u)

    def vector(self) -> np.ndarray:
        """Selector vector v with quadrature = v . fluctuation (pair basis)."""
        u, up = self.mode_weights()
        if self.l == 0:
            a = np.array([u[0], 0])
            ap = np.array([0, up[0]])
        else:
            a = np.array([u[0], 0, u[1], 0])
            ap = np.array([0, up[0], 0, up[1]])
        return ap + a if self.quadrature == "x" else 1j * (ap - a)


def _check_kappa(kappa):
    if not 0.0 < kappa < 1.0:
        raise ValidationError(f"empty-mode kappa must lie in (0, 1), got {kappa}")


def pair_labels(l: int) -> tuple:
    if l == 0:
        return ("a0", "a0+")
    return (f"a+{l}", f"a+{l}+", f"a-{l}", f"a-{l}+")


def empty_mode_system(kappa: float, gamma_s: float = 1.0, l: int = 2) -> LinearSystem:
    """4x4 linear system of a classically empty OAM pair."""
    _check_kappa(kappa)
    k = kappa
    J = gamma_s * np.array(
        [[-1, 0, 0, k], [0, -1, k, 0], [0, k, -1, 0], [k, 0, 0, -1]], dtype=float
    )
    D = np.zeros((4, 4))
    D[0, 2] = D[2, 0] = D[1, 3] = D[3, 1] = gamma_s * k
    return LinearSystem(J, D, pair_labels(l))


def empty_mode_eigenbasis(kappa: float, gamma_s: float = 1.0):
    """Eigenvalues and orthonormal eigenvectors (columns) of the empty-mode drift."""
    _check_kappa(kappa)
    lam = -gamma_s * np.array([1 - kappa, 1 - kappa, 1 + kappa, 1 + kappa])
    W = 0.5 * np.array(
        [[1, 1, 1, 1], [1, -1, -1, 1], [1, 1, -1, -1], [1, -1, 1, -1]], dtype=float
    ).T
    return lam, W


@dataclass(frozen=True)
class EmptyModeSpectra:
    omega: np.ndarray
    S_x: np.ndarray
    S_y: np.ndarray


def empty_mode_spectrum(kappa: float, omega, gamma_s: float = 1.0) -> EmptyModeSpectra:
    """Closed-form X/Y spectra of either hybrid mode of an empty pair.

    ``omega`` is the absolute noise frequency; the spectra depend on omega/gamma_s.
    """
    _check_kappa(kappa)
    w = np.asarray(omega, dtype=float) / gamma_s
    S_y = -4 * kappa / ((1 + kappa) ** 2 + w**2)
    S_x = 4 * kappa / ((1 - kappa) ** 2 + w**2)
    return EmptyModeSpectra(np.asarray(omega, dtype=float), S_x, S_y)


def projection_spectra(kappa: float, omega, gamma_s: float = 1.0) -> np.ndarray:
    """Spectra C_j(omega) of the four eigen-projections, shape (4, len(omega))."""
    _check_kappa(kappa)
    w = np.asarray(omega, dtype=float)
    c1 = gamma_s * kappa / ((gamma_s * (1 - kappa)) ** 2 + w**2)
    c3 = -gamma_s * kappa / ((gamma_s * (1 + kappa)) ** 2 + w**2)
    return np.array([c1, -c1, c3, -c3])


def bright_mode_system(l0: int, sigma: float, g: float = 0.01) -> LinearSystem:
    """Linearized fluctuations of the classically lit pair (pump adiabatically eliminated).

    Noise amplitudes are frozen at their stationary value N = 1. The drift
    does not depend on ``g``; it only fixes the mean amplitude.
    """
    if sigma < 1.0:
        raise ValidationError("bright-mode linearization needs sigma >= 1")
    if g <= 0:
        raise ValidationError("g must be positive")
    s = sigma
    if l0 == 0:
        d = -1.0 - 2.0 * (s - 1.0)
        J = np.array([[d, 1.0], [1.0, d]])
        D = np.eye(2)
    elif l0 == 1:
        J = np.array(
            [
                [-s, 0.0, -(s - 1.0), 1.0],
                [0.0, -s, 1.0, -(s - 1.0)],
                [-(s - 1.0), 1.0, -s, 0.0],
                [1.0, -(s - 1.0), 0.0, -s],
            ]
        )
        D = np.zeros((4, 4))
        D[0, 2] = D[2, 0] = D[1, 3] = D[3, 1] = 1.0
    else:
        raise ValidationError("l0 must be 0 or 1")
    return LinearSystem(J, D, pair_labels(l0))


def _as_vector(selector, n):
    v = selector.vector() if isinstance(selector, QuadratureSelector) else np.asarray(selector, complex)
    if v.shape != (n,):
        raise ValidationError(f"selector has dimension {v.shape}, system has {n}")
    return v


def matrix_spectrum(system: LinearSystem, selector, omega, gamma_s: float = 1.0,
                    marginal_tol: float = 1e-9, overlap_tol: float = 1e-9):
    """Stationary squeezing spectrum 2 gamma_s v^T (J + i w)^-1 D (J^T - i w)^-1 v.

    A marginal mode (|lambda + i w| < ``marginal_tol``) is projected out when
    the selector does not see it and raises :class:`SpectrumDivergenceError`
    when it does.
    """
    J = np.asarray(system.drift, dtype=complex)
    D = np.asarray(system.diffusion, dtype=complex)
    v = _as_vector(selector, J.shape[0])
    scalar = np.ndim(omega) == 0
    omegas = np.atleast_1d(np.asarray(omega, dtype=float))
    lam, V = np.linalg.eig(J)
    Vinv = np.linalg.inv(V)
    p = v @ V  # overlaps of v with right eigenvectors
    eye = np.eye(J.shape[0])
    out = np.empty(omegas.size)
    for i, w in enumerate(omegas):
        hit = np.abs(lam + 1j * w) < marginal_tol
        if not hit.any():
            left = np.linalg.solve((J + 1j * w * eye).T, v)  # v^T (J + iw)^-1
            right = np.linalg.solve(J.T - 1j * w * eye, v)
        else:
            bad = hit & (np.abs(p) > overlap_tol)
            if bad.any():
                k = int(np.argmax(np.abs(p) * bad))
                raise SpectrumDivergenceError(
                    f"selector overlaps marginal mode lambda={lam[k]:.3g} "
                    f"(|overlap|={abs(p[k]):.3g}) at omega={w:g}",
                    eigenvalue=lam[k],
                    overlap=abs(p[k]),
                )
            keep = ~hit
            lp = np.zeros_like(lam)
            lm = np.zeros_like(lam)
            lp[keep] = p[keep] / (lam[keep] + 1j * w)
            lm[keep] = p[keep] / (lam[keep] - 1j * w)
            left = lp @ Vinv
            right = (lm @ Vinv)
        out[i] = (2.0 * gamma_s * (left @ D @ right)).real
    return float(out[0]) if scalar else out


def noise_reduction_percent(kappa: float) -> float:
    """Zero-frequency phase-quadrature noise reduction of an empty hybrid mode."""
    return -100.0 * float(empty_mode_spectrum(kappa, 0.0).S_y)


def squeezing_table(max_family: int):
    """Rows (family, l, kappa, noise_reduction_percent) for every empty pair."""
    from .coupling import kappa_ladder

    rows = []
    for f in range(max_family + 1):
        lad = kappa_ladder(f)
        for l in lad.empty_oams():
            k = lad.kappa(l)
            rows.append({"family": f, "l": l, "kappa": k,
                         "noise_reduction_percent": noise_reduction_percent(k)})
    return rows


@dataclass(frozen=True)
class SpectrumResult:
    omega: np.ndarray
    S: np.ndarray
    source: str
    ci_halfwidth: np.ndarray | None = None
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def V(self) -> np.ndarray:
        return 1.0 + np.asarray(self.S)

    def rows(self):
        for i, (w, s) in enumerate(zip(self.omega, self.S)):
            ci = "" if self.ci_halfwidth is None else float(self.ci_halfwidth[i])
            yield {"omega_over_gamma": float(w), "S": float(s), "V": float(1 + s),
                   "source": self.source, "ci_halfwidth": ci}


def analytic_spectrum(system: LinearSystem, selector: QuadratureSelector, omega,
                      label: str = "") -> SpectrumResult:
    S = np.atleast_1d(matrix_spectrum(system, selector, omega))
    return SpectrumResult(np.atleast_1d(np.asarray(omega, float)), S, "analytic-matrix",
                          label=label or selector.name)

"""Positive-P Langevin model: state layout, drift, noise matrix and a reference Ito step.

State vectors are complex with independent ``alpha``/``alpha^+`` slots:
``[a00, a00+]`` (full model only), then per OAM pair in family order
``[a+l, a+l+, a-l, a-l+]`` or ``[a0, a0+]`` for l = 0. Time is in 1/gamma_s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..classical import DopoParams, excited_solution
from ..errors import TrajectoryDivergence, ValidationError
from ..linear_quantum import QuadratureSelector

MODELS = ("full", "adiabatic")


@dataclass(frozen=True)
class StateLayout:
    family: int
    model: str
    pair_l: tuple
    pair_offset: tuple
    noise_offset: tuple

    @classmethod
    def build(cls, family: int, model: str) -> "StateLayout":
        if model not in MODELS:
            raise ValidationError(f"model must be one of {MODELS}")
        off = 2 if model == "full" else 0
        noff = 0
        ls, offs, noffs = [], [], []
        for l in range(family, -1, -2):
            ls.append(l)
            offs.append(off)
            noffs.append(noff)
            off += 2 if l == 0 else 4
            noff += 2 if l == 0 else 4
        return cls(family, model, tuple(ls), tuple(offs), tuple(noffs))

    @property
    def dim(self) -> int:
        return (2 if self.model == "full" else 0) + 2 * (self.family + 1)

    @property
    def n_noise(self) -> int:
        return 2 * (self.family + 1)

    def labels(self) -> list[str]:
        out = ["a00", "a00+"] if self.model == "full" else []
        for l in self.pair_l:
            out += ["a0", "a0+"] if l == 0 else [f"a+{l}", f"a+{l}+", f"a-{l}", f"a-{l}+"]
        return out

    def pair_slice(self, l: int) -> slice:
        i = self.pair_l.index(l)
        o = self.pair_offset[i]
        return slice(o, o + (2 if l == 0 else 4))

    def projection(self, selector: QuadratureSelector) -> np.ndarray:
        """Full-state vector v with quadrature = v . alpha."""
        if selector.l not in self.pair_l:
            raise ValidationError(f"l = {selector.l} not in family {self.family}")
        v = np.zeros(self.dim, dtype=complex)
        v[self.pair_slice(selector.l)] = selector.vector()
        return v


def _gain(alpha, params: DopoParams, layout: StateLayout):
    """Pump factor M (and M+) multiplying kappa_l in the signal equations.

    Adiabatic: M = N = sigma - g^2 sum kappa_l/(1+d_0l) a+l a-l.
    Full: M = chi_l0 * a00 (gamma_s units).
    """
    if layout.model == "full":
        c = params.chi_l0
        return c * alpha[0], c * alpha[1]
    prod = prod_p = 0j
    for l, o in zip(layout.pair_l, layout.pair_offset):
        k = params.ladder.kappa(l)
        if l == 0:
            prod += 0.5 * k * alpha[o] * alpha[o]
            prod_p += 0.5 * k * alpha[o + 1] * alpha[o + 1]
        else:
            prod += k * alpha[o] * alpha[o + 2]
            prod_p += k * alpha[o + 1] * alpha[o + 3]
    g2 = params.g**2
    return params.sigma - g2 * prod, params.sigma - g2 * prod_p


def drift(alpha, params: DopoParams, model: str) -> np.ndarray:
    """Deterministic part A(alpha) of the Langevin equations."""
    layout = StateLayout.build(params.family, model)
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape != (layout.dim,):
        raise ValidationError(f"state has shape {alpha.shape}, expected ({layout.dim},)")
    M, Mp = _gain(alpha, params, layout)
    out = np.empty_like(alpha)
    dep = dep_p = 0j
    for l, o in zip(layout.pair_l, layout.pair_offset):
        k = params.ladder.kappa(l)
        if l == 0:
            a, ap = alpha[o], alpha[o + 1]
            out[o] = -a + k * M * ap
            out[o + 1] = -ap + k * Mp * a
            dep += 0.5 * k * a * a
            dep_p += 0.5 * k * ap * ap
        else:
            a, ap, b, bp = alpha[o:o + 4]
            out[o] = -a + k * M * bp
            out[o + 1] = -ap + k * Mp * b
            out[o + 2] = -b + k * M * ap
            out[o + 3] = -bp + k * Mp * a
            dep += k * a * b
            dep_p += k * ap * bp
    if model == "full":
        c = params.chi_l0
        out[0] = params.drive - params.gamma_ratio * alpha[0] - c * dep
        out[1] = params.drive - params.gamma_ratio * alpha[1] - c * dep_p
    return out


def noise_matrix(alpha, params: DopoParams, model: str) -> np.ndarray:
    """Noise matrix B with diffusion D = B B^T (principal complex square roots)."""
    layout = StateLayout.build(params.family, model)
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape != (layout.dim,):
        raise ValidationError(f"state has shape {alpha.shape}, expected ({layout.dim},)")
    M, Mp = _gain(alpha, params, layout)
    s, sp = np.sqrt(complex(M)), np.sqrt(complex(Mp))
    B = np.zeros((layout.dim, layout.n_noise), dtype=complex)
    for l, o, n in zip(layout.pair_l, layout.pair_offset, layout.noise_offset):
        k = params.ladder.kappa(l)
        if l == 0:
            B[o, n] = math.sqrt(k) * s
            B[o + 1, n + 1] = math.sqrt(k) * sp
        else:
            h = math.sqrt(k / 2.0)
            B[o, n], B[o, n + 2] = h * s, 1j * h * s
            B[o + 1, n + 1], B[o + 1, n + 3] = h * sp, 1j * h * sp
            B[o + 2, n], B[o + 2, n + 2] = h * s, -1j * h * s
            B[o + 3, n + 1], B[o + 3, n + 3] = h * sp, -1j * h * sp
    return B


def diffusion(alpha, params: DopoParams, model: str) -> np.ndarray:
    B = noise_matrix(alpha, params, model)
    return B @ B.T


def step(alpha, params: DopoParams, model: str, dt: float, stream, radius: float = math.inf):
    """One Euler-Maruyama (Ito) step using deviates drawn from ``stream``."""
    alpha = np.asarray(alpha, dtype=complex)
    layout = StateLayout.build(params.family, model)
    eta = stream.normals(layout.n_noise)
    new = alpha + drift(alpha, params, model) * dt + noise_matrix(alpha, params, model) @ eta * math.sqrt(dt)
    if not np.all(np.isfinite(new)) or np.max(np.abs(new)) > radius:
        raise TrajectoryDivergence(f"|alpha| exceeded {radius:g}")
    return new


def classical_state(params: DopoParams, model: str, theta: float = 0.0) -> np.ndarray:
    """Mean-field stationary state (alpha^+ = alpha*) used as initial condition.

    Above threshold this is the k = l0 branch, below it the trivial one.
    """
    layout = StateLayout.build(params.family, model)
    z = np.zeros(layout.dim, dtype=complex)
    sol = excited_solution(params, params.l0, theta)
    if sol.exists:
        pump = sol.pump_amp
        o = layout.pair_offset[layout.pair_l.index(params.l0)]
        if params.l0 == 0:
            z[o] = z[o + 1] = sol.rho
        else:
            a = sol.rho * np.exp(-1j * sol.theta)
            z[o], z[o + 1] = a, np.conj(a)
            z[o + 2], z[o + 3] = np.conj(a), a
    else:
        pump = params.drive / params.gamma_ratio
    if model == "full":
        z[0] = z[1] = pump
    return z


def classical_amplitude_scale(params: DopoParams, model: str) -> float:
    """Largest mean-field amplitude held in the state vector."""
    return float(np.max(np.abs(classical_state(params, model)), initial=0.0))

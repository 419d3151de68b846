"""Mean-field DOPO dynamics for one transverse family.

Time is scaled as tau = gamma_s t. Amplitudes keep their photon-number
normalization, so with gamma = gamma_p/gamma_s the rates are
chi_l = kappa_l g sqrt(gamma) and the drive is E_p = sigma sqrt(gamma) / g.

Complex state vectors are packed as ``[pump, +f, -f, +(f-2), -(f-2), ..., l0]``
with a single slot for l = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coupling import CouplingLadder, kappa_ladder
from .errors import NotSteadyStateError, NumericalError, ValidationError
from .modes import cartesian_grid, hybrid_amplitude, mode_amplitude, TransverseModeId

STABILITY_TOL = 1e-10


@dataclass(frozen=True)
class DopoParams:
    family: int
    sigma: float
    g: float
    gamma_ratio: float = 1.0
    ladder: CouplingLadder = field(default=None, repr=False)

    def __post_init__(self):
        if self.sigma < 0 or self.g <= 0 or self.gamma_ratio <= 0:
            raise ValidationError("need sigma >= 0, g > 0, gamma_p/gamma_s > 0")
        if self.ladder is None:
            object.__setattr__(self, "ladder", kappa_ladder(self.family))
        elif self.ladder.family != self.family:
            raise ValidationError("coupling ladder belongs to another family")

    @property
    def l0(self) -> int:
        return self.family % 2

    @property
    def oams(self) -> list[int]:
        return self.ladder.oams

    @property
    def chi_l0(self) -> float:
        return self.g * math.sqrt(self.gamma_ratio)

    def chi(self, l: int) -> float:
        return self.ladder.kappa(l) * self.chi_l0

    @property
    def drive(self) -> float:
        """Pump drive E_p in gamma_s units."""
        return self.sigma * math.sqrt(self.gamma_ratio) / self.g

    def with_sigma(self, sigma: float) -> "DopoParams":
        return DopoParams(self.family, sigma, self.g, self.gamma_ratio, self.ladder)


def signal_keys(f: int) -> list[int]:
    """Signed OAM keys in packing order."""
    keys = []
    for l in range(f, -1, -2):
        keys.extend([l, -l] if l else [0])
    return keys


@dataclass(frozen=True)
class ClassicalState:
    pump: complex
    signal: dict
    time: float = 0.0

    @classmethod
    def from_vector(cls, z, family: int, time: float = 0.0) -> "ClassicalState":
        keys = signal_keys(family)
        return cls(complex(z[0]), {k: complex(v) for k, v in zip(keys, z[1:])}, time)

    def to_vector(self, family: int) -> np.ndarray:
        keys = signal_keys(family)
        if set(keys) != set(self.signal):
            raise ValidationError("state does not cover the members of the family")
        return np.array([self.pump] + [self.signal[k] for k in keys], dtype=complex)


def _rhs(z, p: DopoParams):
    out = np.empty_like(z)
    pump = z[0]
    depletion = 0.0
    i = 1
    for l in p.oams:
        chi = p.chi(l)
        if l == 0:
            a0 = z[i]
            depletion += 0.5 * chi * a0 * a0
            out[i] = -a0 + chi * np.conj(a0) * pump
            i += 1
        else:
            ap, am = z[i], z[i + 1]
            depletion += chi * ap * am
            out[i] = -ap + chi * np.conj(am) * pump
            out[i + 1] = -am + chi * np.conj(ap) * pump
            i += 2
    out[0] = p.drive - p.gamma_ratio * pump - depletion
    return out


def classical_rhs(state: ClassicalState, params: DopoParams) -> ClassicalState:
    """Time derivative d/dtau of the mean-field amplitudes."""
    z = state.to_vector(params.family)
    return ClassicalState.from_vector(_rhs(z, params), params.family, state.time)


def _wirtinger(z, p: DopoParams):
    """Matrices A = df/dz and B = df/dz* of the complex right-hand side."""
    m = z.size
    A = np.zeros((m, m), dtype=complex)
    B = np.zeros((m, m), dtype=complex)
    A[0, 0] = -p.gamma_ratio
    pump = z[0]
    i = 1
    for l in p.oams:
        chi = p.chi(l)
        if l == 0:
            A[0, i] = -chi * z[i]
            A[i, i] = -1.0
            A[i, 0] = chi * np.conj(z[i])
            B[i, i] = chi * pump
            i += 1
        else:
            ip, im = i, i + 1
            A[0, ip] = -chi * z[im]
            A[0, im] = -chi * z[ip]
            A[ip, ip] = A[im, im] = -1.0
            A[ip, 0] = chi * np.conj(z[im])
            A[im, 0] = chi * np.conj(z[ip])
            B[ip, im] = chi * pump
            B[im, ip] = chi * pump
            i += 2
    return A, B


def real_jacobian(z, params: DopoParams) -> np.ndarray:
    """Jacobian of the real system ordered as (Re z, Im z)."""
    A, B = _wirtinger(np.asarray(z, dtype=complex), params)
    S, D = A + B, A - B
    return np.block([[S.real, -D.imag], [S.imag, D.real]])


@dataclass(frozen=True)
class ClassicalSolution:
    branch: str | int  # "trivial" or the excited OAM k
    exists: bool
    pump_amp: float
    rho: float = 0.0
    theta: float = 0.0
    eigenvalues: np.ndarray | None = field(default=None, repr=False)
    stable: bool | None = None

    @property
    def free_phase(self) -> bool:
        return self.branch not in ("trivial", 0)

    def state(self, params: DopoParams) -> ClassicalState:
        sig = {k: 0j for k in signal_keys(params.family)}
        if self.branch != "trivial":
            k = self.branch
            if k == 0:
                sig[0] = complex(self.rho)
            else:
                sig[k] = self.rho * np.exp(-1j * self.theta)
                sig[-k] = self.rho * np.exp(1j * self.theta)
        return ClassicalState(complex(self.pump_amp), sig)


def trivial_solution(params: DopoParams) -> ClassicalSolution:
    return ClassicalSolution("trivial", True, params.drive / params.gamma_ratio)


def excited_solution(params: DopoParams, k: int, theta: float = 0.0) -> ClassicalSolution:
    """Stationary solution with only the +-k pair lit; ``exists`` is False below its threshold."""
    if k not in params.oams:
        raise ValidationError(f"k = {k} not in family {params.family}")
    kappa = params.ladder.kappa(k)
    rho2 = (1 + (k == 0)) * (params.sigma - 1.0 / kappa) / (params.g**2 * kappa)
    exists = rho2 >= 0
    return ClassicalSolution(
        k,
        exists,
        1.0 / params.chi(k),
        math.sqrt(rho2) if exists else 0.0,
        0.0 if k == 0 else theta,
    )


def stability(solution: ClassicalSolution, params: DopoParams, tol: float = STABILITY_TOL):
    """Eigenvalues of the real Jacobian at ``solution`` and the stability verdict.

    A single eigenvalue with |lambda| <= tol is tolerated on branches with a
    free phase (the orientation Goldstone mode); any other eigenvalue with
    Re lambda >= -tol makes the branch unstable.
    """
    if not solution.exists:
        raise ValidationError("branch does not exist at this pump level")
    z = solution.state(params).to_vector(params.family)
    res = np.max(np.abs(_rhs(z, params)))
    scale = max(1.0, np.max(np.abs(z)))
    if res > 1e-10 * scale:
        raise NotSteadyStateError(f"residual {res:.3e} at branch {solution.branch}")
    lam = np.linalg.eigvals(real_jacobian(z, params))
    lam = lam[np.argsort(-lam.real)]
    marginal = lam.real >= -tol
    if solution.free_phase:
        zero = np.abs(lam) <= tol
        stable = bool(np.all(zero[marginal]) and marginal.sum() <= 1)
    else:
        stable = not bool(marginal.any())
    return lam, stable


def _with_stability(sol: ClassicalSolution, params: DopoParams) -> ClassicalSolution:
    if not sol.exists:
        return sol
    lam, stable = stability(sol, params)
    return ClassicalSolution(sol.branch, sol.exists, sol.pump_amp, sol.rho, sol.theta, lam, stable)


def steady_states(params: DopoParams) -> list[ClassicalSolution]:
    """Trivial branch plus one excited branch per OAM pair, with stability filled in."""
    sols = [trivial_solution(params)] + [excited_solution(params, k) for k in params.oams]
    return [_with_stability(s, params) for s in sols]


def threshold_sigma(params: DopoParams, lo: float = 0.0, hi: float = 4.0, tol: float = 1e-12) -> float:
    """Bisection for the pump level where the trivial branch loses stability."""
    def unstable(s):
        return not stability(trivial_solution(params.with_sigma(s)), params.with_sigma(s))[1]

    if unstable(lo) or not unstable(hi):
        raise NumericalError("threshold not bracketed")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if unstable(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class Trajectory:
    family: int
    tau: np.ndarray
    states: np.ndarray  # (n_times, n_amplitudes) complex

    def final(self) -> ClassicalState:
        return ClassicalState.from_vector(self.states[-1], self.family, float(self.tau[-1]))

    def rows(self):
        for t, z in zip(self.tau, self.states):
            row = [float(t)]
            for v in z:
                row.extend([v.real, v.imag])
            yield row

    def columns(self) -> list[str]:
        cols = ["tau", "re_pump", "im_pump"]
        for k in signal_keys(self.family):
            tag = f"{k:+d}" if k else "0"
            cols.extend([f"re_{tag}", f"im_{tag}"])
        return cols


def integrate(state0: ClassicalState, params: DopoParams, tau_end: float, dtau: float,
              save_every: int = 1) -> Trajectory:
    """Fixed-step RK4 integration of the mean-field equations."""
    if dtau <= 0:
        raise ValidationError("dtau must be positive")
    n = int(round(tau_end / dtau))
    z = state0.to_vector(params.family)
    times, states = [state0.time], [z.copy()]
    for i in range(1, n + 1):
        k1 = _rhs(z, params)
        k2 = _rhs(z + 0.5 * dtau * k1, params)
        k3 = _rhs(z + 0.5 * dtau * k2, params)
        k4 = _rhs(z + dtau * k3, params)
        z = z + dtau / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(z)):
            raise NumericalError(f"non-finite state at step {i}")
        if i % save_every == 0 or i == n:
            times.append(state0.time + i * dtau)
            states.append(z.copy())
    return Trajectory(params.family, np.array(times), np.array(states))


def signal_profile(solution: ClassicalSolution, params: DopoParams, n_points: int = 201,
                   extent: float = 3.0, w: float = 1.0, theta: float | None = None):
    """|A_s|^2 of the emitted signal on a square grid (coordinates in units of ``w``).

    Returns ``(x, y, intensity)``. Odd families render the free orientation at
    ``theta`` (pi/4 by default).
    """
    if solution.branch == "trivial" or not solution.exists:
        raise ValidationError("no classical signal on the trivial branch")
    f = params.family
    if solution.branch != params.l0:
        raise ValidationError("profiles are defined for the stable k = l0 branch only")
    x, y, r, phi = cartesian_grid(n_points, extent * w)
    if f % 2 == 0:
        amp = solution.rho * mode_amplitude(TransverseModeId(f, 0), w, r, phi)
    else:
        th = math.pi / 4 if theta is None else theta
        amp = math.sqrt(2.0) * solution.rho * hybrid_amplitude("cosine", (f - 1) // 2, 1, w, r, phi, beta=th)
    return x, y, np.abs(amp) ** 2

"""Ensemble driver: burn-in, recording and divergence bookkeeping.

Trajectories run in batches so memory stays bounded; each batch may be
split across threads (the compiled kernel releases the GIL). Every
trajectory owns the counter-based stream ``trajectory_key(seed, index)``, so
results do not depend on batching or on the number of threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..classical import DopoParams
from ..errors import ExcessiveDivergenceError, ValidationError
from ..linear_quantum import QuadratureSelector
from .backend import get_kernel
from .model import MODELS, StateLayout, classical_amplitude_scale, classical_state
from .rng import trajectory_keys

MAX_REJECT_FRACTION = 0.01
BATCH_BYTES = 96 * 2**20


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True)
class SimConfig:
    """Ensemble settings; times are in units of 1/gamma_s.

    ``burn_in``, ``record_len`` and ``divergence_radius`` default to
    ``None`` and are then derived from the parameters (see the resolved_*
    properties). ``record_len / sample_dt`` must be a power of two and
    ``sample_dt`` an integer multiple of ``dt``; recorded samples are means
    over each ``sample_dt`` window.
    """

    params: DopoParams
    model: str = "adiabatic"
    dt: float = 1e-3
    burn_in: float | None = None
    record_len: float | None = None
    n_traj: int = 400
    seed: int = 0
    divergence_radius: float | None = None
    sample_dt: float = 0.05
    theta: float = 0.0
    n_threads: int = 1
    backend: str | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValidationError(f"model must be one of {MODELS}")
        if not self.dt > 0:
            raise ValidationError("dt must be positive")
        if self.n_traj < 1:
            raise ValidationError("n_traj must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if self.divergence_radius is not None and not self.divergence_radius > 0:
            raise ValidationError("divergence_radius must be positive")
        if self.burn_in is not None and self.burn_in < 0:
            raise ValidationError("burn_in must be >= 0")
        if self.n_threads < 1:
            raise ValidationError("n_threads must be >= 1")
        ratio = self.sample_dt / self.dt
        if round(ratio) < 1 or abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise ValidationError("sample_dt must be an integer multiple of dt")
        n = self.record_len / self.sample_dt if self.record_len is not None else 2**16
        if abs(n - round(n)) > 1e-9 * n or not _is_pow2(int(round(n))):
            raise ValidationError("record_len must span a power-of-two number of samples")

    @property
    def sample_every(self) -> int:
        return int(round(self.sample_dt / self.dt))

    @property
    def n_samples(self) -> int:
        if self.record_len is None:
            return 2**16
        return int(round(self.record_len / self.sample_dt))

    @property
    def resolved_record_len(self) -> float:
        return self.n_samples * self.sample_dt

    @property
    def resolved_burn_in(self) -> float:
        if self.burn_in is not None:
            return self.burn_in
        return 20.0 / (1.0 - kappa_max_empty(self.params))

    @property
    def resolved_radius(self) -> float:
        if self.divergence_radius is not None:
            return self.divergence_radius
        return 10.0 * max(classical_amplitude_scale(self.params, self.model), 1.0)

    @property
    def n_burn_steps(self) -> int:
        return int(round(self.resolved_burn_in / self.dt))

    def summary(self) -> dict:
        p = self.params
        return {
            "family": p.family, "sigma": p.sigma, "g": p.g, "gamma_ratio": p.gamma_ratio,
            "model": self.model, "dt": self.dt, "burn_in": self.resolved_burn_in,
            "record_len": self.resolved_record_len, "sample_dt": self.sample_dt,
            "n_samples": self.n_samples, "n_traj": self.n_traj, "seed": self.seed,
            "divergence_radius": self.resolved_radius, "theta": self.theta,
        }


def kappa_max_empty(params: DopoParams) -> float:
    """Largest coupling ratio among classically empty pairs (0 if none)."""
    ks = [params.ladder.kappa(l) for l in params.ladder.empty_oams()]
    return max(ks, default=0.0)


def default_selectors(family: int) -> list[QuadratureSelector]:
    """X and Y of both hybrids of every pair (X and Y of the single mode for l = 0)."""
    out = []
    for l in range(family, -1, -2):
        for kind in (("0",) if l == 0 else ("c", "s")):
            for q in ("x", "y"):
                out.append(QuadratureSelector(l, kind, q))
    return out


@dataclass
class QuadratureSeries:
    """Complex positive-P image X(t) of one quadrature, one row per kept trajectory.

    Samples are means over windows of ``block`` Euler steps of length ``dt``;
    ``t[0]`` is the end of the first window measured from the start of the
    recording.
    """

    selector: QuadratureSelector
    samples: np.ndarray
    sample_dt: float
    dt: float
    block: int
    traj_index: np.ndarray

    @property
    def t(self) -> np.ndarray:
        return self.sample_dt * np.arange(1, self.samples.shape[1] + 1)


@dataclass(frozen=True)
class DivergenceReport:
    n_traj: int
    n_diverged: int
    radius: float
    indices: tuple = ()

    @property
    def fraction(self) -> float:
        return self.n_diverged / self.n_traj

    def as_dict(self) -> dict:
        return {"n_traj": self.n_traj, "n_diverged": self.n_diverged,
                "fraction": self.fraction, "radius": self.radius,
                "diverged_indices": list(self.indices)}


@dataclass
class EnsembleResult:
    config: SimConfig
    layout: StateLayout
    selectors: list
    series: list | None
    report: DivergenceReport
    mean_state: np.ndarray
    state_sem: np.ndarray
    mean_gain: np.ndarray
    backend: str
    extras: dict = field(default_factory=dict)

    @property
    def mean_pump(self) -> complex:
        """Time-and-ensemble mean of alpha_00 (recovered from M = chi_l0 alpha_00)."""
        return complex(self.mean_gain[0]) / self.config.params.chi_l0

    def series_for(self, selector: QuadratureSelector) -> QuadratureSeries:
        for s in self.series or ():
            if s.selector == selector:
                return s
        raise KeyError(selector.name)


def _kernel_args(config: SimConfig, layout: StateLayout):
    p = config.params
    return dict(
        dt=config.dt, full=int(config.model == "full"), sigma=p.sigma, g=p.g,
        gamma_ratio=p.gamma_ratio,
        pair_l=np.array(layout.pair_l, dtype=np.int64),
        pair_kappa=np.array([p.ladder.kappa(l) for l in layout.pair_l], dtype=float),
        pair_off=np.array(layout.pair_offset, dtype=np.int64),
    )


def batch_size(config: SimConfig, n_rec: int) -> int:
    per = max(1, config.n_samples * max(n_rec, 1) * 16)
    return int(max(1, min(config.n_traj, BATCH_BYTES // per)))


def _advance_threads(advance, n_threads, state, keys, counter, n_steps, kw, proj, every,
                     out, ssum, msum, radius, div):
    n = state.shape[0]
    if n_threads == 1 or n < 2:
        advance(state, keys, counter, n_steps, kw["dt"], kw["full"], kw["sigma"], kw["g"],
                kw["gamma_ratio"], kw["pair_l"], kw["pair_kappa"], kw["pair_off"], proj, every,
                out, ssum, msum, radius, div)
        return
    edges = np.linspace(0, n, min(n_threads, n) + 1).astype(int)

    def work(lo, hi):
        advance(state[lo:hi], keys[lo:hi], counter[lo:hi], n_steps, kw["dt"], kw["full"],
                kw["sigma"], kw["g"], kw["gamma_ratio"], kw["pair_l"], kw["pair_kappa"],
                kw["pair_off"], proj, every, out[lo:hi], ssum[lo:hi], msum[lo:hi], radius,
                div[lo:hi])

    with ThreadPoolExecutor(len(edges) - 1) as ex:
        list(ex.map(work, edges[:-1], edges[1:]))


def iterate_batches(config: SimConfig, selectors):
    """Yield ``(indices, samples, alive, state_sum, m_sum)`` per integrated batch.

    ``samples`` has shape (batch, n_samples, n_selectors).
    """
    layout = StateLayout.build(config.params.family, config.model)
    proj = np.array([layout.projection(s) for s in selectors], dtype=complex).reshape(len(selectors), layout.dim)
    _, advance = get_kernel(config.backend)
    kw = _kernel_args(config, layout)
    z0 = classical_state(config.params, config.model, config.theta)
    radius = config.resolved_radius
    nb = batch_size(config, len(selectors))
    for lo in range(0, config.n_traj, nb):
        idx = np.arange(lo, min(lo + nb, config.n_traj))
        n = idx.size
        keys = trajectory_keys(config.seed, idx)
        state = np.tile(z0, (n, 1)).astype(complex)
        counter = np.zeros(n, dtype=np.int64)
        div = np.zeros(n, dtype=np.uint8)
        ssum = np.zeros((n, layout.dim), dtype=complex)
        msum = np.zeros((n, 2), dtype=complex)
        empty = np.zeros((n, 0, len(selectors)), dtype=complex)
        _advance_threads(advance, config.n_threads, state, keys, counter, config.n_burn_steps,
                         kw, proj, 1, empty, ssum, msum, radius, div)
        out = np.zeros((n, config.n_samples, len(selectors)), dtype=complex)
        _advance_threads(advance, config.n_threads, state, keys, counter,
                         config.n_samples * config.sample_every, kw, proj, config.sample_every,
                         out, ssum, msum, radius, div)
        yield idx, out, div == 0, ssum, msum


def run_ensemble(config: SimConfig, selectors=None, keep_series: bool = True, sink=None) -> EnsembleResult:
    """Integrate ``config.n_traj`` trajectories and collect quadrature series.

    ``sink(selectors, indices, samples)`` receives the kept trajectories of
    each batch (samples shaped (n_kept, n_samples, n_selectors)); with
    ``keep_series=False`` nothing is retained in memory beyond the sink.
    Raises :class:`ExcessiveDivergenceError` when more than 1% of the
    trajectories leave ``divergence_radius``.
    """
    selectors = list(selectors) if selectors is not None else default_selectors(config.params.family)
    layout = StateLayout.build(config.params.family, config.model)
    name, _ = get_kernel(config.backend)
    kept_idx, kept_out, bad = [], [], []
    n_steps_rec = config.n_samples * config.sample_every
    means, gains = [], []
    for idx, out, alive, ssum, msum in iterate_batches(config, selectors):
        bad.extend(int(i) for i in idx[~alive])
        if not alive.any():
            continue
        # per-trajectory time means; reduced once at the end so the result
        # does not depend on the batch size
        means.append(ssum[alive] / n_steps_rec)
        gains.append(msum[alive] / n_steps_rec)
        if sink is not None:
            sink(selectors, idx[alive], out[alive])
        if keep_series:
            kept_idx.append(idx[alive])
            kept_out.append(out[alive])
    report = DivergenceReport(config.n_traj, len(bad), config.resolved_radius, tuple(bad))
    if report.n_diverged > MAX_REJECT_FRACTION * config.n_traj:
        raise ExcessiveDivergenceError(
            f"{report.n_diverged} of {config.n_traj} trajectories diverged "
            f"(radius {report.radius:g}); reduce g or dt",
            n_diverged=report.n_diverged, n_traj=config.n_traj,
        )
    m = np.concatenate(means)
    n_ok = m.shape[0]
    mean = m.mean(axis=0)
    if n_ok > 1:
        sem = (m.real.std(axis=0, ddof=1) + 1j * m.imag.std(axis=0, ddof=1)) / np.sqrt(n_ok)
    else:
        sem = np.full(layout.dim, np.nan + 1j * np.nan)
    series = None
    if keep_series:
        idx = np.concatenate(kept_idx) if kept_idx else np.zeros(0, int)
        allout = np.concatenate(kept_out) if kept_out else np.zeros((0, config.n_samples, len(selectors)), complex)
        series = [QuadratureSeries(sel, np.ascontiguousarray(allout[:, :, j]), config.sample_dt,
                                   config.dt, config.sample_every, idx)
                  for j, sel in enumerate(selectors)]
    return EnsembleResult(config, layout, selectors, series, report, mean, sem,
                          np.concatenate(gains).mean(axis=0), name)


def correlation_time(params: DopoParams, selector: QuadratureSelector) -> float:
    """Slowest linear relaxation time 1/(1 - kappa) of an empty pair (1 for the lit pair)."""
    if selector.l == params.l0:
        return 1.0
    k = params.ladder.kappa(selector.l)
    return 1.0 / (1.0 - k) if k < 1 else math.inf


def simulate_spectra(config: SimConfig, selectors=None, omega=None, nperseg: int = 4096,
                     omega_max: float = 10.0, zero: str = "lorentzian", n_boot: int = 200,
                     extra_sink=None):
    """Run the ensemble and estimate every selector's spectrum without keeping the series.

    Returns ``(spectra, result)`` where ``spectra`` maps selector names to
    :class:`~lgdopo.linear_quantum.SpectrumResult`.
    """
    from .spectrum import check_record_length, periodograms, spectrum_from_periodograms

    selectors = list(selectors) if selectors is not None else default_selectors(config.params.family)
    for s in selectors:
        check_record_length(config.resolved_record_len, correlation_time(config.params, s))
    stacks = {}

    def sink(sels, idx, out):
        for j, s in enumerate(sels):
            st = periodograms(out[:, :, j], config.sample_dt, config.dt, config.sample_every,
                              nperseg=nperseg, omega_max=omega_max, label=s.name)
            if s.name in stacks:
                stacks[s.name].extend(st)
            else:
                stacks[s.name] = st
        if extra_sink is not None:
            extra_sink(sels, idx, out)

    res = run_ensemble(config, selectors, keep_series=False, sink=sink)
    spectra = {}
    for s in selectors:
        r = spectrum_from_periodograms(stacks[s.name], omega=omega, zero=zero, n_boot=n_boot,
                                       seed=config.seed, label=s.name)
        r.meta.update(config.summary())
        spectra[s.name] = r
    return spectra, res

"""Empirical squeezing spectra from positive-P quadrature series.

A trajectory's quadrature image X = U + iV is complex; the normally ordered
correlation <X(t) X(t')> has real part <U U'> - <V V'>, so its spectrum is
P_U - P_V with both densities taken from Welch periodograms of the
mean-subtracted series. Spectra are S(omega) = 2 P(omega) with time in
1/gamma_s and omega in units of gamma_s, so V = 1 + S.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import welch

from ..errors import SeriesTooShortError, ValidationError
from ..linear_quantum import SpectrumResult

MIN_CORRELATION_TIMES = 20.0


@dataclass
class PeriodogramStack:
    """Per-trajectory spectra S_i(omega) on the Welch grid (omega >= 0)."""

    omega: np.ndarray
    S: np.ndarray  # (n_traj, n_omega)
    label: str = ""
    meta: dict | None = None

    def extend(self, other: "PeriodogramStack") -> None:
        if not np.array_equal(self.omega, other.omega):
            raise ValidationError("periodogram grids differ")
        self.S = np.concatenate([self.S, other.S])


def boxcar_gain(omega, dt: float, block: int) -> np.ndarray:
    """|H|^2 of the mean over ``block`` consecutive Euler samples spaced ``dt``."""
    x = 0.5 * np.asarray(omega, float) * dt
    num = np.sin(block * x)
    den = block * np.sin(x)
    with np.errstate(invalid="ignore", divide="ignore"):
        h = np.where(np.abs(x) < 1e-12, 1.0, num / den)
    return h**2


def periodograms(samples, sample_dt: float, dt: float | None = None, block: int = 1,
                 nperseg: int = 4096, omega_max: float = 10.0, label: str = "") -> PeriodogramStack:
    """Welch spectra of each row of ``samples`` (complex, shape (n_traj, n)).

    Each trajectory's own mean is removed first. The block-averaging filter
    of the recorder is divided out when ``dt``/``block`` are given.
    """
    x = np.atleast_2d(np.asarray(samples))
    n = x.shape[1]
    nperseg = min(nperseg, n)
    if nperseg < 8:
        raise SeriesTooShortError(f"series of {n} samples is too short for a spectrum")
    x = x - x.mean(axis=1, keepdims=True)
    fs = 1.0 / sample_dt
    kw = dict(fs=fs, nperseg=nperseg, window="hann", detrend=False,
              return_onesided=False, scaling="density", axis=-1)
    f, pu = welch(np.ascontiguousarray(x.real), **kw)
    _, pv = welch(np.ascontiguousarray(x.imag), **kw)
    keep = (f >= 0) & (2 * np.pi * f <= omega_max + 1e-12)
    omega = 2 * np.pi * f[keep]
    S = 2.0 * (pu[:, keep] - pv[:, keep])
    if dt is not None and block > 1:
        S = S / boxcar_gain(omega, dt, block)
    return PeriodogramStack(omega, S, label, {"nperseg": nperseg, "sample_dt": sample_dt,
                                              "n_samples": n})


def _mean_var(S):
    n = S.shape[0]
    m = S.mean(axis=0)
    v = S.var(axis=0, ddof=1) / n if n > 1 else np.full_like(m, np.inf)
    return m, v


def zero_frequency_fit(omega, Sbar, var, omega_fit: float = 5.0, skip: int = 2):
    """S(0) from a weighted straight-line fit of 1/S against omega^2.

    Exact for a single Lorentzian. Bins below ``skip`` (the DC bin and its
    window-leakage neighbour) are ignored. Returns ``None`` when the data do
    not look Lorentzian (sign changes or a non-finite fit).
    """
    sel = np.arange(omega.size) >= skip
    sel &= omega <= omega_fit
    s, v = Sbar[sel], var[sel]
    if s.size < 3 or not (np.all(s > 0) or np.all(s < 0)):
        return None
    y = 1.0 / s
    w = s**4 / np.maximum(v, 1e-300)
    A = np.stack([np.ones_like(y), omega[sel] ** 2], axis=1)
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(A * sw[:, None], y * sw, rcond=None)
    a = coef[0]
    if not np.isfinite(a) or a == 0 or np.sign(a) != np.sign(s[0]):
        return None
    return 1.0 / a


def _band_average(omega, Sbar, grid):
    """Mean of the Welch bins within +-half a grid step of each grid point."""
    if grid.size > 1:
        half = 0.5 * np.min(np.diff(grid))
    else:
        half = omega[1] - omega[0] if omega.size > 1 else 0.0
    out = np.empty(grid.size)
    for i, w in enumerate(grid):
        m = np.abs(omega - w) <= half + 1e-12
        if w == 0:
            m &= omega > 0
        if not m.any():
            m = np.abs(omega - w) == np.min(np.abs(omega - w))
        out[i] = Sbar[m].mean()
    return out


def _evaluate(stack: PeriodogramStack, S_traj, grid, omega_fit, zero):
    Sbar, var = _mean_var(S_traj)
    vals = _band_average(stack.omega, Sbar, grid)
    s0 = None
    if zero == "lorentzian":
        s0 = zero_frequency_fit(stack.omega, Sbar, var, omega_fit)
    if s0 is None:
        s0 = float(Sbar[0])
    vals[grid == 0] = s0
    return vals


def spectrum_from_periodograms(stack: PeriodogramStack, omega=None, omega_fit: float = 5.0,
                               zero: str = "lorentzian", n_boot: int = 200, seed: int = 0,
                               label: str = "") -> SpectrumResult:
    """Ensemble spectrum with bootstrap 95% half-widths over trajectories.

    ``omega`` is the output grid (default 0, 0.25, ..., up to the largest
    Welch frequency); each non-zero point is the mean of the Welch bins in
    its band. The omega = 0 value comes from :func:`zero_frequency_fit`
    (``zero="lorentzian"``) or from the DC bin (``zero="bin"``).
    """
    if zero not in ("lorentzian", "bin"):
        raise ValidationError("zero must be 'lorentzian' or 'bin'")
    if omega is None:
        omega = np.arange(0.0, stack.omega[-1] + 1e-9, 0.25)
    grid = np.atleast_1d(np.asarray(omega, float))
    if np.any(grid < 0) or np.any(grid > stack.omega[-1] + 1e-9):
        raise ValidationError("requested omega outside the estimated band")
    n = stack.S.shape[0]
    if n < 2:
        raise ValidationError("need at least two trajectories")
    S = _evaluate(stack, stack.S, grid, omega_fit, zero)
    ci = None
    if n_boot > 0:
        rng = np.random.default_rng(seed)
        boots = np.empty((n_boot, grid.size))
        for b in range(n_boot):
            boots[b] = _evaluate(stack, stack.S[rng.integers(0, n, n)], grid, omega_fit, zero)
        ci = 1.96 * boots.std(axis=0, ddof=1)
    meta = dict(stack.meta or {}, n_traj=n, zero_method=zero, n_boot=n_boot)
    return SpectrumResult(grid, S, "monte-carlo", ci, label or stack.label, meta)


def check_record_length(record_len: float, corr_time: float, gamma_s: float = 1.0):
    need = MIN_CORRELATION_TIMES * corr_time / gamma_s
    if record_len < need:
        raise SeriesTooShortError(
            f"record of {record_len:g} covers fewer than {MIN_CORRELATION_TIMES:g} "
            f"correlation times ({need:g} needed)"
        )


def estimate_spectrum(series, gamma_s: float = 1.0, omega=None, corr_time: float | None = 1.0,
                      nperseg: int = 4096, omega_max: float = 10.0, **kw) -> SpectrumResult:
    """Spectrum of a :class:`QuadratureSeries` (time in 1/gamma_s, omega in gamma_s).

    ``corr_time`` is the slowest relaxation time of the selected mode; the
    record must span at least 20 of them. Remaining keywords go to
    :func:`spectrum_from_periodograms`.
    """
    if not gamma_s > 0:
        raise ValidationError("gamma_s must be positive")
    n = series.samples.shape[1]
    if corr_time is not None:
        check_record_length(n * series.sample_dt, corr_time)
    stack = periodograms(series.samples, series.sample_dt, series.dt, series.block,
                         nperseg=nperseg, omega_max=omega_max, label=series.selector.name)
    return spectrum_from_periodograms(stack, omega=omega, label=series.selector.name, **kw)


def stationarity_drift(series, n_blocks: int = 4) -> float:
    """Largest |difference| of block means (first vs later blocks) in units of its standard error."""
    x = np.asarray(series.samples).real
    blocks = np.array_split(x, n_blocks, axis=1)
    means = np.array([b.mean(axis=1) for b in blocks])  # (n_blocks, n_traj)
    d = means[1:] - means[0]
    se = d.std(axis=1, ddof=1) / math.sqrt(d.shape[1]) if d.shape[1] > 1 else np.full(d.shape[0], np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.abs(d.mean(axis=1)) / se
    return float(np.nanmax(z)) if z.size else 0.0

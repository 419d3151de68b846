"""Pure-numpy ensemble integrator, vectorized across trajectories.

Same contract as the compiled ``_kernel.advance``; used when the extension
is unavailable or ``LGDOPO_BACKEND=python``.
"""
import math

import numpy as np

from .rng import normal_pairs


def advance(state, keys, step_counter, n_steps, dt, full, sigma, g, gamma_ratio,
            pair_l, pair_kappa, pair_off, proj, sample_every, out, state_sum, m_sum,
            radius, diverged):
    """Advance every live trajectory by ``n_steps`` Euler-Maruyama steps in place.

    When ``out.shape[1] > 0`` the block means of ``proj @ alpha`` over
    ``sample_every`` consecutive steps are written to ``out`` and the running
    sums of alpha and of the pump factors (M, M+) accumulate into
    ``state_sum``/``m_sum``.
    """
    n_traj, dim = state.shape
    n_rec = out.shape[1]
    record = n_rec > 0
    if record and n_rec * sample_every != n_steps:
        raise ValueError("n_steps must equal out.shape[1] * sample_every")
    half = sum(1 if l == 0 else 2 for l in pair_l)
    sqdt = math.sqrt(dt)
    chi0 = g * math.sqrt(gamma_ratio)
    drive = sigma * math.sqrt(gamma_ratio) / g
    g2 = g * g
    z = np.array(state, dtype=complex)
    alive = np.asarray(diverged) == 0
    keys2 = np.asarray(keys, dtype=np.uint64)[:, None]
    jidx = np.arange(half, dtype=np.uint64)
    eta = np.empty((n_traj, 2 * half))
    zacc = np.zeros((n_traj, dim), dtype=complex)
    projT = np.ascontiguousarray(np.asarray(proj).T)
    counter = np.asarray(step_counter, dtype=np.int64)
    nblk = isamp = 0
    for _ in range(n_steps):
        c = counter.astype(np.uint64)[:, None] * np.uint64(half) + jidx
        eta[:, 0::2], eta[:, 1::2] = normal_pairs(keys2, c)

        dep = np.zeros(n_traj, complex)
        dep_p = np.zeros(n_traj, complex)
        for l, k, o in zip(pair_l, pair_kappa, pair_off):
            if l == 0:
                dep += 0.5 * k * z[:, o] * z[:, o]
                dep_p += 0.5 * k * z[:, o + 1] * z[:, o + 1]
            else:
                dep += k * z[:, o] * z[:, o + 2]
                dep_p += k * z[:, o + 1] * z[:, o + 3]
        if full:
            M, Mp = chi0 * z[:, 0], chi0 * z[:, 1]
        else:
            M, Mp = sigma - g2 * dep, sigma - g2 * dep_p
        sM, sMp = np.sqrt(M), np.sqrt(Mp)

        new = np.empty_like(z)
        ni = 0
        for l, k, o in zip(pair_l, pair_kappa, pair_off):
            if l == 0:
                sk = math.sqrt(k)
                a, ap = z[:, o], z[:, o + 1]
                new[:, o] = a + (-a + k * M * ap) * dt + sk * sM * eta[:, ni] * sqdt
                new[:, o + 1] = ap + (-ap + k * Mp * a) * dt + sk * sMp * eta[:, ni + 1] * sqdt
                ni += 2
            else:
                h = math.sqrt(0.5 * k)
                a, ap, b, bp = z[:, o], z[:, o + 1], z[:, o + 2], z[:, o + 3]
                e1, e2, e3, e4 = eta[:, ni], eta[:, ni + 1], eta[:, ni + 2], eta[:, ni + 3]
                new[:, o] = a + (-a + k * M * bp) * dt + h * sM * (e1 + 1j * e3) * sqdt
                new[:, o + 1] = ap + (-ap + k * Mp * b) * dt + h * sMp * (e2 + 1j * e4) * sqdt
                new[:, o + 2] = b + (-b + k * M * ap) * dt + h * sM * (e1 - 1j * e3) * sqdt
                new[:, o + 3] = bp + (-bp + k * Mp * a) * dt + h * sMp * (e2 - 1j * e4) * sqdt
                ni += 4
        if full:
            new[:, 0] = z[:, 0] + (drive - gamma_ratio * z[:, 0] - chi0 * dep) * dt
            new[:, 1] = z[:, 1] + (drive - gamma_ratio * z[:, 1] - chi0 * dep_p) * dt

        bad = alive & ~np.all(new.real**2 + new.imag**2 <= radius * radius, axis=1)
        if bad.any():
            alive &= ~bad
            diverged[bad] = 1
        z = np.where(alive[:, None], new, z)
        counter += alive

        if record:
            zacc += np.where(alive[:, None], z, 0)
            m_sum[:, 0] += np.where(alive, M, 0)
            m_sum[:, 1] += np.where(alive, Mp, 0)
            nblk += 1
            if nblk == sample_every:
                out[:, isamp, :] = (zacc @ projT) / sample_every
                state_sum += zacc
                zacc[:] = 0
                isamp += 1
                nblk = 0
    state[:] = z
    step_counter[:] = counter

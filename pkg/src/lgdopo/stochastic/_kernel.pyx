# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Euler-Maruyama ensemble integrator.

Implements exactly the contract of ``_kernel_py.advance``: same state layout,
same counter-based deviates, same update order. Each trajectory runs without
the GIL so callers may split an ensemble across threads.
"""
from libc.math cimport sqrt, log1p, cos, sin, M_PI
from libc.stdint cimport uint64_t, int64_t, uint8_t

cdef extern from "complex.h" nogil:
    double complex csqrt(double complex)

cdef enum:
    MAXDIM = 128
    MAXREC = 32

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double INV53 = 1.0 / 9007199254740992.0

MAX_DIM = MAXDIM
MAX_REC = MAXREC


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline void normal_pair(uint64_t key, uint64_t c, double* z0, double* z1) noexcept nogil:
    cdef uint64_t ba = mix64(key + (2 * c + 1) * GOLDEN)
    cdef uint64_t bb = mix64(key + (2 * c + 2) * GOLDEN)
    cdef double ua = <double>(ba >> 11) * INV53
    cdef double ub = <double>(bb >> 11) * INV53
    cdef double r = sqrt(-2.0 * log1p(-ua))
    cdef double t = 2.0 * M_PI * ub
    z0[0] = r * cos(t)
    z1[0] = r * sin(t)


def advance(double complex[:, ::1] state, const uint64_t[::1] keys, int64_t[::1] step_counter,
            Py_ssize_t n_steps, double dt, int full, double sigma, double g, double gamma_ratio,
            const int64_t[::1] pair_l, const double[::1] pair_kappa, const int64_t[::1] pair_off,
            const double complex[:, ::1] proj, Py_ssize_t sample_every,
            double complex[:, :, ::1] out, double complex[:, ::1] state_sum,
            double complex[:, ::1] m_sum, double radius, uint8_t[::1] diverged):
    """Advance every live trajectory by ``n_steps`` Euler-Maruyama steps in place."""
    cdef Py_ssize_t n_traj = state.shape[0]
    cdef Py_ssize_t dim = state.shape[1]
    cdef Py_ssize_t n_samp = out.shape[1]
    cdef Py_ssize_t n_rec = proj.shape[0]
    cdef Py_ssize_t n_pair = pair_l.shape[0]
    cdef bint record = n_samp > 0
    if dim > MAXDIM or n_rec > MAXREC:
        raise ValueError("state or projection too large for the compiled kernel")
    if record and n_samp * sample_every != n_steps:
        raise ValueError("n_steps must equal out.shape[1] * sample_every")
    if proj.shape[1] != dim:
        raise ValueError("projection does not match the state dimension")

    cdef uint64_t half = 0
    cdef Py_ssize_t p
    for p in range(n_pair):
        half += 1 if pair_l[p] == 0 else 2
    if 2 * half > MAXDIM:
        raise ValueError("too many noise sources")

    cdef double sqdt = sqrt(dt)
    cdef double chi0 = g * sqrt(gamma_ratio)
    cdef double drive = sigma * sqrt(gamma_ratio) / g
    cdef double g2 = g * g
    cdef double r2 = radius * radius
    cdef double inv_blk = 1.0 / <double>sample_every if sample_every > 0 else 0.0

    cdef double complex z[MAXDIM]
    cdef double complex nz[MAXDIM]
    cdef double complex zacc[MAXDIM]
    cdef double eta[MAXDIM]
    cdef double complex macc, macc_p, M, Mp, sM, sMp, dep, dep_p, a, ap, b, bp, q
    cdef double k, h, sk, e1, e2, e3, e4
    cdef Py_ssize_t t, s, i, j, o, ni, isamp, nblk
    cdef int64_t cnt
    cdef uint64_t key, base
    cdef bint bad
    cdef double complex I = 1j

    with nogil:
        for t in range(n_traj):
            if diverged[t]:
                continue
            for i in range(dim):
                z[i] = state[t, i]
            for i in range(dim):
                zacc[i] = 0
            macc = 0
            macc_p = 0
            cnt = step_counter[t]
            key = keys[t]
            nblk = 0
            isamp = 0
            bad = False
            for s in range(n_steps):
                base = <uint64_t>cnt * half
                for j in range(<Py_ssize_t>half):
                    normal_pair(key, base + <uint64_t>j, &eta[2 * j], &eta[2 * j + 1])

                dep = 0
                dep_p = 0
                for p in range(n_pair):
                    k = pair_kappa[p]
                    o = pair_off[p]
                    if pair_l[p] == 0:
                        dep = dep + 0.5 * k * z[o] * z[o]
                        dep_p = dep_p + 0.5 * k * z[o + 1] * z[o + 1]
                    else:
                        dep = dep + k * z[o] * z[o + 2]
                        dep_p = dep_p + k * z[o + 1] * z[o + 3]
                if full:
                    M = chi0 * z[0]
                    Mp = chi0 * z[1]
                else:
                    M = sigma - g2 * dep
                    Mp = sigma - g2 * dep_p
                sM = csqrt(M)
                sMp = csqrt(Mp)

                ni = 0
                for p in range(n_pair):
                    k = pair_kappa[p]
                    o = pair_off[p]
                    if pair_l[p] == 0:
                        sk = sqrt(k)
                        a = z[o]
                        ap = z[o + 1]
                        nz[o] = a + (-a + k * M * ap) * dt + sk * sM * eta[ni] * sqdt
                        nz[o + 1] = ap + (-ap + k * Mp * a) * dt + sk * sMp * eta[ni + 1] * sqdt
                        ni += 2
                    else:
                        h = sqrt(0.5 * k)
                        a = z[o]
                        ap = z[o + 1]
                        b = z[o + 2]
                        bp = z[o + 3]
                        e1 = eta[ni]
                        e2 = eta[ni + 1]
                        e3 = eta[ni + 2]
                        e4 = eta[ni + 3]
                        nz[o] = a + (-a + k * M * bp) * dt + h * sM * (e1 + I * e3) * sqdt
                        nz[o + 1] = ap + (-ap + k * Mp * b) * dt + h * sMp * (e2 + I * e4) * sqdt
                        nz[o + 2] = b + (-b + k * M * ap) * dt + h * sM * (e1 - I * e3) * sqdt
                        nz[o + 3] = bp + (-bp + k * Mp * a) * dt + h * sMp * (e2 - I * e4) * sqdt
                        ni += 4
                if full:
                    nz[0] = z[0] + (drive - gamma_ratio * z[0] - chi0 * dep) * dt
                    nz[1] = z[1] + (drive - gamma_ratio * z[1] - chi0 * dep_p) * dt

                for i in range(dim):
                    # the negated test also rejects nan/inf
                    if not (nz[i].real * nz[i].real + nz[i].imag * nz[i].imag <= r2):
                        bad = True
                        break
                if bad:
                    diverged[t] = 1
                    break
                for i in range(dim):
                    z[i] = nz[i]
                cnt += 1

                if record:
                    for i in range(dim):
                        zacc[i] = zacc[i] + z[i]
                    macc = macc + M
                    macc_p = macc_p + Mp
                    nblk += 1
                    if nblk == sample_every:
                        for j in range(n_rec):
                            q = 0
                            for i in range(dim):
                                q = q + proj[j, i] * zacc[i]
                            out[t, isamp, j] = q * inv_blk
                        for i in range(dim):
                            state_sum[t, i] = state_sum[t, i] + zacc[i]
                            zacc[i] = 0
                        isamp += 1
                        nblk = 0
            for i in range(dim):
                state[t, i] = z[i]
            step_counter[t] = cnt
            m_sum[t, 0] = m_sum[t, 0] + macc
            m_sum[t, 1] = m_sum[t, 1] + macc_p

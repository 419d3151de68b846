"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py`` (lines are printed even under
output capture) or ``python tests/test_acceptance.py``.
"""
import hashlib
import math
import sys
import time
import warnings
from fractions import Fraction

import numpy as np
import pytest

from lgdopo.classical import (DopoParams, excited_solution, signal_profile, stability,
                              threshold_sigma)
from lgdopo.cli import main
from lgdopo.coupling import kappa_ladder, overlap_integral
from lgdopo.linear_quantum import (QuadratureSelector, bright_mode_system, empty_mode_spectrum,
                                   empty_mode_system, matrix_spectrum, noise_reduction_percent,
                                   projection_spectra)
from lgdopo.modes import (CavityGeometry, TransverseModeId, family_members, mode_amplitude,
                          resonance_frequency)

from _mc_runs import default_run


@pytest.fixture
def report(capsys):
    def emit(n, title, ok, detail, elapsed):
        with capsys.disabled():
            print(f"\nCRITERION {n} {'PASS' if ok else 'FAIL'}: {title} [{detail}; {elapsed:.2f} s]")
        return ok
    return emit


def test_criterion_1_kappa_oracle(report):
    t0 = time.perf_counter()
    lad = {f: kappa_ladder(f).kappas for f in range(7)}
    named = (lad[2][2] == Fraction(1, 2) and lad[3][3] == Fraction(1, 3)
             and lad[4][2] == Fraction(2, 3) and lad[4][4] == Fraction(1, 6))
    worst = 0.0
    for f in range(7):
        for l in range(f % 2, f + 1, 2):
            ex = overlap_integral(f, l)
            worst = max(worst, abs(overlap_integral(f, l, "quadrature") / float(ex) - 1))
    el = time.perf_counter() - t0
    ok = named and worst < 1e-12 and el < 1.0
    assert report(1, "exact kappa ladders f <= 6", ok, f"named values {named}, quadrature rel err {worst:.1e}", el)


def test_criterion_2_table_reconstruction(report):
    t0 = time.perf_counter()
    want = {(2, 2): "88.89", (3, 3): "75.00", (4, 2): "96.00", (4, 4): "48.98"}
    got = {}
    ok = True
    for (f, l), pct in want.items():
        k = kappa_ladder(f).kappas[l]
        exact = 100 * 4 * k / (1 + k) ** 2  # rational
        val = noise_reduction_percent(float(k))
        got[f, l] = f"{val:.2f}"
        ok &= got[f, l] == pct and f"{float(exact):.4g}" == f"{val:.4g}"
    el = time.perf_counter() - t0
    ok &= el < 1.0
    assert report(2, "noise-reduction table at omega = 0", ok,
                  ", ".join(f"f={f},l={l}: {v}%" for (f, l), v in got.items()), el)


def test_criterion_3_threshold_and_stability(report):
    t0 = time.perf_counter()
    thr = [threshold_sigma(DopoParams(f, 1.0, 0.01, 2.0)) for f in range(9)]
    thr_err = max(abs(s - 1) for s in thr)
    p = DopoParams(2, 2.5, 0.01)
    st0 = stability(excited_solution(p, 0), p)[1]
    st2 = stability(excited_solution(p, 2), p)[1]
    gold = []
    for f in (1, 3, 5, 7):
        for sigma in (1.5, 4.0):
            q = DopoParams(f, sigma, 0.01)
            lam, stable = stability(excited_solution(q, 1), q)
            gold.append(stable and int(np.sum(np.abs(lam) <= 1e-10)) == 1)
    el = time.perf_counter() - t0
    ok = thr_err <= 1e-8 and st0 and not st2 and all(gold) and el < 10
    assert report(3, "threshold, branch stability, Goldstone mode", ok,
                  f"max |sigma_th - 1| {thr_err:.1e}, f=2 k0 stable {st0}, k2 stable {st2}, "
                  f"single zero eigenvalue for odd f {all(gold)}", el)


def test_criterion_4_spectral_engine(report):
    t0 = time.perf_counter()
    grid = np.linspace(0, 10, 100)
    worst = 0.0
    for k in (1 / 6, 1 / 3, 1 / 2, 2 / 3):
        sys_ = empty_mode_system(k)
        cf = empty_mode_spectrum(k, grid)
        C = projection_spectra(k, grid)
        for kind in "cs":
            sy = matrix_spectrum(sys_, QuadratureSelector(2, kind, "y"), grid)
            sx = matrix_spectrum(sys_, QuadratureSelector(2, kind, "x"), grid)
            worst = max(worst, np.max(np.abs(sy - cf.S_y)), np.max(np.abs(sx - cf.S_x)),
                        np.max(np.abs(sy - 4 * C[2])), np.max(np.abs(sx - 4 * C[0])))
    el = time.perf_counter() - t0
    ok = worst < 1e-10 and el < 1.0
    assert report(4, "resolvent engine vs closed forms", ok, f"max abs diff {worst:.1e}", el)


def test_criterion_5_bright_modes(report):
    t0 = time.perf_counter()
    V0 = 1 + matrix_spectrum(bright_mode_system(0, 1.001), QuadratureSelector(0, "0", "y"), 0.0)
    crossed = [matrix_spectrum(bright_mode_system(1, s), QuadratureSelector(1, "s", "y"), 0.0)
               for s in (1.5, 4.0)]
    err = max(abs(c + 1) for c in crossed)
    el = time.perf_counter() - t0
    ok = 0 <= V0 < 0.01 and err < 1e-8 and el < 5
    assert report(5, "critical and noncritical bright-mode squeezing", ok,
                  f"l0=0 V(0) at sigma=1.001: {V0:.2e}, l0=1 crossed Y S(0)+1: {err:.1e}", el)


@pytest.mark.slow
def test_criterion_6_monte_carlo(report):
    t0 = time.perf_counter()
    cfg, sp2, res2 = default_run(2.0)
    _, sp15, res15 = default_run(1.5)
    _, sp4, res4 = default_run(4.0)
    target = 1 / 9
    rel = {k: abs(sp2[k].V[0] / target - 1) for k in ("Y_c,l=2", "Y_s,l=2")}
    reject = max(r.report.fraction for r in (res2, res15, res4))
    nonc = {}
    for k in ("Y_c,l=2", "Y_s,l=2"):
        a, b = sp15[k], sp4[k]
        nonc[k] = abs(a.V[0] - b.V[0]) < a.ci_halfwidth[0] + b.ci_halfwidth[0]
    el = time.perf_counter() - t0
    ok = max(rel.values()) < 0.05 and reject < 0.01 and all(nonc.values())
    detail = (", ".join(f"{k} V(0)={sp2[k].V[0]:.4f} ({100 * r:.1f}%)" for k, r in rel.items())
              + f", max rejection {100 * reject:.2f}%"
              + ", sigma 1.5 vs 4: " + ", ".join(
                  f"{k} {sp15[k].V[0]:.4f}+-{sp15[k].ci_halfwidth[0]:.4f} vs "
                  f"{sp4[k].V[0]:.4f}+-{sp4[k].ci_halfwidth[0]:.4f}" for k in nonc))
    assert report(6, "positive-P ensemble reproduces V_y(0) = 1/9", ok, detail, el)


def _plane_quadrature(n_rad=60, n_ang=64):
    u, wu = np.polynomial.laguerre.laggauss(n_rad)
    r = np.sqrt(u / 2.0)
    phi = 2 * np.pi * np.arange(n_ang) / n_ang
    R, P = np.meshgrid(r, phi, indexing="ij")
    return R, P, 0.25 * (wu * np.exp(u))[:, None] * (2 * np.pi / n_ang)


def test_criterion_7_mode_math(report):
    t0 = time.perf_counter()
    R, P, W = _plane_quadrature()
    modes = [m for f in range(7) for m in family_members(f)]
    A = np.array([mode_amplitude(m, 1.0, R, P).ravel() for m in modes])
    G = (np.conj(A) * np.broadcast_to(W, R.shape).ravel()) @ A.T
    ortho = float(np.max(np.abs(G - np.eye(len(modes)))))
    geo = CavityGeometry(R1=2.0, R2=3.0, L=1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        degen = all(len({resonance_frequency(geo, q, m.radial, m.oam) for m in family_members(f)}) == 1
                    for f in range(7) for q in (1, 5))
    spread = 0.0
    for f in (2, 4, 6):
        p = DopoParams(f, 2.0, 0.01)
        sol = excited_solution(p, 0)
        for r in (0.3, 0.9, 1.7):
            vals = sol.rho**2 * np.abs(mode_amplitude(TransverseModeId(f, 0), 1.0, r,
                                                      np.linspace(0, 2 * np.pi, 61))) ** 2
            spread = max(spread, float(np.ptp(vals) / vals.max()))
    nodal = True
    for f in (1, 3, 5):
        p = DopoParams(f, 2.0, 0.01)
        _, _, I = signal_profile(excited_solution(p, 1), p, n_points=101, theta=0.0)
        nodal &= bool(np.max(I[:, 50]) <= 1e-12 * I.max() and I.max() > 0)
    el = time.perf_counter() - t0
    ok = ortho <= 1e-8 and degen and spread <= 1e-12 and nodal
    assert report(7, "mode orthonormality, degeneracy and profile symmetry", ok,
                  f"orthonormality err {ortho:.1e}, exact degeneracy {degen}, "
                  f"even-f spread {spread:.1e}, odd-f nodal line {nodal}", el)


def _digest(d):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(d.iterdir())}


def test_criterion_8_reproducibility(report, tmp_path, capsys):
    import json

    t0 = time.perf_counter()
    digests = []
    for run, threads in (("a", 1), ("b", 1), ("c", 4)):
        cfg = tmp_path / f"{run}.json"
        cfg.write_text(json.dumps({
            "operating_point": {"family": 3, "sigma": 2.0, "g": 0.01},
            "simulation": {"n_traj": 6, "record_len": 0.05 * 1024, "burn_in": 5.0, "seed": 99,
                           "n_threads": threads},
            "output": {"formats": ["csv", "raw"]}}))
        out = tmp_path / run
        codes = [main(["simulate", "--config", str(cfg), "--out", str(out / "sim")]),
                 main(["kappa", "--max-family", "6", "--out", str(out / "tab")]),
                 main(["profile", "--config", str(cfg), "--grid", "51", "--out", str(out / "tab")]),
                 main(["spectrum", "--config", str(cfg), "--mode", "3", "--out", str(out / "tab")])]
        assert codes == [0, 0, 0, 0]
        digests.append({**_digest(out / "sim"), **_digest(out / "tab")})
    capsys.readouterr()
    el = time.perf_counter() - t0
    same_runs = digests[0] == digests[1]
    same_threads = digests[0] == digests[2]
    ok = same_runs and same_threads and len(digests[0]) >= 10
    assert report(8, "byte-identical outputs", ok,
                  f"{len(digests[0])} files, repeat identical {same_runs}, "
                  f"1 vs 4 threads identical {same_threads}", el)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))

from fractions import Fraction

import numpy as np
import pytest

from lgdopo.coupling import kappa_ladder
from lgdopo.errors import SpectrumDivergenceError, ValidationError
from lgdopo.linear_quantum import (LinearSystem, QuadratureSelector, analytic_spectrum,
                                   bright_mode_system, empty_mode_eigenbasis, empty_mode_spectrum,
                                   empty_mode_system, matrix_spectrum, noise_reduction_percent,
                                   projection_spectra, squeezing_table)

KAPPAS = [1 / 6, 1 / 3, 1 / 2, 2 / 3]
GRID = np.linspace(0.0, 10.0, 100)


def test_empty_system_exact_form():
    s = empty_mode_system(0.25, gamma_s=2.0)
    k = 0.25
    J = 2.0 * np.array([[-1, 0, 0, k], [0, -1, k, 0], [0, k, -1, 0], [k, 0, 0, -1]])
    assert np.array_equal(s.drift, J)
    assert np.array_equal(s.diffusion, s.diffusion.T)
    assert s.labels == ("a+2", "a+2+", "a-2", "a-2+")


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.2, 1.5])
def test_kappa_out_of_range(bad):
    for fn in (empty_mode_system, empty_mode_eigenbasis):
        with pytest.raises(ValidationError):
            fn(bad)
    with pytest.raises(ValidationError):
        empty_mode_spectrum(bad, 0.0)
    with pytest.raises(ValidationError):
        projection_spectra(bad, 0.0)


def test_eigenvalues_kappa_half():
    lam = np.sort(np.linalg.eigvals(empty_mode_system(0.5).drift).real)
    assert np.allclose(lam, [-1.5, -1.5, -0.5, -0.5], atol=1e-14)


@pytest.mark.parametrize("k", KAPPAS)
def test_eigenbasis_orthonormal_and_diagonalizes(k):
    lam, W = empty_mode_eigenbasis(k)
    assert np.allclose(W.T @ W, np.eye(4), atol=1e-15)
    J = empty_mode_system(k).drift
    assert np.allclose(J @ W, W * lam, atol=1e-14)


def test_small_kappa_decouples():
    J = empty_mode_system(1e-12).drift
    assert np.allclose(J, -np.eye(4), atol=1e-11)


def test_closed_form_examples():
    assert float(empty_mode_spectrum(0.5, 0.0).S_y) == pytest.approx(-8 / 9, abs=1e-15)
    assert float(empty_mode_spectrum(2 / 3, 0.0).S_y) == pytest.approx(-24 / 25, abs=1e-15)
    assert abs(float(empty_mode_spectrum(0.5, 1e8).S_y)) < 1e-15
    assert float(empty_mode_spectrum(1 - 1e-9, 0.0).S_y) == pytest.approx(-1.0, abs=1e-8)
    # spectra scale with omega / gamma_s only
    a = empty_mode_spectrum(0.3, 2.0, gamma_s=2.0).S_y
    b = empty_mode_spectrum(0.3, 1.0).S_y
    assert a == pytest.approx(b, rel=1e-15)


@pytest.mark.parametrize("k", KAPPAS)
def test_projection_relations(k):
    C = projection_spectra(k, GRID)
    sp = empty_mode_spectrum(k, GRID)
    assert np.max(np.abs(4 * C[2] - sp.S_y)) < 1e-12
    assert np.max(np.abs(4 * C[0] - sp.S_x)) < 1e-12
    assert np.array_equal(C[0] + C[1], np.zeros_like(GRID))
    assert np.array_equal(C[2] + C[3], np.zeros_like(GRID))


@pytest.mark.parametrize("k", KAPPAS)
@pytest.mark.parametrize("kind", ["c", "s"])
def test_resolvent_matches_closed_form(k, kind):
    sys_ = empty_mode_system(k)
    sp = empty_mode_spectrum(k, GRID)
    Sy = matrix_spectrum(sys_, QuadratureSelector(2, kind, "y"), GRID)
    Sx = matrix_spectrum(sys_, QuadratureSelector(2, kind, "x"), GRID)
    assert np.max(np.abs(Sy - sp.S_y)) < 1e-10
    assert np.max(np.abs(Sx - sp.S_x)) < 1e-10
    C = projection_spectra(k, GRID)
    assert np.max(np.abs(Sy - 4 * C[2])) < 1e-10


@pytest.mark.parametrize("beta", [0.1, 0.7, 2.3])
def test_rotated_hybrid_invariance(beta):
    sys_ = empty_mode_system(1 / 3, l=3)
    for kind in ("c", "s"):
        for q in ("x", "y"):
            ref = matrix_spectrum(sys_, QuadratureSelector(3, kind, q), GRID)
            rot = matrix_spectrum(sys_, QuadratureSelector(3, kind, q, beta), GRID)
            assert np.max(np.abs(ref - rot)) < 1e-12


def test_single_lg_mode_not_squeezed():
    # an individual LG mode only sees the diffusion of its pair: amplified and squeezed halves cancel
    sys_ = empty_mode_system(0.5)
    S = matrix_spectrum(sys_, QuadratureSelector(2, "+", "y"), GRID)
    sp = empty_mode_spectrum(0.5, GRID)
    assert np.allclose(S, 0.5 * (sp.S_x + sp.S_y), atol=1e-12)


def test_zero_diffusion_gives_vacuum():
    J = empty_mode_system(0.4).drift
    s = LinearSystem(J, np.zeros((4, 4)), ("a", "b", "c", "d"))
    assert np.all(matrix_spectrum(s, QuadratureSelector(2, "c", "y"), GRID) == 0)


def test_bad_system_and_selector():
    with pytest.raises(ValidationError):
        LinearSystem(np.eye(2), np.array([[0, 1], [0, 0]]), ("a", "b"))
    with pytest.raises(ValidationError):
        LinearSystem(np.eye(3), np.eye(3), ("a", "b"))
    with pytest.raises(ValidationError):
        matrix_spectrum(empty_mode_system(0.5), QuadratureSelector(0, "0", "y"), 0.0)
    with pytest.raises(ValidationError):
        QuadratureSelector(0, "c")
    with pytest.raises(ValidationError):
        QuadratureSelector(2, "0")
    with pytest.raises(ValidationError):
        QuadratureSelector(2, "c", "z")
    with pytest.raises(ValidationError):
        bright_mode_system(0, 0.9)
    with pytest.raises(ValidationError):
        bright_mode_system(2, 1.5)


def test_critical_squeezing_at_threshold():
    Y = QuadratureSelector(0, "0", "y")
    V = 1 + matrix_spectrum(bright_mode_system(0, 1.001), Y, 0.0)
    assert 0 <= V < 0.01
    vals = [1 + matrix_spectrum(bright_mode_system(0, s), Y, 0.0) for s in (3.0, 2.0, 1.2, 1.01)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("sigma", [1.5, 2.0, 4.0, 10.0])
def test_l1_crossed_mode_perfect_squeezing(sigma):
    s = bright_mode_system(1, sigma)
    lam = np.linalg.eigvals(s.drift)
    assert np.sum(np.abs(lam) < 1e-12) == 1
    assert matrix_spectrum(s, QuadratureSelector(1, "s", "y"), 0.0) == pytest.approx(-1.0, abs=1e-8)


def test_l1_goldstone_overlap_diverges():
    s = bright_mode_system(1, 2.0)
    with pytest.raises(SpectrumDivergenceError) as ei:
        matrix_spectrum(s, QuadratureSelector(1, "s", "x"), 0.0)
    assert abs(ei.value.eigenvalue) < 1e-9
    # away from omega = 0 the same selector is finite
    assert np.isfinite(matrix_spectrum(s, QuadratureSelector(1, "s", "x"), 0.5))


def test_bright_g_independent():
    a = bright_mode_system(1, 2.0, g=0.01)
    b = bright_mode_system(1, 2.0, g=0.3)
    assert np.array_equal(a.drift, b.drift) and np.array_equal(a.diffusion, b.diffusion)


def test_physicality_of_analytic_outputs():
    for k in KAPPAS:
        sp = empty_mode_spectrum(k, GRID)
        assert np.all(1 + sp.S_y >= 0) and np.all(1 + sp.S_x >= 0)
    for sigma in (1.001, 1.5, 4.0):
        for q in ("x", "y"):
            r = analytic_spectrum(bright_mode_system(0, sigma), QuadratureSelector(0, "0", q), GRID)
            assert np.all(r.V >= -1e-12)
        r = analytic_spectrum(bright_mode_system(1, sigma), QuadratureSelector(1, "s", "y"), GRID)
        assert np.all(r.V >= -1e-12)
        r = analytic_spectrum(bright_mode_system(1, sigma), QuadratureSelector(1, "c", "y"), GRID)
        assert np.all(r.V >= -1e-12)


def test_spectrum_result_rows():
    r = analytic_spectrum(empty_mode_system(0.5), QuadratureSelector(2, "c", "y"), [0.0, 1.0])
    rows = list(r.rows())
    assert list(rows[0]) == ["omega_over_gamma", "S", "V", "source", "ci_halfwidth"]
    assert rows[0]["V"] == pytest.approx(1 / 9, abs=1e-12)
    assert rows[0]["ci_halfwidth"] == ""


@pytest.mark.parametrize("f,l,pct", [(2, 2, "88.89"), (3, 3, "75.00"), (4, 2, "96.00"), (4, 4, "48.98")])
def test_table_percentages(f, l, pct):
    k = kappa_ladder(f).kappas[l]
    exact = 100 * 4 * k / (1 + k) ** 2
    assert f"{noise_reduction_percent(float(k)):.2f}" == pct
    assert noise_reduction_percent(float(k)) == pytest.approx(float(exact), rel=1e-14)


def test_squeezing_table_rows():
    rows = squeezing_table(4)
    keys = {(r["family"], r["l"]) for r in rows}
    assert keys == {(2, 2), (3, 3), (4, 2), (4, 4)}
    assert all(Fraction(r["kappa"]) < 1 for r in rows)


def test_inset_claim_reading():
    # kappa = 1/2 gives 88.9%, above it the reduction exceeds 90% only from kappa ~ 0.52
    assert noise_reduction_percent(0.5) == pytest.approx(800 / 9, rel=1e-14)
    assert noise_reduction_percent(0.52) > 90

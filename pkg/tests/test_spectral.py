import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from logpot.discretize import assemble
from logpot.disc_oracle import disc_opnorm, disc_schatten
from logpot.geometry import Disc, rasterize
from logpot.spectral import (ConvergenceError, Spectrum, eigen_sym, first_eigenfunction_diagnostics,
                             jacobi_eigh, negative_count, operator_norm, order_by_modulus,
                             schatten_from_spectrum, trace_power)


def spec(vals):
    w = np.asarray(vals, float)
    return Spectrum(w[order_by_modulus(w)])


def test_diag_ordering():
    s = eigen_sym(np.diag([3.0, -1.0, 2.0]), method="jacobi")
    assert np.allclose(s.eigenvalues, [3, 2, -1])


def test_two_by_two():
    a, b = 0.7, -0.2
    s = eigen_sym(np.array([[a, b], [b, a]]), method="jacobi")
    assert sorted(s.eigenvalues) == pytest.approx(sorted([a + b, a - b]), abs=1e-15)


def test_tie_break():
    w = np.array([-2.0, 2.0, 1.0, -1.0])
    assert np.array_equal(w[order_by_modulus(w)], [2, -2, 1, -1])


def test_charnums():
    s = spec([0.5, -0.25])
    assert np.allclose(s.charnums * s.eigenvalues, 1)


def test_nonsymmetric_rejected():
    with pytest.raises(ValueError):
        eigen_sym(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_jacobi_sweep_limit():
    A = np.random.default_rng(1).normal(size=(30, 30))
    with pytest.raises(ConvergenceError):
        jacobi_eigh(A + A.T, max_sweeps=1)


@pytest.mark.parametrize("n", [5, 40, 120])
def test_jacobi_against_lapack(n):
    rng = np.random.default_rng(n)
    A = rng.normal(size=(n, n))
    A = A + A.T
    w, V = jacobi_eigh(A)
    assert np.allclose(np.sort(w), np.linalg.eigvalsh(A), atol=1e-12 * np.linalg.norm(A))
    assert np.allclose(V.T @ V, np.eye(n), atol=1e-12)


def test_eigen_residuals_and_trace(disc):
    g = rasterize(disc, 0.09)
    A = assemble(g)
    assert g.count <= 500
    for method in ("jacobi", "lapack"):
        s = eigen_sym(A, want_vectors=True, method=method)
        fro = np.linalg.norm(A.entries)
        R = A.entries @ s.eigenvectors - s.eigenvectors * s.eigenvalues
        assert np.linalg.norm(R, axis=0).max() <= 1e-10 * fro
        assert s.eigenvalues.sum() == pytest.approx(np.trace(A.entries), rel=1e-10)


def test_disc_top_eigenvalue(disc):
    s = eigen_sym(assemble(rasterize(disc, 0.04)))
    assert abs(s.eigenvalues[0] - disc_opnorm()) / disc_opnorm() < 0.02
    assert abs(operator_norm(s) - 0.172915) / 0.172915 < 0.02
    est = schatten_from_spectrum(s, 2)
    assert abs(est.value - disc_schatten(2).value) / disc_schatten(2).value < 0.02


def test_operator_norm():
    assert operator_norm(spec([0.5, -0.1])) == 0.5
    with pytest.raises(ValueError):
        operator_norm(spec([0.0, 0.0]))


def test_schatten_small():
    assert schatten_from_spectrum(spec([-1.0, 2.0]), 2).value == pytest.approx(math.sqrt(5))
    est = schatten_from_spectrum(spec([-1.0, 2.0]), math.inf)
    assert est.value == 2.0 and est.method == "eigen"
    assert "positivity" in schatten_from_spectrum(spec([-1.0, 2.0]), 3).note
    assert schatten_from_spectrum(spec([-1.0, 2.0]), 4).note == ""
    with pytest.raises(ValueError):
        schatten_from_spectrum(spec([1.0]), 0.5)


@settings(max_examples=40, deadline=None)
@given(hnp.arrays(float, (6, 6), elements=st.floats(-3, 3)))
def test_schatten2_is_frobenius(M):
    A = M + M.T
    s = eigen_sym(A, method="jacobi")
    assert schatten_from_spectrum(s, 2).value == pytest.approx(np.linalg.norm(A), rel=1e-9, abs=1e-12)
    assert trace_power(s, 3) == pytest.approx(np.trace(A @ A @ A), rel=1e-8, abs=1e-9)


def test_schatten_monotone_on_disc(disc):
    s = eigen_sym(assemble(rasterize(disc, 0.1)))
    vals = [schatten_from_spectrum(s, p).value for p in (2, 3, 4, 6, math.inf)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_negative_count():
    assert negative_count(spec([1.0, -1.0, -1.0]), 1e-10) == 2
    with pytest.raises(ValueError):
        negative_count(spec([1.0]), -1)


def test_negative_count_inside_unit_disc():
    for d in (Disc((0, 0), 0.9), Disc((0.05, 0), 0.5)):
        s = eigen_sym(assemble(rasterize(d, 0.05)))
        assert negative_count(s, 1e-10) == 0


def test_diagnostics_synthetic():
    s = Spectrum(np.array([1.0, 1.0]), np.eye(2))
    assert first_eigenfunction_diagnostics(s)["gap"] == 0
    with pytest.raises(ValueError):
        first_eigenfunction_diagnostics(spec([1.0]))


def test_diagnostics_small_disc():
    # a disc of radius 1/2 keeps the radial mode on top
    s = eigen_sym(assemble(rasterize(Disc((0, 0), 0.5), 0.05)), want_vectors=True)
    d = first_eigenfunction_diagnostics(s)
    assert d["sign_consistent"]
    assert d["gap"] > 1e-9

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helfrich_ch.sphere import (
    QuadratureGrid,
    ShapeError,
    build_basis,
    constant_coeffs,
    h1_seminorm,
    h2_seminorm,
    inverse_laplace_beltrami,
    l2_norm,
    laplace_beltrami,
    mode_index,
    normal_component_coeffs,
    project_K2,
    project_mean_free,
)
from oracles import dense_analysis, fd_surface_laplacian, real_harmonic


@pytest.fixture(scope="module")
def b8():
    basis = build_basis(8, 1.0)
    return basis, QuadratureGrid(basis)


def test_eigenvalue_table():
    b = build_basis(8, 1.0)
    assert b.degree_eigenvalue(0) == 0.0
    assert build_basis(8, 2.0).degree_eigenvalue(1) == pytest.approx(0.5, abs=1e-16)
    assert b.nmodes == 81 and len(b.degrees) == 81
    lam = [b.degree_eigenvalue(l) for l in range(9)]
    assert np.all(np.diff(lam) > 0)


def test_degree_two_eigenvalue_against_finite_differences():
    F, lap = fd_surface_laplacian(lambda t, p: real_harmonic(2, 1, t, p), n=400)
    mask = np.abs(F) > 0.1 * np.abs(F).max()
    ratio = lap[mask] / F[mask]
    assert np.abs(ratio + 6.0).max() < 1e-3


@pytest.mark.parametrize("bad", [(1, 1.0), (8, 0.0), (8, -1.0), (2.5, 1.0)])
def test_build_basis_rejects(bad):
    with pytest.raises(ValueError):
        build_basis(*bad)


def test_grid_weights_and_oversampling():
    for R in (1.0, 2.5):
        g = QuadratureGrid(build_basis(10, R))
        assert abs(g.weights.sum() - 4 * math.pi * R**2) < 1e-13 * 4 * math.pi * R**2
        assert g.shape == (22, 44)
    with pytest.raises(ShapeError):
        QuadratureGrid(build_basis(10, 1.0), nlat=20)


@pytest.mark.parametrize("R", [1.0, 1.7])
def test_synthesis_matches_independent_harmonics(R):
    basis = build_basis(6, R)
    g = QuadratureGrid(basis)
    th, ph = g.mesh()
    for l, m in [(0, 0), (1, -1), (1, 0), (1, 1), (3, 2), (4, -3), (6, 6), (6, -5)]:
        c = np.zeros(basis.nmodes)
        c[mode_index(l, m)] = 1.0
        np.testing.assert_allclose(g.synthesis(c), real_harmonic(l, m, th, ph, R), atol=1e-13)


def test_analysis_of_constant_and_single_mode(b8):
    basis, g = b8
    a = g.analysis(np.full(g.shape, 3.0))
    assert abs(a[0] - 3.0 * math.sqrt(4 * math.pi)) < 1e-13
    assert np.abs(a[1:]).max() < 1e-13
    th, ph = g.mesh()
    a = g.analysis(real_harmonic(3, 2, th, ph))
    k = mode_index(3, 2)
    assert abs(a[k] - 1) < 1e-13
    assert np.abs(np.delete(a, k)).max() < 1e-12


def test_analysis_against_dense_projection(b8):
    basis, g = b8
    rng = np.random.default_rng(0)
    c = rng.standard_normal(basis.nmodes)
    v = g.synthesis(c)
    np.testing.assert_allclose(g.analysis(v), dense_analysis(v, g, basis), atol=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(2, 10), st.floats(0.5, 3.0))
def test_round_trip_and_parseval(seed, lmax, R):
    basis = build_basis(lmax, R)
    g = QuadratureGrid(basis)
    c = np.random.default_rng(seed).standard_normal(basis.nmodes)
    v = g.synthesis(c)
    assert np.abs(g.analysis(v) - c).max() < 1e-12 * max(1, np.abs(c).max())
    assert g.integrate(v * v) == pytest.approx(np.sum(c * c), rel=1e-12)


def test_laplacian_examples(b8):
    basis, g = b8
    c = constant_coeffs(2.0, basis)
    assert np.all(laplace_beltrami(c, basis) == 0)
    nu = normal_component_coeffs(1, basis)
    np.testing.assert_allclose(laplace_beltrami(nu, basis), -2 * nu, atol=1e-15)
    R = 2.0
    b2 = build_basis(6, R)
    nu = normal_component_coeffs(3, b2)
    np.testing.assert_allclose(laplace_beltrami(nu, b2), -(2 / R**2) * nu, atol=1e-15)
    y = np.zeros(basis.nmodes)
    y[mode_index(2, -2)] = 1.0
    np.testing.assert_allclose(laplace_beltrami(y, basis), -6 * y)
    # inverse on mean-free data
    r = np.random.default_rng(1).standard_normal(basis.nmodes)
    r[0] = 0
    np.testing.assert_allclose(laplace_beltrami(inverse_laplace_beltrami(r, basis), basis), -r, atol=1e-14)


def test_spectral_laplacian_vs_finite_differences():
    # a smooth band-limited field, second-order convergence of the FD operator
    basis = build_basis(5, 1.0)
    c = np.random.default_rng(3).standard_normal(basis.nmodes)

    def f(t, p):
        return sum(c[k] * real_harmonic(int(l), int(m), t, p) for k, (l, m) in enumerate(zip(basis.degrees, basis.orders)))

    def lapf(t, p):
        return sum(-basis.eigenvalues[k] * c[k] * real_harmonic(int(l), int(m), t, p)
                   for k, (l, m) in enumerate(zip(basis.degrees, basis.orders)))

    errs = []
    for n in (50, 100):
        th = np.linspace(0.3, math.pi - 0.3, n)
        _, L = fd_surface_laplacian(f, n=n)
        T, P = np.meshgrid(th, np.linspace(0, 2 * math.pi, 2 * n, endpoint=False), indexing="ij")
        errs.append(np.abs(L - lapf(T, P)).max())
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_integration_examples(b8):
    basis, g = b8
    assert g.integrate(np.ones(g.shape)) == pytest.approx(4 * math.pi, rel=1e-14)
    x, y, z = g.cartesian()
    assert abs(g.integrate(x)) < 1e-14
    assert g.integrate(x * x) == pytest.approx(4 * math.pi / 3, rel=1e-13)
    # nu_1 coefficients synthesise to x/R
    np.testing.assert_allclose(g.synthesis(normal_component_coeffs(1, basis)), x, atol=1e-14)


def test_projections(b8):
    basis, g = b8
    nu = normal_component_coeffs(2, basis)
    assert np.all(project_K2(nu) == 0)
    y = np.zeros(basis.nmodes)
    y[mode_index(2, 0)] = 1.0
    assert np.array_equal(project_K2(y), y)
    assert np.array_equal(project_mean_free(constant_coeffs(1.0, basis) + y), y)


@given(st.integers(0, 2**32 - 1))
def test_projection_properties(seed):
    basis = build_basis(6, 1.0)
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal((2, basis.nmodes))
    for P in (project_K2, project_mean_free):
        assert np.array_equal(P(P(a)), P(a))
        assert P(a) @ b == pytest.approx(a @ P(b), abs=1e-12)
    assert np.abs(project_K2(a)[:4]).max() < 1e-14


def test_norms(b8):
    basis, g = b8
    c = constant_coeffs(1.5, basis)
    assert l2_norm(c) == pytest.approx(1.5 * math.sqrt(4 * math.pi))
    assert h1_seminorm(c, basis) == 0 and h2_seminorm(c, basis) == 0
    y = np.zeros(basis.nmodes)
    y[basis.degree_slice(2)] = np.random.default_rng(0).standard_normal(5)
    y /= l2_norm(y)
    assert h1_seminorm(y, basis) ** 2 == pytest.approx(6.0, rel=1e-14)
    assert h2_seminorm(y, basis) ** 2 == pytest.approx(36.0, rel=1e-14)
    # gradient by quadrature of sampled derivatives
    gt = g.synthesis_dtheta(y)
    gp = g.synthesis_dphi(y) / g.sin_theta[:, None]
    assert g.integrate(gt**2 + gp**2) == pytest.approx(6.0, rel=1e-12)


@given(st.integers(0, 2**32 - 1), st.floats(0.5, 2.0))
def test_poincare_chain(seed, R):
    basis = build_basis(8, R)
    rng = np.random.default_rng(seed)
    c = project_K2(rng.standard_normal(basis.nmodes))
    l2 = l2_norm(c) ** 2
    g2 = h1_seminorm(c, basis) ** 2
    h2 = h2_seminorm(c, basis) ** 2
    assert l2 <= R**2 / 6 * g2 * (1 + 1e-14)
    assert R**2 / 6 * g2 <= R**4 / 36 * h2 * (1 + 1e-14)

import math

import numpy as np
import pytest

from helfrich_ch.fields import Discretization, ModelParams, init_phase, homogeneous_phase
from helfrich_ch.geometry import (
    C1_closed_form,
    C2_closed_form,
    C2_integrated,
    EmbeddingError,
    GeometryGrid,
    RadialGraphSurface,
    curvatures,
    enclosed_volume_normal_form,
    first_order_coefficient,
    lagrangian,
    reference_volume,
    surface_functionals,
    variation_check,
)
from helfrich_ch.sphere import mode_index


@pytest.fixture(scope="module")
def geo():
    return GeometryGrid(6, 1.0)


def _profile(geo, entries):
    c = np.zeros(geo.basis.nmodes)
    for (l, m), v in entries.items():
        c[mode_index(l, m)] = v
    return c


@pytest.mark.parametrize("R", [1.0, 2.0])
def test_round_sphere(R):
    p = ModelParams(R=R)
    g = GeometryGrid(4, R)
    phi = homogeneous_phase(p, Discretization(4, R)).coeffs
    f = surface_functionals(RadialGraphSurface(np.zeros(g.basis.nmodes), 0.0, g), phi, p)
    assert f.W == pytest.approx(8 * math.pi, rel=1e-12)
    assert f.A == pytest.approx(4 * math.pi * R**2, rel=1e-12)
    assert f.V == pytest.approx(reference_volume(R), rel=1e-12)
    assert np.abs(f.H - 2 / R).max() < 1e-12
    assert np.abs(f.K - 1 / R**2).max() < 1e-12
    assert f.gauss_bonnet == pytest.approx(4 * math.pi, rel=1e-12)
    assert f.F1 == pytest.approx(-(2 / R) * float(p.Lambda @ p.alpha) * 4 * math.pi * R**2, rel=1e-12)


def test_dilation(geo):
    c = np.zeros(geo.basis.nmodes)
    c[0] = math.sqrt(4 * math.pi)  # u = 1
    s = RadialGraphSurface(c, 0.25, geo, allow_rigid=True)
    p = ModelParams()
    f = surface_functionals(s, homogeneous_phase(p, Discretization(6, 1.0)).coeffs, p)
    assert f.A == pytest.approx(4 * math.pi * 1.25**2, rel=1e-12)
    assert f.V == pytest.approx(4 / 3 * math.pi * 1.25**3, rel=1e-12)
    assert f.W == pytest.approx(8 * math.pi, rel=1e-12)
    with pytest.raises(ValueError):
        RadialGraphSurface(c, 0.25, geo)


def test_gauss_bonnet_and_volume_forms(geo):
    u = _profile(geo, {(2, 0): 0.3, (3, 1): -0.2, (4, -2): 0.1})
    s = RadialGraphSurface(u, 0.5, geo)
    p = ModelParams()
    f = surface_functionals(s, homogeneous_phase(p, Discretization(6, 1.0)).coeffs, p)
    assert f.gauss_bonnet == pytest.approx(4 * math.pi, rel=1e-9)
    assert enclosed_volume_normal_form(s) == pytest.approx(f.V, rel=1e-10)


def _revolution_mean_curvature(rfun, theta, d=1e-4):
    # profile (x, z) = r (sin t, cos t); principal curvatures from the meridian and parallel
    def xz(t):
        r = rfun(t)
        return r * np.sin(t), r * np.cos(t)

    x, z = xz(theta)
    xp = (xz(theta + d)[0] - xz(theta - d)[0]) / (2 * d)
    zp = (xz(theta + d)[1] - xz(theta - d)[1]) / (2 * d)
    xpp = (xz(theta + d)[0] - 2 * x + xz(theta - d)[0]) / d**2
    zpp = (xz(theta + d)[1] - 2 * z + xz(theta - d)[1]) / d**2
    speed = np.hypot(xp, zp)
    # curvatures with respect to the inward normal (zp, -xp) / speed
    k_mer = (xpp * zp - zpp * xp) / speed**3
    k_par = -zp / (x * speed)
    return k_mer + k_par


def test_mean_curvature_against_surface_of_revolution(geo):
    a2, a4 = 0.3, 0.15
    u = _profile(geo, {(2, 0): a2, (4, 0): a4})
    s = RadialGraphSurface(u, 0.5, geo)
    H = curvatures(s).H
    th = geo.grid.theta
    n2 = math.sqrt(5 / (4 * math.pi))
    n4 = math.sqrt(9 / (4 * math.pi))

    def rfun(t):
        c = np.cos(t)
        return 1 + 0.5 * (a2 * n2 * (3 * c**2 - 1) / 2 + a4 * n4 * (35 * c**4 - 30 * c**2 + 3) / 8)

    ref = _revolution_mean_curvature(rfun, th)
    assert np.abs(H[:, 0] - ref).max() < 1e-6
    assert np.abs(H - H[:, :1]).max() < 1e-12


def test_variation_formulas():
    p = ModelParams()
    d = Discretization(6, 1.0)
    geo = GeometryGrid(6, 1.0)
    phi, _ = init_phase(p, d, 0.1, seed=4)
    u = _profile(geo, {(2, 1): 0.4, (3, -3): 0.2, (5, 2): -0.1})
    for e in variation_check(u, phi.coeffs, p, geo, rho_fd=1e-3):
        assert e.rel_error < 1e-5, e


def test_closed_forms():
    p = ModelParams(kappa=2.0, sigma=0.5, R=1.5)
    assert C1_closed_form(p) == pytest.approx((2 * 2 / 1.5**2 + 0.5) * 4 * math.pi * 1.5**2)
    assert C2_integrated(p) == pytest.approx(C2_closed_form(p) * 4 * math.pi * 1.5**2)
    assert C2_closed_form(p.with_(Lambda=np.zeros(3))) == 0.0


def test_first_order_coefficient():
    p = ModelParams()
    d = Discretization(4, 1.0)
    geo = GeometryGrid(4, 1.0)
    phi = homogeneous_phase(p, d).coeffs
    assert first_order_coefficient(phi, p, geo) == pytest.approx(C2_integrated(p), rel=1e-8)
    q = p.with_(Lambda=np.zeros(3))
    assert abs(first_order_coefficient(phi, q, geo)) < 1e-8


def test_lagrangian_multiplier_term(geo):
    p = ModelParams()
    u = _profile(geo, {(2, 0): 0.3})
    phi = homogeneous_phase(p, Discretization(6, 1.0)).coeffs
    rho = 0.05
    s = RadialGraphSurface(u, rho, geo)
    diff = lagrangian(s, geo.embed(phi), 1.0, p) - lagrangian(s, geo.embed(phi), 0.0, p)
    V = surface_functionals(s, geo.embed(phi), p).V
    assert diff == pytest.approx(rho * (V - reference_volume(1.0)), rel=1e-12)
    # lambda_1 enters at order rho^2 only
    assert abs(diff) < 10 * rho**2


def test_embedding_error(geo):
    u = _profile(geo, {(2, 0): 1.0})
    with pytest.raises(EmbeddingError):
        RadialGraphSurface(u, 5.0, geo).radial_derivatives()
    with pytest.raises(ValueError):
        geo.embed(np.zeros(geo.basis.nmodes + 1))

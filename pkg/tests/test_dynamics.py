import math

import numpy as np
import pytest

from helfrich_ch.dynamics import (
    IMEXStepper,
    SimState,
    SolverBreakdownError,
    chemical_potential,
    distance,
    constrained_perturbation,
    check_perturbation,
    energy,
    gronwall_fit,
    integrate,
    rhs_u,
    rhs_u_factored,
    steady_residual,
    step,
    twin_run_contdep,
)
from helfrich_ch.fields import (
    ConstraintError,
    Deformation,
    Discretization,
    ModelParams,
    PhaseField,
    homogeneous_phase,
    init_deformation,
    init_phase,
)
from helfrich_ch.potential import Psi_h, flory_huggins_matrix
from helfrich_ch.sphere import mode_index


@pytest.fixture(scope="module")
def state6():
    p = ModelParams(S=50.0, dt=1e-4)
    d = Discretization(6, 1.0)
    phi, _ = init_phase(p, d, 0.1, seed=0)
    u = init_deformation(d, 0.05, seed=0)
    return p, d, SimState(0.0, phi, u)


def _energy_of(p, d, phi_c, u_c):
    return energy(PhaseField(phi_c, d), Deformation(u_c, d), p).total


def test_chemical_potential_is_energy_gradient(state6):
    # with an orthonormal basis, mu's coefficients are the partial derivatives of E
    p, d, s = state6
    mu = chemical_potential(s.phi, s.u, p).mu
    rng = np.random.default_rng(0)
    h = 1e-5
    for _ in range(12):
        i, k = int(rng.integers(3)), int(rng.integers(d.nmodes))
        e = np.zeros_like(s.phi.coeffs)
        e[i, k] = h
        fd = (_energy_of(p, d, s.phi.coeffs + e, s.u.coeffs) - _energy_of(p, d, s.phi.coeffs - e, s.u.coeffs)) / (2 * h)
        assert fd == pytest.approx(mu[i, k], abs=1e-6 * max(1.0, abs(mu[i, k])))


def test_rhs_u_is_minus_energy_gradient(state6):
    p, d, s = state6
    r = rhs_u(s.phi, s.u, p)
    h = 1e-6
    for k in range(4, d.nmodes, 5):
        e = np.zeros(d.nmodes)
        e[k] = h
        fd = (_energy_of(p, d, s.phi.coeffs, s.u.coeffs + e) - _energy_of(p, d, s.phi.coeffs, s.u.coeffs - e)) / (2 * h)
        assert -fd == pytest.approx(r[k], abs=1e-6 * max(1.0, abs(r[k])))


def test_mu_entropy_term_against_grid_evaluation(state6):
    # compare against pointwise psi_h' on the grid (within the resolved degrees)
    p, d, s = state6
    from helfrich_ch.potential import psi_h_prime

    vals = psi_h_prime(s.phi.values, p.h)
    back = d.grid.analysis(vals)
    zero_lin = chemical_potential(s.phi, Deformation.zero(d), p.with_(Lambda=np.zeros(3))).mu
    lam = d.eigenvalues
    expected = (p.b / p.eps) * (back - p.A.A @ s.phi.coeffs) + p.b * p.eps * lam * s.phi.coeffs
    np.testing.assert_allclose(zero_lin, expected, atol=1e-10)


def test_rhs_u_factored_form(state6):
    p, d, s = state6
    np.testing.assert_allclose(rhs_u(s.phi, s.u, p), rhs_u_factored(s.phi, s.u, p) * (np.arange(d.nmodes) >= 4),
                               atol=1e-11)


@pytest.mark.parametrize("R", [1.0, 1.5])
def test_degree_two_symbol(R):
    p = ModelParams(kappa=0.7, sigma=1.3, R=R)
    d = Discretization(4, R)
    c = np.zeros(d.nmodes)
    c[mode_index(2, 1)] = 1.0
    r = rhs_u(homogeneous_phase(p, d), Deformation(c, d), p)
    rate = 24 * p.kappa / R**4 + 4 * p.sigma / R**2
    assert r[mode_index(2, 1)] == pytest.approx(-rate, rel=1e-13)


def test_homogeneous_energy():
    p = ModelParams()
    d = Discretization(6, 1.0)
    phi = homogeneous_phase(p, d)
    e = energy(phi, Deformation.zero(d), p)
    area = 4 * math.pi
    assert e.E_H == pytest.approx(0.5 * p.kappa * (p.Lambda @ p.alpha) ** 2 * area, rel=1e-13)
    assert e.E_CH == pytest.approx((p.b / p.eps) * area * float(Psi_h(p.alpha, p.A, p.h)), rel=1e-12)
    assert steady_residual(phi, Deformation.zero(d), p) < 1e-13
    cp = chemical_potential(phi, Deformation.zero(d), p)
    assert np.abs(cp.w[:, 1:]).max() < 1e-12


def test_energy_mode_argument(state6):
    p, d, s = state6
    with pytest.raises(ValueError):
        energy(s.phi, s.u, p, mode="bogus")
    ex = energy(s.phi, s.u, p, mode="exact").total
    assert ex == pytest.approx(energy(s.phi, s.u, p).total, rel=1e-3)


def test_step_preserves_constraints(state6):
    p, d, s = state6
    stepper = IMEXStepper(p, d)
    cur = s
    for _ in range(50):
        cur, info = stepper(cur)
    assert np.array_equal(cur.phi.coeffs[:, 0], s.phi.coeffs[:, 0])
    assert cur.phi.sum_violation() < 1e-13
    assert np.all(cur.u.coeffs[:4] == 0)
    assert cur.step == 50 and cur.t == pytest.approx(50 * p.dt)
    assert info.diss_phi >= 0 and info.diss_u >= 0


def test_energy_decays_and_identity_holds(state6):
    p, d, s = state6
    _, hist = integrate(s, p, 200)
    E = np.array(hist.energy)
    assert np.all(np.diff(E) <= 1e-10)
    # the discrete identity holds up to an O(dt^2) remainder per step
    assert np.abs(hist.residuals(p.dt)).max() < 1e-3 * (E[0] - E[-1])


def test_implicit_euler_factor_for_pure_deformation():
    p = ModelParams(Lambda=np.zeros(3), dt=1e-2, beta=2.0)
    d = Discretization(6, 1.0)
    c = np.zeros(d.nmodes)
    c[mode_index(3, -2)] = 0.1
    s = SimState(0.0, homogeneous_phase(p, d), Deformation(c, d))
    new, _ = IMEXStepper(p, d)(s)
    lam = 12.0
    rate = (lam - 2) * (p.kappa * lam + p.sigma) / p.beta
    assert new.u.coeffs[mode_index(3, -2)] == pytest.approx(0.1 / (1 + p.dt * rate), rel=1e-13)


def test_quasistatic_deformation_when_beta_is_zero(state6):
    p, d, s = state6
    q = p.with_(beta=0.0)
    new, info = IMEXStepper(q, d)(s)
    r = rhs_u(new.phi, new.u, q)
    assert np.abs(r).max() < 1e-10
    assert info.diss_u == 0.0


def test_step_function_matches_stepper(state6):
    p, d, s = state6
    a = step(s, p)
    b, _ = IMEXStepper(p, d)(s)
    assert np.array_equal(a.phi.coeffs, b.phi.coeffs) and np.array_equal(a.u.coeffs, b.u.coeffs)


def test_breakdown_raises_typed_error():
    p = ModelParams(S=0.0, dt=1e-3, A=flory_huggins_matrix(3, 3.5))
    d = Discretization(8, 1.0)
    phi, _ = init_phase(p, d, 0.2, seed=0)
    cur = SimState(0.0, phi, init_deformation(d, 0.1))
    stepper = IMEXStepper(p, d)
    with pytest.raises(SolverBreakdownError, match="stabilization"):
        for _ in range(100):
            cur, _ = stepper(cur)


def test_constrained_perturbation(state6):
    p, d, s = state6
    dphi, du = constrained_perturbation(p, d, 1e-6, seed=3)
    check_perturbation(dphi, du)
    twin = SimState(0.0, PhaseField(s.phi.coeffs + dphi, d), Deformation(s.u.coeffs + du, d))
    assert distance(s, twin, p) == pytest.approx(1e-6, rel=1e-12)
    bad = dphi.copy()
    bad[0, 0] += 1e-3
    with pytest.raises(ConstraintError):
        check_perturbation(bad, du)


def test_contdep_zero_perturbation(state6):
    p, d, s = state6
    rep = twin_run_contdep(s, p, 0.0, T=0.005)
    assert np.all(rep.D == 0) and rep.envelope_ok and rep.amplification == 0.0


def test_contdep_short_run(state6):
    p, d, s = state6
    rep = twin_run_contdep(s, p, 1e-8, T=0.01, seed=2)
    assert rep.D[0] == pytest.approx(1e-8, rel=1e-12)
    assert rep.envelope_ok


def test_gronwall_fit_recovers_rate():
    t = np.linspace(0, 1, 11)
    c, ok = gronwall_fit(t, 1e-6 * np.exp(0.7 * t))
    assert c == pytest.approx(0.7, rel=1e-12) and ok
    c, ok = gronwall_fit(t, 1e-6 * np.exp(-2 * t))
    assert c < 0 and ok
    _, ok = gronwall_fit(t, 1e-6 * np.exp(5 * t**4))
    assert not ok

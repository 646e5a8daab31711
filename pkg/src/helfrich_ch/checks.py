"""
Acceptance criteria as functions returning verdicts.

Each check returns a list of :class:`Verdict`; the command line and the test
suite both call these.  Problem sizes not taken from the configuration are
module constants so that the reported numbers are reproducible.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .diagnostics import (
    SeparationTracker,
    degiorgi_decay,
    degiorgi_threshold,
    level_set_measures,
)
from .dynamics import (
    IMEXStepper,
    SimState,
    dissipation_residual,
    integrate,
    phase_rate_norm,
    steady_residual,
    twin_run_contdep,
)
from .fields import (
    Deformation,
    Discretization,
    ModelParams,
    homogeneous_phase,
    init_deformation,
    init_phase,
    make_rng,
)
from .geometry import (
    C1_closed_form,
    C2_closed_form,
    C2_integrated,
    GeometryGrid,
    RadialGraphSurface,
    first_order_coefficient,
    lagrangian,
    taylor_check,
    variation_check,
)
from .potential import flory_huggins_matrix, psi, psi_h, psi_h_prime, psi_prime
from .sphere import QuadratureGrid, build_basis


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    detail: str
    informational: bool = False

    def line(self) -> str:
        status = "INFO" if self.informational else ("PASS" if self.passed else "FAIL")
        return f"verdict {self.name} {status} {self.detail}"


def all_passed(verdicts) -> bool:
    return all(v.passed for v in verdicts if not v.informational)


# ----------------------------------------------------------------------
# the shared long run (criteria 1, 2b and 10)


@dataclass
class LongRun:
    params: ModelParams
    t: np.ndarray
    energy: np.ndarray
    residual: np.ndarray
    mass_dev: float
    sum_violation: float
    u_leak: float
    tracker: SeparationTracker
    final: SimState
    breakdowns: int
    seconds: float


def long_run(cfg: RunConfig, nsteps: int | None = None) -> LongRun:
    """Integrate the configured initial data with energy and constraint tracking every step."""
    from .run import initial_state

    p = cfg.params
    nsteps = cfg.nsteps if nsteps is None else nsteps
    state, _ = initial_state(cfg)
    tracker = SeparationTracker(t_start=0.1)
    acc = {"mass": 0.0, "sum": 0.0, "leak": 0.0}

    def watch(s: SimState, info=None):
        acc["mass"] = max(acc["mass"], float(np.abs(s.phi.means - p.alpha).max()))
        acc["sum"] = max(acc["sum"], s.phi.sum_violation())
        acc["leak"] = max(acc["leak"], float(np.abs(s.u.coeffs[:4]).max()))
        tracker.record(s.t, s.phi)

    watch(state)
    t0 = time.perf_counter()
    final, hist = integrate(state, p, nsteps, callback=watch)
    secs = time.perf_counter() - t0
    return LongRun(p, np.array(hist.t), np.array(hist.energy), dissipation_residual(hist, p.dt),
                   acc["mass"], acc["sum"], acc["leak"], tracker, final, hist.breakdowns, secs)


def check_constraints(run: LongRun) -> list[Verdict]:
    n = len(run.t) - 1
    return [
        Verdict("1.mass", run.mass_dev < 1e-12, f"max|mean(phi_i)-alpha_i|={run.mass_dev:.3e} (<1e-12, {n} steps)"),
        Verdict("1.simplex", run.sum_violation < 1e-11, f"max|sum(phi)-1|={run.sum_violation:.3e} (<1e-11)"),
        Verdict("1.u_leak", run.u_leak < 1e-12, f"max degree-0/1 |u|={run.u_leak:.3e} (<1e-12)"),
    ]


def check_energy_decay(run: LongRun) -> Verdict:
    inc = float(np.max(np.diff(run.energy)))
    S, auto = run.params.stabilization, run.params.b / (run.params.eps * run.params.h)
    return Verdict("2b.energy_monotone", inc <= 1e-10 and S >= auto,
                   f"max(E[n+1]-E[n])={inc:.3e} (<=1e-10) over {len(run.energy) - 1} steps, S={S:.3g}")


def check_separation(run: LongRun) -> list[Verdict]:
    tr = run.tracker
    floor = tr.floor()
    out = [
        Verdict("10.positive", tr.positive_after_start(), f"min phi>0 at all {int(np.sum(np.asarray(tr.times) >= 0.1 - 1e-12))} recorded t>=0.1"),
        Verdict("10.floor", bool(floor > 0), f"floor over [0.1,{run.final.t:.3g}]={floor:.4g}"),
    ]
    if floor > 0:
        grid = run.final.phi.disc.grid
        z = level_set_measures(run.final.phi.values, 0.5 * floor, 0, grid).z[0]
        out.append(Verdict("10.level_set", bool(np.all(z == 0)),
                           f"z_0,i(T) with delta=floor/2: {np.array2string(z, precision=3)}"))
    else:
        out.append(Verdict("10.level_set", False, "no positive floor"))
    return out


# ----------------------------------------------------------------------
# criterion 2a: refinement of the energy residual

REFINE_LMAX = 16
REFINE_T = 0.02
REFINE_DT = 1e-4
REFINE_CHI = 3.0
REFINE_S = 50.0


def refinement_params(base: ModelParams, dt: float) -> ModelParams:
    # a moderate stabilisation keeps the dynamics visible at this short horizon
    return base.with_(A=flory_huggins_matrix(base.n, REFINE_CHI), S=REFINE_S, dt=dt)


def max_residual(params: ModelParams, lmax: int, T: float, seed: int = 0) -> float:
    disc = Discretization(lmax, params.R)
    phi, _ = init_phase(params, disc, 0.1, 4, seed)
    u = init_deformation(disc, 0.01, 4, seed)
    _, hist = integrate(SimState(0.0, phi, u), params, int(round(T / params.dt)))
    return float(np.abs(dissipation_residual(hist, params.dt)).max())


def check_energy_refinement(cfg: RunConfig) -> Verdict:
    p = cfg.params
    if p.n != 3:
        p = p.with_(A=flory_huggins_matrix(p.n, REFINE_CHI))
    r1 = max_residual(refinement_params(p, REFINE_DT), REFINE_LMAX, REFINE_T)
    r2 = max_residual(refinement_params(p, REFINE_DT / 2), REFINE_LMAX, REFINE_T)
    ratio = r1 / r2
    return Verdict("2a.refinement", 3.0 <= ratio <= 5.0,
                   f"max|r| dt={REFINE_DT:g}: {r1:.3e}, dt/2: {r2:.3e}, ratio={ratio:.3f} (in [3,5])")


# ----------------------------------------------------------------------
# criterion 3: stationary states

STEADY_LMAX = 12
STEADY_EPS = 0.3
STEADY_S = 200.0
STEADY_DT = 1e-2
STEADY_MAX_STEPS = 20000


def check_homogeneous(cfg: RunConfig, nsteps: int = 20) -> Verdict:
    p = cfg.params
    disc = Discretization(cfg.lmax, p.R)
    worst = 0.0
    for dt in (p.dt, 1e-2, 1.0):
        pp = p.with_(dt=dt)
        st = IMEXStepper(pp, disc)
        s = SimState(0.0, homogeneous_phase(pp, disc), Deformation.zero(disc))
        for _ in range(nsteps):
            s1, _ = st(s)
            worst = max(worst, float(np.abs(s1.phi.coeffs - s.phi.coeffs).max()),
                        float(np.abs(s1.u.coeffs).max()))
            s = s1
    return Verdict("3.homogeneous", worst <= 1e-14, f"max per-step change={worst:.3e} (<=1e-14, dt in {{{p.dt:g},1e-2,1}})")


def converge_to_steady(base: ModelParams, lmax: int = STEADY_LMAX, tol: float = 1e-9,
                       max_steps: int = STEADY_MAX_STEPS) -> tuple[SimState, float]:
    p = base.with_(eps=STEADY_EPS, S=STEADY_S, dt=STEADY_DT)
    disc = Discretization(lmax, p.R)
    phi, _ = init_phase(p, disc, 0.1, 1, 0)
    s = SimState(0.0, phi, init_deformation(disc, 0.01, 2, 0))
    st = IMEXStepper(p, disc)
    rate = math.inf
    for _ in range(max_steps):
        s1, _ = st(s)
        rate = phase_rate_norm(s.phi, s1.phi, p.dt)
        s = s1
        if rate < tol:
            break
    return s, rate


def check_steady_residual(cfg: RunConfig) -> Verdict:
    s, rate = converge_to_steady(cfg.params)
    p = cfg.params.with_(eps=STEADY_EPS, S=STEADY_S, dt=STEADY_DT)
    res = steady_residual(s.phi, s.u, p)
    return Verdict("3.steady_residual", rate < 1e-9 and res < 1e-6,
                   f"|d_t phi|={rate:.3e} at t={s.t:.4g}, residual={res:.3e} (<1e-6)")


# ----------------------------------------------------------------------
# criterion 4: linear decay of a single deformation mode

DECAY_LMAX = 8
DECAY_T = 0.1
DECAY_DT_FINE = 1e-5


def decay_rate(p: ModelParams) -> float:
    return (24 * p.kappa / p.R**4 + 4 * p.sigma / p.R**2) / p.beta


def check_linear_decay(cfg: RunConfig) -> list[Verdict]:
    base = cfg.params.with_(Lambda=np.zeros(cfg.params.n))
    disc = Discretization(DECAY_LMAX, base.R)
    k = disc.basis.index(2, 1)
    u0 = np.zeros(disc.nmodes)
    u0[k] = 1e-2
    s0 = SimState(0.0, homogeneous_phase(base, disc), Deformation(u0, disc))
    st = IMEXStepper(base, disc)
    s1, _ = st(s0)
    factor = s1.u.coeffs[k] / u0[k]
    exact = 1.0 / (1.0 + base.dt * decay_rate(base))
    err1 = abs(factor - exact)
    fine = base.with_(dt=DECAY_DT_FINE)
    s, _ = integrate(s0, fine, int(round(DECAY_T / fine.dt)), track_energy=False)
    ref = math.exp(-decay_rate(base) * DECAY_T)
    rel = abs(s.u.coeffs[k] / u0[k] - ref) / ref
    return [
        Verdict("4.one_step", err1 <= 1e-13, f"factor={factor:.16f}, implicit Euler={exact:.16f}, diff={err1:.2e} (<=1e-13)"),
        Verdict("4.trajectory", rel <= 1e-3, f"u(T)/u(0) vs exp at T={DECAY_T:g}, dt={DECAY_DT_FINE:g}: rel err={rel:.2e} (<=1e-3)"),
    ]


# ----------------------------------------------------------------------
# criterion 5: continuous dependence

CONTDEP_LMAX = 12
CONTDEP_T = 0.5


def check_contdep(cfg: RunConfig, lmax: int = CONTDEP_LMAX, T: float = CONTDEP_T) -> list[Verdict]:
    from .run import initial_state

    state, _ = initial_state(cfg, Discretization(lmax, cfg.params.R))
    reps = {D0: twin_run_contdep(state, cfg.params, D0, T, seed=cfg.init.seed + 1, record_every=50)
            for D0 in (1e-6, 1e-8)}
    a, b = reps[1e-6].amplification, reps[1e-8].amplification
    spread = max(a, b) / min(a, b)
    out = [Verdict("5.amplification", spread <= 2.0,
                   f"D(T)/D(0)={a:.4g} (D0=1e-6), {b:.4g} (D0=1e-8), spread={spread:.4f} (<=2)")]
    for D0, r in reps.items():
        out.append(Verdict(f"5.gronwall[{D0:g}]", r.envelope_ok,
                           f"log D fit rate={r.growth_rate:.4g}, at-most-linear envelope={'yes' if r.envelope_ok else 'no'}"))
    return out


# ----------------------------------------------------------------------
# criterion 6: expansion of the constrained Lagrangian

GEO_LMAX = 8
GEO_RHO_FD = 1e-3


def geometry_inputs(cfg: RunConfig, lmax: int = GEO_LMAX):
    p = cfg.params
    disc = Discretization(lmax, p.R)
    phi, _ = init_phase(p, disc, 0.1, 4, cfg.init.seed)
    u = init_deformation(disc, 1.0, 4, cfg.init.seed)
    return p, GeometryGrid(lmax, p.R), phi.coeffs, u.coeffs


def _variation_ok(e1, e2) -> bool:
    # second-order convergence, or already at rounding level
    return e1.rel_error <= 1e-5 and (e2.rel_error <= e1.rel_error / 3 or e1.rel_error <= 1e-8)


def check_geometry(cfg: RunConfig) -> list[Verdict]:
    p, geo, phi, u = geometry_inputs(cfg)
    out = []
    rep = taylor_check(u, phi, p, geo)
    out.append(Verdict("6.taylor_slope", rep.slope >= 2.9,
                       f"slope={rep.slope:.3f} (>=2.9) over rho in [1e-3,1e-1] with C2 as closed form"))
    for label, C2, sign in (("area_C2", C2_integrated(p), 1.0), ("area_C2_flipped_coupling", C2_integrated(p), -1.0)):
        r = taylor_check(u, phi, p, geo, C2=C2, coupling_sign=sign)
        out.append(Verdict(f"6.taylor_slope[{label}]", r.slope >= 2.9, f"slope={r.slope:.3f}", informational=True))

    L0 = lagrangian(RadialGraphSurface(np.zeros_like(u), 0.0, geo), geo.embed(phi), 0.0, p, 0.0)
    C1 = C1_closed_form(p)
    out.append(Verdict("6.C1", abs(L0 - C1) <= 1e-8 * abs(C1), f"L_0={L0:.15g}, closed form={C1:.15g}"))
    measured = first_order_coefficient(phi, p, geo)
    C2 = C2_closed_form(p)
    rel = abs(measured - C2) / abs(C2) if C2 != 0 else abs(measured)
    out.append(Verdict("6.C2", rel <= 1e-8,
                       f"dL/drho={measured:.10g}, closed form={C2:.10g}, rel diff={rel:.3e}, ratio={measured / C2:.10g}"))

    v1 = variation_check(u, phi, p, geo, rho_fd=GEO_RHO_FD)
    v2 = variation_check(u, phi, p, geo, rho_fd=GEO_RHO_FD / 2)
    for e1, e2 in zip(v1, v2):
        out.append(Verdict(f"6.variation[{e1.name}]", _variation_ok(e1, e2),
                           f"fd={e1.finite_difference:.10g}, formula={e1.formula:.10g}, rel err {e1.rel_error:.2e} -> "
                           f"{e2.rel_error:.2e} on halving rho_fd"))
    return out


# ----------------------------------------------------------------------
# criterion 7: Poincare chain on K2


def _grid_dirichlet(c, grid: QuadratureGrid) -> float:
    """``int |grad f|^2`` from sampled derivatives (independent of the eigenvalues)."""
    ft = grid.synthesis_dtheta(c)
    fp = grid.synthesis_dphi(c) / grid.sin_theta[:, None]
    return float(grid.integrate(ft**2 + fp**2)) / grid.radius**2


def check_poincare(cfg: RunConfig, samples: int = 1000, lmax: int = 12) -> list[Verdict]:
    R = cfg.params.R
    basis = build_basis(lmax, R)
    grid = QuadratureGrid(basis)
    rng = make_rng(cfg.init.seed + 7)
    worst = -math.inf
    lam = basis.eigenvalues
    for _ in range(samples):
        c = rng.standard_normal(basis.nmodes) / (1.0 + basis.degrees) ** rng.uniform(0, 2)
        c[:4] = 0.0
        l2 = float(grid.integrate(grid.synthesis(c) ** 2))
        g2 = _grid_dirichlet(c, grid)
        lap2 = float(grid.integrate(grid.synthesis(-lam * c) ** 2))
        worst = max(worst, (l2 - R**2 / 6 * g2) / l2, (R**2 / 6 * g2 - R**4 / 36 * lap2) / l2)
    c = np.zeros(basis.nmodes)
    c[basis.degree_slice(2)] = rng.standard_normal(5)
    l2 = float(grid.integrate(grid.synthesis(c) ** 2))
    g2 = _grid_dirichlet(c, grid)
    lap2 = float(grid.integrate(grid.synthesis(-lam * c) ** 2))
    eq = max(abs(l2 - R**2 / 6 * g2), abs(R**2 / 6 * g2 - R**4 / 36 * lap2)) / l2
    return [
        Verdict("7.chain", worst <= 1e-12, f"{samples} random K2 fields, max relative violation={worst:.3e}"),
        Verdict("7.equality", eq <= 1e-10, f"pure degree 2: relative gap={eq:.3e} (<=1e-10)"),
    ]


# ----------------------------------------------------------------------
# criterion 8: regularised entropy

YOSIDA_H = 10.0 ** -np.arange(1, 7)


def check_yosida(samples: int = 10_000, seed: int = 0) -> list[Verdict]:
    rng = make_rng(seed + 8)
    out = []
    # (i) psi_h <= psi, increasing to psi as h decreases
    s = np.concatenate([[0.1, 0.5, 0.9], rng.uniform(1e-6, 1.0, samples)])
    vals = np.array([psi_h(s, h) for h in YOSIDA_H])
    below = float(np.max(vals - psi(s)))
    incr = float(np.min(np.diff(vals, axis=0)))
    gap = float(np.max(np.abs(vals[-1] - psi(s))))
    out.append(Verdict("8.i", below <= 1e-12 and incr >= -1e-12,
                       f"max(psi_h-psi)={below:.2e}, min increment as h decreases={incr:.2e}, gap at h=1e-6: {gap:.2e}"))
    # (ii) Lipschitz constant 1/h
    s1, s2 = rng.uniform(-2, 2, samples), rng.uniform(-2, 2, samples)
    which = rng.integers(0, 4, samples)
    ratio = np.zeros(samples)
    for j, hh in enumerate(YOSIDA_H[:4]):
        m = which == j
        ratio[m] = np.abs(psi_h_prime(s1[m], hh) - psi_h_prime(s2[m], hh)) * hh / np.abs(s1[m] - s2[m])
    out.append(Verdict("8.ii", float(ratio.max()) <= 1 + 1e-9, f"max h|dpsi_h'|/|ds|={ratio.max():.6f} (<=1)"))
    # (iii) monotone derivative, |psi_h'| increasing to |psi'| on (0,1]
    grid = np.sort(rng.uniform(-2, 2, samples))
    mono, first_drop = math.inf, math.inf
    for hh in YOSIDA_H[:4]:
        inc = np.diff(psi_h_prime(grid, hh))
        mono = min(mono, float(inc.min()))
        if np.any(inc < 0):
            first_drop = min(first_drop, float(grid[np.argmax(inc < 0)]))
    out.append(Verdict("8.iii.monotone", mono >= 0,
                       f"min increment of psi_h' on [-2,2]={mono:.2e}; first decrease at s={first_drop:.4f}"))
    s = rng.uniform(1e-6, 1.0, samples)
    absd = np.abs(np.array([psi_h_prime(s, hh) for hh in YOSIDA_H]))
    grow = float(np.min(np.diff(absd, axis=0)))
    cap = float(np.max(absd - np.abs(psi_prime(s))))
    out.append(Verdict("8.iii.limit", grow >= -1e-9 and cap <= 1e-9,
                       f"on (0,1]: min growth of |psi_h'| as h decreases={grow:.2e}, max(|psi_h'|-|psi'|)={cap:.2e}"))
    # (iv) psi_h'' >= 1/2 by finite differences on [-2, 2]
    s = np.linspace(-2, 2, samples)
    d = 1e-5
    worst, where = math.inf, None
    holds_to = math.inf
    for hh in YOSIDA_H[:4]:
        fd = (psi_h_prime(s + d, hh) - psi_h_prime(s - d, hh)) / (2 * d)
        bad = fd < 0.5 - 1e-6
        if fd.min() < worst:
            worst, where = float(fd.min()), float(s[np.argmin(fd)])
        if np.any(bad):
            holds_to = min(holds_to, float(s[np.argmax(bad)]))
    out.append(Verdict("8.iv", worst >= 0.5 - 1e-6,
                       f"min fd psi_h''={worst:.4f} at s={where:.3f}; bound 1/2 first fails at s={holds_to:.4f}"))
    # (v) uniform convergence of psi_h' on [0.05, 1]
    s = np.linspace(0.05, 1.0, samples)
    errs = np.array([np.max(np.abs(psi_h_prime(s, hh) - psi_prime(s))) for hh in YOSIDA_H])
    out.append(Verdict("8.v", bool(np.all(np.diff(errs) < 0) and errs[-1] < 1e-3),
                       "max|psi_h'-psi'| on [0.05,1]: " + ", ".join(f"{e:.1e}" for e in errs)))
    return out


# ----------------------------------------------------------------------
# criterion 9: recursive decay


def check_degiorgi(samples: int = 10_000, seed: int = 0, n_max: int = 50) -> Verdict:
    rng = make_rng(seed + 9)
    fails = 0
    for _ in range(samples):
        C = rng.uniform(0.1, 10.0)
        b = 8.0 - rng.uniform(0.0, 7.0)  # (1, 8]
        g = 3.0 - rng.uniform(0.0, 2.9)  # (0.1, 3]
        r = degiorgi_decay("theta", C, b, g, n_max)
        fails += int(not r.bound_holds)
    return Verdict("9.degiorgi", fails == 0, f"{samples} draws with y0=theta, n<={n_max}: {fails} failures")


# ----------------------------------------------------------------------
# table-driven trivial examples


@dataclass
class _Table:
    rows: list = field(default_factory=list)

    def add(self, name, ok, detail=""):
        self.rows.append(Verdict(f"self.{name}", bool(ok), detail))


def selftest_trivial(cfg: RunConfig) -> list[Verdict]:
    from .diagnostics import separation_monitor
    from .dynamics import chemical_potential, energy, rhs_u, rhs_u_factored
    from .fields import MobilityError, project_TSigma, validate_mobility
    from .geometry import surface_functionals
    from .potential import LOG_ENTROPY, Psi, extension_coefficients
    from .sphere import (constant_coeffs, laplace_beltrami, mode_index, normal_component_coeffs,
                         project_K2, project_mean_free)

    t = _Table()
    b8 = build_basis(8, 1.0)
    g8 = QuadratureGrid(b8)
    t.add("lambda0", b8.degree_eigenvalue(0) == 0.0)
    t.add("lambda1_R2", abs(build_basis(8, 2.0).degree_eigenvalue(1) - 0.5) < 1e-15)
    c = constant_coeffs(2.5, b8)
    a = g8.analysis(g8.synthesis(c))
    t.add("analysis_constant", np.abs(a[1:]).max() < 1e-13)
    one = np.zeros(b8.nmodes)
    one[mode_index(3, 2)] = 1.0
    a = g8.analysis(g8.synthesis(one))
    t.add("analysis_single_mode", np.abs(np.delete(a, mode_index(3, 2))).max() < 1e-12)
    t.add("laplace_constant", np.all(laplace_beltrami(c, b8)[1:] == 0) and laplace_beltrami(c, b8)[0] == 0)
    nu = normal_component_coeffs(1, b8)
    t.add("laplace_nu", np.allclose(laplace_beltrami(nu, b8), -2 * nu, atol=1e-14))
    t.add("integrate_one", abs(g8.integrate(np.ones(g8.shape)) - 4 * np.pi) < 1e-13)
    t.add("integrate_nu", abs(g8.integrate(g8.synthesis(nu))) < 1e-14)
    t.add("K2_nu", np.all(project_K2(nu) == 0))
    y2 = np.zeros(b8.nmodes)
    y2[mode_index(2, 1)] = 1.0
    t.add("K2_degree2", np.array_equal(project_K2(y2), y2))
    t.add("mean_free", np.array_equal(project_mean_free(c + y2), y2))
    # potential
    t.add("psi_at_1", psi(1.0) == 0 and psi_prime(1.0) == 1.0)
    t.add("extension", np.allclose(extension_coefficients(LOG_ENTROPY), (-0.5, 2.0, -1.5), atol=1e-15))
    t.add("psi_inv_e", abs(psi(math.exp(-1)) + math.exp(-1)) < 1e-16)
    t.add("Psi_uniform", abs(Psi(np.full(3, 1 / 3), np.zeros((3, 3))) + math.log(3)) < 1e-15)
    # fields
    e = np.ones(4)
    t.add("P_e", np.abs(project_TSigma(e)).max() < 1e-16)
    t.add("P_two", np.allclose(project_TSigma(np.array([1.0, 0.0])), [0.5, -0.5], atol=0, rtol=0))
    try:
        validate_mobility(np.ones((3, 3)))
        t.add("mobility_ones_rejected", False)
    except MobilityError:
        t.add("mobility_ones_rejected", True)
    try:
        validate_mobility(np.zeros((3, 3)))
        t.add("mobility_zero_rejected", False)
    except MobilityError:
        t.add("mobility_zero_rejected", True)
    p = cfg.params
    disc = Discretization(8, p.R)
    hom = homogeneous_phase(p, disc)
    phi0, _ = init_phase(p, disc, 0.0)
    t.add("init_zero_amplitude", np.array_equal(phi0.coeffs, hom.coeffs))
    phi1, _ = init_phase(p, disc, 0.1, 4, 3)
    phi2, _ = init_phase(p, disc, 0.1, 4, 3)
    t.add("init_constraints", phi1.sum_coeff_violation() < 1e-14 and np.abs(phi1.means - p.alpha).max() < 1e-14)
    t.add("init_deterministic", np.array_equal(phi1.coeffs, phi2.coeffs))
    # dynamics
    z = Deformation.zero(disc)
    cp = chemical_potential(hom, z, p)
    t.add("mu_homogeneous", np.abs(cp.w[:, 1:]).max() < 1e-12)
    t.add("rhs_u_homogeneous", np.abs(rhs_u(hom, z, p)).max() < 1e-13
          and np.abs(rhs_u_factored(hom, z, p)).max() < 1e-13)
    en = energy(hom, z, p, "exact")
    area = 4 * np.pi * p.R**2
    EH = area * p.kappa * float(p.Lambda @ p.alpha) ** 2 / 2
    ECH = p.b / p.eps * area * float(Psi(p.alpha, p.A))
    t.add("energy_homogeneous", abs(en.E_H - EH) < 1e-12 * max(1, abs(EH)) and abs(en.E_CH - ECH) < 1e-12 * abs(ECH))
    # diagnostics
    rep = separation_monitor(hom)
    t.add("separation_alpha", abs(rep.delta_min - p.alpha.min()) < 1e-14 and abs(rep.delta_max - p.alpha.max()) < 1e-14)
    g = disc.grid
    lm = level_set_measures(np.full((1,) + g.shape, 0.1), 0.1, 5, g)
    t.add("level_set_full", np.allclose(lm.z, g.area, rtol=1e-13))
    lm = level_set_measures(np.full((1,) + g.shape, 0.25), 0.1, 5, g)
    t.add("level_set_empty", np.all(lm.z == 0))
    r = degiorgi_decay("theta", 1.0, 2.0, 1.0, 50)
    t.add("degiorgi_example", abs(degiorgi_threshold(1.0, 2.0, 1.0) - 0.5) < 1e-15 and r.bound_holds)
    # geometry
    geo = GeometryGrid(4, p.R)
    f = surface_functionals(RadialGraphSurface(np.zeros(geo.basis.nmodes), 0.0, geo), homogeneous_phase(p, Discretization(4, p.R)).coeffs, p)
    t.add("sphere_functionals", abs(f.W - 8 * np.pi) < 1e-12 and abs(f.A - 4 * np.pi * p.R**2) < 1e-12
          and abs(f.V - 4 / 3 * np.pi * p.R**3) < 1e-12)
    return t.rows


def run_selftest(cfg: RunConfig) -> list[Verdict]:
    out = selftest_trivial(cfg)
    out += [check_homogeneous(cfg), check_steady_residual(cfg)]
    out += check_linear_decay(cfg)
    out += check_poincare(cfg)
    out += check_yosida(seed=cfg.init.seed)
    out.append(check_degiorgi(seed=cfg.init.seed))
    return out

"""
Coupled phase / deformation evolution on the sphere.

All linear operators are diagonal in the harmonic basis (one eigenvalue per
degree), so the only coupling inside a mode is between the N composition
coefficients and the single deformation coefficient.  The time stepper treats
every linear term implicitly, adds a stabilising term ``S (p - phi^n)`` and
takes the entropy gradient explicitly; each step is then one small
(N+1) x (N+1) solve per mode with a matrix depending on the degree only.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .fields import (
    ConstraintError,
    Deformation,
    Discretization,
    ModelParams,
    PhaseField,
    hminus1L_norm,
    make_rng,
    project_TSigma,
    random_tsigma_coeffs,
)
from .potential import Psi, Psi_h, ResolventError, grad_entropy
from .sphere import constant_coeffs

BREAKDOWN_LO = 1e-14


class SingularSystemError(ValueError):
    pass


class SolverBreakdownError(ArithmeticError):
    """The explicit entropy term could not be evaluated (the state has blown up)."""


@dataclass(frozen=True)
class SimState:
    t: float
    phi: PhaseField
    u: Deformation
    step: int = 0


def _alpha_coeffs(params: ModelParams, disc: Discretization) -> np.ndarray:
    c = np.zeros((params.n, disc.nmodes))
    c[:, 0] = params.alpha * constant_coeffs(1.0, disc.basis)[0]
    return c


def _entropy_coeffs(phi: PhaseField, params: ModelParams, exact: bool) -> np.ndarray:
    """Degree-truncated coefficients of ``psi'(phi_i)`` (or its regularisation)."""
    vals = phi.values
    if exact and np.any(vals <= 0):
        i, j, k = np.unravel_index(np.argmin(vals), vals.shape)
        raise ValueError(
            f"exact entropy needs positive compositions; component {i} is {vals[i, j, k]:.3g} "
            f"at grid point (lat {j}, lon {k})"
        )
    return phi.disc.grid.analysis(grad_entropy(vals, None if exact else params.h))


# ----------------------------------------------------------------------
# chemical potential and right-hand sides


@dataclass(frozen=True)
class ChemicalPotential:
    mu: np.ndarray
    w: np.ndarray
    mean_w: np.ndarray


def _linear_mu(phi_c, u_c, params: ModelParams, lam) -> np.ndarray:
    """Every term of mu except the entropy gradient."""
    k, R2 = params.kappa, params.R**2
    Lp = params.Lambda @ phi_c
    out = params.b * params.eps * lam * phi_c
    out = out - (params.b / params.eps) * (params.A.A @ phi_c)
    out = out + np.outer(params.Lambda, (2 * k / R2) * u_c + k * Lp - k * lam * u_c)
    return out


def chemical_potential(phi: PhaseField, u: Deformation, params: ModelParams,
                       mode: str = "regularized") -> ChemicalPotential:
    """mu and ``w = P mu`` as coefficient arrays; nonlinear term pseudo-spectral."""
    exact = _mode_is_exact(mode)
    lam = phi.disc.eigenvalues
    mu = (params.b / params.eps) * _entropy_coeffs(phi, params, exact)
    mu = mu + _linear_mu(phi.coeffs, u.coeffs, params, lam)
    w = project_TSigma(mu)
    mean_w = w[:, 0] / constant_coeffs(1.0, phi.disc.basis)[0]
    return ChemicalPotential(mu, w, mean_w)


def rhs_phase(w, mobility, lam) -> np.ndarray:
    """``div(L grad w)`` mode by mode: ``-lambda_l L w_k``."""
    L = mobility.L if hasattr(mobility, "L") else np.asarray(mobility)
    return -(L @ np.asarray(w)) * lam


def _u_symbol(params: ModelParams, lam):
    k, s, R2 = params.kappa, params.sigma, params.R**2
    return (lam - 2.0 / R2) * (k * lam + s)


def rhs_u(phi: PhaseField, u: Deformation, params: ModelParams, project: bool = True,
          tol: float = 1e-11) -> np.ndarray:
    """
    Right-hand side of the deformation equation (times beta).

    The degree-0 and degree-1 content vanishes identically; this is asserted
    (relative to the size of the terms) before the safety-net projection.
    """
    lam = phi.disc.eigenvalues
    k, s, R2 = params.kappa, params.sigma, params.R**2
    uc = u.coeffs
    dphi = phi.coeffs - _alpha_coeffs(params, phi.disc)
    out = -k * lam**2 * uc + (s - 2 * k / R2) * (-lam) * uc + (2 * s / R2) * uc
    out = out + k * lam * (params.Lambda @ phi.coeffs) - (2 * k / R2) * (params.Lambda @ dphi)
    if project:
        scale = 1.0 + k * np.abs(params.Lambda).sum() * np.abs(phi.coeffs[:, :4]).max() / R2
        leak = float(np.abs(out[:4]).max())
        assert leak <= tol * scale, f"deformation right-hand side leaks into degrees 0,1 ({leak:.3g})"
        out = out.copy()
        out[:4] = 0.0
    return out


def rhs_u_factored(phi: PhaseField, u: Deformation, params: ModelParams) -> np.ndarray:
    """``(kappa Lap + 2 kappa/R^2)(-Lap u + (sigma/kappa) u - Lambda.(phi - alpha))``."""
    lam = phi.disc.eigenvalues
    k, s, R2 = params.kappa, params.sigma, params.R**2
    inner = lam * u.coeffs + (s / k) * u.coeffs
    inner = inner - params.Lambda @ (phi.coeffs - _alpha_coeffs(params, phi.disc))
    return (-k * lam + 2 * k / R2) * inner


# ----------------------------------------------------------------------
# energy


@dataclass(frozen=True)
class EnergyParts:
    E_H: float
    E_CH: float

    @property
    def total(self) -> float:
        return self.E_H + self.E_CH


def _mode_is_exact(mode: str) -> bool:
    if mode not in ("regularized", "exact"):
        raise ValueError(f"mode must be 'regularized' or 'exact', got {mode!r}")
    return mode == "exact"


def helfrich_energy(phi_c, u_c, params: ModelParams, lam) -> float:
    k, s, R2 = params.kappa, params.sigma, params.R**2
    Lp = params.Lambda @ phi_c
    dens = (0.5 * k * lam**2 + 0.5 * (s - 2 * k / R2) * lam - s / R2) * u_c**2
    dens = dens + (-k * lam + 2 * k / R2) * Lp * u_c + 0.5 * k * Lp**2
    return float(dens.sum())


def energy(phi: PhaseField, u: Deformation, params: ModelParams, mode: str = "regularized") -> EnergyParts:
    """Split energy; quadratic terms spectrally, the bulk density by quadrature."""
    exact = _mode_is_exact(mode)
    grid = phi.disc.grid
    lam = phi.disc.eigenvalues
    E_H = helfrich_energy(phi.coeffs, u.coeffs, params, lam)
    grad = 0.5 * params.b * params.eps * float(np.sum(lam * phi.coeffs**2))
    if exact:
        bulk = Psi(phi.values, params.A)
    else:
        bulk = Psi_h(phi.values, params.A, params.h)
    E_CH = grad + (params.b / params.eps) * grid.integrate(bulk)
    return EnergyParts(E_H, float(E_CH))


# ----------------------------------------------------------------------
# time stepping


@dataclass(frozen=True)
class StepInfo:
    w: np.ndarray
    diss_phi: float
    diss_u: float
    breakdown: bool


class IMEXStepper:
    """
    Stabilised first-order IMEX integrator.

    Unknowns per mode are ``p`` (N composition coefficients) and ``q`` (the
    deformation coefficient).  Eliminating w with ``L P = L`` gives

        (I + dt lam L B) p + dt lam (2k/R^2 - k lam) L Lambda q
            = phi^n + dt lam L (S phi^n - (b/eps) n^n)
        -k (lam - 2/R^2) Lambda.p + (beta/dt + c_l) q = (beta/dt) u^n

    with ``B = (b eps lam + S) I - (b/eps) A + k Lambda Lambda^T`` and
    ``c_l = (lam - 2/R^2)(k lam + sigma)``.  Degree 0 is frozen and degree 1
    carries no deformation.
    """

    def __init__(self, params: ModelParams, disc: Discretization):
        self.params = params
        self.disc = disc
        n = params.n
        lmax = disc.lmax
        self.S = params.stabilization
        blocks = np.empty((lmax + 1, n + 1, n + 1))
        k, R2, dt = params.kappa, params.R**2, params.dt
        L = params.mobility.L
        Lam = params.Lambda
        for l in range(lmax + 1):
            lam = disc.basis.degree_eigenvalue(l)
            M = np.eye(n + 1)
            if l >= 1:
                B = (params.b * params.eps * lam + self.S) * np.eye(n) \
                    - (params.b / params.eps) * params.A.A + k * np.outer(Lam, Lam)
                M[:n, :n] += dt * lam * (L @ B)
            if l >= 2:
                M[:n, n] = dt * lam * (2 * k / R2 - k * lam) * (L @ Lam)
                M[n, :n] = -k * (lam - 2 / R2) * Lam
                M[n, n] = params.beta / dt + (lam - 2 / R2) * (k * lam + params.sigma)
                if params.beta == 0:
                    # keep the row O(1) like the others
                    M[n, :] *= dt
            lu, piv = scipy.linalg.lu_factor(M, check_finite=True)
            if np.any(np.abs(np.diag(lu)) <= np.finfo(float).eps * np.abs(M).max()):
                raise SingularSystemError(
                    f"time-step matrix singular at degree {l} (condition ~ {np.linalg.cond(M):.3g})"
                )
            blocks[l] = scipy.linalg.lu_solve((lu, piv), np.eye(n + 1))
        self.block_inverse = blocks
        self._inv = blocks[disc.basis.degrees]

    def __call__(self, state: SimState) -> tuple[SimState, StepInfo]:
        p_, d = self.params, self.disc
        n = p_.n
        dt, lam = p_.dt, d.eigenvalues
        L = p_.mobility.L
        phi_c = state.phi.coeffs
        u_c = state.u.coeffs

        try:
            ent = (p_.b / p_.eps) * _entropy_coeffs(state.phi, p_, exact=False)
        except ResolventError as exc:
            vals = state.phi.values
            raise SolverBreakdownError(
                f"step {state.step} (t={state.t:.6g}): compositions reached [{vals.min():.3g}, {vals.max():.3g}]; "
                "try a larger stabilization or a smaller time step"
            ) from exc
        rhs = np.empty((d.nmodes, n + 1))
        rhs[:, :n] = (phi_c + dt * lam * (L @ (self.S * phi_c - ent))).T
        rhs[:, n] = (p_.beta / dt) * u_c if p_.beta > 0 else 0.0
        if p_.beta == 0:
            rhs[:, n] *= dt
        # degree 0 keeps its value; degree 1 has no deformation
        rhs[0, :n] = phi_c[:, 0]
        rhs[:4, n] = 0.0
        sol = np.einsum("kij,kj->ki", self._inv, rhs)
        # the exact solution is T Sigma-valued above degree 0; remove round-off
        new_phi = project_TSigma(sol[:, :n].T)
        new_phi[:, 0] = phi_c[:, 0]
        new_u = sol[:, n].copy()
        new_u[:4] = 0.0

        w = self.scheme_w(phi_c, new_phi, new_u, ent)
        phi1 = PhaseField(new_phi, d)
        vals = phi1.values
        breakdown = bool(vals.min() < BREAKDOWN_LO or vals.max() > 1.0 - BREAKDOWN_LO)
        diss_phi = float(np.sum(lam * w * (L @ w)))
        diss_u = p_.beta * float(np.sum((new_u - u_c) ** 2)) / dt**2
        info = StepInfo(w, diss_phi, diss_u, breakdown)
        return SimState(state.t + dt, phi1, Deformation(new_u, d), state.step + 1), info

    def scheme_w(self, phi_old, phi_new, u_new, ent) -> np.ndarray:
        """The discrete potential differences used by the step."""
        lam = self.disc.eigenvalues
        mu = _linear_mu(phi_new, u_new, self.params, lam) + self.S * (phi_new - phi_old) + ent
        return project_TSigma(mu)


_STEPPERS: dict[tuple[int, int], IMEXStepper] = {}


def step(state: SimState, params: ModelParams) -> SimState:
    """One IMEX step; integrators are cached per (params, discretisation)."""
    key = (id(params), id(state.phi.disc))
    st = _STEPPERS.get(key)
    if st is None or st.params is not params or st.disc is not state.phi.disc:
        st = IMEXStepper(params, state.phi.disc)
        _STEPPERS.clear()
        _STEPPERS[key] = st
    return st(state)[0]


# ----------------------------------------------------------------------
# bookkeeping


@dataclass
class History:
    """Per-step record needed by the discrete energy identity."""

    t: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    diss_phi: list = field(default_factory=list)
    diss_u: list = field(default_factory=list)
    breakdowns: int = 0

    def residuals(self, dt: float) -> np.ndarray:
        return dissipation_residual(self, dt)


def dissipation_residual(history: History, dt: float) -> np.ndarray:
    """``E^{n+1} - E^n + dt (beta |du/dt|^2 + (L grad w, grad w))`` per step."""
    E = np.asarray(history.energy)
    if E.size < 2:
        raise ValueError("need at least two recorded states")
    diss = np.asarray(history.diss_phi) + np.asarray(history.diss_u)
    return E[1:] - E[:-1] + dt * diss


def integrate(state: SimState, params: ModelParams, nsteps: int, stepper: IMEXStepper | None = None,
              track_energy: bool = True, callback=None) -> tuple[SimState, History]:
    stepper = stepper or IMEXStepper(params, state.phi.disc)
    hist = History()
    if track_energy:
        hist.t.append(state.t)
        hist.energy.append(energy(state.phi, state.u, params).total)
    for _ in range(nsteps):
        state, info = stepper(state)
        if track_energy:
            hist.t.append(state.t)
            hist.energy.append(energy(state.phi, state.u, params).total)
            hist.diss_phi.append(info.diss_phi)
            hist.diss_u.append(info.diss_u)
        hist.breakdowns += int(info.breakdown)
        if callback is not None:
            callback(state, info)
    if hist.breakdowns:
        warnings.warn(f"{hist.breakdowns} steps left the open simplex on the grid", RuntimeWarning)
    return state, hist


def steady_residual(phi: PhaseField, u: Deformation, params: ModelParams, mode: str = "regularized") -> float:
    """
    Root-sum-square of the L2 norms of the two stationary-system residuals.

    The composition residual is ``P mu`` minus its mean, the deformation
    residual is the (unprojected) deformation right-hand side.
    """
    cp = chemical_potential(phi, u, params, mode)
    r1 = cp.w.copy()
    r1[:, 0] = 0.0
    r2 = rhs_u(phi, u, params, project=False)
    return float(np.sqrt(np.sum(r1**2) + np.sum(r2**2)))


def phase_rate_norm(phi_old: PhaseField, phi_new: PhaseField, dt: float) -> float:
    return float(np.sqrt(np.sum((phi_new.coeffs - phi_old.coeffs) ** 2))) / dt


# ----------------------------------------------------------------------
# continuous dependence


@dataclass(frozen=True)
class ContDepReport:
    t: np.ndarray
    D: np.ndarray
    growth_rate: float
    envelope_ok: bool

    @property
    def amplification(self) -> float:
        return float(self.D[-1] / self.D[0]) if self.D[0] > 0 else 0.0


def distance(s1: SimState, s2: SimState, params: ModelParams) -> float:
    """``|d phi|^2_{-1,L} + |d u|^2``."""
    dphi = s1.phi.coeffs - s2.phi.coeffs
    return hminus1L_norm(dphi, params.mobility, s1.phi.disc.basis) ** 2 + float(
        np.sum((s1.u.coeffs - s2.u.coeffs) ** 2))


def constrained_perturbation(params: ModelParams, disc: Discretization, D0: float, seed: int,
                             l_hi: int = 6) -> tuple[np.ndarray, np.ndarray]:
    """Random (d phi, d u) with zero means, T Sigma values, K2 deformation, and distance D0."""
    rng = make_rng(seed)
    dphi = random_tsigma_coeffs(rng, params.n, disc, 1, min(l_hi, disc.lmax))
    du = np.zeros(disc.nmodes)
    sel = (disc.basis.degrees >= 2) & (disc.basis.degrees <= min(l_hi, disc.lmax))
    du[sel] = rng.standard_normal(int(sel.sum())) / disc.basis.degrees[sel]
    d = hminus1L_norm(dphi, params.mobility, disc.basis) ** 2 + float(np.sum(du**2))
    f = np.sqrt(D0 / d)
    return dphi * f, du * f


def gronwall_fit(t, D) -> tuple[float, bool]:
    """
    Fit ``log D(t) - log D(0) = c t`` and test the at-most-linear envelope.

    Returns the rate ``c`` and whether every sample lies below
    ``max(c, 0) t`` plus twice the fit's rms residual.
    """
    t = np.asarray(t, dtype=float)
    y = np.log(np.asarray(D, dtype=float)) - np.log(D[0])
    c = float(t @ y / (t @ t))
    rms = float(np.sqrt(np.mean((y - c * t) ** 2)))
    ok = bool(np.all(y <= max(c, 0.0) * t + 2 * rms + 1e-12))
    return c, ok


def twin_run_contdep(state: SimState, params: ModelParams, D0: float, T: float, seed: int = 1,
                     record_every: int = 10, stepper: IMEXStepper | None = None) -> ContDepReport:
    """Integrate a state and a constrained perturbation of it side by side."""
    disc = state.phi.disc
    if D0 < 0:
        raise ValueError("perturbation size must be nonnegative")
    if D0 == 0:
        dphi, du = np.zeros_like(state.phi.coeffs), np.zeros(disc.nmodes)
    else:
        dphi, du = constrained_perturbation(params, disc, D0, seed)
    check_perturbation(dphi, du)
    twin = SimState(state.t, PhaseField(state.phi.coeffs + dphi, disc),
                    Deformation(state.u.coeffs + du, disc), state.step)
    stepper = stepper or IMEXStepper(params, disc)
    nsteps = int(round(T / params.dt))
    a, b = state, twin
    ts, Ds = [0.0], [distance(a, b, params)]
    for n in range(1, nsteps + 1):
        a, _ = stepper(a)
        b, _ = stepper(b)
        if n % record_every == 0 or n == nsteps:
            ts.append(n * params.dt)
            Ds.append(distance(a, b, params))
    t, D = np.array(ts), np.array(Ds)
    if D[0] == 0:
        return ContDepReport(t, D, 0.0, bool(np.all(D == 0)))
    c, ok = gronwall_fit(t, D)
    return ContDepReport(t, D, c, ok)


def check_perturbation(dphi, du, tol: float = 1e-12) -> None:
    dphi = np.asarray(dphi)
    du = np.asarray(du)
    scale = max(1.0, float(np.abs(dphi).max(initial=0.0)), float(np.abs(du).max(initial=0.0)))
    if np.abs(dphi[:, 0]).max() > tol * scale:
        raise ConstraintError("phase perturbation changes the mean composition")
    if np.abs(dphi.sum(axis=0)).max() > tol * scale:
        raise ConstraintError("phase perturbation is not T Sigma-valued")
    if np.abs(du[:4]).max(initial=0.0) > tol * scale:
        raise ConstraintError("deformation perturbation has degree-0/1 content")

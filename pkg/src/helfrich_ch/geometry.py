"""
Exact Canham-Helfrich functionals on radially perturbed spheres.

A surface is the radial graph ``X = r(omega) omega`` over the unit sphere with
``r = R + rho u``.  Fundamental forms come from spectral derivatives of r on
the parameter grid, so curvature, area and volume are accurate to quadrature
precision and the small-rho behaviour of the functionals can be measured
directly.  Compositions are carried along the normal of the round sphere, so
on every perturbed surface they keep their parameter-grid values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import ModelParams
from .potential import Psi
from .sphere import QuadratureGrid, build_basis, constant_coeffs


class EmbeddingError(ValueError):
    """Radial function is not positive, so the graph is not an embedded surface."""


class GeometryGrid:
    """Basis and grid used for curvature integrals; twice the field degree by default."""

    def __init__(self, lmax_fields: int, R: float, factor: int = 2):
        self.lmax_fields = int(lmax_fields)
        self.basis = build_basis(max(2, factor * self.lmax_fields), R)
        self.grid = QuadratureGrid(self.basis)
        self.R = float(R)

    def embed(self, coeffs) -> np.ndarray:
        """Zero-pad coefficients from a lower-degree basis (indices are a prefix)."""
        coeffs = np.asarray(coeffs, dtype=float)
        n = coeffs.shape[-1]
        if n > self.basis.nmodes:
            raise ValueError(f"cannot embed {n} modes into {self.basis.nmodes}")
        out = np.zeros(coeffs.shape[:-1] + (self.basis.nmodes,))
        out[..., :n] = coeffs
        return out

    def values(self, coeffs) -> np.ndarray:
        return self.grid.synthesis(self.embed(coeffs))


@dataclass(frozen=True)
class RadialGraphSurface:
    """
    ``r = R + rho u`` on the parameter sphere (u given by coefficients).

    Profiles must have zero mean unless ``allow_rigid=True``, which admits
    dilations for validation.
    """

    u: np.ndarray
    rho: float
    geo: GeometryGrid
    allow_rigid: bool = False

    def __post_init__(self):
        u = self.geo.embed(self.u)
        if not self.allow_rigid and abs(u[0]) > 1e-14 * max(1.0, float(np.abs(u).max())):
            raise ValueError("profile has nonzero mean; pass allow_rigid=True to permit it")
        object.__setattr__(self, "u", u)

    def radial_derivatives(self):
        g = self.geo.grid
        c = self.rho * self.u + constant_coeffs(self.geo.R, self.geo.basis)
        r = g.synthesis(c)
        if np.any(r <= 0):
            raise EmbeddingError(f"radial function reaches {r.min():.3g} <= 0 at rho={self.rho}")
        c_p = g.dphi_coeffs(c)
        r_t = g.synthesis_dtheta(c)
        r_p = g.synthesis(c_p)
        r_tp = g.synthesis_dtheta(c_p)
        r_pp = g.synthesis(g.dphi_coeffs(c_p))
        # second colatitude derivative from the unit-sphere Laplacian
        lap = g.synthesis(-self.geo.basis.degrees * (self.geo.basis.degrees + 1) * c)
        st = g.sin_theta[:, None]
        ct = g.mu[:, None]
        r_tt = lap - (ct / st) * r_t - r_pp / st**2
        return r, r_t, r_p, r_tt, r_tp, r_pp


@dataclass(frozen=True)
class Curvatures:
    H: np.ndarray
    K: np.ndarray
    dA: np.ndarray
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray


def curvatures(surface: RadialGraphSurface) -> Curvatures:
    """
    Mean curvature (sum of principal curvatures, positive on spheres), Gauss
    curvature, and quadrature weights of the surface area.
    """
    r, r_t, r_p, r_tt, r_tp, r_pp = surface.radial_derivatives()
    g = surface.geo.grid
    st = g.sin_theta[:, None]
    ct = g.mu[:, None]
    E = r * r + r_t * r_t
    F = r_t * r_p
    G = r * r * st * st + r_p * r_p
    # |X_theta x X_phi| = r sin(theta) q
    q = np.sqrt(r * r + r_t * r_t + (r_p / st) ** 2)
    L = (r * (r_tt - r) - 2 * r_t * r_t) / q
    M = (r * r_tp - 2 * r_t * r_p - r * r_p * ct / st) / q
    N = (r * r_pp - r * r * st * st + r * r_t * st * ct - 2 * r_p * r_p) / q
    det = E * G - F * F
    H = -(E * N - 2 * F * M + G * L) / det
    K = (L * N - M * M) / det
    dA = r * q * g.weights / g.radius**2
    return Curvatures(H, K, dA, E, F, G)


@dataclass(frozen=True)
class SurfaceFunctionals:
    W: float
    A: float
    V: float
    F1: float
    F2: float
    gauss_bonnet: float
    H: np.ndarray
    K: np.ndarray


def _phi_on(phi_values, geo: GeometryGrid) -> np.ndarray:
    phi_values = np.asarray(phi_values, dtype=float)
    if phi_values.shape[-2:] != geo.grid.shape:
        raise ValueError(f"compositions must be sampled on the geometry grid {geo.grid.shape}")
    return phi_values


def surface_functionals(surface: RadialGraphSurface, phi_coeffs, params: ModelParams) -> SurfaceFunctionals:
    """W, A, V, F1, F2 of the surface with compositions given by coefficients."""
    geo = surface.geo
    g = geo.grid
    cv = curvatures(surface)
    A = float(cv.dA.sum())
    W = 0.5 * float(np.sum(cv.H**2 * cv.dA))
    r = surface.radial_derivatives()[0]
    V = float(np.sum(r**3 / 3.0 * g.weights / g.radius**2))
    gb = float(np.sum(cv.K * cv.dA))

    phi_c = geo.embed(phi_coeffs)
    phi = g.synthesis(phi_c)
    lp = np.tensordot(params.Lambda, phi, axes=1)
    F1 = -float(np.sum(cv.H * lp * cv.dA))
    ph_t = g.synthesis_dtheta(phi_c)
    ph_p = g.synthesis_dphi(phi_c)
    grad2 = (cv.G * ph_t**2 - 2 * cv.F * ph_t * ph_p + cv.E * ph_p**2).sum(axis=0)
    grad2 = grad2 / (cv.E * cv.G - cv.F**2)
    dens = 0.5 * params.b * params.eps * grad2 + (params.b / params.eps) * Psi(phi, params.A) \
        + 0.5 * params.kappa * lp**2
    F2 = float(np.sum(dens * cv.dA))
    return SurfaceFunctionals(W, A, V, F1, F2, gb, cv.H, cv.K)


def enclosed_volume_normal_form(surface: RadialGraphSurface) -> float:
    """``(1/3) int X.n dA`` evaluated with the explicit unit normal."""
    r, r_t, r_p, *_ = surface.radial_derivatives()
    g = surface.geo.grid
    st = g.sin_theta[:, None]
    q = np.sqrt(r * r + r_t * r_t + (r_p / st) ** 2)
    x_dot_n = r * r / q
    dA = r * q * g.weights / g.radius**2
    return float(np.sum(x_dot_n * dA) / 3.0)


# ----------------------------------------------------------------------
# constrained Lagrangian


def reference_volume(R: float) -> float:
    return 4.0 / 3.0 * np.pi * R**3


def lambda0(params: ModelParams) -> float:
    return -2.0 * params.sigma / params.R


def lagrangian(surface: RadialGraphSurface, phi_coeffs, lam1: float, params: ModelParams,
               rho: float | None = None) -> float:
    """``kW + sA + (lambda0 + rho lambda1)(V - V0) + rho k F1 + rho^2 F2``."""
    rho = surface.rho if rho is None else rho
    f = surface_functionals(surface, phi_coeffs, params)
    lam = lambda0(params) + rho * lam1
    return (params.kappa * f.W + params.sigma * f.A + lam * (f.V - reference_volume(params.R))
            + rho * params.kappa * f.F1 + rho**2 * f.F2)


def C1_closed_form(params: ModelParams) -> float:
    return (2 * params.kappa / params.R**2 + params.sigma) * params.area


def C2_closed_form(params: ModelParams) -> float:
    """First-order coefficient as the closed form ``-(2 kappa/R) Lambda.alpha``."""
    return -2 * params.kappa / params.R * float(params.Lambda @ params.alpha)


def C2_integrated(params: ModelParams) -> float:
    """``kappa F1`` on the round sphere: the closed form times the sphere area."""
    return C2_closed_form(params) * params.area


def quadratic_energy(phi_coeffs, u_coeffs, params: ModelParams, basis, coupling_sign: float = 1.0) -> float:
    """
    ``E_H + E_CH`` with exact bulk density.

    ``coupling_sign`` multiplies the ``2 kappa u Lambda.phi / R^2`` term; +1 is
    the energy driving the dynamics, -1 the value obtained by summing the
    second variations term by term.
    """
    grid = QuadratureGrid(basis)
    phi_c = np.asarray(phi_coeffs, dtype=float)
    u_c = np.asarray(u_coeffs, dtype=float)
    lam = basis.eigenvalues
    k, s, R2 = params.kappa, params.sigma, params.R**2
    Lp = params.Lambda @ phi_c
    EH = np.sum((0.5 * k * lam**2 + 0.5 * (s - 2 * k / R2) * lam - s / R2) * u_c**2)
    EH += np.sum(-k * lam * Lp * u_c) + coupling_sign * (2 * k / R2) * np.sum(Lp * u_c)
    EH += 0.5 * k * np.sum(Lp**2)
    ECH = 0.5 * params.b * params.eps * np.sum(lam * phi_c**2)
    ECH += (params.b / params.eps) * grid.integrate(Psi(grid.synthesis(phi_c), params.A))
    return float(EH + ECH)


# ----------------------------------------------------------------------
# variation and expansion checks


@dataclass(frozen=True)
class VariationEntry:
    name: str
    finite_difference: float
    formula: float
    scale: float

    @property
    def abs_error(self) -> float:
        return abs(self.finite_difference - self.formula)

    @property
    def rel_error(self) -> float:
        return self.abs_error / self.scale


def _variation_formulas(u_c, phi_c, geo: GeometryGrid, params: ModelParams) -> dict[str, float]:
    g, basis = geo.grid, geo.basis
    R = geo.R
    lam = basis.eigenvalues
    u = g.synthesis(u_c)
    lap_u = g.synthesis(-lam * u_c)
    lp = np.tensordot(params.Lambda, g.synthesis(phi_c), axes=1)
    int_u = float(g.integrate(u))
    grad2 = float(np.sum(lam * u_c**2))
    lap2 = float(np.sum(lam**2 * u_c**2))
    u2 = float(np.sum(u_c**2))
    return {
        "W'": 0.0,
        "A'": 2.0 / R * int_u,
        "V'": int_u,
        "W''": lap2 - 2.0 / R**2 * grad2,
        "A''": grad2 + 2.0 * u2 / R**2,
        "V''": 2.0 / R * u2,
        "F1'": -float(g.integrate(-lp * lap_u + 2.0 / R**2 * lp * u)),
    }


def variation_check(u_coeffs, phi_coeffs, params: ModelParams, geo: GeometryGrid,
                    rho_fd: float = 1e-4, allow_rigid: bool = False) -> list[VariationEntry]:
    """Central differences in rho of W, A, V and F1 at the round sphere against closed forms."""
    u_c = geo.embed(u_coeffs)
    phi_c = geo.embed(phi_coeffs)

    def funcs(rho):
        f = surface_functionals(RadialGraphSurface(u_c, rho, geo, allow_rigid), phi_c, params)
        return {"W": f.W, "A": f.A, "V": f.V, "F1": f.F1}

    fp, f0, fm = funcs(rho_fd), funcs(0.0), funcs(-rho_fd)
    exact = _variation_formulas(u_c, phi_c, geo, params)
    # normalise by the natural size of each quantity so that "zero" formulas get a scale
    usize = float(np.sqrt(np.sum(u_c**2)))
    out = []
    for name in ("W", "A", "V", "F1"):
        d1 = (fp[name] - fm[name]) / (2 * rho_fd)
        key = name + "'"
        if key in exact:
            out.append(VariationEntry(key, d1, exact[key], max(abs(exact[key]), usize, 1e-300)))
        if name != "F1":
            d2 = (fp[name] - 2 * f0[name] + fm[name]) / rho_fd**2
            key2 = name + "''"
            out.append(VariationEntry(key2, d2, exact[key2], max(abs(exact[key2]), usize**2, 1e-300)))
    return out


@dataclass(frozen=True)
class TaylorReport:
    rho: np.ndarray
    L: np.ndarray
    residual: np.ndarray
    slope: float
    C1: float
    C2: float
    E: float


def fitted_slope(rho, res) -> float:
    rho = np.asarray(rho, dtype=float)
    res = np.asarray(res, dtype=float)
    keep = res > 0
    if keep.sum() < 2:
        return np.inf
    return float(np.polyfit(np.log(rho[keep]), np.log(res[keep]), 1)[0])


def lagrangian_series(u_coeffs, phi_coeffs, params: ModelParams, geo: GeometryGrid, rho_list,
                      lam1: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """L_rho on each surface; stops at the first rho that breaks the embedding."""
    rhos, vals = [], []
    for rho in rho_list:
        try:
            surf = RadialGraphSurface(u_coeffs, rho, geo)
            vals.append(lagrangian(surf, geo.embed(phi_coeffs), lam1, params, rho))
        except EmbeddingError:
            break
        rhos.append(rho)
    return np.array(rhos), np.array(vals)


def taylor_check(u_coeffs, phi_coeffs, params: ModelParams, geo: GeometryGrid, rho_list=None,
                 lam1: float = 0.0, C2: float | None = None, coupling_sign: float = 1.0) -> TaylorReport:
    """
    Residual ``|L_rho - C1 - rho C2 - rho^2 E|`` and its log-log slope.

    ``C2`` defaults to the closed form; ``coupling_sign`` selects which
    quadratic energy is subtracted (see :func:`quadratic_energy`).
    """
    if rho_list is None:
        rho_list = np.logspace(-3, -1, 9)
    u_c = geo.embed(u_coeffs)
    if abs(u_c[0]) > 1e-14 * max(1.0, np.abs(u_c).max()):
        raise ValueError("the expansion needs a zero-mean profile")
    phi_c = geo.embed(phi_coeffs)
    rho, L = lagrangian_series(u_c, phi_c, params, geo, rho_list, lam1)
    if rho.size < len(rho_list):
        import warnings
        warnings.warn(f"embedding failed beyond rho={rho[-1] if rho.size else 0}; list shortened")
    C1 = C1_closed_form(params)
    C2 = C2_closed_form(params) if C2 is None else C2
    E = quadratic_energy(phi_c, u_c, params, geo.basis, coupling_sign)
    res = np.abs(L - C1 - rho * C2 - rho**2 * E)
    return TaylorReport(rho, L, res, fitted_slope(rho, res), C1, C2, E)


def first_order_coefficient(phi_coeffs, params: ModelParams, geo: GeometryGrid, u_coeffs=None,
                            rho: float = 1e-5) -> float:
    """Measured ``dL/drho`` at 0 by a central difference."""
    u_c = np.zeros(geo.basis.nmodes) if u_coeffs is None else geo.embed(u_coeffs)
    phi_c = geo.embed(phi_coeffs)
    lp = lagrangian(RadialGraphSurface(u_c, rho, geo), phi_c, 0.0, params, rho)
    lm = lagrangian(RadialGraphSurface(u_c, -rho, geo), phi_c, 0.0, params, -rho)
    return (lp - lm) / (2 * rho)

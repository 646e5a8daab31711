"""
Model parameters and the constrained state (phi, u).

Composition fields live on the Gibbs simplex: components sum to one pointwise
and each keeps its surface average alpha_i.  In coefficient space this means
the degree-0 row is frozen at ``alpha`` and every higher mode is a vector in
T Sigma (entries summing to zero).  The deformation u has no degree-0 or
degree-1 content.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .potential import InteractionMatrix, flory_huggins_matrix
from .sphere import HarmonicBasis, QuadratureGrid, build_basis, constant_coeffs


class ConstraintError(ValueError):
    """Input violates a mass, simplex or T Sigma constraint."""


class MobilityError(ValueError):
    pass


# ----------------------------------------------------------------------
# T Sigma


def project_TSigma(v, axis: int = 0) -> np.ndarray:
    """``P v = v - mean(v) e`` along ``axis`` (the component axis)."""
    v = np.asarray(v, dtype=float)
    return v - v.mean(axis=axis, keepdims=True)


def tsigma_basis(n: int) -> np.ndarray:
    """Orthonormal basis of T Sigma as the columns of an (n, n-1) array."""
    # Helmert-type construction; exact zero column sums up to rounding
    q, _ = np.linalg.qr(np.eye(n)[:, :-1] - 1.0 / n)
    return q


@dataclass(frozen=True)
class Mobility:
    L: np.ndarray
    l0: float
    pinv: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.L.shape[0]


def validate_mobility(L_raw, tol: float = 1e-12) -> Mobility:
    """
    Check a constant mobility matrix and certify its coercivity on T Sigma.

    ``l0`` is the smallest eigenvalue of L written in an orthonormal basis of
    T Sigma.  ``pinv`` is the inverse of L on T Sigma (zero on span{e}), used
    by the weighted inverse Laplacian.
    """
    L = np.array(L_raw, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1] or L.shape[0] < 2:
        raise MobilityError(f"mobility must be a square matrix with N >= 2, got shape {L.shape}")
    scale = max(1.0, float(np.abs(L).max()))
    if np.abs(L - L.T).max() > tol * scale:
        raise MobilityError("mobility is not symmetric")
    rows = np.abs(L.sum(axis=1)).max()
    if rows > tol * scale:
        raise MobilityError(f"mobility row sums must vanish, largest is {rows:.3g}")
    L = 0.5 * (L + L.T)
    if np.linalg.eigvalsh(L).min() < -tol * scale:
        raise MobilityError("mobility is not positive semidefinite")
    Q = tsigma_basis(L.shape[0])
    ev, V = np.linalg.eigh(Q.T @ L @ Q)
    l0 = float(ev.min())
    if not l0 > tol * scale:
        raise MobilityError(f"mobility is not coercive on T Sigma (l0 = {l0:.3g})")
    W = Q @ V
    pinv = W @ np.diag(1.0 / ev) @ W.T
    L.setflags(write=False)
    pinv.setflags(write=False)
    return Mobility(L, l0, pinv)


def projector_mobility(n: int) -> Mobility:
    return validate_mobility(np.eye(n) - np.ones((n, n)) / n)


# ----------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class ModelParams:
    """
    Physical and numerical parameters.

    ``S`` is the stabilisation coefficient of the time stepper; ``None``
    selects ``b/(eps h)``, the Lipschitz constant of the regularised entropy
    derivative scaled by ``b/eps``.
    """

    kappa: float = 1.0
    sigma: float = 1.0
    b: float = 1.0
    eps: float = 0.1
    beta: float = 1.0
    R: float = 1.0
    Lambda: np.ndarray = field(default_factory=lambda: np.array([1.0, -0.5, 0.0]))
    A: InteractionMatrix = field(default_factory=lambda: flory_huggins_matrix(3, 3.5))
    alpha: np.ndarray = field(default_factory=lambda: np.array([0.4, 0.35, 0.25]))
    mobility: Mobility = field(default_factory=lambda: projector_mobility(3))
    h: float = 1e-4
    S: float | None = None
    dt: float = 1e-4

    def __post_init__(self):
        for name in ("kappa", "sigma", "b", "eps", "R", "h", "dt"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not self.beta >= 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta!r}")
        lam = np.array(self.Lambda, dtype=float)
        alpha = np.array(self.alpha, dtype=float)
        if not isinstance(self.A, InteractionMatrix):
            object.__setattr__(self, "A", InteractionMatrix.from_array(self.A))
        if not isinstance(self.mobility, Mobility):
            object.__setattr__(self, "mobility", validate_mobility(self.mobility))
        n = self.A.n
        if lam.shape != (n,) or alpha.shape != (n,) or self.mobility.n != n:
            raise ValueError(
                f"component count mismatch: Lambda {lam.shape}, alpha {alpha.shape}, "
                f"A {self.A.A.shape}, mobility {self.mobility.L.shape}"
            )
        if np.any(alpha <= 0) or np.any(alpha >= 1) or abs(alpha.sum() - 1.0) > 1e-12:
            raise ValueError(f"alpha must lie in (0,1)^N and sum to 1, got {alpha}")
        if self.S is not None and not self.S >= 0:
            raise ValueError(f"stabilisation must be nonnegative, got {self.S!r}")
        for arr in (lam, alpha):
            arr.setflags(write=False)
        object.__setattr__(self, "Lambda", lam)
        object.__setattr__(self, "alpha", alpha)

    @property
    def n(self) -> int:
        return self.A.n

    @property
    def stabilization(self) -> float:
        return self.b / (self.eps * self.h) if self.S is None else float(self.S)

    @property
    def area(self) -> float:
        return 4.0 * np.pi * self.R**2

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


class Discretization:
    """Basis and quadrature grid for a given radius and degree cutoff."""

    def __init__(self, lmax: int, R: float, nlat: int | None = None, nlon: int | None = None):
        self.basis: HarmonicBasis = build_basis(lmax, R)
        self.grid = QuadratureGrid(self.basis, nlat, nlon)

    @property
    def lmax(self) -> int:
        return self.basis.lmax

    @property
    def nmodes(self) -> int:
        return self.basis.nmodes

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.basis.eigenvalues


# ----------------------------------------------------------------------
# state containers


@dataclass(frozen=True, eq=False)
class PhaseField:
    """N composition fields as an (N, nmodes) coefficient array."""

    coeffs: np.ndarray
    disc: Discretization = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 2 or c.shape[1] != self.disc.nmodes:
            raise ValueError(f"phase coefficients must have shape (N, {self.disc.nmodes})")
        if not np.all(np.isfinite(c)):
            raise ValueError("phase coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    @cached_property
    def values(self) -> np.ndarray:
        return self.disc.grid.synthesis(self.coeffs)

    @property
    def means(self) -> np.ndarray:
        return self.coeffs[:, 0] / (np.sqrt(4.0 * np.pi) * self.disc.basis.radius)

    def sum_violation(self) -> float:
        """Max grid deviation of sum_i phi_i from 1."""
        return float(np.abs(self.values.sum(axis=0) - 1.0).max())

    def sum_coeff_violation(self) -> float:
        total = self.coeffs.sum(axis=0) - constant_coeffs(1.0, self.disc.basis)
        return float(np.abs(total).max())

    def in_open_simplex(self) -> bool:
        v = self.values
        return bool(v.min() > 0.0 and v.max() < 1.0)


@dataclass(frozen=True, eq=False)
class Deformation:
    coeffs: np.ndarray
    disc: Discretization = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (self.disc.nmodes,):
            raise ValueError(f"deformation coefficients must have shape ({self.disc.nmodes},)")
        if np.any(c[:4] != 0.0):
            raise ConstraintError("deformation must have zero degree-0 and degree-1 content")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @cached_property
    def values(self) -> np.ndarray:
        return self.disc.grid.synthesis(self.coeffs)

    @classmethod
    def zero(cls, disc: Discretization) -> "Deformation":
        return cls(np.zeros(disc.nmodes), disc)


def homogeneous_phase(params: ModelParams, disc: Discretization) -> PhaseField:
    c = np.zeros((params.n, disc.nmodes))
    c[:, 0] = [constant_coeffs(a, disc.basis)[0] for a in params.alpha]
    return PhaseField(c, disc)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator so streams agree across platforms."""
    return np.random.Generator(np.random.Philox(int(seed)))


def random_tsigma_coeffs(rng, n: int, disc: Discretization, l_lo: int, l_hi: int) -> np.ndarray:
    """Gaussian T Sigma-valued coefficients on degrees l_lo..l_hi, decaying like 1/l."""
    c = np.zeros((n, disc.nmodes))
    deg = disc.basis.degrees
    sel = (deg >= l_lo) & (deg <= l_hi)
    c[:, sel] = rng.standard_normal((n, int(sel.sum()))) / np.maximum(deg[sel], 1)
    return project_TSigma(c)


@dataclass(frozen=True)
class InitReport:
    requested: float
    applied: float

    @property
    def factor(self) -> float:
        return 1.0 if self.requested == 0 else self.applied / self.requested


def init_phase(params: ModelParams, disc: Discretization, amplitude: float, l_init: int = 4,
               seed: int = 0, margin: float = 0.05) -> tuple[PhaseField, InitReport]:
    """
    Perturbed homogeneous composition ``alpha + a * xi``.

    ``xi`` is a random T Sigma-valued field on degrees 1..l_init scaled to unit
    max-norm on the grid.  If the requested amplitude would push any component
    below ``margin`` the amplitude is shrunk (never clipped) until the minimum
    equals the margin; the applied amplitude is reported.
    """
    if amplitude < 0:
        raise ValueError(f"amplitude must be nonnegative, got {amplitude!r}")
    base = homogeneous_phase(params, disc)
    if amplitude == 0:
        return base, InitReport(0.0, 0.0)
    if not 0 <= margin < params.alpha.min():
        raise ValueError(f"margin {margin} must lie in [0, min(alpha))")
    rng = make_rng(seed)
    xi = random_tsigma_coeffs(rng, params.n, disc, 1, min(l_init, disc.lmax))
    xv = disc.grid.synthesis(xi)
    xi = xi / np.abs(xv).max()
    xv = disc.grid.synthesis(xi)
    # largest a with alpha_i + a * xi_i >= margin everywhere
    neg = xv < 0
    room = (params.alpha[:, None, None] - margin) / np.where(neg, -xv, 1.0)
    a_max = float(room[neg].min()) if np.any(neg) else np.inf
    applied = min(float(amplitude), a_max)
    return PhaseField(base.coeffs + applied * xi, disc), InitReport(float(amplitude), applied)


def init_deformation(disc: Discretization, amplitude: float, l_init: int = 4, seed: int = 0) -> Deformation:
    """Random K2 deformation on degrees 2..l_init with max-norm ``amplitude``."""
    if amplitude < 0:
        raise ValueError(f"amplitude must be nonnegative, got {amplitude!r}")
    if amplitude == 0:
        return Deformation.zero(disc)
    # separate stream from the composition perturbation
    rng = make_rng(seed + 0x9E3779B9)
    c = np.zeros(disc.nmodes)
    deg = disc.basis.degrees
    sel = (deg >= 2) & (deg <= max(2, min(l_init, disc.lmax)))
    c[sel] = rng.standard_normal(int(sel.sum())) / deg[sel]
    c = c / np.abs(disc.grid.synthesis(c)).max() * amplitude
    return Deformation(c, disc)


# ----------------------------------------------------------------------
# weighted inverse Laplacian


def _check_dual(g: np.ndarray, basis: HarmonicBasis, tol: float) -> None:
    scale = max(1.0, float(np.abs(g).max()))
    if np.abs(g[:, 0]).max() > tol * scale:
        raise ConstraintError("weighted inverse Laplacian needs componentwise zero-mean data")
    if np.abs(g.sum(axis=0)).max() > tol * scale:
        raise ConstraintError("weighted inverse Laplacian needs T Sigma-valued data")


def weighted_inv_laplacian(g, mobility: Mobility, basis: HarmonicBasis, tol: float = 1e-10) -> np.ndarray:
    """
    Solve ``-div(L grad f) = g`` for mean-free, T Sigma-valued f.

    Mode by mode this is ``lambda_l L f_k = g_k`` on T Sigma.
    """
    g = np.asarray(g, dtype=float)
    _check_dual(g, basis, tol)
    f = np.zeros_like(g)
    f[:, 1:] = (mobility.pinv @ g[:, 1:]) / basis.eigenvalues[1:]
    return f


def hminus1L_norm(g, mobility: Mobility, basis: HarmonicBasis, tol: float = 1e-10) -> float:
    f = weighted_inv_laplacian(g, mobility, basis, tol)
    val = float(np.sum(np.asarray(g) * f))
    return np.sqrt(max(val, 0.0))

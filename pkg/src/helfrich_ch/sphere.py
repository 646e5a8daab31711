"""
Real spherical harmonics on a sphere of radius R.

Fields are stored as coefficient vectors in the real, L2(Gamma)-orthonormal
harmonic basis, flattened in (l, m) lexicographic order with
``k = l*l + l + m`` for ``-l <= m <= l``.  Orders ``m > 0`` carry cos(m phi),
``m < 0`` carry sin(|m| phi).  No Condon-Shortley phase is applied, so the
degree-1 harmonics are positive multiples of the normal components
``nu_1 = x/R``, ``nu_2 = y/R``, ``nu_3 = z/R``.

The physical grid is Gauss-Legendre in mu = cos(theta) times an equispaced
longitude ring.  Longitudinal sums are plain matrix products against stored
cos/sin tables (a direct DFT), so results do not depend on FFT planning.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre


class ShapeError(ValueError):
    """Grid and basis dimensions do not agree."""


def mode_index(l: int, m: int) -> int:
    return l * l + l + m


def normalized_legendre(lmax: int, x: np.ndarray) -> np.ndarray:
    """
    Fully normalised associated Legendre functions p_lm(x), 0 <= m <= l <= lmax.

    Normalisation is ``2*pi * int_{-1}^{1} p_lm(x)**2 dx = 1`` so that
    ``p_l0(cos theta)`` and ``sqrt(2) p_lm(cos theta) cos(m phi)`` are
    orthonormal on the unit sphere.  Built with the standard stable
    recurrence in l for fixed m, seeded by the sectoral values.

    Returns
    -------
    p : ndarray, shape (lmax+1, lmax+1, len(x))
        ``p[l, m]``; entries with m > l are zero.
    """
    x = np.asarray(x, dtype=float)
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    p = np.zeros((lmax + 1, lmax + 1) + x.shape)
    p[0, 0] = 1.0 / np.sqrt(4.0 * np.pi)
    for m in range(1, lmax + 1):
        p[m, m] = np.sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * p[m - 1, m - 1]
    for m in range(0, lmax):
        p[m + 1, m] = np.sqrt(2.0 * m + 3.0) * x * p[m, m]
    for m in range(0, lmax + 1):
        for l in range(m + 2, lmax + 1):
            a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            p[l, m] = a * (x * p[l - 1, m] - b * p[l - 2, m])
    return p


@dataclass(frozen=True)
class HarmonicBasis:
    """Mode table and Laplace-Beltrami eigenvalues for degrees 0..lmax."""

    lmax: int
    radius: float
    degrees: np.ndarray = field(repr=False)
    orders: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)

    @property
    def nmodes(self) -> int:
        return (self.lmax + 1) ** 2

    def degree_eigenvalue(self, l: int) -> float:
        return l * (l + 1) / self.radius**2

    def degree_slice(self, l: int) -> slice:
        return slice(l * l, (l + 1) * (l + 1))

    def index(self, l: int, m: int) -> int:
        if not (0 <= l <= self.lmax and -l <= m <= l):
            raise IndexError(f"mode (l={l}, m={m}) outside basis with lmax={self.lmax}")
        return mode_index(l, m)


def build_basis(lmax: int, R: float) -> HarmonicBasis:
    if int(lmax) != lmax or lmax < 2:
        raise ValueError(f"lmax must be an integer >= 2, got {lmax!r}")
    if not R > 0:
        raise ValueError(f"radius must be positive, got {R!r}")
    lmax = int(lmax)
    degrees = np.concatenate([np.full(2 * l + 1, l) for l in range(lmax + 1)])
    orders = np.concatenate([np.arange(-l, l + 1) for l in range(lmax + 1)])
    eig = degrees * (degrees + 1) / float(R) ** 2
    for arr in (degrees, orders, eig):
        arr.setflags(write=False)
    return HarmonicBasis(lmax, float(R), degrees, orders, eig)


class QuadratureGrid:
    """
    Gauss-Legendre x equispaced grid carrying synthesis/analysis tables.

    Parameters
    ----------
    basis : HarmonicBasis
    nlat, nlon : int, optional
        Defaults follow the oversampling rule ``nlat = 2(lmax+1)``,
        ``nlon = 4(lmax+1)``; smaller values are rejected.
    """

    def __init__(self, basis: HarmonicBasis, nlat: int | None = None, nlon: int | None = None):
        L = basis.lmax
        nlat = 2 * (L + 1) if nlat is None else int(nlat)
        nlon = 4 * (L + 1) if nlon is None else int(nlon)
        if nlat < 2 * (L + 1) or nlon < 4 * (L + 1):
            raise ShapeError(
                f"grid ({nlat}, {nlon}) too coarse for lmax={L}; "
                f"need nlat >= {2 * (L + 1)}, nlon >= {4 * (L + 1)}"
            )
        self.basis = basis
        self.radius = basis.radius
        self.nlat, self.nlon = nlat, nlon

        mu, wmu = roots_legendre(nlat)
        mu, wmu = mu[::-1].copy(), wmu[::-1].copy()  # north to south
        self.mu = mu
        self.theta = np.arccos(mu)
        self.sin_theta = np.sqrt(1.0 - mu * mu)
        self.phi = 2.0 * np.pi * np.arange(nlon) / nlon
        self.lat_weights = wmu
        dphi = 2.0 * np.pi / nlon
        # weights for the unit sphere and for the sphere of radius R
        self.unit_weights = np.outer(wmu, np.full(nlon, dphi))
        self.weights = self.unit_weights * self.radius**2

        p = normalized_legendre(L, mu)
        deg, order = basis.degrees, basis.orders
        am = np.abs(order)
        scale = np.where(order == 0, 1.0, np.sqrt(2.0)) / self.radius
        # latitude factor of each mode, shape (nlat, nmodes)
        self._plat = (p[deg, am] * scale[:, None]).T.copy()
        # d/dtheta of the latitude factor via
        # sin(t) dp_lm/dt = l mu p_lm - sqrt((2l+1)/(2l-1) (l-m)(l+m)) p_{l-1,m}
        prev = np.zeros_like(p[deg, am])
        has_prev = deg - 1 >= am
        prev[has_prev] = p[deg[has_prev] - 1, am[has_prev]]
        c = np.zeros(len(deg))
        c[has_prev] = np.sqrt(
            (2.0 * deg[has_prev] + 1) / (2.0 * deg[has_prev] - 1)
            * (deg[has_prev] - am[has_prev]) * (deg[has_prev] + am[has_prev])
        )
        dp = (deg[:, None] * mu[None, :] * p[deg, am] - c[:, None] * prev) / self.sin_theta[None, :]
        self._dplat = (dp * scale[:, None]).T.copy()

        # longitude tables: column j of trig is cos(m phi) (m >= 0) or sin(|m| phi)
        mm = np.arange(L + 1)
        self._cos = np.cos(np.outer(mm, self.phi))
        self._sin = np.sin(np.outer(mm, self.phi))
        self._trig = np.concatenate([self._cos, self._sin[1:]], axis=0)  # (2L+1, nlon)
        # column of _trig used by each mode
        self._col = np.where(order >= 0, order, L - order)
        self._scatter = np.zeros((basis.nmodes, 2 * L + 1))
        self._scatter[np.arange(basis.nmodes), self._col] = 1.0
        # d/dphi sends (l, m) to (l, -m): cos(m phi) -> -m sin(m phi),
        # sin(|m| phi) -> |m| cos(|m| phi)
        self._dphi_src = np.arange(basis.nmodes)
        self._dphi_dst = self._dphi_src - 2 * order
        self._dphi_sign = np.where(order < 0, am, -am).astype(float)

    # ------------------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.nlat, self.nlon)

    @property
    def area(self) -> float:
        return float(self.weights.sum())

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Colatitude and longitude arrays of grid shape."""
        return np.meshgrid(self.theta, self.phi, indexing="ij")

    def cartesian(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Unit-sphere coordinates (x, y, z)/R of the grid points."""
        th, ph = self.mesh()
        return np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)

    def _check_coeffs(self, coeffs: np.ndarray) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[-1] != self.basis.nmodes:
            raise ShapeError(f"expected {self.basis.nmodes} coefficients, got {coeffs.shape[-1]}")
        return coeffs

    def _check_values(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape[-2:] != self.shape:
            raise ShapeError(f"expected grid shape {self.shape}, got {values.shape[-2:]}")
        return values

    def _latitude_sum(self, table: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
        # Fourier amplitudes per latitude ring, shape (..., nlat, 2L+1)
        return (coeffs[..., None, :] * table) @ self._scatter

    def synthesis(self, coeffs: np.ndarray) -> np.ndarray:
        """Grid values (..., nlat, nlon) of coefficient vectors (..., nmodes)."""
        coeffs = self._check_coeffs(coeffs)
        return self._latitude_sum(self._plat, coeffs) @ self._trig

    def dphi_coeffs(self, coeffs: np.ndarray) -> np.ndarray:
        """Coefficients of the longitude derivative (exact within the basis)."""
        coeffs = self._check_coeffs(coeffs)
        d = np.zeros_like(coeffs)
        d[..., self._dphi_dst] = coeffs[..., self._dphi_src] * self._dphi_sign
        return d

    def synthesis_dphi(self, coeffs: np.ndarray) -> np.ndarray:
        return self.synthesis(self.dphi_coeffs(coeffs))

    def synthesis_dtheta(self, coeffs: np.ndarray) -> np.ndarray:
        coeffs = self._check_coeffs(coeffs)
        return self._latitude_sum(self._dplat, coeffs) @ self._trig

    def analysis(self, values: np.ndarray) -> np.ndarray:
        """Coefficients (..., nmodes) of grid values by quadrature projection."""
        values = self._check_values(values)
        G = values @ self._trig.T  # (..., nlat, 2L+1)
        G = G * (self.weights[:, :1] * 1.0)  # lat weight x dphi x R^2
        return np.einsum("...jk,jk->...k", G[..., self._col], self._plat)

    def integrate(self, values: np.ndarray) -> np.ndarray | float:
        values = self._check_values(values)
        out = np.einsum("...jk,jk->...", values, self.weights)
        return float(out) if np.ndim(out) == 0 else out


# ----------------------------------------------------------------------
# spectral operators on coefficient vectors


def laplace_beltrami(coeffs: np.ndarray, basis: HarmonicBasis) -> np.ndarray:
    return -basis.eigenvalues * np.asarray(coeffs, dtype=float)


def inverse_laplace_beltrami(coeffs: np.ndarray, basis: HarmonicBasis) -> np.ndarray:
    """Mean-free solution f of -Delta f = g for mean-free g."""
    out = np.zeros_like(np.asarray(coeffs, dtype=float))
    out[..., 1:] = coeffs[..., 1:] / basis.eigenvalues[1:]
    return out


def project_mean_free(coeffs: np.ndarray) -> np.ndarray:
    out = np.array(coeffs, dtype=float, copy=True)
    out[..., 0] = 0.0
    return out


def project_K2(coeffs: np.ndarray) -> np.ndarray:
    """Remove degree-0 and degree-1 content (constants and normal components)."""
    out = np.array(coeffs, dtype=float, copy=True)
    out[..., :4] = 0.0
    return out


def l2_norm(coeffs: np.ndarray) -> np.ndarray | float:
    return np.sqrt(np.sum(np.asarray(coeffs) ** 2, axis=-1))


def h1_seminorm(coeffs: np.ndarray, basis: HarmonicBasis) -> np.ndarray | float:
    return np.sqrt(np.sum(basis.eigenvalues * np.asarray(coeffs) ** 2, axis=-1))


def h2_seminorm(coeffs: np.ndarray, basis: HarmonicBasis) -> np.ndarray | float:
    return np.sqrt(np.sum(basis.eigenvalues**2 * np.asarray(coeffs) ** 2, axis=-1))


def constant_coeffs(value: float, basis: HarmonicBasis) -> np.ndarray:
    """Coefficient vector of the constant field ``value``."""
    a = np.zeros(basis.nmodes)
    a[0] = value * np.sqrt(4.0 * np.pi) * basis.radius
    return a


def mean_value(coeffs: np.ndarray, basis: HarmonicBasis) -> np.ndarray | float:
    """Surface average of a field from its (0, 0) coefficient."""
    return np.asarray(coeffs)[..., 0] / (np.sqrt(4.0 * np.pi) * basis.radius)


def normal_component_coeffs(i: int, basis: HarmonicBasis) -> np.ndarray:
    """Coefficients of nu_i = x_i / R for i in {1, 2, 3}."""
    # nu_1 = x/R ~ Y_{1,1}, nu_2 = y/R ~ Y_{1,-1}, nu_3 = z/R ~ Y_{1,0}
    m = {1: 1, 2: -1, 3: 0}[i]
    a = np.zeros(basis.nmodes)
    # Y_1m on radius-R sphere = sqrt(3/(4 pi)) * (x_i/R) / R
    a[mode_index(1, m)] = basis.radius * np.sqrt(4.0 * np.pi / 3.0)
    return a

"""
Separation monitoring, level-set bookkeeping, the recursive-decay iteration and a
Sobolev-constant probe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext

import numpy as np

from .fields import Discretization, PhaseField
from .sphere import QuadratureGrid


@dataclass(frozen=True)
class SeparationReport:
    t: float
    delta_min: float
    delta_max: float
    comp_min: np.ndarray
    comp_max: np.ndarray
    threshold: float = 0.0

    @property
    def separated(self) -> bool:
        return self.delta_min > self.threshold and self.delta_max < 1.0 - self.threshold

    @property
    def left_simplex(self) -> bool:
        return self.delta_min <= 0.0 or self.delta_max >= 1.0


def separation_monitor(phi: PhaseField, t: float = 0.0, threshold: float = 0.0) -> SeparationReport:
    v = phi.values.reshape(phi.n, -1)
    cmin, cmax = v.min(axis=1), v.max(axis=1)
    return SeparationReport(t, float(cmin.min()), float(cmax.max()), cmin, cmax, threshold)


@dataclass(frozen=True)
class LevelSetMeasures:
    delta: float
    k: np.ndarray
    z: np.ndarray  # (n_max + 1, N)


def level_set_measures(phi_values, delta: float, n_max: int, grid: QuadratureGrid) -> LevelSetMeasures:
    """
    Quadrature measures ``z[n, i] = |{phi_i <= k_n}|`` with ``k_n = delta + delta/2^n``.
    """
    v = np.asarray(phi_values, dtype=float)
    if v.ndim == 2:
        v = v[None]
    n_comp = v.shape[0]
    if not 0 < delta < 1.0 / n_comp:
        raise ValueError(f"delta must lie in (0, 1/N) = (0, {1.0 / n_comp:.4g}), got {delta!r}")
    k = delta + delta / 2.0 ** np.arange(n_max + 1)
    ind = v[None, ...] <= k[:, None, None, None]
    z = np.einsum("nijk,jk->ni", ind.astype(float), grid.weights)
    return LevelSetMeasures(float(delta), k, z)


# ----------------------------------------------------------------------
# recursive decay


@dataclass(frozen=True)
class DecayResult:
    y: np.ndarray
    bound: np.ndarray
    theta: float
    bound_holds: bool
    to_zero: bool
    log_excess: float


def degiorgi_threshold(C: float, b: float, gamma: float) -> float:
    """``theta = C^(-1/gamma) b^(-1/gamma^2)``."""
    _check_decay_params(C, b, gamma)
    return math.exp(-math.log(C) / gamma - math.log(b) / gamma**2)


def _check_decay_params(C, b, gamma):
    if not C > 0:
        raise ValueError(f"C must be positive, got {C!r}")
    if not b > 1:
        raise ValueError(f"b must exceed 1, got {b!r}")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma!r}")


def _exp_clamped(x) -> float:
    x = float(x)
    if x < -745:
        return 0.0
    return math.exp(x) if x < 709 else math.inf


def degiorgi_decay(y0, C: float, b: float, gamma: float, n_max: int = 50) -> DecayResult:
    """
    Iterate the extremal sequence ``y_{n+1} = C b^n y_n^(1+gamma)``.

    ``y0`` is a positive number or ``"theta"`` to start exactly at the
    threshold.  The iteration runs on ``log y`` in decimal arithmetic: the
    equality case is unstable (relative errors grow like ``(1+gamma)^n``), so
    the working precision is raised by ``n_max log10(1+gamma)`` digits.
    """
    _check_decay_params(C, b, gamma)
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    digits = 40 + int(n_max * math.log10(1.0 + gamma)) + 5
    with localcontext() as ctx:
        ctx.prec = digits
        Cd, bd, gd = Decimal(C), Decimal(b), Decimal(gamma)
        lC, lb = Cd.ln(), bd.ln()
        lth = -lC / gd - lb / (gd * gd)
        if isinstance(y0, str):
            if y0 != "theta":
                raise ValueError(f"unknown start {y0!r}")
            L = lth
        else:
            if not y0 > 0:
                raise ValueError("y0 must be positive")
            L = Decimal(y0).ln()
        logs, blogs = [], []
        excess = Decimal("-Infinity")
        for n in range(n_max + 1):
            lbound = lth - n * lb / gd
            logs.append(L)
            blogs.append(lbound)
            excess = max(excess, L - lbound)
            L = lC + n * lb + (1 + gd) * L
        # the working precision leaves about 45 digits after the (1+gamma)^n growth
        scale = 1 + abs(lth) + n_max * lb / gd
        holds = bool(excess <= Decimal(10) ** -35 * scale)
        to_zero = bool(logs[-1] < logs[0] and logs[-1] < blogs[0])
        y = np.array([_exp_clamped(x) for x in logs])
        bound = np.array([_exp_clamped(x) for x in blogs])
        return DecayResult(y, bound, math.exp(float(lth)), holds, to_zero, float(excess))


# ----------------------------------------------------------------------
# Sobolev probe


@dataclass(frozen=True)
class SobolevProbe:
    p: np.ndarray
    C: np.ndarray


def lp_norm(values, grid: QuadratureGrid, p: float) -> float:
    return float(grid.integrate(np.abs(values) ** p)) ** (1.0 / p)


def h1_norm(coeffs, basis) -> float:
    return float(np.sqrt(np.sum((1.0 + basis.eigenvalues) * coeffs**2)))


def sobolev_constant_probe(disc: Discretization, p_list=(2, 4, 8, 16, 32, 64), samples: int = 1000,
                           seed: int = 0, l_hi: int | None = None) -> SobolevProbe:
    """``max_f |f|_{L^p} / (sqrt(p) |f|_{H^1})`` over random band-limited fields."""
    p_arr = np.asarray(p_list, dtype=float)
    if np.any(p_arr < 2) or np.any(p_arr > 64):
        raise ValueError("exponents must lie in [2, 64]")
    rng = np.random.Generator(np.random.Philox(seed))
    basis, grid = disc.basis, disc.grid
    l_hi = disc.lmax if l_hi is None else l_hi
    deg = basis.degrees
    best = np.zeros_like(p_arr)
    for _ in range(samples):
        # mix of smooth and rough spectra, plus a random constant
        decay = rng.uniform(0.0, 3.0)
        c = rng.standard_normal(basis.nmodes) / (1.0 + deg) ** decay
        c[deg > l_hi] = 0.0
        v = grid.synthesis(c)
        h1 = h1_norm(c, basis)
        for j, p in enumerate(p_arr):
            best[j] = max(best[j], lp_norm(v, grid, p) / (np.sqrt(p) * h1))
    return SobolevProbe(p_arr, best)


# ----------------------------------------------------------------------
# run-level separation tracking


@dataclass
class SeparationTracker:
    """Records extrema along a run; the floor is taken over ``t >= t_start``."""

    t_start: float = 0.1
    times: list = field(default_factory=list)
    minima: list = field(default_factory=list)
    comp_minima: list = field(default_factory=list)
    values: list = field(default_factory=list)

    def record(self, t: float, phi: PhaseField, keep_values: bool = False) -> SeparationReport:
        rep = separation_monitor(phi, t)
        self.times.append(t)
        self.minima.append(rep.delta_min)
        self.comp_minima.append(rep.comp_min)
        if keep_values:
            self.values.append(phi.values)
        return rep

    def floor(self) -> float:
        t = np.asarray(self.times)
        m = np.asarray(self.minima)
        sel = t >= self.t_start - 1e-12
        return float(m[sel].min()) if np.any(sel) else float("nan")

    def positive_after_start(self) -> bool:
        t = np.asarray(self.times)
        m = np.asarray(self.minima)
        return bool(np.all(m[t >= self.t_start - 1e-12] > 0))

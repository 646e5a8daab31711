"""
Singular entropy, its cubic continuation above s = 1, and Yosida regularisation.

The base entropy is ``psi(s) = s log s`` on (0, 1].  For s >= 1 the function
continues as the cubic ``a s^3 + b s^2 + d s`` whose coefficients match value,
slope and curvature at s = 1.  For the logarithmic base this cubic has
``psi''(s) = 4 - 3s``, which turns negative for s > 4/3: convexity (and every
property derived from it) only holds on s < 4/3.  States of the simulator stay
inside (0, 1), so this never matters in practice, but tests over wider ranges
will see it.

Everything is vectorised over numpy arrays.  Out-of-domain evaluation of the
unregularised functions raises :class:`DomainError` instead of returning nan.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    """Argument outside the domain of the singular entropy."""


@dataclass(frozen=True)
class EntropySpec:
    """
    Description of the single-component entropy psi.

    ``zeta`` is the convexity constant on (0, 1] and ``iota`` the exponent of
    the growth condition near 0; ``iota`` is carried as metadata only.
    """

    name: str = "log"
    zeta: float = 1.0
    iota: float = 1.0
    psi1: float = 0.0
    dpsi1: float = 1.0
    d2psi1: float = 1.0
    ext: tuple[float, float, float] = field(init=False)

    def __post_init__(self):
        a = self.psi1 - self.dpsi1 + 0.5 * self.d2psi1
        b = -3.0 * self.psi1 + 3.0 * self.dpsi1 - self.d2psi1
        d = 3.0 * self.psi1 - 2.0 * self.dpsi1 + 0.5 * self.d2psi1
        object.__setattr__(self, "ext", (a, b, d))


LOG_ENTROPY = EntropySpec()


def extension_coefficients(spec: EntropySpec = LOG_ENTROPY) -> tuple[float, float, float]:
    return spec.ext


def _check_domain(s: np.ndarray, strict: bool) -> None:
    bad = s <= 0 if strict else s < 0
    if np.any(bad):
        where = np.flatnonzero(np.ravel(bad))[0]
        raise DomainError(
            f"entropy evaluated outside its domain at flat index {where}: "
            f"s = {np.ravel(s)[where]!r}"
        )


def psi(s, spec: EntropySpec = LOG_ENTROPY):
    """psi(s) on [0, inf); psi(0) = 0 by continuity."""
    s = np.asarray(s, dtype=float)
    _check_domain(s, strict=False)
    a, b, d = spec.ext
    with np.errstate(divide="ignore", invalid="ignore"):
        base = np.where(s > 0, s * np.log(np.where(s > 0, s, 1.0)), 0.0)
    out = np.where(s <= 1.0, base, ((a * s + b) * s + d) * s)
    return out[()] if out.ndim == 0 else out


def psi_prime(s, spec: EntropySpec = LOG_ENTROPY):
    s = np.asarray(s, dtype=float)
    _check_domain(s, strict=True)
    a, b, d = spec.ext
    out = np.where(s <= 1.0, np.log(np.minimum(s, 1.0)) + 1.0, (3 * a * s + 2 * b) * s + d)
    return out[()] if out.ndim == 0 else out


def psi_double_prime(s, spec: EntropySpec = LOG_ENTROPY):
    s = np.asarray(s, dtype=float)
    _check_domain(s, strict=True)
    a, b, _ = spec.ext
    out = np.where(s <= 1.0, 1.0 / np.minimum(s, 1.0), 6 * a * s + 2 * b)
    return out[()] if out.ndim == 0 else out


# ----------------------------------------------------------------------
# resolvent and Yosida approximation


class ResolventError(ArithmeticError):
    pass


def _log_branch(s: np.ndarray, h: float, maxiter: int) -> np.ndarray:
    # g(t) = exp(t) + h (t + 1) - s is convex and increasing.  From t = log s
    # the first Newton step has size <= |log s + 1| and lands right of the
    # root; from then on the iterates decrease monotonically.  For s <= 0,
    # t = s/h - 1 already bounds the root from above.
    with np.errstate(divide="ignore"):
        t = np.where(s > 0, np.log(np.where(s > 0, s, 1.0)), s / h - 1.0)
    active = np.arange(s.size)
    for _ in range(maxiter):
        ta, sa = t[active], s[active]
        e = np.exp(ta)
        step = (e + h * (ta + 1.0) - sa) / (e + h)
        tn = ta - step
        if not np.all(np.isfinite(tn)):
            raise ResolventError("non-finite Newton iterate in resolvent")
        t[active] = tn
        keep = np.abs(step) > 4e-16 * (1.0 + np.abs(tn))
        active = active[keep]
        if active.size == 0:
            return t
    raise ResolventError("resolvent Newton iteration did not converge")


def resolvent_log(s, h: float, spec: EntropySpec = LOG_ENTROPY, maxiter: int = 200):
    """
    Solve ``r + h psi'(r) = s`` for r > 0 and return ``(r, log r)``.

    On the logarithmic branch (s <= 1 + h, equivalently r <= 1) the equation
    is solved for t = log r, where ``g(t) = exp(t) + h (t + 1) - s`` is convex
    and increasing, so Newton converges monotonically after its first step.
    Working in t keeps the answer meaningful when r itself underflows
    (s/h below about -745).  On the cubic branch the equation is a quadratic
    and is solved in closed form.
    """
    if not h > 0:
        raise ValueError(f"regularisation h must be positive, got {h!r}")
    s = np.asarray(s, dtype=float)
    if not np.all(np.isfinite(s)):
        raise ValueError("resolvent needs finite arguments")
    a, b, d = spec.ext
    r = np.empty_like(s)
    t = np.empty_like(s)

    low = s <= 1.0 + h * spec.dpsi1
    if np.any(low):
        t[low] = _log_branch(s[low], h, maxiter)
        r[low] = np.exp(t[low])

    high = ~low
    if np.any(high):
        sh = s[high]
        # h*3a r^2 + (1 + 2hb) r + (h d - s) = 0, root continuous with r = 1
        qa, qb, qc = 3.0 * a * h, 1.0 + 2.0 * b * h, d * h - sh
        disc = qb * qb - 4.0 * qa * qc
        if np.any(disc < 0):
            raise ResolventError(
                "argument beyond the monotone range of the cubic continuation "
                f"(s up to {sh.max():.6g} with h={h})"
            )
        rr = -2.0 * qc / (qb + np.sqrt(disc))
        r[high] = rr
        t[high] = np.log(rr)
    if r.ndim == 0:
        return r[()], t[()]
    return r, t


def resolvent_J(s, h: float, spec: EntropySpec = LOG_ENTROPY):
    return resolvent_log(s, h, spec)[0]


def _psi_from_log(r, t, spec: EntropySpec):
    a, b, d = spec.ext
    return np.where(r <= 1.0, r * t, ((a * r + b) * r + d) * r)


def psi_h(s, h: float, spec: EntropySpec = LOG_ENTROPY):
    """Yosida-regularised entropy ``(h/2) T_h(s)^2 + psi(J_h s)``."""
    s = np.asarray(s, dtype=float)
    r, t = resolvent_log(s, h, spec)
    T = (s - r) / h
    out = 0.5 * h * T * T + _psi_from_log(r, t, spec)
    return out[()] if np.ndim(out) == 0 else out


def psi_h_prime(s, h: float, spec: EntropySpec = LOG_ENTROPY):
    """Derivative of psi_h, equal to the Yosida approximation ``(s - J_h s)/h``."""
    s = np.asarray(s, dtype=float)
    r = resolvent_J(s, h, spec)
    out = (s - r) / h
    return out[()] if np.ndim(out) == 0 else out


def psi_h_double_prime(s, h: float, spec: EntropySpec = LOG_ENTROPY):
    """``psi''(J)/(1 + h psi''(J))`` with J = J_h(s); exact where psi'' exists."""
    s = np.asarray(s, dtype=float)
    r, t = resolvent_log(s, h, spec)
    a, b, _ = spec.ext
    c = 6 * a * r + 2 * b
    # on the log branch psi''(J) = 1/J, so c/(1 + h c) = 1/(J + h)
    out = np.where(r <= 1.0, 1.0 / (r + h), c / (1.0 + h * c))
    return out[()] if np.ndim(out) == 0 else out


# ----------------------------------------------------------------------
# multi-component density


@dataclass(frozen=True)
class InteractionMatrix:
    A: np.ndarray
    lambda_A: float

    @classmethod
    def from_array(cls, A) -> "InteractionMatrix":
        A = np.array(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"interaction matrix must be square, got shape {A.shape}")
        if not np.array_equal(A, A.T):
            raise ValueError("interaction matrix must be exactly symmetric")
        lam = float(np.linalg.eigvalsh(A).max())
        if not lam > 0:
            raise ValueError(f"interaction matrix needs a positive eigenvalue, largest is {lam}")
        A.setflags(write=False)
        return cls(A, lam)

    @property
    def n(self) -> int:
        return self.A.shape[0]


def flory_huggins_matrix(n: int, chi: float) -> InteractionMatrix:
    """``chi (I - e e^T)``: pairwise repulsion chi between unlike components."""
    return InteractionMatrix.from_array(chi * (np.eye(n) - np.ones((n, n))))


def Psi(v, A, spec: EntropySpec = LOG_ENTROPY):
    """Bulk density ``sum_i psi(v_i) - v.A v/2``; components on the first axis."""
    A = A.A if isinstance(A, InteractionMatrix) else np.asarray(A, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        _check_domain(v, strict=True)
    conv = psi(v, spec).sum(axis=0)
    quad = np.einsum("i...,ij,j...->...", v, A, v)
    return conv - 0.5 * quad


def Psi_h(v, A, h: float, spec: EntropySpec = LOG_ENTROPY):
    A = A.A if isinstance(A, InteractionMatrix) else np.asarray(A, dtype=float)
    v = np.asarray(v, dtype=float)
    conv = psi_h(v, h, spec).sum(axis=0)
    quad = np.einsum("i...,ij,j...->...", v, A, v)
    return conv - 0.5 * quad


def grad_entropy(v, h: float | None = None, spec: EntropySpec = LOG_ENTROPY):
    """Componentwise psi'(v_i), or psi_h'(v_i) when ``h`` is given."""
    if h is None:
        return psi_prime(v, spec)
    return psi_h_prime(v, h, spec)


def grad_interaction(v, A):
    """Gradient ``-A v`` of the quadratic part; components on the first axis."""
    A = A.A if isinstance(A, InteractionMatrix) else np.asarray(A, dtype=float)
    return -np.einsum("ij,j...->i...", A, np.asarray(v, dtype=float))

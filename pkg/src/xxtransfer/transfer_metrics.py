"""Dynamical maps of a single qubit under U(1) symmetry and the figures of merit built on them.

Basis: ``zeta_mu = |i><j|`` with ``mu = 2i + j`` (0-based), so a qubit density
``[[b1, b2], [b3, b4]]`` flattens row-major to ``b``. Two-qubit coefficients
``g[mu, nu]`` multiply ``zeta_mu (x) zeta_nu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotPure, PositivityViolation

POSITIVITY_TOL = 1e-8
PURITY_TOL = 1e-8
_SIGMA_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


@dataclass(frozen=True)
class QubitDensity:
    b: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=complex).reshape(4)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_matrix(cls, rho) -> "QubitDensity":
        return cls(np.asarray(rho, dtype=complex).reshape(4))

    @classmethod
    def pure(cls, theta: float, phi: float = 0.0) -> "QubitDensity":
        """``cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>``."""
        psi = np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])
        return cls.from_matrix(np.outer(psi, psi.conj()))

    def matrix(self) -> np.ndarray:
        return self.b.reshape(2, 2)

    def violation(self) -> float:
        """How far the coefficients are from a valid density (0 when valid)."""
        b1, b2, b3, b4 = self.b
        return max(
            abs(b1.imag),
            abs(b4.imag),
            abs(b2 - b3.conjugate()),
            abs(b1 + b4 - 1),
            abs(b2) ** 2 - b1.real * b4.real,
            -b1.real,
            -b4.real,
        )

    def is_valid(self, tol: float = 1e-10) -> bool:
        return self.violation() <= tol


@dataclass(frozen=True)
class TwoQubitDensity:
    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "g", np.asarray(self.g, dtype=complex).reshape(4, 4))

    @classmethod
    def from_matrix(cls, rho) -> "TwoQubitDensity":
        return cls(realign(np.asarray(rho, dtype=complex)))

    @classmethod
    def bell(cls) -> "TwoQubitDensity":
        return cls(0.5 * np.eye(4))

    @classmethod
    def product(cls, c: QubitDensity, a: QubitDensity) -> "TwoQubitDensity":
        return cls(np.outer(c.b, a.b))

    def matrix(self) -> np.ndarray:
        return realign(self.g)

    def purity(self) -> float:
        rho = self.matrix()
        return float(np.real(np.trace(rho @ rho)))

    def is_valid(self, tol: float = 1e-10) -> bool:
        rho = self.matrix()
        if np.abs(rho - rho.conj().T).max() > tol or abs(np.trace(rho) - 1) > tol:
            return False
        return bool(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() >= -tol)


def realign(x: np.ndarray) -> np.ndarray:
    """Swap between ``rho[(i,i'),(j,j')]`` and ``g[(i,j),(i',j')]`` (an involution)."""
    return np.asarray(x).reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)


@dataclass(frozen=True)
class TransferMap:
    """U(1)-symmetric map fixed by ``u``, ``alpha``, ``v``, the channel parity and ``<sigma^z_B>``."""

    u: float
    alpha: float
    v: float
    p: int
    sz_b: float

    def __post_init__(self):
        if self.p not in (-1, 1):
            raise ValueError("parity must be +-1")
        if not -1.0 <= self.sz_b <= 1.0:
            raise ValueError("sz_b must lie in [-1, 1]")
        if self.u < 0:
            raise ValueError("u is a modulus")

    @property
    def t11(self) -> float:
        return self.u**2 + self.v

    @property
    def t44(self) -> float:
        return 1.0 - self.v

    @property
    def t14(self) -> float:
        return self.v

    @property
    def t41(self) -> float:
        return 1.0 - self.t11

    @property
    def t22(self) -> complex:
        return -self.p * self.sz_b * self.u * np.exp(1j * self.alpha)

    def matrix(self) -> np.ndarray:
        t = np.zeros((4, 4), dtype=complex)
        t[0, 0], t[0, 3] = self.t11, self.t14
        t[3, 0], t[3, 3] = self.t41, self.t44
        t[1, 1] = self.t22
        t[2, 2] = np.conj(self.t22)
        return t

    def choi(self) -> np.ndarray:
        """``sum_nu zeta_nu (x) E(zeta_nu)``; positive semidefinite iff the map is completely positive."""
        return realign(self.matrix().T)

    def is_completely_positive(self, tol: float = POSITIVITY_TOL) -> bool:
        return bool(np.linalg.eigvalsh(self.choi()).min() >= -tol)

    @classmethod
    def identity(cls) -> "TransferMap":
        return cls(u=1.0, alpha=0.0, v=0.0, p=1, sz_b=-1.0)


def apply_map(tmap: TransferMap, a: QubitDensity) -> QubitDensity:
    """``b_mu = T_mu,nu a_nu``."""
    out = QubitDensity(tmap.matrix() @ a.b)
    if out.violation() > POSITIVITY_TOL:
        raise PositivityViolation(
            f"mapped state is not a density matrix (violation {out.violation():.3e}); "
            "map parameters are inconsistent"
        )
    return out


def evolve_pair(g_ca: TwoQubitDensity, tmap: TransferMap) -> TwoQubitDensity:
    """Act with the map on the second qubit: ``g_CB[mu, nu] = g_CA[mu, lam] T[nu, lam]``."""
    out = TwoQubitDensity(g_ca.g @ tmap.matrix().T)
    if not out.is_valid(POSITIVITY_TOL):
        raise PositivityViolation("evolved two-qubit state is not positive semidefinite")
    return out


def entanglement_fidelity(g_ca: TwoQubitDensity, tmap: TransferMap) -> float:
    """``sum T_mu,nu conj(g_lam,mu) g_lam,nu`` for a pure input pair."""
    purity = g_ca.purity()
    if abs(purity - 1.0) > PURITY_TOL:
        raise NotPure(f"input pair is not pure (Tr rho^2 = {purity:.12g})")
    gram = g_ca.g.conj().T @ g_ca.g
    return float(np.real(np.sum(tmap.matrix() * gram)))


def wootters_concurrence(rho) -> float:
    """Concurrence of a two-qubit density (matrix or :class:`TwoQubitDensity`)."""
    if isinstance(rho, TwoQubitDensity):
        rho = rho.matrix()
    rho = np.asarray(rho, dtype=complex)
    rho = 0.5 * (rho + rho.conj().T)
    vals, vecs = np.linalg.eigh(rho)
    root = (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T
    flipped = _SIGMA_YY @ rho.conj() @ _SIGMA_YY
    m = root @ flipped @ root
    lam = np.sqrt(np.clip(np.linalg.eigvalsh(0.5 * (m + m.conj().T)), 0.0, None))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


@dataclass(frozen=True)
class BellMetrics:
    fidelity: float
    concurrence: float


def bell_metrics(tmap: TransferMap) -> BellMetrics:
    """Entanglement fidelity and concurrence when one half of a Bell pair is sent."""
    fidelity = 0.25 * float(np.real(np.trace(tmap.matrix())))
    c0 = abs(tmap.t22) - math.sqrt(max(0.0, tmap.t14 * tmap.t41))
    return BellMetrics(fidelity, max(0.0, c0))


def state_fidelity(tmap: TransferMap, theta: float, phi: float = 0.0) -> float:
    """Fidelity of sending ``cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>``.

    Independent of ``phi`` under U(1) symmetry.
    """
    c2 = math.cos(theta / 2) ** 2
    s2 = math.sin(theta / 2) ** 2
    return (
        tmap.t11 * c2 * c2
        + tmap.t44 * s2 * s2
        + (tmap.t14 + tmap.t41 + 2.0 * tmap.t22.real) * c2 * s2
    )


def average_fidelity(tmap: TransferMap) -> float:
    """Bloch-sphere average of :func:`state_fidelity`, ``1/3 + 2/3 F_ent^Bell``."""
    return 1.0 / 3.0 + 2.0 / 3.0 * bell_metrics(tmap).fidelity


@dataclass(frozen=True)
class FidelityExtrema:
    """Bounds of the state fidelity over the Bloch sphere.

    ``F(x) = f + (f0 - f1) x / 2 + (f0 + f1 - 2f) x^2 / 2`` with ``x = cos(theta)``;
    ``c_m`` and ``f_m`` locate its stationary point.
    """

    f0: float
    f1: float
    f: float
    c_m: float
    f_m: float
    f_min: float
    f_max: float

    @property
    def curvature(self) -> float:
        return self.f0 + self.f1 - 2.0 * self.f


_DEGENERATE = 1e-12


def fidelity_extrema(tmap: TransferMap) -> FidelityExtrema:
    f0 = tmap.t11
    f1 = tmap.t44
    f = 0.5 * (1.0 + tmap.t22.real)
    q = f0 + f1 - 2.0 * f
    lo, hi = min(f0, f1), max(f0, f1)
    if abs(q) <= _DEGENERATE:
        # affine in cos(theta): extrema at the poles
        return FidelityExtrema(f0, f1, f, math.inf, math.nan, lo, hi)
    c_m = (f1 - f0) / (2.0 * q)
    f_m = f - (f0 - f1) ** 2 / (8.0 * q)
    interior = abs(c_m) < 1.0
    if q > 0:
        f_min, f_max = (f_m if interior else lo), hi
    else:
        f_min, f_max = lo, (f_m if interior else hi)
    return FidelityExtrema(f0, f1, f, c_m, f_m, f_min, f_max)

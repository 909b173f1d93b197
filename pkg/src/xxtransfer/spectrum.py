"""Analytic diagonalization of the quasi-uniform tridiagonal hopping matrix.

The single-particle matrix of the chain A-Gamma-B is ``Omega = -h - M(x, y)/2``
where ``M(x, y)`` is the ``m x m`` tridiagonal matrix with unit off-diagonals,
corner couplings ``y = j0`` and corner diagonal entries ``x = 2 (h0 - h)``.
Its eigenvalues are written as ``lambda = 2 cos k`` with pseudo-wavevectors
``k_n = (pi n + phi(k_n)) / (m + 1)``, ``n = 1..m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import NonConvergence, NumericalInstability, SizeLimit

#: Default cap on the matrix dimension for dense eigenvector work.
MAX_EIGENBASIS_SIZE = 4000

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class CouplingConfig:
    """Chain geometry and couplings.

    ``n_chain`` is the number of interior spins N; the qubits A and B sit at
    sites 0 and N+1. Energies are in units of the intrachain exchange.
    ``h0`` defaults to ``h`` (mirror-symmetric, zero corner detuning).
    """

    n_chain: int
    j0: float
    h: float = 0.0
    h0: float | None = None

    def __post_init__(self):
        if int(self.n_chain) != self.n_chain or self.n_chain < 1:
            raise ValueError(f"n_chain must be a positive integer, got {self.n_chain!r}")
        if not self.j0 > 0:
            raise ValueError(f"j0 must be positive, got {self.j0!r}")
        if abs(self.j0 - _SQRT2) < 1e-12:
            raise ValueError("j0 = sqrt(2) gives an infinite Lorentzian width")
        object.__setattr__(self, "n_chain", int(self.n_chain))
        if self.h0 is None:
            object.__setattr__(self, "h0", float(self.h))

    @classmethod
    def from_delta(cls, n_chain: int, delta: float, h: float = 0.0) -> "CouplingConfig":
        """Build the mirror-symmetric config whose width is ``delta``."""
        if not delta > 0:
            raise ValueError(f"delta must be positive, got {delta!r}")
        return cls(n_chain, j0_from_delta(delta), h)

    @property
    def m(self) -> int:
        return self.n_chain + 2

    @property
    def x(self) -> float:
        return 2.0 * (self.h0 - self.h)

    @property
    def y(self) -> float:
        return self.j0

    @property
    def delta(self) -> float:
        """Lorentzian HWHM ``y^2 / sqrt((2 - y^2)^2 - x^2)`` of the edge weights."""
        b = 2.0 - self.y**2
        if b <= 0 or b * b <= self.x**2:
            raise ValueError(f"width undefined for j0={self.j0}, x={self.x}")
        return self.y**2 / math.sqrt(b * b - self.x**2)

    def matrix(self) -> np.ndarray:
        """Dense ``M(x, y)``."""
        m = self.m
        mat = np.diag(np.ones(m - 1), 1) + np.diag(np.ones(m - 1), -1)
        mat[0, 1] = mat[1, 0] = mat[-1, -2] = mat[-2, -1] = self.y
        mat[0, 0] = mat[-1, -1] = self.x
        return mat

    def omega_matrix(self) -> np.ndarray:
        """Dense single-particle Hamiltonian ``Omega = -h - M/2``."""
        return -self.h * np.eye(self.m) - 0.5 * self.matrix()


def delta_from_j0(j0: float) -> float:
    return j0 * j0 / (2.0 - j0 * j0)


def j0_from_delta(delta: float) -> float:
    return math.sqrt(2.0 * delta / (1.0 + delta))


def _edge_angle(config: CouplingConfig, k):
    a = config.y**2
    b = 2.0 - a
    return np.arctan2(a * np.sin(k), b * np.cos(k) - config.x)


def _phase(config: CouplingConfig, k):
    # continuous on (0, pi) because the edge angle lives in (0, pi)
    return 2.0 * k - 2.0 * _edge_angle(config, k)


def _phase_derivative(config: CouplingConfig, k):
    a = config.y**2
    b = 2.0 - a
    x = config.x
    den = (b * np.cos(k) - x) ** 2 + (a * np.sin(k)) ** 2
    return 2.0 - 2.0 * a * (b - x * np.cos(k)) / den


def secular_residual(config: CouplingConfig, k):
    """``Im{exp(i(m+1)k) u_k^2}``; vanishes iff ``2 cos k`` is an eigenvalue of M."""
    a = config.y**2
    u_k = np.exp(-1j * k) * (((2.0 - a) * np.cos(k) - config.x) + 1j * a * np.sin(k))
    return np.imag(np.exp(1j * (config.m + 1) * k) * u_k**2)


def phase_shift(config: CouplingConfig, k):
    """Phase shift ``phi_k`` folded into (-pi, pi]."""
    phi = _phase(config, k)
    return np.pi - np.mod(np.pi - phi, 2.0 * np.pi)


def phase_shift_derivative(config: CouplingConfig, k):
    return _phase_derivative(config, k)


def edge_weight(config: CouplingConfig, k):
    """Large-m dominant term of the squared first eigenvector component.

    ``(2/(m+1)) y^2 sin^2 k / ([(2-y^2) cos k - x]^2 + y^4 sin^2 k)``. Summed
    over the spectrum this exceeds one by a relative ``O(1/(m Delta))``; see
    :func:`exact_edge_weight` for the normalized version.
    """
    a = config.y**2
    s2 = np.sin(k) ** 2
    den = ((2.0 - a) * np.cos(k) - config.x) ** 2 + a * a * s2
    return 2.0 / (config.m + 1) * a * s2 / den


def exact_edge_weight(config: CouplingConfig, k):
    """Exact squared first component at a root of the secular equation.

    Keeping the full derivative of the characteristic polynomial replaces
    ``m + 1`` by ``m + 1 - phi'(k)`` in the prefactor of :func:`edge_weight`.
    """
    m1 = config.m + 1
    return edge_weight(config, k) * m1 / (m1 - _phase_derivative(config, k))


def _check_band(config: CouplingConfig):
    b = 2.0 - config.y**2
    if not abs(config.x) < b:
        raise ValueError(
            f"|x| < 2 - j0^2 is required for m real pseudo-wavevectors "
            f"(j0={config.j0}, x={config.x}); the matrix has states outside the band"
        )


def solve_wavevectors(config: CouplingConfig, tol: float = 1e-12, max_iter: int = 100) -> np.ndarray:
    """Solve ``(m+1) k - phi(k) = pi n`` for all ``n`` at once.

    Safeguarded Newton iteration, i.e. the fixed-point map damped by
    ``(m+1)/(m+1-phi')``, falling back to bisection whenever a step leaves the
    bracket ``((n-2) pi, (n+2) pi) / (m+1)`` (``phi`` ranges over (-2 pi, 2 pi)).
    """
    _check_band(config)
    m = config.m
    m1 = m + 1
    n = np.arange(1, m + 1, dtype=float)
    lo = np.clip((n - 2) * np.pi / m1, 0.0, np.pi)
    hi = np.clip((n + 2) * np.pi / m1, 0.0, np.pi)

    def g(k):
        return m1 * k - _phase(config, k) - np.pi * n

    if np.any(g(lo) > 0) or np.any(g(hi) < 0):
        bad = int(np.argmax((g(lo) > 0) | (g(hi) < 0))) + 1
        raise NonConvergence(f"secular root for n={bad} is not bracketed", index=bad)

    k = np.pi * n / m1
    for _ in range(max_iter):
        gk = g(k)
        lo = np.where(gk < 0, k, lo)
        hi = np.where(gk > 0, k, hi)
        k_new = k - gk / (m1 - _phase_derivative(config, k))
        outside = (k_new <= lo) | (k_new >= hi)
        k_new = np.where(outside, 0.5 * (lo + hi), k_new)
        step = np.abs(k_new - k)
        k = k_new
        if step.max() < tol:
            break
    else:
        worst = int(np.argmax(step))
        raise NonConvergence(
            f"wavevector iteration did not converge (n={worst + 1}, |dk|={step[worst]:.3e})",
            index=worst + 1,
            residual=float(step[worst]),
        )
    if np.any(np.diff(k) <= 0):
        raise NonConvergence("solved wavevectors are not strictly increasing")
    return k


@dataclass(frozen=True)
class Spectrum:
    """Solved single-particle spectrum of a :class:`CouplingConfig`.

    Arrays are ordered by ascending ``k`` (descending ``lambda = 2 cos k``),
    index ``n - 1`` for ``n = 1..m``. ``weight`` holds the exact squared edge
    components, which sum to one; ``rho`` holds the Lorentzian dominant-term
    weights normalized to unit sum.
    """

    config: CouplingConfig
    k: np.ndarray
    omega: np.ndarray
    weight: np.ndarray
    phase_shift: np.ndarray
    delta: float | None
    k0: float | None
    max_eigen_size: int = field(default=MAX_EIGENBASIS_SIZE, compare=False)

    @property
    def m(self) -> int:
        return self.config.m

    @property
    def n_index(self) -> np.ndarray:
        return np.arange(1, self.m + 1)

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues ``2 cos k_n`` of ``M(x, y)``."""
        return 2.0 * np.cos(self.k)

    @cached_property
    def dominant_weight(self) -> np.ndarray:
        return edge_weight(self.config, self.k)

    @cached_property
    def rho(self) -> np.ndarray:
        w = self.dominant_weight
        return w / np.sum(w)

    def weights(self, kind: str = "lorentzian") -> np.ndarray:
        if kind == "lorentzian":
            return self.rho
        if kind == "exact":
            return self.weight
        raise ValueError(f"unknown weight kind {kind!r}; use 'lorentzian' or 'exact'")

    @cached_property
    def eigenvectors(self) -> np.ndarray:
        """Rows are unit eigenvectors of ``M(x, y)``, same order as ``k``."""
        if self.m > self.max_eigen_size:
            raise SizeLimit(f"m={self.m} exceeds the eigenbasis cap {self.max_eigen_size}")
        return eigenvectors(self.config, self.k)


def solve_spectrum(config: CouplingConfig, tol: float = 1e-12,
                   max_eigen_size: int = MAX_EIGENBASIS_SIZE) -> Spectrum:
    if not tol > 0:
        raise ValueError("tol must be positive")
    k = solve_wavevectors(config, tol=tol)
    try:
        delta = config.delta
        k0 = float(np.arccos(config.x / (2.0 - config.y**2)))
    except ValueError:
        delta = k0 = None
    k.setflags(write=False)
    omega = -config.h - np.cos(k)
    weight = exact_edge_weight(config, k)
    phi = phase_shift(config, k)
    for arr in (omega, weight, phi):
        arr.setflags(write=False)
    return Spectrum(config, k, omega, weight, phi, delta, k0, max_eigen_size)


def eigenvectors(config: CouplingConfig, k) -> np.ndarray:
    """Eigenvectors of ``M(x, y)`` for the given solved wavevectors.

    The three-term recurrence is run from site 0 to the middle and the second
    half is filled by the mirror rule ``v_i = s v_{m-1-i}``, with the parity
    ``s`` alternating along ascending ``k`` (first vector symmetric). The
    resulting vectors are checked against ``M v = lambda v``.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    m = config.m
    x, y = config.x, config.y
    lam = 2.0 * np.cos(k)
    half = (m + 1) // 2
    v = np.empty((k.size, m))
    v[:, 0] = 1.0
    v[:, 1] = (lam - x) / y
    if half > 2:
        v[:, 2] = lam * v[:, 1] - y * v[:, 0]
    for i in range(3, half):
        v[:, i] = lam * v[:, i - 1] - v[:, i - 2]

    n = np.rint(((m + 1) * k - _phase(config, k)) / np.pi)
    parity = np.where(n % 2 == 1, 1.0, -1.0)
    for i in range(half, m):
        v[:, i] = parity * v[:, m - 1 - i]
    v /= np.linalg.norm(v, axis=1)[:, None]

    mat = config.matrix()
    resid = np.abs(v @ mat - lam[:, None] * v).max(axis=1)
    scale = np.abs(v).max(axis=1)
    if np.any(resid > 1e-8 * scale):
        bad = int(np.argmax(resid / scale))
        raise NumericalInstability(
            f"mirror-matched recurrence inconsistent for k={k[bad]:.6g} "
            f"(residual {resid[bad]:.3e})"
        )
    return v


def eigenvector(config: CouplingConfig, k_n: float) -> np.ndarray:
    return eigenvectors(config, [k_n])[0]


def group_velocity(config: CouplingConfig, k):
    """Continuous ``v(k) = (N+3) sin k / (N+3 - phi'(k))``, i.e. ``(N+3)/pi d omega/dn``."""
    if config.x != 0:
        raise ValueError("group velocity profile is defined for mirror-symmetric fields (h0 = h)")
    m1 = config.m + 1
    k = np.asarray(k, dtype=float)
    return m1 * np.sin(k) / (m1 - _phase_derivative(config, k))


def group_velocity_profile(spectrum: Spectrum):
    """Return ``(k_n, v_k)`` sampled at the solved wavevectors."""
    return spectrum.k, group_velocity(spectrum.config, spectrum.k)


def velocity_curvature(config: CouplingConfig, half_width: float = 0.05, points: int = 201):
    """Least-squares fit ``v ~ c0 + c1 cos k + c2 cos^2 k`` on ``|k - pi/2| <= half_width``.

    Returns ``(c0, c1, c2)``.
    """
    k = np.linspace(0.5 * np.pi - half_width, 0.5 * np.pi + half_width, points)
    return tuple(np.polynomial.polynomial.polyfit(np.cos(k), group_velocity(config, k), 2))


def mirror_phase_derivative(delta: float, k):
    """Closed form of ``phi'(k)`` for ``x = 0`` in terms of the width."""
    c2 = np.cos(k) ** 2
    return -2.0 * (1.0 - delta) / delta + 2.0 * (1.0 - delta**2) * c2 / (
        delta * (delta**2 + (1.0 - delta**2) * c2)
    )

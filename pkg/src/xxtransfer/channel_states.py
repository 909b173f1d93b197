"""Initial states of the channel as fermionic two-point functions.

Jordan-Wigner convention throughout the package: site ``j`` is occupied iff
its spin is up, ``n_j = S^z_j + 1/2``, and
``c_j = prod_{l<j} (-sigma^z_l) sigma^-_j`` with the string starting at A.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInit

_ZERO_MODE_TOL = 1e-12


class ChannelKind(str, enum.Enum):
    POLARIZED_DOWN = "polarized-down"
    POLARIZED_UP = "polarized-up"
    GROUND_STATE = "ground-state"
    NEEL = "neel"
    SINGLET_SERIES = "singlets"


@dataclass(frozen=True)
class ChannelInit:
    """Channel initialization; ``h`` only matters for the ground state."""

    kind: ChannelKind
    h: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ChannelKind(self.kind))

    def check(self, n_chain: int):
        if n_chain < 1:
            raise InvalidInit(f"chain length must be positive, got {n_chain}")
        if self.kind is ChannelKind.SINGLET_SERIES and n_chain % 2:
            raise InvalidInit(f"{self.kind.value} initialization needs an even chain, got N={n_chain}")


@dataclass(frozen=True)
class CorrelationMatrix:
    """``entries[j-1, j'-1] = Tr[rho c_j^dag c_j']`` for chain sites ``j, j' = 1..N``."""

    entries: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def filling(self) -> float:
        return float(np.real(np.trace(self.entries)))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.entries)


def chain_modes(n_chain: int, h: float = 0.0):
    """Modes of the open uniform chain: ``q_n = pi n/(N+1)``, energies and profiles.

    Returns ``(q, energy, phi)`` with ``phi[n-1, j-1] = sqrt(2/(N+1)) sin(q_n j)``.
    """
    n = np.arange(1, n_chain + 1)
    q = np.pi * n / (n_chain + 1)
    energy = -h - np.cos(q)
    phi = math.sqrt(2.0 / (n_chain + 1)) * np.sin(np.outer(q, n))
    return q, energy, phi


def occupied_modes(n_chain: int, h: float = 0.0) -> np.ndarray:
    """Boolean mask of ground-state occupied modes; exact zero modes stay empty."""
    _, energy, _ = chain_modes(n_chain, h)
    if np.any(np.abs(energy) <= _ZERO_MODE_TOL):
        warnings.warn(
            f"degenerate chain ground state (zero mode at N={n_chain}, h={h}); leaving it empty",
            RuntimeWarning,
            stacklevel=3,
        )
    return energy < -_ZERO_MODE_TOL


def correlation_matrix(init: ChannelInit, n_chain: int) -> CorrelationMatrix:
    init.check(n_chain)
    kind = init.kind
    if kind is ChannelKind.POLARIZED_DOWN:
        g = np.zeros((n_chain, n_chain))
    elif kind is ChannelKind.POLARIZED_UP:
        g = np.eye(n_chain)
    elif kind is ChannelKind.NEEL:
        g = np.diag((np.arange(n_chain) % 2 == 0).astype(float))
    elif kind is ChannelKind.SINGLET_SERIES:
        # (|ud> - |du>)/sqrt(2) on each pair; the off-diagonal sign follows the
        # string convention above and is cross-checked by the many-body oracle
        g = 0.5 * np.eye(n_chain)
        for a in range(0, n_chain, 2):
            g[a, a + 1] = g[a + 1, a] = -0.5
    else:
        _, _, phi = chain_modes(n_chain, init.h)
        occ = occupied_modes(n_chain, init.h)
        g = phi[occ].T @ phi[occ]
    g = g.astype(float)
    g.setflags(write=False)
    return CorrelationMatrix(g)


def parity(init: ChannelInit, n_chain: int) -> int:
    """Eigenvalue of ``P = prod_j (-sigma^z_j)``, i.e. ``(-1)`` to the number of up spins."""
    init.check(n_chain)
    kind = init.kind
    if kind is ChannelKind.POLARIZED_DOWN:
        return 1
    if kind is ChannelKind.POLARIZED_UP:
        return -1 if n_chain % 2 else 1
    if kind is ChannelKind.NEEL:
        # up spins on the odd sites 1, 3, ...
        return -1 if ((n_chain + 1) // 2) % 2 else 1
    if kind is ChannelKind.SINGLET_SERIES:
        return -1 if (n_chain // 2) % 2 else 1
    n_occ = int(np.count_nonzero(occupied_modes(n_chain, init.h)))
    return -1 if n_occ % 2 else 1


def ground_state_parity_formula(n_chain: int, h: float = 0.0) -> int:
    """Closed form ``(-1)^floor(N arccos(h) / pi)``.

    Agrees with the mode count of :func:`parity` at ``h = 0``; away from zero
    field the two can differ (e.g. ``N = 3``, ``h = 0.5``) and the mode count
    is the one the many-body oracle confirms.
    """
    return -1 if math.floor(n_chain * math.acos(h) / math.pi) % 2 else 1


def arrival_phase(n_chain: int) -> float:
    """Transition-amplitude phase at the arrival time for zero field, ``-pi (N+1)/2``.

    Exact for odd ``N``; for even ``N`` the amplitude is imaginary and its sign
    is opposite, which leaves ``cos(alpha) = 0`` unaffected.
    """
    return -0.5 * math.pi * (n_chain + 1)


def phase_condition(init: ChannelInit, n_chain: int, sz_b: float) -> float:
    """Value of ``-p <sigma^z_B> cos(alpha(t*))`` predicted from the arrival phase."""
    return -parity(init, n_chain) * sz_b * math.cos(arrival_phase(n_chain))


def recommend_chain_length(init: ChannelInit, sz_b: float, target_n: int, search: int = 8) -> int:
    """Chain length near ``target_n`` meeting the fidelity phase condition.

    Only odd ``N`` (``N = 4M +- 1``) can satisfy ``-p <sigma^z_B> cos alpha = 1``;
    the parity ``p`` is re-evaluated for every candidate. Ties go to the
    shorter chain.
    """
    if sz_b not in (-1, 1):
        raise ValueError("the phase condition needs a polarized receiver, sz_b = +-1")
    candidates = []
    for n in range(max(1, target_n - search), target_n + search + 1):
        try:
            init.check(n)
        except InvalidInit:
            continue
        if n % 2 and abs(phase_condition(init, n, sz_b) - 1.0) < 1e-9:
            candidates.append(n)
    if not candidates:
        raise InvalidInit(
            f"no chain length within +-{search} of {target_n} satisfies the phase condition "
            f"for {init.kind.value}"
        )
    return min(candidates, key=lambda n: (abs(n - target_n), n))

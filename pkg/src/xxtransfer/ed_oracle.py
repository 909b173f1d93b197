"""Brute-force many-body oracle for small chains.

The full ``2^(N+2)`` spin Hilbert space is diagonalized densely. Basis
states are bit strings with site 0 (qubit A) as the most significant bit;
bit 0 means spin up (``|0> = |up>``), bit 1 spin down. Nothing here uses the
fermionic machinery, so it can certify it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .channel_states import ChannelInit, ChannelKind
from .errors import SizeLimit
from .spectrum import CouplingConfig

MAX_ED_SITES = 12
MAX_MAP_SITES = 10


def _bits(n_sites: int) -> np.ndarray:
    """``bits[s, i]`` is 1 when site ``i`` of basis state ``s`` is down."""
    states = np.arange(2**n_sites)
    shifts = np.arange(n_sites - 1, -1, -1)
    return (states[:, None] >> shifts) & 1


def spin_hamiltonian(couplings, fields) -> np.ndarray:
    """``-sum_i J_i (Sx Sx + Sy Sy)_{i,i+1} - sum_i h_i Sz_i`` on an open chain."""
    fields = np.asarray(fields, dtype=float)
    n = fields.size
    bits = _bits(n)
    sz = 0.5 - bits
    dim = 2**n
    ham = np.diag(-(sz @ fields)).astype(float)
    idx = np.arange(dim)
    for i, coupling in enumerate(couplings):
        flip = bits[:, i] != bits[:, i + 1]
        mask = (1 << (n - 1 - i)) | (1 << (n - 2 - i))
        src = idx[flip]
        ham[src ^ mask, src] += -0.5 * coupling
    return ham


def build_hamiltonian(config: CouplingConfig) -> np.ndarray:
    m = config.m
    if m > MAX_ED_SITES:
        raise SizeLimit(f"exact diagonalization limited to {MAX_ED_SITES} sites, got {m}")
    couplings = np.ones(m - 1)
    couplings[0] = couplings[-1] = config.j0
    fields = np.full(m, config.h)
    fields[0] = fields[-1] = config.h0
    return spin_hamiltonian(couplings, fields)


def sigma_z(n_sites: int, site: int) -> np.ndarray:
    """Diagonal of ``sigma^z_site``."""
    return 1.0 - 2.0 * _bits(n_sites)[:, site]


def annihilator(n_sites: int, site: int) -> np.ndarray:
    """Dense Jordan-Wigner ``c_site = prod_{l<site} (-sigma^z_l) sigma^-_site``."""
    bits = _bits(n_sites)
    dim = 2**n_sites
    op = np.zeros((dim, dim))
    src = np.flatnonzero(bits[:, site] == 0)
    dst = src | (1 << (n_sites - 1 - site))
    n_before = np.count_nonzero(bits[src, :site] == 0, axis=1)
    op[dst, src] = np.where(n_before % 2, -1.0, 1.0)
    return op


def total_sz(n_sites: int) -> np.ndarray:
    return (0.5 - _bits(n_sites)).sum(axis=1)


# -- channel states -----------------------------------------------------------


def _product_state(spins_down) -> np.ndarray:
    n = len(spins_down)
    index = 0
    for b in spins_down:
        index = (index << 1) | int(b)
    psi = np.zeros(2**n, dtype=complex)
    psi[index] = 1.0
    return psi


@lru_cache(maxsize=32)
def chain_ground_state(n_chain: int, h: float) -> np.ndarray:
    """Lowest state of the bare channel in the sector with one up spin per negative mode."""
    ham = spin_hamiltonian(np.ones(n_chain - 1), np.full(n_chain, h))
    q = np.pi * np.arange(1, n_chain + 1) / (n_chain + 1)
    n_up = int(np.count_nonzero(-h - np.cos(q) < -1e-12))
    sector = np.flatnonzero(np.count_nonzero(_bits(n_chain) == 0, axis=1) == n_up)
    vals, vecs = np.linalg.eigh(ham[np.ix_(sector, sector)])
    psi = np.zeros(2**n_chain, dtype=complex)
    psi[sector] = vecs[:, 0]
    psi.setflags(write=False)
    return psi


def channel_state(init: ChannelInit, n_chain: int) -> np.ndarray:
    """Channel ket for the given initialization."""
    init.check(n_chain)
    kind = init.kind
    if kind is ChannelKind.POLARIZED_DOWN:
        return _product_state([1] * n_chain)
    if kind is ChannelKind.POLARIZED_UP:
        return _product_state([0] * n_chain)
    if kind is ChannelKind.NEEL:
        return _product_state([j % 2 for j in range(n_chain)])
    if kind is ChannelKind.SINGLET_SERIES:
        singlet = (_product_state([0, 1]) - _product_state([1, 0])) / np.sqrt(2.0)
        psi = np.ones(1, dtype=complex)
        for _ in range(n_chain // 2):
            psi = np.kron(psi, singlet)
        return psi
    if n_chain > MAX_ED_SITES:
        raise SizeLimit(f"ground state oracle limited to {MAX_ED_SITES} sites")
    return chain_ground_state(n_chain, init.h)


def ed_correlation(init: ChannelInit, n_chain: int) -> np.ndarray:
    """``<c_j^dag c_j'>`` measured on the channel ket (sites 1..N)."""
    psi = channel_state(init, n_chain)
    ops = [annihilator(n_chain, j) for j in range(n_chain)]
    phis = [op @ psi for op in ops]
    return np.array([[np.vdot(a, b) for b in phis] for a in phis])


def ed_parity(init: ChannelInit, n_chain: int) -> float:
    psi = channel_state(init, n_chain)
    p_diag = np.prod(-np.stack([sigma_z(n_chain, j) for j in range(n_chain)]), axis=0)
    return float(np.real(np.vdot(psi, p_diag * psi)))


# -- dynamics -----------------------------------------------------------------


@dataclass(frozen=True)
class TransferMeasurement:
    """Map ``T[mu-1, nu-1]`` measured by brute-force evolution at time ``t``."""

    t: float
    matrix: np.ndarray

    @property
    def t11(self) -> float:
        return float(np.real(self.matrix[0, 0]))

    @property
    def t22(self) -> complex:
        return complex(self.matrix[1, 1])

    @property
    def t44(self) -> float:
        return float(np.real(self.matrix[3, 3]))

    def off_pattern(self) -> float:
        """Largest element outside the U(1)-allowed pattern."""
        allowed = np.zeros((4, 4), dtype=bool)
        allowed[[0, 0, 3, 3], [0, 3, 0, 3]] = True
        allowed[1, 1] = allowed[2, 2] = True
        return float(np.abs(self.matrix[~allowed]).max())


class EDSystem:
    """Dense eigendecomposition of the full spin Hamiltonian of A-Gamma-B."""

    def __init__(self, config: CouplingConfig):
        self.config = config
        self.n_sites = config.m
        self.hamiltonian = build_hamiltonian(config)

    @cached_property
    def _eig(self):
        return np.linalg.eigh(self.hamiltonian)

    @cached_property
    def _vecs_t(self) -> np.ndarray:
        return np.ascontiguousarray(self._eig[1].T)

    def evolve(self, psi, t: float) -> np.ndarray:
        vals, vecs = self._eig
        psi = np.asarray(psi, dtype=complex)
        # H is real symmetric: keep the eigenvector products real to avoid complex upcasts
        coeff = self._vecs_t @ psi.real + 1j * (self._vecs_t @ psi.imag)
        coeff *= np.exp(-1j * vals * t)
        return vecs @ coeff.real + 1j * (vecs @ coeff.imag)

    def _full_kets(self, chain_psi, a_down: int, b_down: int) -> np.ndarray:
        return np.kron(np.kron(_product_state([a_down]), chain_psi), _product_state([b_down]))

    def single_particle_propagator(self, t: float) -> np.ndarray:
        """``U_ij(t) = <vac| c_i(t) c_j^dag |vac>`` from the one-up-spin sector."""
        m = self.n_sites
        vac = _product_state([1] * m)
        e_vac = float(np.real(np.vdot(vac, self.hamiltonian @ vac)))
        out = np.empty((m, m), dtype=complex)
        for j in range(m):
            spins = [1] * m
            spins[j] = 0
            evolved = self.evolve(_product_state(spins), t)
            for i in range(m):
                spins_i = [1] * m
                spins_i[i] = 0
                out[i, j] = np.exp(1j * e_vac * t) * np.vdot(_product_state(spins_i), evolved)
        return out

    def transfer_map(self, init: ChannelInit, sz_b: float, t: float) -> TransferMeasurement:
        """Measure ``T_mu,nu(t) = Tr_B[zeta_mu^dag Tr_{A,Gamma}[e^{-iHt} zeta_nu x rho_Gamma x rho_B e^{iHt}]]``.

        ``zeta_nu = |i><j|`` on A is an outer product of basis kets, so its image
        is ``Tr_{A,Gamma} |Psi_i(t)><Psi_j(t)|``; ``rho_B`` is the diagonal mixture
        fixed by ``sz_b``.
        """
        if self.n_sites > MAX_MAP_SITES:
            raise SizeLimit(f"transfer-map oracle limited to {MAX_MAP_SITES} sites")
        chain_psi = channel_state(init, self.config.n_chain)
        out = np.zeros((4, 4), dtype=complex)
        for b_down, prob in ((0, 0.5 * (1 + sz_b)), (1, 0.5 * (1 - sz_b))):
            if prob == 0:
                continue
            evolved = [
                self.evolve(self._full_kets(chain_psi, a, b_down), t).reshape(-1, 2)
                for a in (0, 1)
            ]
            for i in (0, 1):
                for j in (0, 1):
                    rho_b = evolved[i].T @ evolved[j].conj()
                    nu = 2 * i + j
                    out[:, nu] += prob * rho_b.reshape(4)
        return TransferMeasurement(t, out)

    def magnetization(self, init: ChannelInit, sz_a: float, sz_b: float, t: float) -> np.ndarray:
        """``<sigma^z_i(t)>`` for A and B prepared as diagonal mixtures."""
        chain_psi = channel_state(init, self.config.n_chain)
        szs = np.stack([sigma_z(self.n_sites, i) for i in range(self.n_sites)])
        out = np.zeros(self.n_sites)
        for a_down, pa in ((0, 0.5 * (1 + sz_a)), (1, 0.5 * (1 - sz_a))):
            for b_down, pb in ((0, 0.5 * (1 + sz_b)), (1, 0.5 * (1 - sz_b))):
                if pa * pb == 0:
                    continue
                psi = self.evolve(self._full_kets(chain_psi, a_down, b_down), t)
                out += pa * pb * (szs @ np.abs(psi) ** 2)
        return out

    def receiver_channel_occupation(self, init: ChannelInit, t: float) -> float:
        """``<n_B(t)>`` with A and B both down, which isolates the channel term ``C_{N+1}``."""
        chain_psi = channel_state(init, self.config.n_chain)
        psi = self.evolve(self._full_kets(chain_psi, 1, 1), t)
        return float(0.5 * (1 + sigma_z(self.n_sites, self.n_sites - 1)) @ np.abs(psi) ** 2)


def ed_transfer_map(config: CouplingConfig, init: ChannelInit, sz_b: float, t: float) -> TransferMeasurement:
    return EDSystem(config).transfer_map(init, sz_b, t)

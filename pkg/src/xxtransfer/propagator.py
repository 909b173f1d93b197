"""Free-fermion dynamics of the chain.

Two routes to the single-particle propagator ``U(t) = exp(-i Omega t)``:

* the O(m)-per-time *amplitude* route, which only needs the solved
  wavevectors and edge weights and serves the end-to-end amplitudes up to
  m ~ 10^6 sites;
* the O(m^2) *eigenbasis* route (capped by ``Spectrum.max_eigen_size``), which
  gives full rows and is needed for channel contributions and magnetization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel_states import CorrelationMatrix
from .spectrum import CouplingConfig, Spectrum, solve_spectrum
from .transfer_metrics import TransferMap

# complex entries per block when evaluating many time samples at once
_BLOCK = 1 << 22


@dataclass(frozen=True)
class AmplitudeSample:
    t: float
    u: float
    alpha: float


@dataclass(frozen=True)
class PropagatorRow:
    i: int
    t: float
    entries: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.entries) ** 2))


def _as_spectrum(obj) -> Spectrum:
    if isinstance(obj, Spectrum):
        return obj
    if isinstance(obj, CouplingConfig):
        return solve_spectrum(obj)
    raise TypeError(f"expected Spectrum or CouplingConfig, got {type(obj).__name__}")


def _require_mirror(spectrum: Spectrum):
    if spectrum.config.x != 0:
        raise ValueError("end-to-end amplitudes from edge weights need h0 = h")


def _weighted_phase_sums(omega, coeffs, times) -> np.ndarray:
    """``sum_n coeffs_n exp(-i omega_n t)`` for every ``t`` (pairwise summation)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    out = np.empty(times.size, dtype=complex)
    rows = max(1, _BLOCK // max(1, omega.size))
    for start in range(0, times.size, rows):
        block = times[start:start + rows]
        terms = np.exp(-1j * np.outer(block, omega))
        terms *= coeffs
        out[start:start + rows] = terms.sum(axis=1)
    return out


def amplitude_series(spectrum: Spectrum, times, weights: str = "lorentzian") -> np.ndarray:
    """``U_{N+1,0}(t) = -sum_n w_n exp(i(pi n - omega_n t))`` on an array of times.

    ``weights='lorentzian'`` uses the dominant-term edge weights normalized to
    unit sum; ``'exact'`` uses the exact squared edge components.
    """
    _require_mirror(spectrum)
    w = spectrum.weights(weights)
    signs = np.where(spectrum.n_index % 2 == 1, 1.0, -1.0)
    return _weighted_phase_sums(spectrum.omega, signs * w, times)


def return_amplitude_series(spectrum: Spectrum, times, weights: str = "exact") -> np.ndarray:
    """``U_{N+1,N+1}(t) = sum_n w_n exp(-i omega_n t)``."""
    _require_mirror(spectrum)
    return _weighted_phase_sums(spectrum.omega, spectrum.weights(weights), times)


def transition_amplitude(spectrum: Spectrum, t: float, weights: str = "lorentzian") -> AmplitudeSample:
    z = amplitude_series(spectrum, [t], weights)[0]
    return AmplitudeSample(float(t), float(abs(z)), float(np.angle(z)))


def return_amplitude(spectrum: Spectrum, t: float, weights: str = "exact") -> complex:
    return complex(return_amplitude_series(spectrum, [t], weights)[0])


def partial_amplitude_sums(spectrum: Spectrum, t: float, weights: str = "lorentzian") -> np.ndarray:
    """``u_l(t)`` for ``l = 0..(N+1)/2``: the amplitude summed over the ``2l+1`` central modes."""
    _require_mirror(spectrum)
    m = spectrum.m
    if m % 2 == 0:
        raise ValueError("partial sums are symmetric about the central mode only for odd N")
    n = spectrum.n_index
    signs = np.where(n % 2 == 1, 1.0, -1.0)
    terms = signs * spectrum.weights(weights) * np.exp(-1j * spectrum.omega * t)
    c = (m - 1) // 2
    out = np.empty(c + 1)
    acc = terms[c]
    out[0] = abs(acc)
    for ell in range(1, c + 1):
        acc = acc + terms[c - ell] + terms[c + ell]
        out[ell] = abs(acc)
    return out


# -- eigenbasis route ---------------------------------------------------------


def propagator_matrix(spectrum, t: float) -> np.ndarray:
    """Full ``U_ij(t) = sum_n O_ni O_nj exp(-i omega_n t)``, sites 0..N+1."""
    spectrum = _as_spectrum(spectrum)
    vecs = spectrum.eigenvectors
    return (vecs.T * np.exp(-1j * spectrum.omega * t)) @ vecs


def propagator_row(spectrum, t: float, i: int) -> PropagatorRow:
    spectrum = _as_spectrum(spectrum)
    if not 0 <= i < spectrum.m:
        raise IndexError(f"site {i} outside 0..{spectrum.m - 1}")
    vecs = spectrum.eigenvectors
    entries = (vecs[:, i] * np.exp(-1j * spectrum.omega * t)) @ vecs
    return PropagatorRow(i, float(t), entries)


def _corr(corr) -> np.ndarray:
    return corr.entries if isinstance(corr, CorrelationMatrix) else np.asarray(corr)


def _channel_quadratic(rows: np.ndarray, g: np.ndarray) -> np.ndarray:
    inner = rows[..., 1:-1]
    return np.real(np.einsum("...j,jk,...k->...", inner.conj(), g, inner))


def channel_contribution(spectrum, corr, t: float, i: int) -> float:
    """``C_i(t) = sum_{j,j'} U*_ij U_ij' <c_j^dag c_j'>`` over the channel sites."""
    g = _corr(corr)
    if not np.any(g):
        return 0.0
    row = propagator_row(spectrum, t, i).entries
    return float(_channel_quadratic(row, g))


def channel_contributions(spectrum, corr, t: float) -> np.ndarray:
    """``C_i(t)`` for every site ``i = 0..N+1``."""
    spectrum = _as_spectrum(spectrum)
    g = _corr(corr)
    if not np.any(g):
        return np.zeros(spectrum.m)
    return _channel_quadratic(propagator_matrix(spectrum, t), g)


def leakage_v(spectrum, corr, sz_b: float, t: float) -> float:
    """``v(t) = |U_{N+1,N+1}|^2 (<sigma^z_B> + 1)/2 + C_{N+1}(t)``."""
    spectrum = _as_spectrum(spectrum)
    if not -1.0 <= sz_b <= 1.0:
        raise ValueError("sz_b must lie in [-1, 1]")
    ret = abs(return_amplitude(spectrum, t, "exact")) ** 2 if spectrum.config.x == 0 else (
        abs(propagator_row(spectrum, t, spectrum.m - 1).entries[-1]) ** 2
    )
    return ret * 0.5 * (sz_b + 1.0) + channel_contribution(spectrum, corr, t, spectrum.m - 1)


def magnetization_profile(spectrum, corr, sz0: float, sz_b: float, t: float) -> np.ndarray:
    """``<sigma^z_i(t)>`` for ``i = 0..N+1``.

    ``|U_i0|^2 sz0 + |U_i,N+1|^2 szB + G_i`` with
    ``G_i = 2 C_i + |U_i0|^2 + |U_i,N+1|^2 - 1``.
    """
    spectrum = _as_spectrum(spectrum)
    u = propagator_matrix(spectrum, t)
    g = _corr(corr)
    c = _channel_quadratic(u, g) if np.any(g) else np.zeros(spectrum.m)
    a2 = np.abs(u[:, 0]) ** 2
    b2 = np.abs(u[:, -1]) ** 2
    return a2 * sz0 + b2 * sz_b + (2.0 * c + a2 + b2 - 1.0)


def background_term(spectrum, corr, t: float) -> np.ndarray:
    """``G_i(t)``, the part of the magnetization not carried from A or B."""
    spectrum = _as_spectrum(spectrum)
    u = propagator_matrix(spectrum, t)
    g = _corr(corr)
    c = _channel_quadratic(u, g) if np.any(g) else np.zeros(spectrum.m)
    return 2.0 * c + np.abs(u[:, 0]) ** 2 + np.abs(u[:, -1]) ** 2 - 1.0


def transfer_map(spectrum, corr, parity: int, sz_b: float, t: float, weights: str = "exact") -> TransferMap:
    """Assemble the U(1) dynamical map at time ``t``.

    ``u`` and ``alpha`` come from the edge-weight route with ``weights``; the
    return amplitude always uses exact weights and the channel term needs the
    eigenbasis only when the correlation matrix is nonzero.
    """
    spectrum = _as_spectrum(spectrum)
    sample = transition_amplitude(spectrum, t, weights)
    v = leakage_v(spectrum, corr, sz_b, t)
    return TransferMap(sample.u, sample.alpha, v, parity, sz_b)

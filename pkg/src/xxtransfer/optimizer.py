"""Arrival time, optimal end coupling and reading time in the ballistic regime.

All searches are deterministic: a coarse grid locates the peak, then a bounded
scalar search (scipy's golden-section/parabolic hybrid) refines it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import BracketFailure
from .propagator import amplitude_series
from .spectrum import CouplingConfig, Spectrum, j0_from_delta, solve_spectrum

TIME_STEP = 0.25
TIME_TOL = 1e-4
DELTA_RTOL = 1e-3
N_SCAN = 25

# (N+2, Delta_opt, j0_opt, u_opt) as published
REFERENCE_TABLE = (
    (25, 0.245, 0.628, 0.972),
    (51, 0.182, 0.556, 0.953),
    (101, 0.139, 0.494, 0.936),
    (251, 0.098, 0.422, 0.916),
    (501, 0.075, 0.374, 0.902),
    (1001, 0.058, 0.332, 0.891),
    (2501, 0.042, 0.284, 0.880),
    (5001, 0.033, 0.252, 0.873),
    (10001, 0.026, 0.224, 0.868),
    (25001, 0.019, 0.192, 0.862),
    (50001, 0.015, 0.171, 0.859),
    (100001, 0.012, 0.152, 0.857),
    (250001, 0.009, 0.130, 0.854),
    (500001, 0.007, 0.116, 0.853),
)


def nominal_arrival_time(n_chain: int, delta: float) -> float:
    """``N + 3 + 2(1 - Delta)/Delta``."""
    return n_chain + 3 + 2.0 * (1.0 - delta) / delta


def window_half_width(delta: float) -> float:
    return max(20.0, 6.0 / delta)


def _bounded_max(fun, lo: float, hi: float, xatol: float):
    res = minimize_scalar(lambda x: -fun(x), bounds=(lo, hi), method="bounded",
                          options={"xatol": xatol, "maxiter": 500})
    return float(res.x), float(-res.fun)


@dataclass(frozen=True)
class Arrival:
    t_star: float
    u_star: float
    alpha: float
    window: tuple[float, float]


def find_arrival_time(spectrum: Spectrum, half_width: float | None = None,
                      weights: str = "lorentzian", step: float = TIME_STEP,
                      tol: float = TIME_TOL) -> Arrival:
    """Global maximum of ``u(t)`` on ``[t_c - w, t_c + w]`` around the nominal arrival time."""
    delta = spectrum.delta
    n_chain = spectrum.config.n_chain
    t_c = nominal_arrival_time(n_chain, delta)
    w = window_half_width(delta) if half_width is None else float(half_width)
    lo, hi = max(0.0, t_c - w), t_c + w
    grid = np.linspace(lo, hi, int(math.ceil((hi - lo) / step)) + 1)
    amps = np.abs(amplitude_series(spectrum, grid, weights))
    i = int(np.argmax(amps))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    t_star, u_star = _bounded_max(
        lambda t: abs(amplitude_series(spectrum, [t], weights)[0]), a, b, 0.5 * tol
    )
    if u_star < amps[i]:
        t_star, u_star = float(grid[i]), float(amps[i])
    z = amplitude_series(spectrum, [t_star], weights)[0]
    return Arrival(t_star, u_star, float(np.angle(z)), (lo, hi))


def amplitude_at_arrival(n_chain: int, delta: float, h: float = 0.0,
                         weights: str = "lorentzian") -> Arrival:
    spectrum = solve_spectrum(CouplingConfig.from_delta(n_chain, delta, h))
    return find_arrival_time(spectrum, weights=weights)


@lru_cache(maxsize=64)
def delta_zero(n_chain: int, tol: float = 1e-13) -> float:
    """Width that cancels the cubic term of the mode frequencies around ``k0``.

    Self-consistent root of ``Delta = [4(1 - Delta^2)/t*]^{1/3}`` with
    ``t* = N + 3 + 2(1 - Delta)/Delta``.
    """
    if n_chain < 3:
        raise ValueError("need N >= 3")

    def f(d):
        return d - (4.0 * (1.0 - d * d) / nominal_arrival_time(n_chain, d)) ** (1.0 / 3.0)

    return float(brentq(f, 1e-12, 1.0, xtol=tol, rtol=4 * np.finfo(float).eps))


@dataclass(frozen=True)
class ReadingTime:
    width: float
    estimate: float
    t_left: float
    t_right: float
    drop: float


def reading_time(spectrum: Spectrum, t_star: float, drop: float = 0.01,
                 weights: str = "lorentzian") -> ReadingTime:
    """Width of the interval around ``t_star`` where ``u >= u(t_star) - drop``.

    ``estimate`` is ``1/Delta``.
    """
    if not 0 < drop <= 0.1:
        raise ValueError("drop must lie in (0, 0.1]")
    delta = spectrum.delta

    def u(t):
        return abs(amplitude_series(spectrum, [t], weights)[0])

    level = u(t_star) - drop
    step = min(0.5, 0.05 / delta)

    def edge(direction):
        inner = t_star
        outer = t_star + direction * step
        while u(outer) >= level:
            inner, outer = outer, outer + direction * step
            if abs(outer - t_star) > 20.0 / delta + 50:
                raise BracketFailure("amplitude never drops below the reading threshold")
        return brentq(lambda t: u(t) - level, min(inner, outer), max(inner, outer), xtol=1e-8)

    left, right = edge(-1), edge(+1)
    return ReadingTime(right - left, 1.0 / delta, left, right, drop)


@dataclass(frozen=True)
class DeltaScan:
    deltas: np.ndarray
    u: np.ndarray
    t_star: np.ndarray
    widened: bool

    @property
    def local_maxima(self) -> int:
        u = self.u
        inner = (u[1:-1] > u[:-2]) & (u[1:-1] >= u[2:])
        return int(np.count_nonzero(inner)) + int(u[0] > u[1]) + int(u[-1] > u[-2])

    @property
    def unimodal(self) -> bool:
        return self.local_maxima == 1


@dataclass(frozen=True)
class OptimalPoint:
    n_total: int
    delta_opt: float
    j0_opt: float
    t_star: float
    u_opt: float
    alpha: float
    delta0: float
    reading_time: float
    reading_estimate: float
    scan: DeltaScan | None = field(default=None, repr=False, compare=False)

    @property
    def n_chain(self) -> int:
        return self.n_total - 2

    @property
    def delay(self) -> float:
        """``s = t* - (N + 3)``."""
        return self.t_star - (self.n_chain + 3)


def _scan(n_chain, deltas, h, weights):
    arr = [amplitude_at_arrival(n_chain, d, h, weights) for d in deltas]
    return np.array([a.u_star for a in arr]), np.array([a.t_star for a in arr])


def optimize_delta(n_chain: int, h: float = 0.0, weights: str = "lorentzian",
                   rtol: float = DELTA_RTOL, n_scan: int = N_SCAN,
                   drop: float = 0.01) -> OptimalPoint:
    """Maximize ``u(t*, Delta)`` over ``Delta`` for a chain of ``N`` channel spins."""
    if n_chain < 5:
        raise ValueError("optimization needs N >= 5")
    d0 = delta_zero(n_chain)
    lo, hi = 0.2 * d0, 2.0 * d0
    widened = False
    while True:
        deltas = np.geomspace(lo, hi, n_scan)
        u, ts = _scan(n_chain, deltas, h, weights)
        # np.argmax returns the first maximum: ties go to the smaller width
        i = int(np.argmax(u))
        if 0 < i < n_scan - 1:
            break
        if widened:
            raise BracketFailure(f"no interior maximum of u(t*, Delta) in [{lo:.4g}, {hi:.4g}] for N={n_chain}")
        widened = True
        if i == 0:
            lo /= 5.0
        else:
            hi = min(5.0 * hi, 50.0)
    scan = DeltaScan(deltas, u, ts, widened)

    def objective(log_d):
        return amplitude_at_arrival(n_chain, math.exp(log_d), h, weights).u_star

    log_d, _ = _bounded_max(objective, math.log(deltas[i - 1]), math.log(deltas[i + 1]), 0.5 * rtol)
    delta = math.exp(log_d)
    spectrum = solve_spectrum(CouplingConfig.from_delta(n_chain, delta, h))
    arrival = find_arrival_time(spectrum, weights=weights)
    if arrival.u_star < u[i]:
        delta = float(deltas[i])
        spectrum = solve_spectrum(CouplingConfig.from_delta(n_chain, delta, h))
        arrival = find_arrival_time(spectrum, weights=weights)
    rt = reading_time(spectrum, arrival.t_star, drop, weights)
    return OptimalPoint(
        n_total=n_chain + 2,
        delta_opt=delta,
        j0_opt=j0_from_delta(delta),
        t_star=arrival.t_star,
        u_opt=arrival.u_star,
        alpha=arrival.alpha,
        delta0=d0,
        reading_time=rt.width,
        reading_estimate=rt.estimate,
        scan=scan,
    )


def best_point(points):
    """Deterministic reduce over candidate points: largest ``u``, ties to the smaller width."""
    return min(points, key=lambda p: (-p.u_opt, p.delta_opt))


def table_one(m_list, h: float = 0.0, weights: str = "lorentzian") -> list[OptimalPoint]:
    rows = []
    for m in m_list:
        m = int(m)
        if m % 2 == 0 or m < 7:
            raise ValueError(f"table rows need odd N+2 >= 7, got {m}")
        rows.append(optimize_delta(m - 2, h, weights))
    return rows


def asymptotic_coupling(n_chain: int, coefficient: float | None = None) -> float:
    """``j0_opt ~ c N^{-1/6}``; ``c`` defaults to the value derived from the N -> infinity optimum."""
    if coefficient is None:
        from .asymptotics import maximize_u_infinity

        coefficient = maximize_u_infinity().scaling.j0_coeff
    return coefficient * n_chain ** (-1.0 / 6.0)

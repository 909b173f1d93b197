"""Data generators for the standard plots (the package draws nothing itself)."""

from __future__ import annotations

import math
import warnings

import numpy as np

from .asymptotics import maximize_u_infinity
from .cache import optimal_point
from .channel_states import ChannelInit, ChannelKind, correlation_matrix, parity
from .optimizer import delta_zero, find_arrival_time
from .output import Table
from .propagator import magnetization_profile, partial_amplitude_sums
from .spectrum import CouplingConfig, group_velocity_profile, solve_spectrum
from .transfer_metrics import TransferMap, fidelity_extrema

FIGURES = (
    "utD",
    "partial-sums",
    "group-velocity",
    "magnetization",
    "umax",
    "ctstar",
    "concurrence-map",
    "min-fidelity",
)


def parse_deltas(spec: str, lo: float = 0.01, hi: float = 1.0) -> np.ndarray:
    """``'40log'`` gives 40 log-spaced widths on ``[lo, hi]``; otherwise a comma list."""
    spec = spec.strip()
    if spec.endswith("log"):
        n = int(spec[:-3])
        if n < 2:
            raise ValueError("need at least two widths")
        return np.geomspace(lo, hi, n)
    vals = np.array([float(s) for s in spec.split(",") if s])
    if vals.size == 0 or np.any(vals <= 0):
        raise ValueError(f"bad width list {spec!r}")
    return vals


def resolve_j0(j0, n_total: int, h: float = 0.0) -> float:
    if isinstance(j0, str):
        if j0 == "opt":
            return optimal_point(n_total, h).j0_opt
        j0 = float(j0)
    return float(j0)


def time_grid(t_max: float, t_step: float, t_min: float = 0.0) -> np.ndarray:
    if t_step <= 0 or t_max < t_min:
        raise ValueError("need t_step > 0 and t_max >= t_min")
    n = int(math.floor((t_max - t_min) / t_step + 1e-9)) + 1
    return t_min + t_step * np.arange(n)


def utd(sizes, deltas, h: float = 0.0) -> Table:
    """Arrival amplitude ``u(t*, Delta)`` against the width, one curve per size."""
    table = Table("utD", ["M", "delta", "j0", "t_star", "u"], params={"h": h})
    for m in sizes:
        for d in deltas:
            sp = solve_spectrum(CouplingConfig.from_delta(m - 2, float(d), h))
            arr = find_arrival_time(sp)
            table.add(m, float(d), sp.config.j0, arr.t_star, arr.u_star)
    return table


def partial_sums(n_total: int = 51, j0: float = 0.58) -> Table:
    """Running amplitude over the ``2l + 1`` central modes at the arrival time."""
    sp = solve_spectrum(CouplingConfig(n_total - 2, j0))
    arr = find_arrival_time(sp)
    sums = partial_amplitude_sums(sp, arr.t_star)
    c = (n_total - 1) // 2
    table = Table("partial-sums", ["ell", "u_ell", "k", "omega", "rho"],
                  params={"M": n_total, "j0": j0, "t_star": arr.t_star})
    rho = sp.rho
    for ell, val in enumerate(sums):
        n = c + ell
        table.add(ell, val, sp.k[n], sp.omega[n], rho[n])
    return table


def group_velocity(n_total: int = 51, deltas=None) -> Table:
    n_chain = n_total - 2
    if deltas is None:
        deltas = [delta_zero(n_chain), optimal_point(n_total).delta_opt, 0.05, 0.1, 0.6, 1.0]
    table = Table("group-velocity", ["delta", "k", "v", "rho"], params={"M": n_total})
    for d in deltas:
        sp = solve_spectrum(CouplingConfig.from_delta(n_chain, float(d)))
        k, v = group_velocity_profile(sp)
        for kk, vv, rr in zip(k, v, sp.rho):
            table.add(float(d), kk, vv, rr)
    return table


def _channel(init: str):
    """Channel kind plus endpoint polarizations; ``updown`` is up-down...down-up."""
    if init == "updown":
        return ChannelInit(ChannelKind.POLARIZED_DOWN), 1.0, 1.0
    return ChannelInit(ChannelKind(init)), 1.0, -1.0


def magnetization(n_total: int = 250, j0: float = 1.0, init: str = "updown",
                  t_max: float | None = None, t_step: float = 1.0) -> Table:
    n_chain = n_total - 2
    chan, sz_a, sz_b = _channel(init)
    corr = correlation_matrix(chan, n_chain)
    sp = solve_spectrum(CouplingConfig(n_chain, j0))
    times = time_grid(2.0 * (n_chain + 3) if t_max is None else t_max, t_step)
    table = Table("magnetization", ["t", "site", "sz"],
                  params={"M": n_total, "j0": j0, "init": init, "sz_a": sz_a, "sz_b": sz_b})
    for t in times:
        prof = magnetization_profile(sp, corr, sz_a, sz_b, t)
        for i, s in enumerate(prof):
            table.add(float(t), i, s)
    return table


def umax(sizes) -> Table:
    opt = maximize_u_infinity()
    table = Table("umax", ["M", "delta_opt", "j0_opt", "t_star", "u_opt", "delta_scaled", "delay_scaled"],
                  params={"u_limit": opt.u_max})
    for m in sizes:
        p = optimal_point(m)
        n = m - 2
        table.add(m, p.delta_opt, p.j0_opt, p.t_star, p.u_opt,
                  p.delta_opt * n ** (1 / 3), p.delay * n ** (-1 / 3))
    return table


def _row_series(sp, times, site: int):
    """``U_{site, j}(t)`` for all ``j`` and every time (rows)."""
    vecs = sp.eigenvectors
    phases = np.exp(-1j * np.outer(times, sp.omega))
    return (phases * vecs[:, site]) @ vecs


def _receiver_terms(sp, corr, times):
    rows = _row_series(sp, times, sp.m - 1)
    u = np.abs(rows[:, 0])
    alpha = np.angle(rows[:, 0])
    ret = np.abs(rows[:, -1]) ** 2
    inner = rows[:, 1:-1]
    g = corr.entries
    c = np.real(np.einsum("tj,jk,tk->t", inner.conj(), g, inner)) if np.any(g) else np.zeros(len(times))
    return u, alpha, ret, c


def ctstar(sizes, inits=("ground-state", "neel", "singlets"), couplings=("opt", 1.0)) -> Table:
    """Channel contribution to the receiver population at the arrival time."""
    table = Table("ctstar", ["M", "init", "coupling", "j0", "t_star", "C"])
    for m in sizes:
        n_chain = m - 2
        for coupling in couplings:
            j0 = resolve_j0(coupling, m)
            sp = solve_spectrum(CouplingConfig(n_chain, j0))
            if coupling == "opt":
                t_star = optimal_point(m).t_star
            else:
                t_star = find_arrival_time(sp).t_star
            for name in inits:
                chan = ChannelInit(ChannelKind(name))
                if chan.kind is ChannelKind.SINGLET_SERIES and n_chain % 2:
                    continue
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RuntimeWarning)
                    corr = correlation_matrix(chan, n_chain)
                _, _, _, c = _receiver_terms(sp, corr, np.array([t_star]))
                table.add(m, name, str(coupling), j0, t_star, float(c[0]))
    return table


def concurrence_map(n_total: int = 250, j0_values=None, t_max: float | None = None,
                    t_step: float = 1.0, init: str = "ground-state", sz_b: float = -1.0) -> Table:
    """Bell-pair concurrence at the receiver on a ``(j0, t)`` grid."""
    n_chain = n_total - 2
    if j0_values is None:
        j0_values = np.round(np.linspace(0.1, 1.0, 19), 10)
    chan = ChannelInit(ChannelKind(init))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        corr = correlation_matrix(chan, n_chain)
        p = parity(chan, n_chain)
    times = time_grid(2.0 * (n_chain + 3) if t_max is None else t_max, t_step)
    table = Table("concurrence-map", ["j0", "t", "concurrence"],
                  params={"M": n_total, "init": init, "sz_b": sz_b, "parity": p})
    for j0 in j0_values:
        sp = solve_spectrum(CouplingConfig(n_chain, float(j0)))
        u, _, ret, c = _receiver_terms(sp, corr, times)
        v = ret * 0.5 * (sz_b + 1.0) + c
        c0 = abs(p * sz_b) * u - np.sqrt(np.clip(v * (1.0 - u * u - v), 0.0, None))
        for t, val in zip(times, np.maximum(c0, 0.0)):
            table.add(float(j0), float(t), float(val))
    return table


def min_fidelity(n_total: int = 251, j0_values=("opt", 0.3, 0.6, 1.0), t_min: float | None = None,
                 t_max: float | None = None, t_step: float = 0.25) -> Table:
    """Worst-case state fidelity over the Bloch sphere against time.

    Polarized channel and receiver; a fixed z rotation on B makes ``T22`` real
    and positive at each curve's arrival time.
    """
    n_chain = n_total - 2
    chan = ChannelInit(ChannelKind.POLARIZED_DOWN)
    corr = correlation_matrix(chan, n_chain)
    p, sz_b = parity(chan, n_chain), -1.0
    lo = 0.0 if t_min is None else t_min
    hi = 1.5 * (n_chain + 3) if t_max is None else t_max
    times = time_grid(hi, t_step, lo)
    table = Table("min-fidelity", ["j0", "t", "f_min", "u", "counter_rotation"], params={"M": n_total})
    for j0_spec in j0_values:
        j0 = resolve_j0(j0_spec, n_total)
        sp = solve_spectrum(CouplingConfig(n_chain, j0))
        arr = find_arrival_time(sp, weights="exact")
        u, alpha, ret, c = _receiver_terms(sp, corr, times)
        v = ret * 0.5 * (sz_b + 1.0) + c
        t22_star = -p * sz_b * np.exp(1j * arr.alpha)
        beta = -float(np.angle(t22_star))
        for t, uu, aa, vv in zip(times, u, alpha, v):
            tmap = TransferMap(float(uu), float(aa + beta), float(vv), p, sz_b)
            table.add(j0, float(t), fidelity_extrema(tmap).f_min, float(uu), beta)
    return table


def generate(name: str, **kwargs) -> Table:
    funcs = {
        "utD": utd,
        "partial-sums": partial_sums,
        "group-velocity": group_velocity,
        "magnetization": magnetization,
        "umax": umax,
        "ctstar": ctstar,
        "concurrence-map": concurrence_map,
        "min-fidelity": min_fidelity,
    }
    if name not in funcs:
        raise ValueError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")
    return funcs[name](**kwargs)

"""Self-checks of the numerical pipeline against independent references."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .asymptotics import u_infinity, u_infinity_closed
from .channel_states import ChannelInit, ChannelKind, correlation_matrix, parity
from .ed_oracle import EDSystem
from .optimizer import REFERENCE_TABLE, optimize_delta
from .propagator import (
    channel_contribution,
    magnetization_profile,
    transfer_map,
)
from .spectrum import CouplingConfig, solve_spectrum

LEVELS = ("quick", "full")


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    expected: float
    tol: float
    ok: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"{status}  {self.name}: measured={self.measured:.10g} expected={self.expected:.10g} tol={self.tol:.3g}{extra}"


def _abs_check(name, measured, expected, tol, detail=""):
    ok = bool(np.isfinite(measured)) and abs(measured - expected) <= tol
    return Check(name, float(measured), float(expected), tol, ok, detail)


def _upper_check(name, measured, bound, detail=""):
    ok = bool(np.isfinite(measured)) and measured <= bound
    return Check(name, float(measured), 0.0, bound, ok, detail)


def dense_spectrum_error(config: CouplingConfig) -> float:
    """Largest eigenvalue deviation from a dense tridiagonal eigensolver."""
    from scipy.linalg import eigvalsh_tridiagonal

    mat = config.omega_matrix()
    ref = eigvalsh_tridiagonal(np.diag(mat).copy(), np.diag(mat, 1).copy())
    return float(np.abs(np.sort(solve_spectrum(config).omega) - ref).max())


def oracle_errors(n_total: int, j0: float, init: ChannelInit, times, sz_b: float = -1.0) -> dict:
    """Largest deviation of the fermionic quantities from brute-force evolution."""
    n_chain = n_total - 2
    config = CouplingConfig(n_chain, j0)
    sp = solve_spectrum(config)
    ed = EDSystem(config)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        corr = correlation_matrix(init, n_chain)
        p = parity(init, n_chain)
    err = {"T": 0.0, "u": 0.0, "alpha": 0.0, "v": 0.0, "C": 0.0, "magnetization": 0.0, "pattern": 0.0}
    for t in times:
        tm = transfer_map(sp, corr, p, sz_b, t)
        meas = ed.transfer_map(init, sz_b, t)
        err["T"] = max(err["T"], float(np.abs(meas.matrix - tm.matrix()).max()))
        err["pattern"] = max(err["pattern"], meas.off_pattern())
        v_ed = 1.0 - meas.t44
        # |T22| = |p szB| u avoids the square root of a tiny difference
        u_ed = abs(meas.t22) / abs(p * sz_b)
        err["u"] = max(err["u"], abs(u_ed - tm.u))
        err["v"] = max(err["v"], abs(v_ed - tm.v))
        if u_ed > 1e-3:
            t22 = meas.t22 / (-p * sz_b) if sz_b != 0 else np.nan
            dalpha = abs(np.angle(t22 * np.exp(-1j * tm.alpha)))
            err["alpha"] = max(err["alpha"], float(dalpha))
        c_ed = ed.receiver_channel_occupation(init, t)
        err["C"] = max(err["C"], abs(c_ed - channel_contribution(sp, corr, t, n_total - 1)))
        mag = ed.magnetization(init, 0.3, sz_b, t)
        err["magnetization"] = max(
            err["magnetization"], float(np.abs(mag - magnetization_profile(sp, corr, 0.3, sz_b, t)).max())
        )
    return err


def _guarded(name, fn):
    try:
        return fn()
    except Exception as exc:  # a crash is a failed check, not an aborted run
        return [Check(name, math.nan, math.nan, 0.0, False, f"{type(exc).__name__}: {exc}")]


def spectral_checks(sizes=(6, 8, 51)) -> list[Check]:
    out = []
    for m in sizes:
        worst = 0.0
        for x in (0.0, 0.2):
            for y in (0.3, 0.7, 1.0):
                h0 = 0.5 * x
                worst = max(worst, dense_spectrum_error(CouplingConfig(m - 2, y, 0.0, h0)))
        out.append(_upper_check(f"spectrum vs dense eigensolver, M={m}", worst, 1e-10))
    return out


def oracle_checks(sizes=(6, 8), j0_values=(0.3, 0.7, 1.0), n_times: int = 12) -> list[Check]:
    out = []
    for m in sizes:
        worst = {}
        times = np.linspace(0.0, 3.0 * (m + 1), n_times)
        for j0 in j0_values:
            for kind in (ChannelKind.POLARIZED_DOWN, ChannelKind.NEEL, ChannelKind.GROUND_STATE):
                for sz_b in (-1.0, 1.0):
                    err = oracle_errors(m, j0, ChannelInit(kind), times, sz_b)
                    for k, v in err.items():
                        worst[k] = max(worst.get(k, 0.0), v)
        for k, v in worst.items():
            out.append(_upper_check(f"oracle {k}, M={m}", v, 1e-8))
    return out


def closed_form_checks() -> list[Check]:
    sigmas = np.linspace(0.1, 5.0, 50)
    worst = max(abs(u_infinity(0.0, s) - u_infinity_closed(s)) for s in sigmas)
    return [
        _upper_check("u_inf(0, sigma) vs 2 sigma exp(-sigma)", worst, 1e-6),
        _abs_check("u_inf(0, 1)", u_infinity(0.0, 1.0), 2.0 / math.e, 1e-6),
    ]


def table_checks(sizes) -> list[Check]:
    ref = {row[0]: row for row in REFERENCE_TABLE}
    out = []
    for m in sizes:
        _, d_ref, j_ref, u_ref = ref[m]
        p = optimize_delta(m - 2)
        out.append(_abs_check(f"table u_opt, M={m}", p.u_opt, u_ref, 0.002))
        out.append(_abs_check(f"table delta_opt, M={m}", p.delta_opt, d_ref, max(0.005, 0.05 * d_ref)))
        out.append(_abs_check(f"table j0_opt, M={m}", p.j0_opt, j_ref, 0.005))
    return out


def ctstar_checks(sizes=(51, 251, 1001)) -> list[Check]:
    out = []
    for m in sizes:
        p = optimize_delta(m - 2)
        sp = solve_spectrum(CouplingConfig(m - 2, p.j0_opt))
        for kind in (ChannelKind.GROUND_STATE, ChannelKind.NEEL):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                corr = correlation_matrix(ChannelInit(kind), m - 2)
            c = channel_contribution(sp, corr, p.t_star, m - 1)
            out.append(_upper_check(f"C_N+1(t*) {kind.value}, M={m}", c, 0.1))
    return out


def run(level: str = "quick") -> list[Check]:
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}")
    checks: list[Check] = []
    checks += _guarded("spectrum", spectral_checks)
    checks += _guarded("oracle", oracle_checks)
    checks += _guarded("closed form", closed_form_checks)
    if level == "quick":
        checks += _guarded("table", lambda: table_checks((51,)))
    else:
        checks += _guarded("table", lambda: table_checks((25, 51, 101, 251, 501, 1001, 2501)))
        checks += _guarded("ctstar", ctstar_checks)
    return checks

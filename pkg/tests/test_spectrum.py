import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xxtransfer.errors import SizeLimit
from xxtransfer.spectrum import (
    CouplingConfig,
    delta_from_j0,
    edge_weight,
    eigenvectors,
    exact_edge_weight,
    group_velocity,
    group_velocity_profile,
    j0_from_delta,
    mirror_phase_derivative,
    phase_shift,
    phase_shift_derivative,
    secular_residual,
    solve_spectrum,
    solve_wavevectors,
    velocity_curvature,
)

GRID = [(x, y) for x in (0.0, 0.2, -0.2) for y in (0.1, 0.3, 0.5, 1.0)]
SIZES = (3, 4, 5, 10, 51, 200)


def config_xy(m, x, y, h=0.0):
    return CouplingConfig(m - 2, y, h, h + 0.5 * x)


def dense(config):
    vals, vecs = np.linalg.eigh(config.matrix())
    order = np.argsort(-vals)  # descending lambda = ascending k
    return vals[order], vecs[:, order].T


@pytest.mark.parametrize("m", SIZES)
@pytest.mark.parametrize("x,y", GRID)
def test_eigenvalues_match_dense(m, x, y):
    cfg = config_xy(m, x, y)
    sp = solve_spectrum(cfg)
    ref, _ = dense(cfg)
    assert np.abs(sp.eigenvalues - ref).max() < 1e-10


@pytest.mark.parametrize("m", SIZES)
@pytest.mark.parametrize("x,y", GRID)
def test_eigenvectors_and_weights(m, x, y):
    cfg = config_xy(m, x, y)
    sp = solve_spectrum(cfg)
    vecs = sp.eigenvectors
    mat = cfg.matrix()
    assert np.abs(vecs @ mat - sp.eigenvalues[:, None] * vecs).max() < 1e-8
    assert np.abs(vecs @ vecs.T - np.eye(m)).max() < 1e-8
    _, ref = dense(cfg)
    assert np.abs(sp.weight - ref[:, 0] ** 2).max() < 1e-10
    assert abs(sp.weight.sum() - 1.0) < 1e-10


@pytest.mark.parametrize("m", (5, 6, 51, 200))
@pytest.mark.parametrize("y", (0.1, 0.5, 1.0, 1.3))
def test_mirror_alternation(m, y):
    sp = solve_spectrum(CouplingConfig(m - 2, y))
    vecs = sp.eigenvectors
    sign = np.sign(vecs[:, 0] * vecs[:, -1])
    expected = np.where(sp.n_index % 2 == 1, 1.0, -1.0)
    assert np.array_equal(sign, expected)
    assert np.allclose(vecs[:, ::-1], expected[:, None] * vecs, atol=1e-12)


def test_sharp_resonance_off_centre():
    # small y with x != 0: phi sweeps more than 2 pi across the band
    cfg = config_xy(4, 0.75 * (2 - 0.25), 0.5)
    sp = solve_spectrum(cfg)
    ref, _ = dense(cfg)
    assert np.abs(sp.eigenvalues - ref).max() < 1e-10


def test_secular_residual_vanishes_at_roots():
    cfg = config_xy(40, 0.2, 0.5)
    k = solve_wavevectors(cfg)
    assert np.abs(secular_residual(cfg, k)).max() < 1e-10
    mid = 0.5 * (k[1:] + k[:-1])
    assert np.abs(secular_residual(cfg, mid)).min() > 1e-6


def test_phase_shift_folding_and_derivative():
    cfg = config_xy(30, 0.2, 0.5)
    k = np.linspace(0.05, np.pi - 0.05, 400)
    phi = phase_shift(cfg, k)
    assert np.all(phi > -np.pi) and np.all(phi <= np.pi)
    h = 1e-6
    num = (np.unwrap(phase_shift(cfg, k + h)) - np.unwrap(phase_shift(cfg, k - h))) / (2 * h)
    assert np.abs(num - phase_shift_derivative(cfg, k)).max() < 1e-5


def test_mirror_phase_derivative_closed_form():
    d = 0.3
    cfg = CouplingConfig.from_delta(20, d)
    k = np.linspace(0.1, 3.0, 50)
    assert np.allclose(mirror_phase_derivative(d, k), phase_shift_derivative(cfg, k), atol=1e-12)


def test_phase_shift_at_k0_is_band_centre():
    # Lorentzian centre: (2 - y^2) cos k0 = x, close to where phi' is most negative
    cfg = config_xy(30, 0.2, 0.5)
    sp = solve_spectrum(cfg)
    assert math.isclose((2 - cfg.y**2) * math.cos(sp.k0), cfg.x, abs_tol=1e-14)
    k = np.linspace(0.01, np.pi - 0.01, 20001)
    assert abs(k[np.argmin(phase_shift_derivative(cfg, k))] - sp.k0) < 0.1 * sp.delta


def test_width_relations():
    for j0 in (0.1, 0.5, 1.0, 1.3):
        assert math.isclose(j0_from_delta(delta_from_j0(j0)), j0, rel_tol=1e-14)
    assert math.isclose(CouplingConfig(10, 0.556).delta, delta_from_j0(0.556))
    assert math.isclose(CouplingConfig.from_delta(49, 0.182).j0, 0.5549, abs_tol=1e-4)


def test_exact_weight_is_dominant_term_with_finite_size_correction():
    cfg = CouplingConfig(49, 0.556)
    sp = solve_spectrum(cfg)
    m1 = cfg.m + 1
    ratio = exact_edge_weight(cfg, sp.k) / edge_weight(cfg, sp.k)
    assert np.allclose(ratio, m1 / (m1 - phase_shift_derivative(cfg, sp.k)))
    # raw dominant terms overshoot the unit sum by O(1/(M Delta))
    assert 1.05 < sp.dominant_weight.sum() < 1.12
    assert math.isclose(sp.rho.sum(), 1.0, abs_tol=1e-14)


def test_dominant_weights_are_not_within_two_percent():
    """Recorded finding: the dominant-term weights alone differ from dense ones by far more than 2%."""
    cfg = config_xy(30, 0.2, 0.5)
    sp = solve_spectrum(cfg)
    _, ref = dense(cfg)
    rel = np.abs(sp.dominant_weight / ref[:, 0] ** 2 - 1).max()
    assert rel > 0.3


def test_large_chain_solves_quickly():
    sp = solve_spectrum(CouplingConfig.from_delta(499999, 0.007))
    assert np.all(np.diff(sp.k) > 0)
    assert abs(sp.weight.sum() - 1) < 1e-9
    assert abs(sp.rho.sum() - 1) < 1e-12


def test_eigenbasis_cap():
    sp = solve_spectrum(CouplingConfig(20, 0.5), max_eigen_size=10)
    with pytest.raises(SizeLimit):
        sp.eigenvectors


def test_arrays_are_read_only():
    sp = solve_spectrum(CouplingConfig(10, 0.5))
    with pytest.raises(ValueError):
        sp.k[0] = 0.0


@pytest.mark.parametrize(
    "kwargs",
    [dict(n_chain=0, j0=0.5), dict(n_chain=3, j0=0.0), dict(n_chain=3, j0=-1.0), dict(n_chain=3, j0=math.sqrt(2))],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        CouplingConfig(**kwargs)


def test_out_of_band_rejected():
    with pytest.raises(ValueError):
        solve_spectrum(CouplingConfig(10, 1.3, 0.0, 0.5))
    with pytest.raises(ValueError):
        solve_spectrum(CouplingConfig(10, 1.5))


def test_group_velocity_profile_matches_finite_difference():
    cfg = CouplingConfig(49, 0.556)
    sp = solve_spectrum(cfg)
    k, v = group_velocity_profile(sp)
    # (N+3)/pi d omega/dn from the discrete spectrum
    dn = np.gradient(sp.omega)
    inner = slice(5, -5)
    assert np.allclose(v[inner], (cfg.m + 1) / np.pi * dn[inner], rtol=1e-2)
    assert np.allclose(group_velocity(cfg, k), v)


def test_velocity_flat_only_at_linearizing_width():
    from xxtransfer.optimizer import delta_zero

    c0, c1, c2 = velocity_curvature(CouplingConfig.from_delta(49, delta_zero(49)))
    assert abs(c2) < 0.01 * abs(c0)
    assert abs(c1) < 1e-10
    c0, _, c2 = velocity_curvature(CouplingConfig.from_delta(49, 0.1825))
    assert abs(c2) > abs(c0)


def test_single_eigenvector_helper():
    cfg = CouplingConfig(5, 0.7)
    sp = solve_spectrum(cfg)
    assert np.allclose(eigenvectors(cfg, sp.k[2:3])[0], sp.eigenvectors[2])


@settings(max_examples=60, deadline=None)
@given(
    m=st.integers(3, 120),
    y=st.floats(0.05, 1.35),
    xfrac=st.floats(-0.9, 0.9),
    h=st.floats(-1.0, 1.0),
)
def test_property_spectrum(m, y, xfrac, h):
    x = xfrac * (2.0 - y * y)
    cfg = config_xy(m, x, y, h)
    sp = solve_spectrum(cfg)
    assert np.all(np.diff(sp.k) > 0)
    assert sp.k[0] > 0 and sp.k[-1] < np.pi
    ref = np.sort(np.linalg.eigvalsh(cfg.omega_matrix()))
    assert np.abs(np.sort(sp.omega) - ref).max() < 1e-10
    assert abs(sp.weight.sum() - 1.0) < 1e-10


def test_group_velocity_unit_at_band_centre():
    cfg = CouplingConfig(49, 1.0)
    assert math.isclose(float(group_velocity(cfg, np.pi / 2)), 1.0, abs_tol=1e-14)


def test_chebyshev_case():
    cfg = CouplingConfig(30, 1.0)
    k = np.linspace(0.01, 3.1, 300)
    res = secular_residual(cfg, k)
    assert np.allclose(res, np.sin((cfg.m + 1) * k), atol=1e-12)


@pytest.mark.parametrize("y", (0.1, 0.3, 1.0))
def test_nondegenerate(y):
    sp = solve_spectrum(CouplingConfig(198, y))
    assert np.diff(sp.eigenvalues).max() < 0


@pytest.mark.parametrize("x,y", [(0.0, 0.2), (0.1, 0.2), (0.0, 0.3)])
def test_lorentzian_near_centre(x, y):
    cfg = config_xy(400, x, y)
    sp = solve_spectrum(cfg)
    d = sp.delta
    k = np.linspace(sp.k0 - d, sp.k0 + d, 101)
    w = edge_weight(cfg, k)
    peak = float(edge_weight(cfg, sp.k0))
    lorentz = peak * d**2 / ((k - sp.k0) ** 2 + d**2)
    assert np.abs(w / lorentz - 1).max() < 0.05


@pytest.mark.xfail(strict=True, reason="dominant-term weights sum to 1 + O(1/(M Delta)), not within 1e-6")
@pytest.mark.parametrize("m", (51, 201))
def test_dominant_weight_normalization(m):
    sp = solve_spectrum(CouplingConfig(m - 2, 0.556))
    assert abs(sp.dominant_weight.sum() - 1.0) <= 1e-6

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import SET_A, SET_C, SET_D, profile_for
from sbwave.grid import Grid
from sbwave.params import PhysParams, WaveParams
from sbwave.waveforms import (build_profile, export_profile, gradient_residual, read_profile_csv, sample_profile,
                              stationary_residual, zero_profile)


def test_set_a_values(prof_a):
    mid = prof_a.grid.n_points // 2
    assert prof_a.x[mid] == 0.0
    assert prof_a.eps_hat[mid] == pytest.approx(math.sqrt(0.08), abs=1e-15)
    assert prof_a.n[mid] == pytest.approx(-0.1, abs=1e-15)
    assert np.all(prof_a.w == 0.0)


def test_set_c_values(prof_c):
    mid = prof_c.grid.n_points // 2
    assert prof_c.eps_hat[mid] == pytest.approx(math.sqrt(0.12), abs=1e-15)
    assert prof_c.n[mid] == pytest.approx(-0.15, abs=1e-15)


def test_set_d_values(prof_d):
    mid = prof_d.grid.n_points // 2
    assert prof_d.n[mid] == pytest.approx(-0.2, abs=1e-15)
    assert prof_d.w[mid] == pytest.approx(0.1, abs=1e-15)
    limit = 2 * 0.5 * math.sqrt(0.1)
    assert prof_d.phi[-1] == pytest.approx(limit, rel=1e-12)
    assert prof_d.phi[0] == pytest.approx(-limit, rel=1e-12)


@pytest.mark.parametrize("params", [SET_A, SET_C, SET_D])
def test_profile_invariants(params):
    p = profile_for(params)
    assert np.allclose(p.eps, np.exp(1j * p.scales.q * p.x) * p.eps_hat, atol=0, rtol=1e-15)
    assert np.array_equal(p.w, -p.wave.v * p.n)
    assert np.all(p.eps_hat > 0) and np.all(p.n < 0)
    for f in (p.eps_hat, p.n):
        peak = np.max(np.abs(f))
        assert abs(f[0]) < 1e-14 * peak
        assert abs(f[-1]) < 1e-14 * peak


@pytest.mark.parametrize("params", [SET_A, SET_C, SET_D])
def test_even_odd_symmetry(params):
    p = profile_for(params)
    # x_j and x_{N-j} are mirror images; x_0 = -L has no partner on the grid
    assert np.allclose(p.eps_hat[1:], p.eps_hat[1:][::-1], atol=1e-13)
    assert np.allclose(p.n[1:], p.n[1:][::-1], atol=1e-13)
    assert np.allclose(p.phi[1:], -p.phi[1:][::-1], atol=1e-13)


@pytest.mark.parametrize("params", [SET_A, SET_C, SET_D])
def test_consistent_residuals_vanish(params):
    rep = stationary_residual(profile_for(params))
    assert rep.r_nls <= 1e-10
    assert rep.r_bsq <= 1e-10
    assert rep.r_grad <= 1e-9


def test_forced_gamma_residual_matches_closed_form():
    # the eps_hat-equation residual is exactly (gamma* - gamma) eps_hat^3
    p = build_profile(1.0, 2.0, -0.05, 0.0, gamma=0.9)
    rep = stationary_residual(p)
    gstar = (3.0 - 2.0) / (3.0 * 0.8)
    e3 = p.grid.norm(p.eps_hat**3)
    assert rep.gamma_star == pytest.approx(gstar, rel=1e-14)
    assert rep.r_nls == pytest.approx(abs(0.9 - gstar) * e3, rel=1e-8)
    assert rep.r_nls > 1e-3
    assert rep.r_bsq <= 1e-10


def test_inconsistent_gamma_gradient_residual():
    gstar = 5.0 / 12.0
    p = build_profile(1.0, 2.0, -0.05, 0.0, gamma=gstar + 0.5)
    # first component is 2 (gamma - gamma*) eps_hat^3
    assert gradient_residual(p) == pytest.approx(2 * 0.5 * p.grid.norm(p.eps_hat**3), rel=1e-8)
    assert gradient_residual(p) > 1e-3


def test_derive_gamma_mode():
    p = build_profile(1.0, 2.0, -0.05, 0.0)
    assert p.phys.gamma == pytest.approx(5.0 / 12.0)
    assert stationary_residual(p).r_nls < 1e-10


def test_zero_profile_has_zero_gradient():
    g = Grid(50.0, 256)
    z = zero_profile(g, PhysParams(1.0, 3.0), WaveParams(-0.05, 0.0))
    assert gradient_residual(z) == 0.0
    assert z.scales.sigma == pytest.approx(0.05)


def test_zero_profile_outside_window_has_nan_scales():
    z = zero_profile(Grid(50.0, 64), PhysParams(1.0, 3.0), WaveParams(0.1, 0.0))
    assert math.isnan(z.scales.sigma)


@pytest.mark.parametrize("params", [SET_A, SET_D])
def test_refinement_convergence(params):
    coarse = stationary_residual(profile_for(params, n_points=512))
    fine = stationary_residual(profile_for(params, n_points=1024))
    for c, f in ((coarse.r_nls, fine.r_nls), (coarse.r_bsq, fine.r_bsq)):
        assert f <= max(c / 100.0, 1e-12)


@settings(max_examples=12, deadline=None)
@given(st.sampled_from([SET_A, SET_C, SET_D]), st.floats(0.5, 1.5).filter(lambda s: abs(s - 1.0) > 1e-3))
def test_scaled_profile_is_not_a_solution(params, s):
    p = profile_for(params, n_points=1024)
    scaled = sample_profile(p.phys, p.wave, p.scales, p.grid)
    object.__setattr__(scaled, "eps_hat", s * p.eps_hat)
    rep = stationary_residual(scaled)
    # with gamma = 0 the eps_hat equation is linear in eps_hat; the mismatch shows in r_bsq
    assert rep.r_bsq > 1e-6
    if p.phys.gamma != 0.0:
        assert rep.r_nls > 1e-6


def test_csv_round_trip(tmp_path, prof_d):
    path = tmp_path / "d.csv"
    export_profile(prof_d, path)
    header = path.read_text().splitlines()[0]
    assert header == "x,eps_re,eps_im,eps_hat,n,w,phi"
    data = read_profile_csv(path)
    assert np.array_equal(data["x"], prof_d.x)
    assert np.array_equal(data["eps_re"], prof_d.eps.real)
    assert np.array_equal(data["n"], prof_d.n)

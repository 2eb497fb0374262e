import json
import math

import numpy as np
import pytest

from conftest import SET_A, SET_D, profile_for, q1_closed
from sbwave.errors import BlowupDetected
from sbwave.evolve import (ConservationLog, IntegratorConfig, Scheme, State, advance, conservation_drift, init_state,
                           linear_flow, run, step, write_manifest, write_snapshot)
from sbwave.functionals import InvariantTriple
from sbwave.grid import Grid
from sbwave.params import PhysParams, WaveParams
from sbwave.waveforms import read_profile_csv, zero_profile

AB3 = PhysParams(1.0, 3.0, 0.0)


def zero_state(n=256):
    g = Grid(20.0, n)
    return init_state(zero_profile(g, AB3, WaveParams(-0.05, 0.0)))


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(dt=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(dt=0.1, record_every=11)
    with pytest.raises(ValueError):
        IntegratorConfig(record_every=0)
    assert IntegratorConfig(scheme="rk4").scheme is Scheme.RK4


def test_init_state_charges(prof_a, prof_d):
    assert init_state(prof_a).invariants(AB3).q2 == pytest.approx(0.7155418, abs=1e-7)
    assert init_state(prof_d).invariants(AB3).q1 == pytest.approx(q1_closed(1, 3, -0.1625, 0.5), abs=1e-12)
    z = zero_state()
    assert not np.any(z.eps) and not np.any(z.n) and not np.any(z.w)


@pytest.mark.parametrize("scheme", list(Scheme))
def test_zero_state_is_fixed(scheme):
    s = step(zero_state(), AB3, IntegratorConfig(scheme=scheme))
    assert not np.any(s.eps) and not np.any(s.n) and not np.any(s.w)
    assert s.t == pytest.approx(1e-3)


def test_zero_run_invariants_exactly_zero():
    _, log = run(zero_state(), AB3, IntegratorConfig(dt=0.01), 1.0)
    assert np.all(log.as_array()[:, 1:] == 0.0)
    assert conservation_drift(log) == (0.0, 0.0, 0.0)


def test_one_step_phase(prof_a):
    cfg = IntegratorConfig()
    s = step(init_state(prof_a), prof_a.phys, cfg)
    mid = prof_a.grid.n_points // 2
    assert abs(s.eps[mid]) == pytest.approx(abs(prof_a.eps[mid]), abs=1e-10)
    # exact solution: eps(t) = exp(-i omega t) eps_hat
    expected = np.exp(-1j * prof_a.wave.omega * cfg.dt) * prof_a.eps_hat
    assert np.max(np.abs(s.eps - expected)) < 1e-10


def test_fields_stay_real(prof_d):
    s, _ = run(init_state(prof_d), prof_d.phys, IntegratorConfig(dt=0.01, record_every=50), 1.0)
    assert np.isrealobj(s.n) and np.isrealobj(s.w)


def test_linear_flow_reversible(prof_d):
    cfg = IntegratorConfig(dt=0.05, record_every=1)
    s0 = init_state(prof_d)
    back = linear_flow(linear_flow(s0, prof_d.phys, cfg), prof_d.phys, cfg, backward=True)
    assert s0.distance_l2(back) < 1e-13
    assert back.t == pytest.approx(0.0, abs=1e-15)


def test_strang_second_order(prof_a):
    """Global error at t=1 against an RK4 reference at a much smaller step."""
    p = profile_for(SET_A, n_points=512)
    s0 = init_state(p)
    ref, _ = run(s0, p.phys, IntegratorConfig(dt=0.0005, scheme="rk4", record_every=2000), 1.0)
    errs = []
    for dt in (0.02, 0.01, 0.005):
        s, _ = run(s0, p.phys, IntegratorConfig(dt=dt, record_every=int(round(1 / dt))), 1.0)
        errs.append(s.distance_l2(ref))
    assert errs[0] / errs[1] >= 3.5
    assert errs[1] / errs[2] >= 3.5


def test_rk4_and_strang_agree(prof_a):
    s0 = init_state(prof_a)
    a, _ = run(s0, prof_a.phys, IntegratorConfig(record_every=1000), 1.0)
    b, _ = run(s0, prof_a.phys, IntegratorConfig(scheme="rk4", record_every=1000), 1.0)
    assert a.distance_l2(b) <= 1e-6


def test_set_a_conservation_to_t20(prof_a):
    _, log = run(init_state(prof_a), prof_a.phys, IntegratorConfig(), 20.0)
    d_e, d_q1, d_q2 = conservation_drift(log)
    assert d_e <= 1e-6 and d_q2 <= 1e-6
    assert abs(log.as_array()[:, 2]).max() <= 1e-8


def test_perturbed_drift_is_second_order(prof_a):
    """Off the critical point the energy error of the splitting is O(dt^2)."""
    p = profile_for(SET_A, n_points=1024)
    s0 = State(1.01 * init_state(p).eps, p.n.copy(), p.w.copy(), 0.0, p.grid)
    drifts = []
    for dt in (2e-3, 1e-3):
        _, log = run(s0, p.phys, IntegratorConfig(dt=dt, record_every=int(round(0.2 / dt))), 4.0)
        drifts.append(conservation_drift(log)[0])
    assert drifts[0] / drifts[1] >= 3.5


def test_set_d_peak_moves_with_speed(prof_d):
    s, _ = run(init_state(prof_d), prof_d.phys, IntegratorConfig(record_every=1000), 4.0)
    x_peak = prof_d.x[np.argmax(np.abs(s.eps))]
    assert abs(x_peak - 2.0) <= prof_d.grid.spacing


def test_record_times_strictly_increasing(prof_a):
    _, log = run(init_state(prof_a), prof_a.phys, IntegratorConfig(dt=0.01, record_every=7), 1.0)
    t = log.times()
    assert t[0] == 0.0 and t[-1] == pytest.approx(1.0)
    assert np.all(np.diff(t) > 0)


def test_run_rejects_short_horizon(prof_a):
    with pytest.raises(ValueError):
        run(init_state(prof_a), prof_a.phys, IntegratorConfig(), 1e-4)


def test_blowup_detected():
    g = Grid(20.0, 64)
    s = State(np.full(64, 2e8 + 0j), np.zeros(64), np.zeros(64), 0.0, g)
    with pytest.raises(BlowupDetected) as info:
        advance(s, AB3, IntegratorConfig(), 1)
    assert info.value.t == pytest.approx(1e-3)
    assert info.value.norm > 1e8


def test_constant_log_has_zero_drift():
    inv = InvariantTriple(1.0, 2.0, 3.0)
    log = ConservationLog(inv, [(0.0, inv), (1.0, inv)])
    assert conservation_drift(log) == (0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        conservation_drift(ConservationLog(inv, []))


def test_snapshot_and_manifest(tmp_path, prof_d):
    s = init_state(prof_d)
    write_snapshot(s, tmp_path / "snap.csv")
    data = read_profile_csv(tmp_path / "snap.csv")
    assert np.allclose(data["n"], prof_d.n)
    # the display antiderivative of w reproduces phi up to its boundary offset
    assert np.allclose(data["phi"][1:-1] - data["phi"][1:-1].mean(), prof_d.phi[1:-1] - prof_d.phi[1:-1].mean(),
                       atol=1e-2)
    m = write_manifest(tmp_path / "m.json", prof_d.phys, prof_d.grid, IntegratorConfig(), seed=7)
    on_disk = json.loads((tmp_path / "m.json").read_text())
    assert on_disk["seed"] == 7 and on_disk["integrator"]["dt"] == 1e-3
    assert m["grid"]["n_points"] == prof_d.grid.n_points

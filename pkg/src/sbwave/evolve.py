"""Split-step spectral integration of the first-order system in (eps, n, w = phi_x).

    eps_t = i (eps_xx - n eps - gamma |eps|^2 eps)
    n_t   = w_x
    w_t   = (n - alpha n_xx + beta n^2 + |eps|^2)_x

Strang splitting separates the linear part, solved exactly per Fourier mode,
from the nonlinear part, which is also exact: the phase rotation keeps |eps|
and n fixed, so the w-kick it pairs with is linear in time.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import BlowupDetected
from .functionals import InvariantTriple, invariants
from .grid import Grid
from .io import write_json
from .params import PhysParams
from .waveforms import Profile, write_profile_csv

BLOWUP_NORM = 1e8


class Scheme(str, enum.Enum):
    STRANG = "strang"
    RK4 = "rk4"


@dataclass(frozen=True, eq=False)
class State:
    eps: np.ndarray
    n: np.ndarray
    w: np.ndarray
    t: float
    grid: Grid

    def copy(self):
        return State(self.eps.copy(), self.n.copy(), self.w.copy(), self.t, self.grid)

    def invariants(self, phys: PhysParams) -> InvariantTriple:
        return invariants(self.eps, self.n, self.w, phys, self.grid)

    def distance_l2(self, other: "State") -> float:
        g = self.grid
        return math.sqrt(g.norm(self.eps - other.eps) ** 2 + g.norm(self.n - other.n) ** 2
                         + g.norm(self.w - other.w) ** 2)


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    scheme: Scheme = Scheme.STRANG
    record_every: int = 100
    dealias: bool = True

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.dt * self.record_every > 1.0 + 1e-12:
            raise ValueError("dt * record_every must not exceed 1")


@dataclass
class ConservationLog:
    initial: InvariantTriple
    samples: list = field(default_factory=list)

    def times(self):
        return np.array([t for t, _ in self.samples])

    def as_array(self):
        """Rows ``(t, E, Q1, Q2)``."""
        return np.array([(t, *inv.as_tuple()) for t, inv in self.samples])


def init_state(profile: Profile) -> State:
    return State(profile.eps.astype(complex).copy(), profile.n.astype(float).copy(),
                 profile.w.astype(float).copy(), 0.0, profile.grid)


# ---------------------------------------------------------------------------
# Substeps
# ---------------------------------------------------------------------------

class _Ops:
    """Per-grid transform multipliers, built once per (grid, phys, dt)."""

    def __init__(self, grid: Grid, phys: PhysParams, dt: float, dealias: bool):
        k = grid.k
        kr = grid.k_real
        n = grid.n_points
        self.grid = grid
        self.phys = phys
        self.dt = dt
        self.lin_eps = np.exp(-1j * k * k * dt)
        omega = kr * np.sqrt(1.0 + phys.alpha * kr * kr)
        c = np.cos(omega * dt)
        s = np.sin(omega * dt)
        with np.errstate(invalid="ignore", divide="ignore"):
            sinc = np.where(omega > 0, s / omega, dt)
        self.c = c
        self.nw = 1j * kr * sinc
        self.wn = 1j * kr * (1.0 + phys.alpha * kr * kr) * sinc
        dx = 1j * kr
        if n % 2 == 0:
            dx[-1] = 0.0
        if dealias:
            dx = dx * (np.abs(kr) <= (2.0 / 3.0) * np.max(np.abs(kr)))
        self.dx_source = dx
        self.ik_full = 1j * k
        self.ik_full[n // 2] = 0.0
        self.k2_full = k * k
        self.dx_real = 1j * kr
        if n % 2 == 0:
            self.dx_real[-1] = 0.0
        self.k2_real = kr * kr

    def nonlinear(self, eps, n, w, tau):
        """Exact flow of the nonlinear part over time ``tau``."""
        src = self.phys.beta * n * n + (eps.real**2 + eps.imag**2)
        w = w + tau * np.fft.irfft(self.dx_source * np.fft.rfft(src), n=self.grid.n_points)
        eps = kernels.phase_rotate(eps, n, self.phys.gamma, tau)
        return eps, w

    def linear(self, eps, n, w, sign=1.0):
        """Exact flow of the linear part over ``sign * dt``."""
        N = self.grid.n_points
        if sign > 0:
            eps = np.fft.ifft(self.lin_eps * np.fft.fft(eps))
            nw, wn = self.nw, self.wn
        else:
            eps = np.fft.ifft(np.conj(self.lin_eps) * np.fft.fft(eps))
            nw, wn = -self.nw, -self.wn
        nh = np.fft.rfft(n)
        wh = np.fft.rfft(w)
        nh, wh = self.c * nh + nw * wh, wn * nh + self.c * wh
        return eps, np.fft.irfft(nh, n=N), np.fft.irfft(wh, n=N)

    def rhs(self, eps, n, w):
        N = self.grid.n_points
        ph = self.phys
        eh = np.fft.fft(eps)
        eps_xx = np.fft.ifft(-self.k2_full * eh)
        rho = eps.real**2 + eps.imag**2
        d_eps = 1j * (eps_xx - n * eps - ph.gamma * rho * eps)
        d_n = np.fft.irfft(self.dx_real * np.fft.rfft(w), n=N)
        nh = np.fft.rfft(n)
        lin = nh + ph.alpha * self.k2_real * nh
        src = np.fft.rfft(ph.beta * n * n + rho)
        d_w = np.fft.irfft(self.dx_real * lin + self.dx_source * src, n=N)
        return d_eps, d_n, d_w


_OPS_CACHE: dict = {}


def _ops(grid, phys, cfg) -> _Ops:
    key = (grid, phys, cfg.dt, cfg.dealias)
    ops = _OPS_CACHE.get(key)
    if ops is None:
        if len(_OPS_CACHE) > 16:
            _OPS_CACHE.clear()
        ops = _OPS_CACHE[key] = _Ops(grid, phys, cfg.dt, cfg.dealias)
    return ops


def _check(eps, n, w, t):
    m = max(float(np.max(np.abs(eps))), float(np.max(np.abs(n))), float(np.max(np.abs(w))))
    if not m < BLOWUP_NORM:
        raise BlowupDetected(t, m)


def _strang(ops, eps, n, w, nsteps):
    """``nsteps`` Strang steps with adjacent nonlinear half-steps fused."""
    dt = ops.dt
    eps, w = ops.nonlinear(eps, n, w, 0.5 * dt)
    for i in range(nsteps):
        eps, n, w = ops.linear(eps, n, w)
        tau = dt if i < nsteps - 1 else 0.5 * dt
        eps, w = ops.nonlinear(eps, n, w, tau)
    return eps, n, w


def _rk4(ops, eps, n, w, nsteps):
    dt = ops.dt
    for _ in range(nsteps):
        k1 = ops.rhs(eps, n, w)
        k2 = ops.rhs(eps + 0.5 * dt * k1[0], n + 0.5 * dt * k1[1], w + 0.5 * dt * k1[2])
        k3 = ops.rhs(eps + 0.5 * dt * k2[0], n + 0.5 * dt * k2[1], w + 0.5 * dt * k2[2])
        k4 = ops.rhs(eps + dt * k3[0], n + dt * k3[1], w + dt * k3[2])
        eps = eps + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        n = n + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        w = w + dt / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    return eps, n, w


def advance(state: State, phys: PhysParams, cfg: IntegratorConfig, nsteps: int) -> State:
    if nsteps <= 0:
        return state
    ops = _ops(state.grid, phys, cfg)
    fn = _strang if cfg.scheme is Scheme.STRANG else _rk4
    eps, n, w = fn(ops, state.eps, state.n, state.w, nsteps)
    t = state.t + nsteps * cfg.dt
    _check(eps, n, w, t)
    return State(eps, n, w, t, state.grid)


def step(state: State, phys: PhysParams, cfg: IntegratorConfig) -> State:
    """One time step of size ``cfg.dt``.

    Raises
    ------
    BlowupDetected
        If any field exceeds ``1e8`` in magnitude or stops being finite.
    """
    return advance(state, phys, cfg, 1)


def linear_flow(state: State, phys: PhysParams, cfg: IntegratorConfig, backward: bool = False) -> State:
    """Apply only the exact linear propagator over ``+dt`` (or ``-dt``)."""
    ops = _ops(state.grid, phys, cfg)
    eps, n, w = ops.linear(state.eps, state.n, state.w, -1.0 if backward else 1.0)
    return State(eps, n, w, state.t + (-cfg.dt if backward else cfg.dt), state.grid)


def run(state0: State, phys: PhysParams, cfg: IntegratorConfig, t_end: float, observer=None):
    """Integrate to ``t_end``, sampling the invariants every ``record_every`` steps.

    ``observer(state)`` is called at ``t=0`` and at every record time.  The
    final time is always recorded.  Returns ``(state, log)``.
    """
    if t_end < cfg.dt * (1 - 1e-12):
        raise ValueError("t_end must be at least dt")
    nsteps = int(round(t_end / cfg.dt))
    state = state0
    log = ConservationLog(initial=state.invariants(phys))
    log.samples.append((state.t, log.initial))
    if observer is not None:
        observer(state)
    done = 0
    while done < nsteps:
        chunk = min(cfg.record_every, nsteps - done)
        state = advance(state, phys, cfg, chunk)
        done += chunk
        # time from the step count, so record times carry no summed roundoff
        state = State(state.eps, state.n, state.w, state0.t + done * cfg.dt, state.grid)
        log.samples.append((state.t, state.invariants(phys)))
        if observer is not None:
            observer(state)
    return state, log


def conservation_drift(log: ConservationLog):
    """Max over samples of ``|X(t) - X(0)| / max(1, |X(0)|)`` for ``X = E, Q1, Q2``."""
    if not log.samples:
        raise ValueError("empty log")
    x0 = np.array(log.initial.as_tuple())
    xs = np.array([inv.as_tuple() for _, inv in log.samples])
    return tuple(float(v) for v in np.max(np.abs(xs - x0), axis=0) / np.maximum(1.0, np.abs(x0)))


# ---------------------------------------------------------------------------
# Snapshots
# ---------------------------------------------------------------------------

def display_phi(state: State):
    """Antiderivative of ``w`` centred so that ``phi(-L) = -phi(L)``; for plots only."""
    g = state.grid
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (state.w[1:] + state.w[:-1])) * g.spacing))
    return cum - 0.5 * (cum[-1] + 0.5 * (state.w[-1] + state.w[0]) * g.spacing)


def write_snapshot(state: State, path):
    write_profile_csv(path, state.grid, state.eps, state.n, state.w, display_phi(state), np.abs(state.eps))


def write_manifest(path, phys: PhysParams, grid: Grid, cfg: IntegratorConfig, seed=None, **extra):
    data = {
        "phys": {"alpha": phys.alpha, "beta": phys.beta, "gamma": phys.gamma},
        "grid": {"half_width": grid.half_width, "n_points": grid.n_points, "spacing": grid.spacing},
        "integrator": {"dt": cfg.dt, "scheme": cfg.scheme.value, "record_every": cfg.record_every,
                       "dealias": cfg.dealias},
        "seed": seed,
    }
    data.update(extra)
    write_json(data, path)
    return data

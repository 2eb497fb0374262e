"""Symmetry group actions, orbital distance and perturbation experiments.

The distance to the group orbit is measured in the X-type norm
``|eps|_{H1}^2 + |n|_{H1}^2 + |w|_{L2}^2``, ``w = phi_x`` standing in for phi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneratePhase
from .evolve import IntegratorConfig, State, conservation_drift, init_state, run
from .io import fmt, write_json
from .params import PhysParams, WaveParams, check_stability_criterion, derive_scales
from .waveforms import Profile, sample_profile

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class OrbitalFit:
    distance: float
    s1: float
    s2: float


def _shift_real(grid, f, s):
    fh = np.fft.rfft(f) * np.exp(-1j * grid.k_real * s)
    return np.fft.irfft(fh, n=grid.n_points)


def _shift_complex(grid, f, s):
    return np.fft.ifft(np.fft.fft(f) * np.exp(-1j * grid.k * s))


def apply_symmetry(state: State, s1: float, s2: float) -> State:
    """``(e^{-i s2} eps(. - s1), n(. - s1), w(. - s1))``; translation is a spectral shift."""
    g = state.grid
    if s1 == 0.0:
        eps, n, w = state.eps, state.n, state.w
    else:
        eps = _shift_complex(g, state.eps, s1)
        n = _shift_real(g, state.n, s1)
        w = _shift_real(g, state.w, s1)
    return State(np.exp(-1j * s2) * eps, n.copy(), w.copy(), state.t, g)


def x_norm(grid, eps, n, w) -> float:
    return math.sqrt(grid.h1_norm(eps) ** 2 + grid.h1_norm(n) ** 2 + grid.norm(w) ** 2)


def x_distance(a: State, b: State) -> float:
    return x_norm(a.grid, a.eps - b.eps, a.n - b.n, a.w - b.w)


def optimal_phase(state: State, reference: State) -> float:
    """Phase ``s2`` in ``[0, 2 pi)`` minimizing ``|eps - e^{-i s2} eps_ref|_{H1}``.

    Raises
    ------
    DegeneratePhase
        When the H1 cross term vanishes, so every phase is optimal.
    """
    g = state.grid
    p = g.spacing * (np.vdot(state.eps, reference.eps) + np.vdot(g.diff(state.eps), g.diff(reference.eps)))
    if abs(p) < 1e-14:
        raise DegeneratePhase("H1 cross term vanishes; phase is undetermined")
    return float(np.angle(p)) % TWO_PI


class _Correlator:
    """Cross terms between a state and the translated reference as Fourier sums.

    ``P(s)`` (complex, eps part) and ``R(s)`` (real, n and w parts) are
    ``sum_k c_k exp(-i k s)``; the metric squared is
    ``const - 2 |P(s)| - 2 R(s)`` once the phase is optimized.
    """

    def __init__(self, state: State, ref: State):
        g = state.grid
        N = g.n_points
        k = g.k
        scale = g.spacing / N
        w1 = 1.0 + k * k
        A = np.fft.fft(state.eps)
        B = np.fft.fft(ref.eps)
        self.k = k
        self.a = scale * w1 * np.conj(A) * B
        Nn = np.fft.fft(state.n)
        Nr = np.fft.fft(ref.n)
        Wn = np.fft.fft(state.w)
        Wr = np.fft.fft(ref.w)
        self.r = scale * (w1 * np.conj(Nn) * Nr + np.conj(Wn) * Wr)
        self.grid = g

    def lattice(self):
        """``|P|`` and ``R`` at every grid shift ``s = m h`` at once."""
        N = self.grid.n_points
        P = np.fft.fft(self.a)
        R = np.fft.fft(self.r).real
        return P, R

    def derivs(self, s):
        e = np.exp(-1j * self.k * s)
        ae = self.a * e
        re = self.r * e
        P = ae.sum()
        P1 = (-1j * self.k * ae).sum()
        P2 = (-(self.k**2) * ae).sum()
        R = re.sum().real
        R1 = (-1j * self.k * re).sum().real
        R2 = (-(self.k**2) * re).sum().real
        ap = abs(P)
        dP = (np.conj(P) * P1).real / ap
        d2P = (abs(P1) ** 2 + (np.conj(P) * P2).real) / ap - ((np.conj(P) * P1).real) ** 2 / ap**3
        # metric^2 = const - 2|P| - 2R
        return -2.0 * (ap + R), -2.0 * (dP + R1), -2.0 * (d2P + R2), P


def _wrap(s, L):
    return (s + L) % (2.0 * L) - L


def orbital_distance(state: State, profile: Profile, newton_iters: int = 6) -> OrbitalFit:
    """Distance from ``state`` to the orbit ``{T1(s1) T2(s2) Phi}``.

    The translation is found by a scan over every grid shift (FFT
    cross-correlation, smallest shift wins ties), a parabola through the best
    contiguous triple, then Newton on the stationarity condition.  The phase
    is optimal in closed form for each shift.  The returned distance is
    evaluated directly, not from the expanded cross terms.
    """
    g = state.grid
    ref = init_state(profile)
    corr = _Correlator(state, ref)
    P, R = corr.lattice()
    score = -2.0 * (np.abs(P) + R)
    m = int(np.argmin(score))
    N = g.n_points
    h = g.spacing
    L = g.half_width
    fm, f0, fp = score[(m - 1) % N], score[m], score[(m + 1) % N]
    denom = fm - 2.0 * f0 + fp
    off = 0.5 * (fm - fp) / denom if denom > 0 else 0.0
    s = m * h + max(-1.0, min(1.0, off)) * h
    for _ in range(newton_iters):
        _, d1, d2, _ = corr.derivs(s)
        if not d2 > 0:
            break
        ds = -d1 / d2
        ds = max(-h, min(h, ds))
        s += ds
        if abs(ds) < 1e-15 * max(1.0, L):
            break
    candidates = [s, m * h]
    best = None
    for cand in candidates:
        cand = _wrap(cand, L)
        _, _, _, Pc = corr.derivs(cand)
        s2 = float(np.angle(Pc)) % TWO_PI if abs(Pc) > 0 else 0.0
        target = apply_symmetry(ref, cand, s2)
        d = x_distance(state, target)
        if best is None or d < best.distance:
            best = OrbitalFit(d, float(cand), s2)
    return best


# ---------------------------------------------------------------------------
# Perturbation experiments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PerturbSpec:
    """How to perturb the wave before evolving it.

    kind ``"amplitude"``: ``eps -> (1 + size) eps``.
    kind ``"bump"``: ``n -> n + size * max|n| * exp(-((x - center)/width)^2)``,
    ``width`` defaulting to ``1/sqrt(sigma)``.
    kind ``"noise"``: seeded band-limited complex noise on ``eps`` with
    ``|noise|_{H1} = size * |eps|_{H1}``, wavenumbers up to ``kmax``
    (default ``2 sqrt(sigma)``).
    """

    kind: str = "amplitude"
    size: float = 0.01
    center: float = 0.0
    width: float | None = None
    kmax: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("amplitude", "bump", "noise"):
            raise ValueError(f"unknown perturbation kind {self.kind!r}")


def perturb(profile: Profile, spec: PerturbSpec) -> State:
    s0 = init_state(profile)
    g = profile.grid
    if spec.kind == "amplitude":
        return State(s0.eps * (1.0 + spec.size), s0.n, s0.w, 0.0, g)
    width = 1.0 / math.sqrt(profile.scales.sigma)
    if spec.kind == "bump":
        wdt = spec.width if spec.width is not None else width
        bump = spec.size * np.max(np.abs(s0.n)) * np.exp(-(((g.x - spec.center) / wdt) ** 2))
        return State(s0.eps, s0.n + bump, s0.w, 0.0, g)
    rng = np.random.default_rng(spec.seed)
    kmax = spec.kmax if spec.kmax is not None else 2.0 / width
    coef = (rng.standard_normal(g.n_points) + 1j * rng.standard_normal(g.n_points)) * (np.abs(g.k) <= kmax)
    noise = np.fft.ifft(coef)
    noise *= spec.size * g.h1_norm(s0.eps) / g.h1_norm(noise)
    return State(s0.eps + noise, s0.n, s0.w, 0.0, g)


@dataclass
class StabilityReport:
    perturbation_size: float
    max_distance: float
    t_end: float
    certified_region: bool
    conservation_drift: tuple
    series: list = field(default_factory=list)

    def to_dict(self):
        return {
            "perturbation_size": self.perturbation_size,
            "max_distance": self.max_distance,
            "t_end": self.t_end,
            "certified_region": self.certified_region,
            "conservation_drift": list(self.conservation_drift),
            "series": [{"t": t, "distance": d, "s1": a, "s2": b} for t, d, a, b in self.series],
        }

    def write_json(self, path, **manifest):
        data = self.to_dict()
        if manifest:
            data["manifest"] = manifest
        write_json(data, path)

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("t,distance,s1,s2\n")
            for row in self.series:
                fh.write(",".join(fmt(v) for v in row) + "\n")


def stability_experiment(phys: PhysParams, wave: WaveParams, perturbation: PerturbSpec, t_end: float,
                         cfg: IntegratorConfig | None = None, profile: Profile | None = None) -> StabilityReport:
    """Evolve a perturbed wave and track its distance to the unperturbed orbit."""
    cfg = cfg or IntegratorConfig()
    if profile is None:
        profile = sample_profile(phys, wave, derive_scales(phys, wave))
    u0 = perturb(profile, perturbation)
    delta0 = x_distance(u0, init_state(profile))
    series = []

    def observe(state):
        fit = orbital_distance(state, profile)
        series.append((state.t, fit.distance, fit.s1, fit.s2))

    _, log = run(u0, phys, cfg, t_end, observer=observe)
    return StabilityReport(
        perturbation_size=delta0,
        max_distance=max(d for _, d, _, _ in series),
        t_end=float(t_end),
        certified_region=check_stability_criterion(phys, wave).stable_certified,
        conservation_drift=conservation_drift(log),
        series=series,
    )

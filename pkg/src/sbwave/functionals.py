"""Conserved functionals, the scalar function d(omega, v) and its Hessian.

The third field is always carried as ``w = phi_x``; every place the
Hamiltonian structure needs ``phi_x`` it gets ``w``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .params import (
    PhysParams,
    WaveParams,
    compatible_gamma,
    existence_bounds,
    sigma_eta,
    stability_bounds,
)


@dataclass(frozen=True)
class InvariantTriple:
    e: float
    q1: float
    q2: float

    def as_tuple(self):
        return (self.e, self.q1, self.q2)


class HessianMode(str, enum.Enum):
    CLOSED_FORM = "closed-form"
    FINITE_DIFFERENCE = "finite-difference"


@dataclass(frozen=True)
class HessianReport:
    d_omega: float
    d_v: float
    d_oo: float
    d_ov: float
    d_vo: float
    d_vv: float
    det: float
    p_dpp: int
    degenerate: bool
    mode: HessianMode

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.d_oo, self.d_ov], [self.d_vo, self.d_vv]])

    @property
    def symmetrized(self) -> np.ndarray:
        off = 0.5 * (self.d_ov + self.d_vo)
        return np.array([[self.d_oo, off], [off, self.d_vv]])


# ---------------------------------------------------------------------------
# Functionals on grid fields
# ---------------------------------------------------------------------------

def energy(eps, n, w, phys: PhysParams, grid) -> float:
    """Hamiltonian ``E`` by spectral quadrature."""
    eps_x = grid.diff(eps)
    n_x = grid.diff(n)
    rho = np.abs(eps) ** 2
    dens = (
        np.abs(eps_x) ** 2
        + n * rho
        + 0.5 * phys.gamma * rho**2
        + 0.5 * n**2
        + 0.5 * phys.alpha * n_x**2
        + phys.beta / 3.0 * n**3
        + 0.5 * w**2
    )
    return float(grid.integrate(dens))


def charge_q2(eps, grid) -> float:
    return float(grid.integrate(np.abs(eps) ** 2))


def charge_q1(eps, n, w, grid) -> float:
    """Momentum ``-int w n dx + Im int eps_x conj(eps) dx``."""
    eps_x = grid.diff(eps)
    return float(-grid.integrate(w * n) + np.imag(grid.integrate(eps_x * np.conj(eps))))


def invariants(eps, n, w, phys, grid) -> InvariantTriple:
    return InvariantTriple(energy(eps, n, w, phys, grid), charge_q1(eps, n, w, grid), charge_q2(eps, grid))


def action_gradient(eps, n, w, phys: PhysParams, wave: WaveParams, grid):
    """Components of ``E' - v Q1' - omega Q2'``.

    The third component is the variation with respect to ``phi``; with
    ``w = phi_x`` it reads ``-w_x - v n_x``.
    """
    v, omega = wave.v, wave.omega
    eps_x = grid.diff(eps)
    eps_xx = grid.diff(eps, 2)
    n_x = grid.diff(n)
    n_xx = grid.diff(n, 2)
    w_x = grid.diff(w)
    rho = np.abs(eps) ** 2
    g1 = -2.0 * eps_xx + 2.0 * n * eps + 2.0 * phys.gamma * rho * eps + 2j * v * eps_x - 2.0 * omega * eps
    g2 = rho + n - phys.alpha * n_xx + phys.beta * n**2 + v * w
    g3 = -w_x - v * n_x
    return g1, g2, g3


# ---------------------------------------------------------------------------
# d(omega, v): closed forms
# ---------------------------------------------------------------------------

def _scales(alpha, omega, v):
    sigma, eta = sigma_eta(alpha, omega, v)
    if np.any(np.asarray(sigma) <= 0):
        raise DomainError(f"sigma = {sigma} is not positive")
    return sigma, eta


def d_gradient_closed(phys: PhysParams, wave: WaveParams):
    """``(d_omega, d_v) = (-Q2, -Q1)`` evaluated on the closed-form profile."""
    a, b, v = phys.alpha, phys.beta, wave.v
    sigma, eta = _scales(a, wave.omega, v)
    r = math.sqrt(sigma)
    d_omega = -12.0 * a / b * r * eta
    d_v = -48.0 * a * a / (b * b) * v * sigma**1.5 - 6.0 * a / b * v * r * eta
    return d_omega, d_v


def hessian_entries_closed(alpha, beta, omega, v):
    """Second derivatives of d; vectorized over ``omega`` and ``v``.

    ``d_ov`` is the v-derivative of ``d_omega`` and ``d_vo`` the
    omega-derivative of ``d_v``; they differ unless ``beta == 3 alpha`` or
    ``v == 0``.
    """
    a, b = alpha, beta
    sigma, eta = sigma_eta(a, omega, v)
    r = np.sqrt(sigma)
    d_oo = 6.0 * a / b * (eta - 8.0 * a * sigma) / r
    d_ov = 3.0 * a / b * v * eta / r - 24.0 * a / b * v * (a - 1.0) * r
    d_vo = 3.0 * a / b * v * eta / r - 24.0 * a / b * v * (a - 3.0 * a / b) * r
    d_vv = (
        -48.0 * a * a / (b * b) * sigma**1.5
        + 36.0 * a * a / (b * b) * v * v * r
        - 6.0 * a / b * r * eta
        - 12.0 * a / b * v * v * (a - 1.0) * r
        + 3.0 * a / b * (v * v / 2.0) * eta / r
    )
    return d_oo, d_ov, d_vo, d_vv


def det_closed(alpha, beta, omega, v):
    """The factored determinant ``-36 (a/b)^2 [(eta - 4 a s)^2 + 8 (a/b) s (1 + 5 v^2 - 12 a s - 2 b a s)]``."""
    a, b = alpha, beta
    s, eta = sigma_eta(a, omega, v)
    return -36.0 * a * a / (b * b) * (
        (eta - 4.0 * a * s) ** 2 + 8.0 * a / b * s * (1.0 + 5.0 * v * v - 12.0 * a * s - 2.0 * b * a * s)
    )


def count_positive(m: np.ndarray) -> int:
    return int(np.sum(np.linalg.eigvalsh(m) > 0))


def fd_step(omega, v):
    # d depends on sqrt(sigma), so the step has to shrink with sigma near the edge
    return 1e-4 * abs(-omega - v * v / 4.0)


def d_hessian(phys: PhysParams, wave: WaveParams, mode=HessianMode.CLOSED_FORM, richardson=False) -> HessianReport:
    """Hessian of d in closed form or by central differences of the closed-form gradient.

    ``p_dpp`` counts positive eigenvalues of the symmetrized matrix.  When
    ``|det| < 1e-10 * max entry**2`` the report is flagged degenerate.
    """
    mode = HessianMode(mode)
    d_omega, d_v = d_gradient_closed(phys, wave)
    if mode is HessianMode.CLOSED_FORM:
        d_oo, d_ov, d_vo, d_vv = (float(x) for x in hessian_entries_closed(phys.alpha, phys.beta, wave.omega, wave.v))
    else:
        d_oo, d_ov, d_vo, d_vv = _fd_entries(phys, wave, fd_step(wave.omega, wave.v))
        if richardson:
            coarse = _fd_entries(phys, wave, 2.0 * fd_step(wave.omega, wave.v))
            d_oo, d_ov, d_vo, d_vv = ((4.0 * f - c) / 3.0 for f, c in zip((d_oo, d_ov, d_vo, d_vv), coarse))
    det = d_oo * d_vv - d_ov * d_vo
    scale = max(abs(d_oo), abs(d_ov), abs(d_vo), abs(d_vv))
    degenerate = abs(det) < 1e-10 * scale * scale
    off = 0.5 * (d_ov + d_vo)
    p = count_positive(np.array([[d_oo, off], [off, d_vv]]))
    return HessianReport(d_omega, d_v, d_oo, d_ov, d_vo, d_vv, det, p, degenerate, mode)


def _fd_entries(phys, wave, h):
    om, v = wave.omega, wave.v
    gop = d_gradient_closed(phys, WaveParams(om + h, v))
    gom = d_gradient_closed(phys, WaveParams(om - h, v))
    gvp = d_gradient_closed(phys, WaveParams(om, v + h))
    gvm = d_gradient_closed(phys, WaveParams(om, v - h))
    d_oo = (gop[0] - gom[0]) / (2 * h)
    d_vo = (gop[1] - gom[1]) / (2 * h)
    d_ov = (gvp[0] - gvm[0]) / (2 * h)
    d_vv = (gvp[1] - gvm[1]) / (2 * h)
    return d_oo, d_ov, d_vo, d_vv


# ---------------------------------------------------------------------------
# Parameter region scan
# ---------------------------------------------------------------------------

SCAN_COLUMNS = ("omega", "v", "exists", "stable", "det", "p", "gamma_star")


def region_scan(phys: PhysParams, omega_range, v_range, resolution):
    """Tabulate existence, certification and Hessian sign over an (omega, v) lattice.

    ``omega_range`` and ``v_range`` are ``(lo, hi)`` pairs (inclusive
    endpoints) or a single value for a degenerate axis.  ``resolution`` is an
    int or ``(n_omega, n_v)``.  Rows are row-major over the ``(omega, v)``
    lattice, v varying fastest.
    Rows outside the existence window carry ``nan`` Hessian entries.
    """
    n_om, n_v = (resolution, resolution) if np.isscalar(resolution) else resolution
    omegas = _axis(omega_range, n_om)
    vs = _axis(v_range, n_v)
    om, vv = np.meshgrid(omegas, vs, indexing="ij")
    om = om.ravel()
    vv = vv.ravel()
    a, b = phys.alpha, phys.beta
    lo_e, hi = existence_bounds(a, vv)
    lo_s, _ = stability_bounds(a, b, vv)
    exists = (lo_e < om) & (om < hi) & (1.0 - vv * vv > 0)
    stable = (lo_s < om) & (om < hi)

    det = np.full(om.shape, np.nan)
    p = np.full(om.shape, -1, dtype=np.int64)
    gstar = np.full(om.shape, np.nan)
    if np.any(exists):
        d_oo, d_ov, d_vo, d_vv = hessian_entries_closed(a, b, om[exists], vv[exists])
        det[exists] = d_oo * d_vv - d_ov * d_vo
        off = 0.5 * (d_ov + d_vo)
        mats = np.stack([np.stack([d_oo, off], -1), np.stack([off, d_vv], -1)], -2)
        p[exists] = np.sum(np.linalg.eigvalsh(mats) > 0, axis=-1)
        _, eta = sigma_eta(a, om[exists], vv[exists])
        gstar[exists] = compatible_gamma(a, b, 1.0) / eta
    return {
        "omega": om,
        "v": vv,
        "exists": exists,
        "stable": stable,
        "det": det,
        "p": p,
        "gamma_star": gstar,
    }


def _axis(rng, n):
    if np.isscalar(rng):
        return np.array([float(rng)])
    lo, hi = rng
    if n < 2:
        raise ValueError("resolution must be at least 2 along a non-degenerate axis")
    return np.linspace(float(lo), float(hi), int(n))


def write_region_csv(table, target):
    """Write the scan as CSV to a path or an open text stream."""
    from .io import fmt

    if hasattr(target, "write"):
        _region_rows(table, target, fmt)
        return
    with open(target, "w", encoding="utf-8", newline="\n") as fh:
        _region_rows(table, fh, fmt)


def _region_rows(table, fh, fmt):
    fh.write(",".join(SCAN_COLUMNS) + "\n")
    for i in range(table["omega"].shape[0]):
        row = [
            fmt(table["omega"][i]),
            fmt(table["v"][i]),
            str(bool(table["exists"][i])).lower(),
            str(bool(table["stable"][i])).lower(),
            fmt(table["det"][i]),
            str(int(table["p"][i])),
            fmt(table["gamma_star"][i]),
        ]
        fh.write(",".join(row) + "\n")

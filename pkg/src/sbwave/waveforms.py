"""Closed-form solitary-wave profiles sampled on a grid, and their residuals."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .functionals import action_gradient
from .grid import Grid, make_grid
from .io import fmt
from .params import DerivedScales, PhysParams, WaveParams, compatible_gamma, derive_scales

PROFILE_COLUMNS = ("x", "eps_re", "eps_im", "eps_hat", "n", "w", "phi")


@dataclass(frozen=True, eq=False)
class Profile:
    """Sampled wave ``(eps, n, w)`` together with everything it was built from.

    ``phi`` is kept for display only; every computation uses ``w = phi_x``.
    """

    eps_hat: np.ndarray
    eps: np.ndarray
    n: np.ndarray
    w: np.ndarray
    phi: np.ndarray
    grid: Grid
    phys: PhysParams
    wave: WaveParams
    scales: DerivedScales

    @property
    def x(self):
        return self.grid.x


@dataclass(frozen=True)
class ResidualReport:
    r_nls: float
    r_bsq: float
    r_grad: float
    gamma_star: float


def sample_profile(phys: PhysParams, wave: WaveParams, scales: DerivedScales | None = None,
                   grid: Grid | None = None) -> Profile:
    if scales is None:
        scales = derive_scales(phys, wave)
    if grid is None:
        grid = make_grid(scales.sigma)
    x = grid.x
    a = 6.0 * phys.alpha / phys.beta
    r = np.sqrt(scales.sigma)
    sech = 1.0 / np.cosh(r * x)
    eps_hat = np.sqrt(a * scales.sigma * scales.eta) * sech
    n = -a * scales.sigma * sech**2
    phi = a * wave.v * r * np.tanh(r * x)
    w = -wave.v * n
    eps = np.exp(1j * scales.q * x) * eps_hat
    return Profile(eps_hat, eps, n, w, phi, grid, phys, wave, scales)


def build_profile(alpha, beta, omega, v=0.0, gamma=None, grid=None, n_points=None) -> Profile:
    """Profile in derive-gamma mode (``gamma=None``) or force-gamma mode.

    In derive-gamma mode the cubic coefficient is set to the compatible value
    so the sampled fields solve the stationary equations exactly.
    """
    wave = WaveParams(float(omega), float(v))
    if gamma is None:
        scales = derive_scales(PhysParams(alpha, beta, 0.0), wave)
        gamma = compatible_gamma(alpha, beta, scales.eta)
    phys = PhysParams(alpha, beta, float(gamma))
    scales = derive_scales(phys, wave)
    if grid is None:
        grid = make_grid(scales.sigma, n_points=n_points)
    return sample_profile(phys, wave, scales, grid)


def zero_profile(grid: Grid, phys: PhysParams, wave: WaveParams, scales: DerivedScales | None = None) -> Profile:
    """All-zero fields; ``scales`` default to those of ``wave`` when it is admissible, else ``nan``."""
    if scales is None:
        try:
            scales = derive_scales(phys, wave)
        except DomainError:
            scales = DerivedScales(sigma=np.nan, eta=np.nan, q=wave.v / 2, c1=0.0, c2=np.nan)
    z = np.zeros(grid.n_points)
    return Profile(z, z.astype(complex), z, z, z, grid, phys, wave, scales)


def stationary_residual(profile: Profile, phys: PhysParams | None = None, wave: WaveParams | None = None,
                        grid: Grid | None = None) -> ResidualReport:
    """Discrete L2 residuals of the two stationary profile equations.

    ``r_nls`` checks ``eps_hat'' + (omega + v^2/4 - n - gamma eps_hat^2) eps_hat``
    and ``r_bsq`` checks ``(v^2 - 1) n + alpha n'' - beta n^2 - eps_hat^2``.
    """
    phys = phys or profile.phys
    wave = wave or profile.wave
    grid = grid or profile.grid
    e, n = profile.eps_hat, profile.n
    v = wave.v
    nls = grid.diff(e, 2) + (wave.omega + v * v / 4.0 - n - phys.gamma * e**2) * e
    bsq = v * v * n - n + phys.alpha * grid.diff(n, 2) - phys.beta * n**2 - e**2
    _, eta = wave_sigma_eta(phys, wave)
    gstar = compatible_gamma(phys.alpha, phys.beta, eta) if eta > 0 else float("nan")
    return ResidualReport(grid.norm(nls), grid.norm(bsq), gradient_residual(profile, phys, wave, grid), gstar)


def wave_sigma_eta(phys, wave):
    sigma = -wave.omega - wave.v**2 / 4.0
    return sigma, 1.0 - wave.v**2 - 4.0 * phys.alpha * sigma


def gradient_residual(profile: Profile, phys: PhysParams | None = None, wave: WaveParams | None = None,
                      grid: Grid | None = None) -> float:
    phys = phys or profile.phys
    wave = wave or profile.wave
    grid = grid or profile.grid
    g1, g2, g3 = action_gradient(profile.eps, profile.n, profile.w, phys, wave, grid)
    return float(np.sqrt(grid.norm(g1) ** 2 + grid.norm(g2) ** 2 + grid.norm(g3) ** 2))


def write_profile_csv(path, grid: Grid, eps, n, w, phi=None, eps_hat=None):
    """One row per grid point with columns :data:`PROFILE_COLUMNS`."""
    x = grid.x
    if eps_hat is None:
        eps_hat = np.abs(eps)
    if phi is None:
        phi = np.full(x.shape, np.nan)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(PROFILE_COLUMNS) + "\n")
        for j in range(x.shape[0]):
            vals = (x[j], eps[j].real, eps[j].imag, eps_hat[j], n[j], w[j], phi[j])
            fh.write(",".join(fmt(val) for val in vals) + "\n")


def export_profile(profile: Profile, path):
    write_profile_csv(path, profile.grid, profile.eps, profile.n, profile.w, profile.phi, profile.eps_hat)


def read_profile_csv(path):
    """Read a profile CSV back into a dict of column arrays."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: np.asarray(data[name]) for name in PROFILE_COLUMNS}

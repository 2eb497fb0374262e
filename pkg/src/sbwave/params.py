"""Equation constants, wave parameters and the closed-form parameter predicates."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class PhysParams:
    """Coefficients of the coupled system.

    alpha : dispersion coefficient of the Boussinesq field (> 0)
    beta  : quadratic Boussinesq nonlinearity (> 0)
    gamma : cubic Schroedinger coefficient, any sign
    """

    alpha: float
    beta: float
    gamma: float = 0.0

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not math.isfinite(self.gamma):
            raise ValueError("gamma must be finite")

    def with_gamma(self, gamma: float) -> "PhysParams":
        return PhysParams(self.alpha, self.beta, float(gamma))


@dataclass(frozen=True)
class WaveParams:
    omega: float
    v: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.omega) and math.isfinite(self.v)):
            raise ValueError("omega and v must be finite")


@dataclass(frozen=True)
class DerivedScales:
    sigma: float
    eta: float
    q: float
    c1: float
    c2: float

    @property
    def amplitude_factor(self) -> float:
        """``6 alpha / beta``; stored implicitly as ``c1**2 / (sigma*eta)``."""
        return self.c1**2 / (self.sigma * self.eta)


@dataclass(frozen=True)
class StabilityVerdict:
    exists: bool
    stable_certified: bool
    lower_bound_existence: float
    lower_bound_stability: float
    upper_bound: float


def sigma_eta(alpha, omega, v):
    sigma = -omega - v * v / 4.0
    eta = 1.0 - v * v - 4.0 * alpha * sigma
    return sigma, eta


def derive_scales(phys: PhysParams, wave: WaveParams) -> DerivedScales:
    """Inverse width, amplitude and carrier wavenumber of the sech profile.

    Raises
    ------
    DomainError
        If ``sigma <= 0`` or ``eta <= 0``.
    """
    sigma, eta = sigma_eta(phys.alpha, wave.omega, wave.v)
    if not sigma > 0:
        raise DomainError(f"sigma = -omega - v^2/4 = {sigma:.6g} is not positive")
    if not eta > 0:
        raise DomainError(f"eta = 1 - v^2 - 4 alpha sigma = {eta:.6g} is not positive")
    c2 = math.sqrt(sigma)
    c1 = math.sqrt(6.0 * phys.alpha / phys.beta * sigma * eta)
    return DerivedScales(sigma=sigma, eta=eta, q=wave.v / 2.0, c1=c1, c2=c2)


def existence_bounds(alpha, v):
    upper = -v * v / 4.0
    return upper - (1.0 - v * v) / (4.0 * alpha), upper


def stability_bounds(alpha, beta, v):
    upper = -v * v / 4.0
    return upper - (1.0 + 5.0 * v * v) / (2.0 * alpha * (6.0 + beta)), upper


def check_existence(phys: PhysParams, wave: WaveParams) -> bool:
    lo, hi = existence_bounds(phys.alpha, wave.v)
    return bool(lo < wave.omega < hi and 1.0 - wave.v**2 > 0)


def check_stability_criterion(phys: PhysParams, wave: WaveParams) -> StabilityVerdict:
    lo_e, hi = existence_bounds(phys.alpha, wave.v)
    lo_s, _ = stability_bounds(phys.alpha, phys.beta, wave.v)
    return StabilityVerdict(
        exists=check_existence(phys, wave),
        stable_certified=bool(lo_s < wave.omega < hi),
        lower_bound_existence=lo_e,
        lower_bound_stability=lo_s,
        upper_bound=hi,
    )


def compatible_gamma(alpha: float, beta: float, eta: float) -> float:
    """The cubic coefficient for which the sech profiles solve both stationary equations.

    Substituting the profiles into the Schroedinger equation leaves a residual
    proportional to ``(gamma* - gamma) * eps_hat**3`` with
    ``gamma* = (3 alpha - beta) / (3 alpha eta)``.
    """
    if not eta > 0:
        raise DomainError(f"eta must be positive, got {eta}")
    return (3.0 * alpha - beta) / (3.0 * alpha * eta)


def consistent_phys(alpha: float, beta: float, wave: WaveParams) -> PhysParams:
    """``PhysParams`` with gamma set to the compatible value for ``wave``."""
    _, eta = sigma_eta(alpha, wave.omega, wave.v)
    return PhysParams(alpha, beta, compatible_gamma(alpha, beta, eta))

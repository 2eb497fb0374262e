"""Uniform periodic grid and spectral differentiation on it."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

# Domain half-width in units of the soliton width 1/sqrt(sigma).
WIDTHS = 40.0
# Largest spacing in the same units.
MAX_SPACING = 0.05


@dataclass(frozen=True)
class Grid:
    """Points ``x_j = -L + j h`` for ``j = 0..N-1`` on ``[-L, L)``."""

    half_width: float
    n_points: int

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        n = self.n_points
        if n < 4 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 4, got {n}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n_points

    @cached_property
    def x(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.n_points)

    @cached_property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in ``numpy.fft`` order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.spacing)

    @cached_property
    def k_real(self) -> np.ndarray:
        """Wavenumbers matching ``numpy.fft.rfft`` output."""
        return 2.0 * np.pi * np.fft.rfftfreq(self.n_points, d=self.spacing)

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.half_width, self.n_points * factor)

    def interpolate(self, f, factor: int):
        """Trigonometric interpolation onto ``refined(factor)`` by zero padding."""
        f = np.asarray(f)
        n = self.n_points
        m = n * factor
        fh = np.fft.fft(f)
        pad = np.zeros(m, dtype=complex)
        half = n // 2
        pad[:half] = fh[:half]
        pad[m - half + 1:] = fh[half + 1:]
        # split the Nyquist mode symmetrically
        pad[half] = 0.5 * fh[half]
        pad[m - half] = 0.5 * fh[half]
        out = np.fft.ifft(pad) * factor
        return out if np.iscomplexobj(f) else out.real

    # -- spectral calculus ------------------------------------------------

    def diff(self, f, order: int = 1) -> np.ndarray:
        """Spectral derivative of a periodic grid function.

        Real input uses the real transform, so the result is exactly real.
        The Nyquist mode is dropped for odd orders.
        """
        f = np.asarray(f)
        if np.isrealobj(f):
            fh = np.fft.rfft(f)
            mult = (1j * self.k_real) ** order
            if order % 2 and self.n_points % 2 == 0:
                mult[-1] = 0.0
            return np.fft.irfft(fh * mult, n=self.n_points)
        fh = np.fft.fft(f)
        mult = (1j * self.k) ** order
        if order % 2:
            mult[self.n_points // 2] = 0.0
        return np.fft.ifft(fh * mult)

    def integrate(self, f) -> float:
        """Rectangle rule, spectrally accurate for smooth periodic/decaying ``f``."""
        return self.spacing * np.sum(f)

    def inner(self, f, g) -> float:
        """Real L2 pairing ``Re int f conj(g) dx``."""
        return float(self.spacing * np.real(np.vdot(g, f)))

    def norm(self, f) -> float:
        return math.sqrt(self.spacing * float(np.sum(np.abs(f) ** 2)))

    def h1_norm(self, f) -> float:
        return math.sqrt(self.norm(f) ** 2 + self.norm(self.diff(f)) ** 2)


def make_grid(sigma: float, points_per_width: int = 2048, n_points: int | None = None) -> Grid:
    """Grid wide enough for a sech profile of inverse width ``sqrt(sigma)``.

    ``half_width = ceil(40 / sqrt(sigma))``.  The point count is the smallest
    power of two ``>= points_per_width`` whose spacing is at most
    ``0.05 / sqrt(sigma)``; ``n_points`` overrides it.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    width = 1.0 / math.sqrt(sigma)
    half_width = float(math.ceil(WIDTHS * width))
    if n_points is None:
        n = 1 << max(2, math.ceil(math.log2(points_per_width)))
        while 2.0 * half_width / n > MAX_SPACING * width:
            n *= 2
        n_points = n
    return Grid(half_width, int(n_points))

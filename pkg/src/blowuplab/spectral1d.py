"""Periodic 1D spectral utilities.

Fields live on the uniform grid ``x_j = j L / n`` of ``[0, L)``.  All
operators act on the real FFT coefficients (``numpy.fft.rfft`` ordering,
wavenumber index ``k = 0 .. n/2``; physical wavenumber ``2 pi k / L``).

Conventions
-----------
* Hilbert transform: multiplier ``-i sgn(k)``, so ``H sin = -cos`` and
  ``H cos = sin``.
* Periodic Biot-Savart law::

      u(x) = (1/pi) int_0^L w(y) log|sin(mu (x - y))| dy,   mu = pi / L

  evaluated mode by mode from ``log|sin t| = -log 2 - sum_k cos(2kt)/k``;
  it satisfies ``u_x = H w``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "PeriodicGrid1D",
    "SpectralField1D",
    "check_finite",
    "hilbert_transform",
    "spectral_derivative",
    "periodic_bs_velocity",
    "dealias",
    "evaluate_at",
]


def check_finite(values: np.ndarray, name: str = "field") -> None:
    """Raise ``ValueError`` naming the first non-finite sample."""
    bad = ~np.isfinite(values)
    if bad.any():
        idx = int(np.flatnonzero(bad)[0])
        raise ValueError(f"{name} has non-finite value {values[idx]!r} at index {idx}")


@dataclass(frozen=True)
class PeriodicGrid1D:
    """Uniform periodic grid with ``n`` nodes on ``[0, L)``."""

    n: int
    L: float = 2.0 * np.pi

    def __post_init__(self):
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")

    @property
    def dx(self) -> float:
        return self.L / self.n

    @property
    def mu(self) -> float:
        return np.pi / self.L

    @cached_property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * (self.L / self.n)

    @cached_property
    def k(self) -> np.ndarray:
        """Integer mode indices 0 .. n/2 (rfft layout)."""
        return np.arange(self.n // 2 + 1)

    @cached_property
    def wavenumber(self) -> np.ndarray:
        return 2.0 * np.pi * self.k / self.L

    @cached_property
    def hilbert_multiplier(self) -> np.ndarray:
        m = np.full(self.k.shape, -1j)
        m[0] = 0.0
        m[-1] = 0.0  # Nyquist: sin(n x / 2) vanishes on the grid
        return m

    @cached_property
    def derivative_multiplier(self) -> np.ndarray:
        m = 1j * self.wavenumber
        m[-1] = 0.0
        return m

    @cached_property
    def bs_multiplier(self) -> np.ndarray:
        m = np.empty(self.k.shape)
        m[0] = -self.L * np.log(2.0) / np.pi
        m[1:] = -self.L / (2.0 * np.pi * self.k[1:])
        m[-1] = 0.0
        return m

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        return self.k <= self.n / 3.0

    # array-level kernels, used directly by the time steppers
    def rfft(self, values: np.ndarray) -> np.ndarray:
        return np.fft.rfft(values)

    def irfft(self, coeffs: np.ndarray) -> np.ndarray:
        return np.fft.irfft(coeffs, n=self.n)


@dataclass
class SpectralField1D:
    """Real periodic samples with lazily cached rfft coefficients."""

    grid: PeriodicGrid1D
    values: np.ndarray
    _coeffs: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise ValueError(
                f"values have shape {self.values.shape}, expected ({self.grid.n},)"
            )
        check_finite(self.values)

    @classmethod
    def from_function(cls, grid: PeriodicGrid1D, func) -> "SpectralField1D":
        return cls(grid, func(grid.x))

    @classmethod
    def from_coeffs(cls, grid: PeriodicGrid1D, coeffs: np.ndarray) -> "SpectralField1D":
        return cls(grid, grid.irfft(coeffs), coeffs)

    @property
    def coeffs(self) -> np.ndarray:
        if self._coeffs is None:
            self._coeffs = self.grid.rfft(self.values)
        return self._coeffs

    def __len__(self):
        return self.grid.n


def hilbert_transform(f: SpectralField1D) -> SpectralField1D:
    """Periodic Hilbert transform; the mean is annihilated."""
    return SpectralField1D.from_coeffs(f.grid, f.coeffs * f.grid.hilbert_multiplier)


def spectral_derivative(f: SpectralField1D) -> SpectralField1D:
    """``d/dx`` with the Nyquist mode zeroed."""
    return SpectralField1D.from_coeffs(f.grid, f.coeffs * f.grid.derivative_multiplier)


def periodic_bs_velocity(omega: SpectralField1D) -> SpectralField1D:
    """Velocity from the log-of-sine convolution law.

    The mean of ``omega`` contributes the constant ``-L log 2 / pi`` per unit
    mean; mode ``k`` is scaled by ``-L / (2 pi k)``.
    """
    return SpectralField1D.from_coeffs(omega.grid, omega.coeffs * omega.grid.bs_multiplier)


def dealias(f: SpectralField1D) -> SpectralField1D:
    """Two-thirds rule: zero every mode with ``k > n/3``."""
    return SpectralField1D.from_coeffs(f.grid, f.coeffs * f.grid.dealias_mask)


def evaluate_at(f: SpectralField1D | np.ndarray, x, grid: PeriodicGrid1D | None = None):
    """Trigonometric interpolant of ``f`` evaluated at arbitrary points ``x``.

    ``f`` may be a field or a raw rfft coefficient array (then ``grid`` is
    required).  Cost is ``O(n)`` per point.
    """
    if isinstance(f, SpectralField1D):
        grid, coeffs = f.grid, f.coeffs
    else:
        coeffs = f
    x = np.asarray(x, dtype=float)
    n = grid.n
    c = coeffs.copy() / n
    c[1:] *= 2.0
    c[-1] *= 0.5  # Nyquist counted once
    phase = np.exp(1j * np.multiply.outer(x, grid.wavenumber))
    return (phase @ c).real

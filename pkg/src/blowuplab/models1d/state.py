"""State containers shared by the 1D models."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from ..spectral1d import PeriodicGrid1D, SpectralField1D, check_finite


class ModelKind(str, enum.Enum):
    CLM = "clm"
    DEGREGORIO = "degregorio"
    HL = "hl"
    CKY = "cky"


@dataclass(frozen=True)
class IntervalGrid:
    """Uniform nodes ``x_j = j / (n - 1)`` on ``[0, 1]``, endpoints included."""

    n: int

    def __post_init__(self):
        if self.n < 64:
            raise ValueError(f"interval grids need n >= 64, got {self.n}")

    @property
    def dx(self) -> float:
        return 1.0 / (self.n - 1)

    @cached_property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n)


@dataclass
class IntervalField:
    grid: IntervalGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise ValueError(f"values have shape {self.values.shape}, expected ({self.grid.n},)")
        check_finite(self.values)

    @classmethod
    def from_function(cls, grid: IntervalGrid, func) -> "IntervalField":
        return cls(grid, func(grid.x))

    @property
    def n(self) -> int:
        return self.grid.n


Field1D = SpectralField1D | IntervalField


@dataclass
class Model1DState:
    """Time-dependent state of one of the 1D models.

    ``theta`` is present only for the HL and CKY models.
    """

    kind: ModelKind
    t: float
    omega: Field1D
    theta: Field1D | None = None
    symmetry_enforced: bool = False

    def __post_init__(self):
        self.kind = ModelKind(self.kind)
        needs_theta = self.kind in (ModelKind.HL, ModelKind.CKY)
        if needs_theta and self.theta is None:
            raise ValueError(f"{self.kind.value} state requires theta")
        if not needs_theta and self.theta is not None:
            raise ValueError(f"{self.kind.value} state carries no theta")
        if self.theta is not None and self.theta.grid != self.omega.grid:
            raise ValueError("omega and theta live on different grids")

    @property
    def grid(self):
        return self.omega.grid

    def with_values(self, t: float, omega: np.ndarray, theta: np.ndarray | None) -> "Model1DState":
        cls = type(self.omega)
        return replace(
            self,
            t=t,
            omega=cls(self.grid, omega),
            theta=None if theta is None else cls(self.grid, theta),
        )

    def parity_defect(self) -> tuple[float, float]:
        """Max-norm distance of (omega, theta) from the (odd, even) class."""
        if not isinstance(self.omega, SpectralField1D):
            raise TypeError("parity is defined for periodic fields only")
        w = self.omega.values
        wr = np.roll(w[::-1], 1)  # w(-x)
        dw = 0.5 * np.max(np.abs(w + wr))
        dth = 0.0
        if self.theta is not None:
            th = self.theta.values
            dth = 0.5 * np.max(np.abs(th - np.roll(th[::-1], 1)))
        return float(dw), float(dth)


@dataclass
class StepController:
    """Adaptive step control for the explicit RK4 driver."""

    dt: float = 1e-3
    dt_min: float = 1e-10
    dt_max: float = 1e-2
    cfl_target: float = 0.5
    stretch_target: float = 0.5
    blowup_cap: float = 1e6
    jump_limit: float = 0.5
    rejections: int = field(default=0, repr=False)

    def __post_init__(self):
        if not self.dt_min <= self.dt_max:
            raise ValueError("dt_min must not exceed dt_max")
        self.dt = min(max(self.dt, self.dt_min), self.dt_max)


def make_periodic_state(kind, grid: PeriodicGrid1D, omega, theta=None, t=0.0, symmetry=False):
    omega = SpectralField1D(grid, omega)
    theta = None if theta is None else SpectralField1D(grid, theta)
    return Model1DState(ModelKind(kind), t, omega, theta, symmetry)

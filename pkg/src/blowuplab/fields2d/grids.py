"""Grids and flow state for the 2D solvers."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from ..spectral1d import check_finite


def _pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


@dataclass(frozen=True)
class PolarGrid:
    """Cell-centred polar grid of the unit disk.

    ``r_i = (i + 1/2) / N_r`` never touches the centre; ``theta_j = 2 pi j / N_theta``.
    Arrays are indexed ``[i, j]`` (radius, angle).
    """

    nr: int
    ntheta: int

    def __post_init__(self):
        if self.nr < 32:
            raise ValueError(f"need N_r >= 32, got {self.nr}")
        if not _pow2(self.ntheta) or self.ntheta < 8:
            raise ValueError(f"N_theta must be a power of two >= 8, got {self.ntheta}")

    @property
    def shape(self):
        return (self.nr, self.ntheta)

    @property
    def dr(self) -> float:
        return 1.0 / self.nr

    @property
    def dtheta(self) -> float:
        return 2.0 * np.pi / self.ntheta

    @cached_property
    def r(self) -> np.ndarray:
        return (np.arange(self.nr) + 0.5) / self.nr

    @cached_property
    def theta(self) -> np.ndarray:
        return np.arange(self.ntheta) * self.dtheta

    @cached_property
    def rr(self) -> np.ndarray:
        return np.broadcast_to(self.r[:, None], self.shape)

    @cached_property
    def tt(self) -> np.ndarray:
        return np.broadcast_to(self.theta[None, :], self.shape)

    @cached_property
    def X(self) -> np.ndarray:
        return self.rr * np.cos(self.tt)

    @cached_property
    def Y(self) -> np.ndarray:
        return self.rr * np.sin(self.tt)

    @cached_property
    def area(self) -> np.ndarray:
        """Cell areas ``r dr dtheta``; they sum to pi exactly."""
        return np.broadcast_to((self.r * self.dr * self.dtheta)[:, None], self.shape)

    @cached_property
    def mirror_index(self) -> np.ndarray:
        # theta -> pi - theta maps x1 -> -x1
        return (self.ntheta // 2 - np.arange(self.ntheta)) % self.ntheta

    @property
    def min_spacing(self) -> float:
        return self.dr


@dataclass(frozen=True)
class StripGrid:
    """Periodic ``x`` in ``[0, Lx)`` times walls at ``y = 0, H``.

    ``x_j = j Lx / N_x``; ``y_i = (i + 1/2) H / N_y`` (cell centres).
    Arrays are indexed ``[i, j]`` (height, x).
    """

    nx: int
    ny: int
    H: float = np.pi
    Lx: float = 2.0 * np.pi

    def __post_init__(self):
        if not _pow2(self.nx) or self.nx < 8:
            raise ValueError(f"N_x must be a power of two >= 8, got {self.nx}")
        if self.ny < 32:
            raise ValueError(f"need N_y >= 32, got {self.ny}")
        if not (self.H > 0 and self.Lx > 0):
            raise ValueError("H and Lx must be positive")

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def dx(self) -> float:
        return self.Lx / self.nx

    @property
    def dy(self) -> float:
        return self.H / self.ny

    @cached_property
    def x(self) -> np.ndarray:
        return np.arange(self.nx) * self.dx

    @cached_property
    def y(self) -> np.ndarray:
        return (np.arange(self.ny) + 0.5) * self.dy

    @cached_property
    def X(self) -> np.ndarray:
        return np.broadcast_to(self.x[None, :], self.shape)

    @cached_property
    def Y(self) -> np.ndarray:
        return np.broadcast_to(self.y[:, None], self.shape)

    @cached_property
    def wavenumber(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.nx // 2 + 1) / self.Lx

    @cached_property
    def mirror_index(self) -> np.ndarray:
        return (-np.arange(self.nx)) % self.nx

    @property
    def area(self) -> float:
        return self.dx * self.dy

    @property
    def min_spacing(self) -> float:
        return min(self.dx, self.dy)


class FlowKind(str, enum.Enum):
    EULER_DISK = "euler_disk"
    BOUSSINESQ_STRIP = "boussinesq_strip"


@dataclass
class Velocity:
    """Cartesian components on the grid nodes (disk-centred frame for the disk)."""

    u1: np.ndarray
    u2: np.ndarray

    @property
    def speed(self) -> np.ndarray:
        return np.hypot(self.u1, self.u2)


@dataclass
class FlowState2D:
    kind: FlowKind
    grid: PolarGrid | StripGrid
    t: float
    omega: np.ndarray
    theta: np.ndarray | None = None
    symmetry_enforced: bool = False
    psi: np.ndarray | None = field(default=None, repr=False)
    u: Velocity | None = field(default=None, repr=False)
    u_prev: Velocity | None = field(default=None, repr=False)
    dt_prev: float = 0.0
    # range of the transported field (omega for Euler, theta for Boussinesq), fixed at t = 0
    transport_range: tuple[float, float] | None = None

    def __post_init__(self):
        self.kind = FlowKind(self.kind)
        want = PolarGrid if self.kind is FlowKind.EULER_DISK else StripGrid
        if not isinstance(self.grid, want):
            raise ValueError(f"{self.kind.value} needs a {want.__name__}")
        self.omega = np.asarray(self.omega, dtype=float)
        if self.omega.shape != self.grid.shape:
            raise ValueError(f"omega has shape {self.omega.shape}, expected {self.grid.shape}")
        check_finite(self.omega.ravel())
        if self.kind is FlowKind.BOUSSINESQ_STRIP:
            if self.theta is None:
                raise ValueError("Boussinesq state requires theta")
            self.theta = np.asarray(self.theta, dtype=float)
            if self.theta.shape != self.grid.shape:
                raise ValueError("theta shape mismatch")
            check_finite(self.theta.ravel())
        elif self.theta is not None:
            raise ValueError("Euler state carries no theta")

    def evolved(self, t, omega, theta=None, u_prev=None, dt_prev=0.0) -> "FlowState2D":
        return replace(self, t=t, omega=omega, theta=theta, psi=None, u=None, u_prev=u_prev, dt_prev=dt_prev)

    def odd_defect(self) -> float:
        """Max-norm distance of omega from the class odd in ``x1``."""
        m = self.grid.mirror_index
        return float(0.5 * np.max(np.abs(self.omega + self.omega[:, m])))


@dataclass
class FlowController:
    """Step control for the semi-Lagrangian solvers.

    ``dt <= cfl * spacing / max|u|`` with the spacing ``dr`` (disk) or
    ``min(dx, dy)`` (strip), capped at ``dt_max``.
    """

    dt_max: float = 0.05
    cfl: float = 1.0
    dt: float = 0.0

    def __post_init__(self):
        if not 0 < self.cfl <= 2.0:
            raise ValueError("cfl must lie in (0, 2]")
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")

"""Diagnostics around the hyperbolic boundary point at the bottom of the disk.

All points here are given in the boundary frame: origin at the lowest point
of the disk, so the disk is ``x1^2 + (x2 - 1)^2 <= 1`` and ``D+`` is its
half ``x1 >= 0``.  Grid fields stay in disk-centred coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate

from .grids import FlowState2D, PolarGrid
from .interp import interp_padded, pad_disk, disk_indices
from .transport import refresh


def to_frame(x, y):
    """Disk-centred coordinates to the boundary frame."""
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float) + 1.0


def from_frame(x1, x2):
    return np.asarray(x1, dtype=float), np.asarray(x2, dtype=float) - 1.0


def in_half_disk(x1, x2, tol=1e-12) -> bool:
    return bool(x1 >= -tol and x1 * x1 + (x2 - 1.0) ** 2 <= 1.0 + tol)


def sample(f: np.ndarray, grid: PolarGrid, x1, x2, padded=None):
    """Bicubic value of a grid field at frame points."""
    P = pad_disk(f, grid) if padded is None else padded
    rho, phi = disk_indices(grid, *from_frame(x1, x2))
    return interp_padded(P, rho, phi, grid.ntheta)


def velocity_at(state: FlowState2D, x1, x2):
    refresh(state)
    return sample(state.u.u1, state.grid, x1, x2), sample(state.u.u2, state.grid, x1, x2)


def gradient_max(f: np.ndarray, grid: PolarGrid) -> float:
    """``max |grad f|`` by centred differences (radial ghosts by reflection/extrapolation)."""
    P = pad_disk(f, grid)[:, 3:-3]
    f_r = (P[4:-2] - P[2:-4]) / (2.0 * grid.dr)
    f_t = (np.roll(f, -1, axis=1) - np.roll(f, 1, axis=1)) / (2.0 * grid.dtheta * grid.rr)
    return float(np.max(np.hypot(f_r, f_t)))


# ---------------------------------------------------------------- Omega


@dataclass(frozen=True)
class OmegaValue:
    value: float
    error: float


def _phi_limits(rho, x1, x2, quadrant):
    lo = np.arcsin(np.minimum(1.0, x2 / rho))
    if not quadrant:
        lo = np.maximum(lo, np.arcsin(np.minimum(1.0, rho / 2.0)))
    hi = np.arccos(np.minimum(1.0, x1 / rho))
    return lo, hi


def omega_functional(omega, x, grid: PolarGrid | None = None, *, domain: str = "half_disk",
                     rings: int = 48, gauss: int = 4, nphi: int = 64) -> OmegaValue:
    """``-(4/pi) int_Q(x) y1 y2 |y|^-4 omega(y) dy`` with an error bar.

    ``omega`` is a disk grid field (``grid`` required) or a callable of frame
    coordinates ``(y1, y2)``.  ``Q(x) = {y : y1 >= x1, y2 >= x2}`` intersected
    with ``D+`` (``domain="half_disk"``) or with the quadrant ``|y| <= 2``
    (``domain="quadrant"``).  In frame polar coordinates the integrand is
    ``sin(phi) cos(phi) omega`` against ``d phi d log(rho)``.

    Grid fields use Gauss rings, log-spaced in ``rho``; the innermost ring of
    width ``dr`` is left out and its contribution bounded in ``error``.
    Callables use adaptive quadrature and report its error estimate.
    """
    x1, x2 = float(x[0]), float(x[1])
    if domain not in ("half_disk", "quadrant"):
        raise ValueError(f"unknown domain {domain!r}")
    if not in_half_disk(x1, x2):
        raise ValueError(f"point ({x1:g}, {x2:g}) is outside D+")
    quadrant = domain == "quadrant"
    rho_x = float(np.hypot(x1, x2))
    rho_max = 2.0

    if callable(omega):
        def inner(u):
            rho = np.exp(u)
            lo, hi = _phi_limits(rho, x1, x2, quadrant)
            if hi <= lo:
                return 0.0
            g = lambda p: np.sin(p) * np.cos(p) * omega(rho * np.cos(p), rho * np.sin(p))
            return integrate.quad(g, lo, hi, epsabs=1e-12, epsrel=1e-10, limit=200)[0]

        lo_u = np.log(max(rho_x, 1e-12))
        val, err = integrate.quad(inner, lo_u, np.log(rho_max), epsabs=1e-11, epsrel=1e-10, limit=400)
        return OmegaValue(-4.0 / np.pi * val, 4.0 / np.pi * err)

    if grid is None:
        raise ValueError("a grid field needs its grid")
    omega = np.asarray(omega, dtype=float)
    h = grid.dr
    w_inf = float(np.max(np.abs(omega)))
    rho_a = rho_x
    rho_b = rho_a + h
    if rho_a > 0:
        err = 2.0 / np.pi * w_inf * np.log(rho_b / rho_a)
    else:
        # odd data vanish on x1 = 0, so |omega| <= |grad omega| y1 on the excluded disk
        err = 4.0 / (3.0 * np.pi) * gradient_max(omega, grid) * h
    edges = np.geomspace(rho_b, rho_max, rings + 1)
    gu, gw = np.polynomial.legendre.leggauss(gauss)
    pu, pw = np.polynomial.legendre.leggauss(nphi)
    lu = np.log(edges)
    half = 0.5 * np.diff(lu)
    u = (0.5 * (lu[:-1] + lu[1:]))[:, None] + half[:, None] * gu[None, :]
    wu = (half[:, None] * gw[None, :]).ravel()
    rho = np.exp(u.ravel())
    lo, hi = _phi_limits(rho, x1, x2, quadrant)
    span = np.maximum(hi - lo, 0.0)
    phi = lo[:, None] + 0.5 * span[:, None] * (pu[None, :] + 1.0)
    wphi = 0.5 * span[:, None] * pw[None, :]
    y1, y2 = rho[:, None] * np.cos(phi), rho[:, None] * np.sin(phi)
    vals = sample(omega, grid, y1, y2)
    # points of the quadrant outside the disk read as zero
    if quadrant:
        vals = np.where(y1**2 + (y2 - 1.0) ** 2 <= 1.0, vals, 0.0)
    inner = np.sum(wphi * np.sin(phi) * np.cos(phi) * vals, axis=1)
    return OmegaValue(float(-4.0 / np.pi * np.sum(wu * inner)), float(err))


# ---------------------------------------------------------------- sector probes


def _sectors(x1, x2, gamma):
    phi = np.arctan2(x2, x1)
    out = set()
    if 0.0 <= phi <= np.pi / 2 - gamma:
        out.add("D1")
    if gamma <= phi <= np.pi / 2:
        out.add("D2")
    return out


@dataclass(frozen=True)
class SectorProbe:
    """A frame point in ``D1^gamma`` (``u1`` law) or ``D2^gamma`` (``u2`` law)."""

    x: tuple[float, float]
    sector: str = "D1"
    gamma: float = np.pi / 6
    omega_value: float | None = None
    omega_error: float | None = None
    B1: float | None = None
    B2: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "x", (float(self.x[0]), float(self.x[1])))
        if not 0.0 < self.gamma < np.pi / 2:
            raise ValueError("gamma must lie in (0, pi/2)")
        if self.sector not in ("D1", "D2"):
            raise ValueError(f"sector must be D1 or D2, got {self.sector!r}")
        x1, x2 = self.x
        if not in_half_disk(x1, x2):
            raise ValueError(f"probe {self.x} is outside D+")
        if self.sector not in _sectors(x1, x2, self.gamma):
            raise ValueError(f"probe {self.x} is not in {self.sector} for gamma={self.gamma:g}")


def velocity_decomposition_residual(state: FlowState2D, probe: SectorProbe, delta: float = 0.2) -> SectorProbe:
    """Fill ``B1 = u1/x1 + Omega`` (D1) or ``B2 = u2/x2 - Omega`` (D2) at the probe."""
    x1, x2 = probe.x
    if np.hypot(x1, x2) > delta:
        raise ValueError(f"probe {probe.x} is farther than delta={delta:g} from the origin")
    if probe.sector == "D1" and x1 == 0.0:
        raise ValueError("x1 = 0: B1 undefined, use the D2 component")
    if probe.sector == "D2" and x2 == 0.0:
        raise ValueError("x2 = 0: B2 undefined, use the D1 component")
    om = omega_functional(state.omega, probe.x, state.grid)
    u1, u2 = velocity_at(state, x1, x2)
    if probe.sector == "D1":
        return replace(probe, omega_value=om.value, omega_error=om.error, B1=float(u1 / x1 + om.value))
    return replace(probe, omega_value=om.value, omega_error=om.error, B2=float(u2 / x2 - om.value))


# ---------------------------------------------------------------- Biot-Savart oracle


def direct_bs_quadrature(omega: np.ndarray, grid: PolarGrid, x1, x2):
    """Velocity at frame points by direct quadrature of the Dirichlet Green's function.

    ``G(x, y) = -(1/2pi) [log|x - y| - log(|y| |x - y*|)]`` with ``y* = y/|y|^2``
    (disk-centred).  For odd data this equals the half-disk kernel with the
    reflected images.  The free-space part is desingularized by subtracting
    ``omega(x)``, whose exact contribution is solid-body rotation.
    """
    X, Y = grid.X.ravel(), grid.Y.ravel()
    w = omega.ravel()
    A = np.asarray(grid.area).ravel()
    x, y = from_frame(np.atleast_1d(x1), np.atleast_1d(x2))
    if np.any(x * x + y * y >= 1.0):
        raise ValueError("points must lie in the open disk")
    wx = sample(omega, grid, *to_frame(x, y))
    r2 = X * X + Y * Y
    sx, sy = X / r2, Y / r2
    u1 = np.empty(x.shape)
    u2 = np.empty(x.shape)
    for k in range(x.size):
        dx, dy = x[k] - X, y[k] - Y
        d2 = dx * dx + dy * dy
        ex, ey = x[k] - sx, y[k] - sy
        e2 = ex * ex + ey * ey
        # grad_x G = -(1/2pi) [(x - y)/|x - y|^2 - (x - y*)/|x - y*|^2]
        gx = -(np.sum((w - wx[k]) * A * dx / d2) - np.sum(w * A * ex / e2)) / (2 * np.pi)
        gy = -(np.sum((w - wx[k]) * A * dy / d2) - np.sum(w * A * ey / e2)) / (2 * np.pi)
        # exact free-space part of the constant omega(x): grad = -omega x / 2
        gx += -0.5 * wx[k] * x[k]
        gy += -0.5 * wx[k] * y[k]
        u1[k], u2[k] = gy, -gx
    return u1, u2


# ---------------------------------------------------------------- front / back tracking


class FrontUnderResolved(RuntimeError):
    pass


def slice_extrema(state: FlowState2D, x1: float, samples: int = 33):
    """``(max, min)`` of ``u1`` over ``{(x1, x2) in D+ : x2 <= x1}``."""
    refresh(state)
    bottom = 1.0 - np.sqrt(max(0.0, 1.0 - x1 * x1))
    x2 = np.linspace(bottom, max(bottom, x1), samples)
    u1 = sample(state.u.u1, state.grid, np.full_like(x2, x1), x2)
    return float(u1.max()), float(u1.min())


@dataclass
class FrontBackState:
    """Front ``a(t)`` moving with the slice max of ``u1``, back ``b(t)`` with the slice min."""

    a: float
    b: float
    t: float = 0.0
    status: str = "tracking"
    history: list = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 < self.a <= self.b:
            raise ValueError("need 0 < a <= b")


def front_back_track(state: FlowState2D, fb: FrontBackState, dt: float, min_cells: float = 2.0) -> FrontBackState:
    """Advance ``a' = max u1(a, .)`` and ``b' = min u1(b, .)`` by one Heun step in the field of ``state``."""
    if fb.status != "tracking":
        return fb
    ua, _ = slice_extrema(state, fb.a)
    _, ub = slice_extrema(state, fb.b)
    if not fb.history:
        fb.history.append((fb.t, fb.a, fb.b, ua, ub))
    a1, b1 = fb.a + dt * ua, fb.b + dt * ub
    if a1 <= 0 or b1 <= 0:
        fb.status = "front under-resolved"
        return fb
    ua1, _ = slice_extrema(state, a1)
    _, ub1 = slice_extrema(state, b1)
    fb.a = fb.a + 0.5 * dt * (ua + ua1)
    fb.b = fb.b + 0.5 * dt * (ub + ub1)
    fb.t += dt
    if fb.a < min_cells * state.grid.dr:
        fb.status = "front under-resolved"
        return fb
    fb.history.append((fb.t, fb.a, fb.b, ua1, ub1))
    return fb


# ---------------------------------------------------------------- monitors


def velocity_gradient_max(state: FlowState2D) -> float:
    """``max |grad u|`` (Frobenius) by centred differences."""
    refresh(state)
    g = state.grid
    out = np.zeros(g.shape)
    for comp in (state.u.u1, state.u.u2):
        P = pad_disk(comp, g)[:, 3:-3]
        f_r = (P[4:-2] - P[2:-4]) / (2.0 * g.dr)
        f_t = (np.roll(comp, -1, axis=1) - np.roll(comp, 1, axis=1)) / (2.0 * g.dtheta * g.rr)
        out += f_r**2 + f_t**2
    return float(np.sqrt(out.max()))


def holder_norm(f: np.ndarray, grid: PolarGrid, alpha: float = 0.5) -> float:
    """``||f||_inf + [f]_alpha`` with the seminorm taken over neighbouring nodes."""
    rad = np.abs(np.diff(f, axis=0)) / grid.dr**alpha
    ang_len = grid.r[:, None] * 2.0 * np.sin(0.5 * grid.dtheta)
    ang = np.abs(np.roll(f, -1, axis=1) - f) / ang_len**alpha
    return float(np.max(np.abs(f)) + max(rad.max(), ang.max()))


def kato_ratio(state: FlowState2D, alpha: float = 0.5) -> float:
    """``||grad u||_inf / (||omega||_inf (1 + log(||omega||_C^alpha / ||omega||_inf)))``."""
    w_inf = float(np.max(np.abs(state.omega)))
    if w_inf == 0:
        return 0.0
    return velocity_gradient_max(state) / (w_inf * (1.0 + np.log(holder_norm(state.omega, state.grid, alpha) / w_inf)))


def diagonal_ratio(state: FlowState2D, s) -> np.ndarray:
    """``-u1/u2`` at the diagonal frame points ``(s, s)``."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    u1, u2 = velocity_at(state, s, s)
    return -u1 / u2


def ks_initial_vorticity(grid: PolarGrid, eps_s: float = 0.05) -> np.ndarray:
    """``omega0 = -tanh(x1 / eps_s)``: odd in ``x1``, ``-1 <= omega0 < 0`` on ``D+``."""
    if not eps_s > 0:
        raise ValueError("eps_s must be positive")
    return -np.tanh(grid.X / eps_s)

"""Poisson solvers (angular/periodic transform plus per-mode tridiagonal) and velocities."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .grids import PolarGrid, StripGrid, Velocity


class PoissonResidualError(RuntimeError):
    pass


def _thomas(lower, diag, upper, rhs):
    """Batched tridiagonal solve along axis 0; coefficient arrays are ``(n, m)``."""
    n = diag.shape[0]
    cp = np.empty_like(diag)
    dp = np.empty_like(rhs)
    cp[0] = upper[0] / diag[0]
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        den = diag[i] - lower[i] * cp[i - 1]
        cp[i] = upper[i] / den
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / den
    x = np.empty_like(rhs)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def _apply(lower, diag, upper, x):
    y = diag * x
    y[1:] += lower[1:] * x[:-1]
    y[:-1] += upper[:-1] * x[1:]
    return y


@lru_cache(maxsize=8)
def _disk_operator(nr: int, ntheta: int):
    """Flux-form ``-(1/r)(r psi_r)_r + m^2/r^2 psi`` per angular mode.

    The inner face sits at ``r = 0`` and carries no flux; the outer ghost
    ``psi_N = psi_{N-2}/3 - 2 psi_{N-1}`` puts ``psi = 0`` at ``r = 1`` and is
    exact for quadratics.
    """
    dr = 1.0 / nr
    r = (np.arange(nr) + 0.5) * dr
    rm = r - 0.5 * dr
    rp = r + 0.5 * dr
    A = rm / (r * dr * dr)
    C = rp / (r * dr * dr)
    m = np.arange(ntheta // 2 + 1)
    diag = (A + C)[:, None] + (m[None, :] ** 2) / (r[:, None] ** 2)
    lower = np.broadcast_to(-A[:, None], diag.shape).copy()
    upper = np.broadcast_to(-C[:, None], diag.shape).copy()
    diag[-1] += 2.0 * C[-1]
    lower[-1] -= C[-1] / 3.0
    upper[-1] = 0.0
    lower[0] = 0.0
    return lower, diag, upper


@lru_cache(maxsize=8)
def _strip_operator(nx: int, ny: int, H: float, Lx: float):
    dy = H / ny
    k = 2.0 * np.pi * np.arange(nx // 2 + 1) / Lx
    diag = np.full((ny, k.size), 2.0 / dy**2) + k[None, :] ** 2
    lower = np.full_like(diag, -1.0 / dy**2)
    upper = np.full_like(diag, -1.0 / dy**2)
    # wall ghosts psi_{-1} = psi_1/3 - 2 psi_0 (and mirrored at the top)
    diag[0] += 2.0 / dy**2
    upper[0] -= 1.0 / (3.0 * dy**2)
    diag[-1] += 2.0 / dy**2
    lower[-1] -= 1.0 / (3.0 * dy**2)
    lower[0] = 0.0
    upper[-1] = 0.0
    return lower, diag, upper


def _solve(op, omega_hat, norm_omega):
    lower, diag, upper = op
    psi_hat = _thomas(lower, diag, upper, omega_hat)
    res = _apply(lower, diag, upper, psi_hat) - omega_hat
    # Parseval: the column sum of |.|^2 bounds the physical-space residual
    scale = np.sqrt(np.sum(np.abs(omega_hat) ** 2)) + 1e-300
    if np.sqrt(np.sum(np.abs(res) ** 2)) > 1e-8 * scale and norm_omega > 0:
        raise PoissonResidualError("Poisson residual exceeds 1e-8 relative")
    return psi_hat


def poisson_disk(omega: np.ndarray, grid: PolarGrid) -> np.ndarray:
    """``-Lap psi = omega`` in the unit disk with ``psi = 0`` on ``r = 1``."""
    omega = np.asarray(omega, dtype=float)
    w_hat = np.fft.rfft(omega, axis=1)
    psi_hat = _solve(_disk_operator(grid.nr, grid.ntheta), w_hat, np.max(np.abs(omega)))
    return np.fft.irfft(psi_hat, n=grid.ntheta, axis=1)


def poisson_strip(omega: np.ndarray, grid: StripGrid) -> np.ndarray:
    """``-Lap psi = omega`` on the periodic strip with ``psi = 0`` on both walls."""
    omega = np.asarray(omega, dtype=float)
    w_hat = np.fft.rfft(omega, axis=1)
    psi_hat = _solve(_strip_operator(grid.nx, grid.ny, grid.H, grid.Lx), w_hat, np.max(np.abs(omega)))
    return np.fft.irfft(psi_hat, n=grid.nx, axis=1)


def _dirichlet_ghosts(psi):
    # quadratic through psi_{N-2}, psi_{N-1} and the wall value 0 half a cell out
    return psi[-2] / 3.0 - 2.0 * psi[-1]


def polar_stream_derivatives(psi: np.ndarray, grid: PolarGrid):
    """``(psi_r, psi_theta)`` on the nodes: centred radial differences, spectral in angle."""
    p_hat = np.fft.rfft(psi, axis=1)
    m = np.arange(grid.ntheta // 2 + 1)
    p_theta = np.fft.irfft(1j * m * p_hat * (m < grid.ntheta // 2), n=grid.ntheta, axis=1)
    inner = np.roll(psi[0], -(grid.ntheta // 2))  # psi(-r0, theta) = psi(r0, theta + pi)
    outer = _dirichlet_ghosts(psi)
    ext = np.concatenate([inner[None], psi, outer[None]])
    p_r = (ext[2:] - ext[:-2]) / (2.0 * grid.dr)
    return p_r, p_theta


def velocity_from_stream(psi: np.ndarray, grid) -> Velocity:
    """``u = grad-perp psi = (psi_{x2}, -psi_{x1})`` in Cartesian components.

    On the disk ``u_r = psi_theta / r`` and ``u_theta = -psi_r``.
    """
    if isinstance(grid, PolarGrid):
        p_r, p_theta = polar_stream_derivatives(psi, grid)
        ur = p_theta / grid.rr
        ut = -p_r
        c, s = np.cos(grid.tt), np.sin(grid.tt)
        return Velocity(ur * c - ut * s, ur * s + ut * c)
    if isinstance(grid, StripGrid):
        k = grid.wavenumber
        p_x = np.fft.irfft(1j * k * (np.arange(k.size) < grid.nx // 2) * np.fft.rfft(psi, axis=1), n=grid.nx, axis=1)
        lo = psi[1] / 3.0 - 2.0 * psi[0]
        hi = _dirichlet_ghosts(psi)
        ext = np.concatenate([lo[None], psi, hi[None]])
        p_y = (ext[2:] - ext[:-2]) / (2.0 * grid.dy)
        return Velocity(p_y, -p_x)
    raise TypeError(f"unsupported grid {type(grid).__name__}")


def _wall_value(inner2, inner1, ghost):
    # quadratic through nodes at -3/2, -1/2, +1/2 cells from the wall, evaluated on it
    return -0.125 * inner2 + 0.75 * inner1 + 0.375 * ghost


def boundary_normal_velocity(psi: np.ndarray, grid) -> float:
    """Max normal velocity on the walls of the discrete solution.

    The normal velocity is the tangential derivative of the wall value of
    ``psi``, reconstructed from the last two rows and the solver ghost.
    """
    if isinstance(grid, PolarGrid):
        wall = _wall_value(psi[-2], psi[-1], _dirichlet_ghosts(psi))
        m = np.arange(grid.ntheta // 2 + 1)
        d = np.fft.irfft(1j * m * np.fft.rfft(wall), n=grid.ntheta)
        return float(np.max(np.abs(d)))
    k = grid.wavenumber
    out = 0.0
    for a, b in ((psi[1], psi[0]), (psi[-2], psi[-1])):
        wall = _wall_value(a, b, a / 3.0 - 2.0 * b)
        out = max(out, float(np.max(np.abs(np.fft.irfft(1j * k * np.fft.rfft(wall), n=grid.nx)))))
    return out


def kinetic_energy(omega: np.ndarray, psi: np.ndarray, grid) -> float:
    """``int |u|^2 = int psi omega`` (``psi`` vanishes on the walls)."""
    return float(np.sum(psi * omega * grid.area))

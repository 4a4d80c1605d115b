"""Semi-Lagrangian transport and the Euler / Boussinesq time steps."""

from __future__ import annotations

import numpy as np

from .grids import FlowController, FlowState2D, PolarGrid, StripGrid, Velocity
from .interp import interp_padded, interpolant_range, pad_disk, pad_strip, disk_indices, strip_indices
from .poisson import poisson_disk, poisson_strip, velocity_from_stream


class CFLViolation(ValueError):
    pass


def _pad(f, grid):
    return pad_disk(f, grid) if isinstance(grid, PolarGrid) else pad_strip(f)


def _eval(P, grid, x, y, order=3):
    if isinstance(grid, PolarGrid):
        rho, phi = disk_indices(grid, x, y)
        return interp_padded(P, rho, phi, grid.ntheta, order=order)
    rho, phi = strip_indices(grid, x, y)
    return interp_padded(P, rho, phi, grid.nx, order=order)


def cfl_number(u: Velocity, dt: float, grid) -> float:
    return float(dt * np.max(u.speed) / grid.min_spacing)


def departure_points(u: Velocity, dt: float, grid):
    """RK2 (midpoint) backtracking of every node over ``dt`` in the field ``u``.

    Points leaving the domain are projected back onto the wall.
    """
    P1, P2 = _pad(u.u1, grid), _pad(u.u2, grid)
    x, y = grid.X, grid.Y
    xm = x - 0.5 * dt * u.u1
    ym = y - 0.5 * dt * u.u2
    xd = x - dt * _eval(P1, grid, xm, ym)
    yd = y - dt * _eval(P2, grid, xm, ym)
    if isinstance(grid, PolarGrid):
        r = np.hypot(xd, yd)
        out = r > 1.0
        xd = np.where(out, xd / np.where(out, r, 1.0), xd)
        yd = np.where(out, yd / np.where(out, r, 1.0), yd)
    else:
        yd = np.clip(yd, 0.0, grid.H)
    return xd, yd


def semi_lagrangian_advect(f: np.ndarray, u: Velocity, dt: float, grid, departure=None, order=5,
                           bounds: tuple[float, float] | None = None) -> np.ndarray:
    """Transport ``f`` by ``u`` over ``dt``: Lagrange value (quintic by default) at
    the departure points, clipped to ``bounds`` (default: the range of the
    interpolant of ``f``).

    Pure transport conserves the range, so long runs should pass the range of
    the initial field: recomputing it every step lets interpolation overshoot
    in steep layers ratchet it outward.

    ``dt max|u| / spacing`` must not exceed 2 (spacing ``dr`` on the disk,
    ``min(dx, dy)`` on the strip).
    """
    c = cfl_number(u, dt, grid)
    if c > 2.0 + 1e-12:
        raise CFLViolation(f"CFL number {c:.3g} exceeds 2")
    xd, yd = departure if departure is not None else departure_points(u, dt, grid)
    # clipping to the node range would ratchet down peaks lying between nodes
    lo, hi = interpolant_range(f, grid, order=order) if bounds is None else bounds
    return np.clip(_eval(_pad(f, grid), grid, xd, yd, order), lo, hi)


def _refresh(state: FlowState2D) -> FlowState2D:
    if state.transport_range is None:
        f = state.omega if state.theta is None else state.theta
        state.transport_range = interpolant_range(f, state.grid)
    if state.psi is None:
        solve = poisson_disk if state.kind.value == "euler_disk" else poisson_strip
        state.psi = solve(state.omega, state.grid)
        state.u = velocity_from_stream(state.psi, state.grid)
    return state


def _midpoint_velocity(state: FlowState2D, dt: float) -> Velocity:
    # second-order extrapolation u^{n+1/2} = u^n + dt/(2 dt_prev) (u^n - u^{n-1})
    u = state.u
    if state.u_prev is None or state.dt_prev <= 0:
        return u
    a = 0.5 * dt / state.dt_prev
    return Velocity(u.u1 + a * (u.u1 - state.u_prev.u1), u.u2 + a * (u.u2 - state.u_prev.u2))


def _choose_dt(state, controller: FlowController):
    umax = float(np.max(state.u.speed))
    dt = controller.dt_max
    if umax > 0:
        dt = min(dt, controller.cfl * state.grid.min_spacing / umax)
    return dt


def _odd_project(f, grid):
    return 0.5 * (f - f[:, grid.mirror_index])


def _even_project(f, grid):
    return 0.5 * (f + f[:, grid.mirror_index])


def euler_disk_step(state: FlowState2D, controller: FlowController, t_end: float | None = None) -> FlowState2D:
    """psi <- Poisson(omega), u <- grad-perp psi, omega <- transport(omega, u, dt)."""
    _refresh(state)
    dt = _choose_dt(state, controller)
    if t_end is not None:
        dt = min(dt, t_end - state.t)
    # the extrapolated velocity may exceed u^n slightly; keep the CFL bound
    uh = _midpoint_velocity(state, dt)
    w = semi_lagrangian_advect(state.omega, uh, dt, state.grid, bounds=state.transport_range)
    if state.symmetry_enforced:
        w = _odd_project(w, state.grid)
    controller.dt = dt
    new = state.evolved(state.t + dt, w, None, u_prev=state.u, dt_prev=dt)
    return _refresh(new)


def boussinesq_strip_step(state: FlowState2D, controller: FlowController, t_end: float | None = None) -> FlowState2D:
    """Transport omega and theta, then add the buoyancy forcing along the trajectory.

    ``omega^{n+1}(x) = omega^n(x_d) + dt/2 [theta_x^n(x_d) + theta_x^{n+1}(x)]``,
    the trapezoidal rule for the source along the characteristic, so the
    forcing is centred at the half step.
    """
    _refresh(state)
    g: StripGrid = state.grid
    dt = _choose_dt(state, controller)
    if t_end is not None:
        dt = min(dt, t_end - state.t)
    uh = _midpoint_velocity(state, dt)
    dep = departure_points(uh, dt, g)
    th_new = semi_lagrangian_advect(state.theta, uh, dt, g, dep, bounds=state.transport_range)
    w_adv = semi_lagrangian_advect(state.omega, uh, dt, g, dep)
    k = g.wavenumber * (np.arange(g.wavenumber.size) < g.nx // 2)
    tx_old = np.fft.irfft(1j * k * np.fft.rfft(state.theta, axis=1), n=g.nx, axis=1)
    tx_new = np.fft.irfft(1j * k * np.fft.rfft(th_new, axis=1), n=g.nx, axis=1)
    tx_dep = _eval(pad_strip(tx_old), g, *dep, order=5)
    w = w_adv + 0.5 * dt * (tx_dep + tx_new)
    if state.symmetry_enforced:
        w = _odd_project(w, g)
        th_new = _even_project(th_new, g)
    controller.dt = dt
    new = state.evolved(state.t + dt, w, th_new, u_prev=state.u, dt_prev=dt)
    return _refresh(new)


def refresh(state: FlowState2D) -> FlowState2D:
    """Fill the stream-function and velocity caches."""
    return _refresh(state)

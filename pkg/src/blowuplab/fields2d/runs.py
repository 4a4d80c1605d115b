"""Reference runs of the 2D solvers, emitting one diagnostics row per accepted step."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..diagnostics import RunReport
from .grids import FlowController, FlowState2D, PolarGrid, StripGrid
from .hyperbolic import (
    FrontBackState,
    SectorProbe,
    diagonal_ratio,
    front_back_track,
    gradient_max,
    kato_ratio,
    velocity_decomposition_residual,
)
from .interp import interpolant_max_abs, pad_strip
from .poisson import kinetic_energy
from .transport import boussinesq_strip_step, euler_disk_step, refresh


def norms(f: np.ndarray, grid) -> tuple[float, float]:
    """``(||f||_1, ||f||_2)`` with the cell areas of ``grid``."""
    a = grid.area
    return float(np.sum(np.abs(f) * a)), float(np.sqrt(np.sum(f * f * a)))


@dataclass
class KSTracking:
    """Front/back tracking, sector probes and diagonal samples for the boundary scenario."""

    a0: float = 0.15
    b0: float = 0.3
    probes: list[SectorProbe] = field(default_factory=lambda: default_probes())
    diagonal: tuple[float, ...] = (0.01, 0.02, 0.04)
    delta: float = 0.2


def default_probes(gamma: float = np.pi / 6, radii: tuple[float, ...] = (0.004, 0.005)) -> list[SectorProbe]:
    """One probe per sector and radius, on the rays ``phi = pi/12`` and ``5 pi/12``.

    The default radii sit just outside the first radial cell at 256 rings,
    inside the tanh layer, where the growth of ``Omega`` is visible.
    """
    out = []
    for rho in radii:
        for phi, sec in ((np.pi / 12, "D1"), (5 * np.pi / 12, "D2")):
            out.append(SectorProbe((rho * np.cos(phi), rho * np.sin(phi)), sec, gamma))
    return out


def run_euler(state: FlowState2D, t_end: float, controller: FlowController, sink,
              ks: KSTracking | None = None, kato_alpha: float = 0.5, observer=None) -> RunReport:
    """Euler disk run; ``sink(columns)`` first, then ``sink(row)`` at ``t = 0`` and after every step.

    Base columns: ``t, dt, omega_inf`` (interpolant max), ``omega_l1``,
    ``omega_l2``, ``grad_omega_inf``, ``energy``, ``kato``.  With ``ks`` the
    front ``a``, back ``b``, per-probe ``Omega``, its error bar and ``B1`` or
    ``B2``, and the diagonal ratios ``-u1/u2`` follow.  Once the front comes
    within two cells of the origin its columns read NaN.  ``observer(state)``,
    if given, sees every emitted state.
    """
    g = state.grid
    refresh(state)
    cols = ["t", "dt", "omega_inf", "omega_l1", "omega_l2", "grad_omega_inf", "energy", "kato"]
    fb = None
    if ks is not None:
        fb = FrontBackState(ks.a0, ks.b0)
        cols += ["a", "b"]
        for i, p in enumerate(ks.probes):
            cols += [f"Omega_{i}", f"Omega_err_{i}", f"B{1 if p.sector == 'D1' else 2}_{i}"]
        cols += [f"diag_{i}" for i in range(len(ks.diagonal))]
    sink(cols)

    def row(st, dt):
        if observer is not None:
            observer(st)
        l1, l2 = norms(st.omega, g)
        r = [st.t, dt, interpolant_max_abs(st.omega, g), l1, l2, gradient_max(st.omega, g),
             kinetic_energy(st.omega, st.psi, g), kato_ratio(st, kato_alpha)]
        if ks is not None:
            live = fb.status == "tracking"
            r += [fb.a, fb.b] if live else [np.nan, np.nan]
            for p in ks.probes:
                q = velocity_decomposition_residual(st, p, ks.delta)
                r += [q.omega_value, q.omega_error, q.B1 if q.B1 is not None else q.B2]
            r += list(diagonal_ratio(st, ks.diagonal))
        return r

    sink(row(state, 0.0))
    steps = 0
    while state.t < t_end * (1 - 1e-14):
        new = euler_disk_step(state, controller, t_end)
        if fb is not None:
            front_back_track(state, fb, new.t - state.t)
        state = new
        steps += 1
        sink(row(state, controller.dt))
    extras = {"final_state": state}
    if fb is not None:
        extras["front"] = fb
    return RunReport("completed", "reached t_end", state.t, steps, extras)


def strip_gradient(f: np.ndarray, grid: StripGrid):
    """``(f_x, f_y)``: spectral in ``x``, centred differences in ``y`` with extrapolated wall ghosts."""
    k = grid.wavenumber * (np.arange(grid.wavenumber.size) < grid.nx // 2)
    fx = np.fft.irfft(1j * k * np.fft.rfft(f, axis=1), n=grid.nx, axis=1)
    P = pad_strip(f)[:, 3:-3]
    fy = (P[4:-2] - P[2:-4]) / (2.0 * grid.dy)
    return fx, fy


def boussinesq_initial_data(grid: StripGrid, amplitude: float = 1.0, height: float = 1.0):
    """``theta0 = A cos(x) exp(-(y/height)^2)``, ``omega0 = 0``.

    ``theta0`` is even in ``x`` and increases toward ``x = 0`` from both sides
    along the wall, so the forcing ``theta_x`` drives two jets into ``x = 0``.
    """
    theta = amplitude * np.cos(grid.X) * np.exp(-((grid.Y / height) ** 2))
    return np.zeros(grid.shape), theta


def run_boussinesq(state: FlowState2D, t_end: float, controller: FlowController, sink,
                   theta_x_cap: float = 1e6, observer=None) -> RunReport:
    """Boussinesq strip run.  Columns: ``t, dt, omega_inf, grad_omega_inf,
    theta_inf, theta_x_inf, energy, odd_defect``.  Exceeding ``theta_x_cap``
    ends the run with "blow-up suspected".  ``observer(state)``, if given,
    sees every emitted state.
    """
    g = state.grid
    refresh(state)
    sink(["t", "dt", "omega_inf", "grad_omega_inf", "theta_inf", "theta_x_inf", "energy", "odd_defect"])

    def row(st, dt):
        if observer is not None:
            observer(st)
        wx, wy = strip_gradient(st.omega, g)
        tx, _ = strip_gradient(st.theta, g)
        return [st.t, dt, float(np.max(np.abs(st.omega))), float(np.max(np.hypot(wx, wy))),
                float(np.max(np.abs(st.theta))), float(np.max(np.abs(tx))),
                kinetic_energy(st.omega, st.psi, g), st.odd_defect()]

    sink(r := row(state, 0.0))
    steps = 0
    while state.t < t_end * (1 - 1e-14):
        state = boussinesq_strip_step(state, controller, t_end)
        steps += 1
        sink(r := row(state, controller.dt))
        if r[5] > theta_x_cap:
            return RunReport("blow-up suspected", f"max|theta_x| exceeded {theta_x_cap:g}", state.t, steps,
                             {"final_state": state})
    return RunReport("completed", "reached t_end", state.t, steps, {"final_state": state})

"""Classical RK4 with CFL/stretching step control and blow-up detection."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .state import Model1DState, StepController

logger = logging.getLogger(__name__)


class BlowupSuspected(RuntimeError):
    """Raised when the step collapses below ``dt_min`` or ``max|w|`` passes the cap."""

    def __init__(self, reason: str, state: Model1DState):
        super().__init__(reason)
        self.reason = reason
        self.state = state


def _project_symmetry(state, w, theta):
    # odd w and even theta about 0: imaginary / real rfft coefficients
    if not state.symmetry_enforced:
        return w, theta
    n = w.size
    w = np.fft.irfft(1j * np.fft.rfft(w).imag, n=n)
    if theta is not None:
        theta = np.fft.irfft(np.fft.rfft(theta).real, n=n)
    return w, theta


def _rk4(rhs, w, th, dt):
    k1w, k1t = rhs(w, th)
    if th is None:
        k2w, _ = rhs(w + 0.5 * dt * k1w, None)
        k3w, _ = rhs(w + 0.5 * dt * k2w, None)
        k4w, _ = rhs(w + dt * k3w, None)
        return w + dt / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w), None
    k2w, k2t = rhs(w + 0.5 * dt * k1w, th + 0.5 * dt * k1t)
    k3w, k3t = rhs(w + 0.5 * dt * k2w, th + 0.5 * dt * k2t)
    k4w, k4t = rhs(w + dt * k3w, th + dt * k3t)
    return (
        w + dt / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w),
        th + dt / 6.0 * (k1t + 2 * k2t + 2 * k3t + k4t),
    )


def admissible_dt(state: Model1DState, rhs, controller: StepController) -> float:
    th = None if state.theta is None else state.theta.values
    umax, stretch = rhs.speeds(state.omega.values, th)
    dt = controller.dt_max
    if umax > 0:
        dt = min(dt, controller.cfl_target * rhs.dx / umax)
    if stretch > 0:
        dt = min(dt, controller.stretch_target / stretch)
    return dt


def step_rk4(state: Model1DState, rhs, controller: StepController, t_end: float | None = None):
    """Advance ``state`` by one accepted RK4 step.

    The step is the largest ``dt <= dt_max`` satisfying the CFL and stretching
    limits; it is halved while the step is non-finite or ``max|w|`` jumps by
    more than ``jump_limit``.  ``controller.dt`` holds the accepted size.
    """
    dt = admissible_dt(state, rhs, controller)
    # a final step clipped to t_end may be tiny; only halving can collapse dt
    clipped = t_end is not None and t_end - state.t <= dt
    if clipped:
        dt = t_end - state.t
    w = state.omega.values
    th = None if state.theta is None else state.theta.values
    wmax = np.max(np.abs(w))
    while True:
        if dt < controller.dt_min and not clipped:
            raise BlowupSuspected(f"time step collapsed below dt_min={controller.dt_min:g}", state)
        wn, thn = _rk4(rhs, w, th, dt)
        finite = np.all(np.isfinite(wn)) and (thn is None or np.all(np.isfinite(thn)))
        if finite and np.max(np.abs(wn)) <= (1.0 + controller.jump_limit) * max(wmax, 1e-300):
            break
        if finite and wmax == 0.0:
            break
        controller.rejections += 1
        dt *= 0.5
        clipped = False
    wn, thn = _project_symmetry(state, wn, thn)
    controller.dt = dt
    new = state.with_values(t_end if clipped else state.t + dt, wn, thn)
    if np.max(np.abs(wn)) > controller.blowup_cap:
        raise BlowupSuspected(f"max|omega| exceeded cap {controller.blowup_cap:g}", new)
    return new


@dataclass
class RunResult:
    state: Model1DState
    verdict: str
    reason: str = ""
    steps: int = 0


def integrate(state, rhs, controller, t_end, callback=None, max_steps=10_000_000):
    """Step until ``t_end`` or a blow-up verdict.

    ``callback(old_state, new_state, dt)`` runs after every accepted step and
    may raise to abort.
    """
    steps = 0
    try:
        while state.t < t_end - 1e-14 * max(1.0, abs(t_end)) and steps < max_steps:
            new = step_rk4(state, rhs, controller, t_end)
            steps += 1
            if callback is not None:
                callback(state, new, controller.dt)
            state = new
    except BlowupSuspected as exc:
        logger.info("blow-up suspected at t=%.6g: %s", exc.state.t, exc.reason)
        return RunResult(exc.state, "blow-up suspected", exc.reason, steps)
    return RunResult(state, "completed", "", steps)

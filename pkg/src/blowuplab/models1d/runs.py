"""Reference runs of the 1D models, emitting one diagnostics row per accepted step."""

from __future__ import annotations

import numpy as np

from ..diagnostics import RunReport
from ..spectral1d import PeriodicGrid1D, SpectralField1D
from .rhs import (
    CKYModel,
    SupportHitBoundary,
    _d1_fourth_order,
    cky_initial_data,
    clm_exact,
    hl_initial_data,
    make_model,
)
from .state import IntervalField, IntervalGrid, Model1DState, ModelKind, StepController, make_periodic_state
from .stepping import BlowupSuspected, step_rk4
from .tracking import CharacteristicExited, make_tracker, track_characteristics, tracker_inequalities


def spectral_tail(field: SpectralField1D, band: int | None = None) -> float:
    """Largest coefficient in the top ``band`` retained modes, relative to the largest overall."""
    c = np.abs(field.coeffs)
    top = field.grid.n // 3
    band = band or max(top // 8, 1)
    scale = c.max()
    return float(c[top - band : top + 1].max() / scale) if scale > 0 else 0.0


def _periodic_columns(kind):
    cols = ["t", "dt", "max_omega", "max_omega_x"]
    if kind is ModelKind.HL:
        cols += ["max_theta_x", "min_theta", "max_theta", "tail", "resolved"]
    return cols


def _periodic_row(state, dt):
    g = state.grid
    w = state.omega
    row = [state.t, dt, np.max(np.abs(w.values)), np.max(np.abs(np.fft.irfft(w.coeffs * g.derivative_multiplier, n=g.n)))]
    return row


def run_periodic(
    kind,
    n: int,
    t_end: float,
    controller: StepController,
    sink,
    L: float = 2 * np.pi,
    omega0=None,
    amplitude: float = 1e4,
    tracker_count: int = 9,
    tail_tol: float = 1e-10,
    symmetry: bool = True,
    observer=None,
) -> RunReport:
    """CLM, De Gregorio or HL run; ``sink(columns)`` first, then ``sink(row)`` per step.

    ``omega0`` defaults to ``sin(2 pi x / L)``.  HL runs use the standard
    blow-up data and additionally emit tracker columns ``psi_k``, ``Omega_k``
    and the inequality verdict of each step.  An HL step counts as resolved
    while the spectral tail of both fields stays below ``tail_tol`` and
    ``omega >= -1e-9 max|omega|`` on ``[0, L/2]``; once lost it stays lost.
    ``observer(state)``, if given, sees every emitted state.
    """
    kind = ModelKind(kind)
    g = PeriodicGrid1D(n, L)
    model = make_model(kind, g)
    if kind is ModelKind.HL:
        w0, th0 = hl_initial_data(g, amplitude)
        state = make_periodic_state(kind, g, w0, th0, symmetry=symmetry)
        tracker = make_tracker(lambda x: amplitude * 0.5 * (1 - np.cos(2 * np.pi * x / L)), g, tracker_count)
    else:
        w0 = np.sin(2 * np.pi * g.x / L) if omega0 is None else omega0(g.x)
        state = make_periodic_state(kind, g, w0)
        tracker = None

    cols = _periodic_columns(kind)
    if tracker is not None:
        m = tracker.phi.size
        cols += [f"psi_{k}" for k in range(m)] + [f"Omega_{k}" for k in range(m)]
        cols += ["tracker_ok", "psi_margin", "omega_margin"]
    sink(cols)

    resolved = True
    half = g.x <= 0.5 * L
    extras = {"n": n, "dt_min": controller.dt_min, "blowup_cap": controller.blowup_cap}
    if tracker is not None:
        extras["c0"] = tracker.c0
        extras["levels"] = tracker.levels.tolist()

    def emit(st, dt, chk=None):
        nonlocal resolved
        row = _periodic_row(st, dt)
        if kind is ModelKind.HL:
            th = st.theta
            tx = np.fft.irfft(th.coeffs * g.derivative_multiplier, n=g.n)
            tail = max(spectral_tail(st.omega), spectral_tail(th))
            w = st.omega.values
            if tail > tail_tol or w[half].min() < -1e-9 * np.max(np.abs(w)):
                resolved = False
            row += [np.max(np.abs(tx)), th.values.min(), th.values.max(), tail, float(resolved)]
            row += list(tracker.psi) + list(tracker.omega_n)
            if chk is None:
                row += [np.nan, np.nan, np.nan]
            else:
                sp = np.min((chk.dpsi_dt - chk.psi_bound + chk.tol_psi) / np.maximum(np.abs(chk.psi_bound), 1e-300))
                so = np.min(
                    (chk.domega_dt[1:] - chk.omega_bound[1:] + chk.tol_omega[1:]) / np.abs(chk.omega_bound[1:])
                )
                row += [float(chk.passed), sp, so]
        sink(row)
        if observer is not None:
            observer(st)

    if tracker is not None:
        from .tracking import omega_integrals

        tracker.omega_n, _ = omega_integrals(state, tracker.phi)
        emit(state, 0.0, tracker_inequalities(state, tracker, model))
    else:
        emit(state, 0.0)

    steps = 0
    verdict, reason = "completed", ""
    try:
        while state.t < t_end - 1e-14 * max(1.0, t_end):
            new = step_rk4(state, model, controller, t_end)
            steps += 1
            chk = None
            if tracker is not None:
                tracker = track_characteristics(state, tracker, controller.dt, next_state=new, model=model)
                chk = tracker_inequalities(new, tracker, model)
            state = new
            emit(state, controller.dt, chk)
    except BlowupSuspected as exc:
        verdict, reason = "blow-up suspected", exc.reason
        state = exc.state
    except CharacteristicExited as exc:
        verdict, reason = "under-resolved", str(exc)

    if kind is ModelKind.CLM and verdict == "completed":
        exact = clm_exact(SpectralField1D(g, w0), state.t)
        extras["oracle_error"] = float(np.max(np.abs(exact.values - state.omega.values)))
    extras["final_state"] = state
    return RunReport(verdict, reason, state.t, steps, extras)


def run_cky(
    n: int,
    t_end: float,
    controller: StepController,
    sink,
    amplitude: float = 1.0,
    points=(0.3, 0.4, 0.5, 0.6),
    observer=None,
) -> RunReport:
    """CKY run tracking ``Phi' = u(Phi)`` from ``points`` (Heun, linear interpolation).

    The run halts when the support reaches the endpoint cells.  Reaching the
    origin, where ``u`` vanishes and characteristics collapse, is reported as
    ``blow-up suspected``; reaching ``x = 1`` as ``under-resolved``.
    """
    g = IntervalGrid(n)
    model = CKYModel(g)
    w0, th0 = cky_initial_data(g, amplitude)
    state = Model1DState(ModelKind.CKY, 0.0, IntervalField(g, w0), IntervalField(g, th0))
    phi = np.asarray(points, dtype=float).copy()
    m = phi.size
    sink(["t", "dt", "max_omega", "max_omega_x", "max_theta_x"] + [f"psi_{k}" for k in range(m)])

    def emit(st, dt):
        w, th = st.omega.values, st.theta.values
        sink(
            [st.t, dt, np.max(np.abs(w)), np.max(np.abs(_d1_fourth_order(w, g.dx))),
             np.max(np.abs(_d1_fourth_order(th, g.dx)))] + list(-np.log(phi))
        )
        if observer is not None:
            observer(st)

    emit(state, 0.0)
    steps = 0
    verdict, reason = "completed", ""
    try:
        while state.t < t_end - 1e-14 * max(1.0, t_end):
            new = step_rk4(state, model, controller, t_end)
            dt = controller.dt
            u0 = model.velocity(state.omega.values)
            u1 = model.velocity(new.omega.values)
            k1 = np.interp(phi, g.x, u0)
            k2 = np.interp(phi + dt * k1, g.x, u1)
            phi = phi + 0.5 * dt * (k1 + k2)
            if np.any(phi <= 0.0) or np.any(phi >= 1.0):
                raise CharacteristicExited("characteristic exited domain")
            state = new
            steps += 1
            emit(state, dt)
            model.check_support(state.omega.values, state.theta.values)
    except SupportHitBoundary as exc:
        w, th = state.omega.values, state.theta.values
        tx = np.abs(_d1_fourth_order(th, g.dx))
        k = model.margin + 1
        left = max(np.abs(w[:k]).max() / max(np.abs(w).max(), 1.0), tx[:k].max() / max(tx.max(), 1.0))
        if left > model.support_tol:
            verdict, reason = "blow-up suspected", f"{exc} at x = 0"
        else:
            verdict, reason = "under-resolved", f"{exc} at x = 1"
    except BlowupSuspected as exc:
        verdict, reason = "blow-up suspected", exc.reason
        state = exc.state
    except CharacteristicExited as exc:
        verdict, reason = "under-resolved", str(exc)
    return RunReport(verdict, reason, state.t, steps, {"n": n, "final_state": state, "points": list(points)})

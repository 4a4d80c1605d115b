"""Patch runs with barrier and front-bound monitoring."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..diagnostics import RunReport
from .contour import PatchSystem, Spacing
from .evolve import (
    BarrierState,
    ContactDetected,
    barrier_containment,
    barrier_time,
    evolve_patch,
    front,
    front_index,
    node_velocities,
)

PATCH_COLUMNS = ["t", "dt", "front", "front_u1", "bound", "area", "X", "margin", "contained",
                 "gap", "nodes", "h_min"]


@dataclass
class PatchController:
    """Step selection: ``dt = min(dt_max, cfl * min(h / |u|), front_frac * x_f / |u1(front)|)``."""

    dt_max: float = 0.01
    cfl: float = 0.5
    front_frac: float = 0.25
    spacing: Spacing = field(default_factory=Spacing)

    def step(self, system: PatchSystem, u: list[np.ndarray], t_end: float) -> float:
        dt = self.dt_max
        for c, v in zip(system.contours, u):
            speed = np.hypot(v[:, 0], v[:, 1])
            h = np.minimum(c.spacing, np.roll(c.spacing, 1))
            if np.any(speed > 0):
                dt = min(dt, self.cfl * float(np.min(h[speed > 0] / speed[speed > 0])))
        if system.odd_symmetry:
            c, v = system.contours[0], u[0]
            i = front_index(c)
            if v[i, 0] < 0:
                dt = min(dt, self.front_frac * c.nodes[i, 0] / -v[i, 0])
        return min(dt, t_end - system.t)


def front_bound(x_f: float, alpha: float) -> float:
    """``-(1/(50 alpha)) x_f^(1 - 2 alpha)``."""
    return -(x_f ** (1.0 - 2.0 * alpha)) / (50.0 * alpha)


def run_patch(system: PatchSystem, t_end: float, sink, controller: PatchController | None = None,
              eps: float = 0.05, delta_alpha: float = 0.05, tol: float = 1e-8, observer=None) -> RunReport:
    """Evolve ``system`` to ``t_end`` or contact; ``sink(columns)`` then ``sink(row)`` per state.

    Columns are ``PATCH_COLUMNS``.  The barrier ``X``, containment, margin
    and the bound ``-(1/(50 alpha)) x_f^(1 - 2 alpha)`` refer to the first
    (right) patch; they read NaN for ``alpha = 0`` and ``X`` reads 0 after the
    barrier time.  ``extras`` records bound violations seen while the barrier
    was contained and ``x_f <= delta_alpha``.  ``observer(system)``, if given,
    sees every emitted state.
    """
    ctl = controller or PatchController()
    alpha = system.alpha
    T = barrier_time(eps, alpha) if alpha > 0 else np.inf
    sink(PATCH_COLUMNS)
    violations = []
    contained_all = True

    def row(sys, u, dt):
        nonlocal contained_all
        if observer is not None:
            observer(sys)
        c = sys.contours[0]
        x_f, _ = front(c)
        u1 = float(u[0][front_index(c), 0])
        if alpha > 0:
            X = 0.0 if sys.t >= T else BarrierState.at(sys.t, eps, alpha).X
            inside, margin = barrier_containment(sys, BarrierState(eps, alpha, X))
            bound = front_bound(x_f, alpha)
            contained_all &= inside
            if inside and x_f <= delta_alpha and u1 > bound + tol:
                violations.append((sys.t, x_f, u1, bound))
        else:
            X = inside = margin = bound = np.nan
        h_min = min(float(k.spacing.min()) for k in sys.contours)
        n = sum(len(k.nodes) for k in sys.contours)
        return [sys.t, dt, x_f, u1, bound, c.area, X, margin, float(inside), 2.0 * x_f, n, h_min]

    u = node_velocities(system)
    sink(row(system, u, 0.0))
    steps = 0
    while system.t < t_end * (1 - 1e-14):
        dt = ctl.step(system, u, t_end)
        try:
            system = evolve_patch(system, dt, ctl.spacing, velocity=u)
        except ContactDetected as e:
            return RunReport("contact", str(e), system.t + dt, steps + 1,
                             {"final_system": system, "location": e.location, "gap": e.gap,
                              "h_min": e.h_min, "violations": violations, "contained": contained_all})
        steps += 1
        u = node_velocities(system)
        sink(row(system, u, dt))
    return RunReport("completed", "reached t_end", system.t, steps,
                     {"final_system": system, "violations": violations, "contained": contained_all})

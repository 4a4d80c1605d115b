"""Characteristic trackers for the HL blow-up argument.

Levels ``x_n`` are the points where the (increasing) initial temperature
crosses ``(1/2 + 2^-(n+2)) A`` with ``A = theta0(L/2)``.  Along an HL run we
follow ``Phi_n' = u(Phi_n)`` and monitor

* ``d psi_n / dt >= (2 mu / pi) Omega_n``,  ``psi_n = -log Phi_n``
* ``d Omega_n / dt >= 2^-(n+2) c0 A exp(psi_{n-1})``  (n >= 1)

where ``Omega_n = int_{Phi_n}^{L/2} w cot(mu y) dy`` and ``c0`` is measured as
``inf_{0 < x <= x0} x cot(mu x) = x0 cot(mu x0)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from ..spectral1d import PeriodicGrid1D, SpectralField1D, evaluate_at
from .lemmas import cot_weighted
from .state import Model1DState


class CharacteristicExited(RuntimeError):
    pass


@dataclass
class CharacteristicTracker:
    levels: np.ndarray  # x_n, decreasing
    phi: np.ndarray  # Phi_n(t)
    amplitude: float  # A = theta0(L/2)
    mu: float
    omega_n: np.ndarray | None = None
    t: float = 0.0

    def __post_init__(self):
        self.levels = np.asarray(self.levels, dtype=float)
        self.phi = np.asarray(self.phi, dtype=float)
        if np.any(np.diff(self.levels) >= 0):
            raise ValueError("tracker levels must be strictly decreasing")

    @property
    def psi(self) -> np.ndarray:
        return -np.log(self.phi)

    @property
    def c0(self) -> float:
        x0 = self.levels[0]
        return float(x0 / np.tan(self.mu * x0))


def tracker_levels(theta0, grid: PeriodicGrid1D, count: int = 9) -> np.ndarray:
    """Bisection for ``theta0(x_n) = (1/2 + 2^-(n+2)) A``, ``n = 0 .. count-1``.

    ``theta0`` is a callable or a periodic field (evaluated spectrally).
    """
    half = 0.5 * grid.L
    f = theta0 if callable(theta0) else (lambda x: float(evaluate_at(theta0, x)))
    A = float(f(half))
    lo0 = float(f(0.0))
    out = []
    for n in range(count):
        target = (0.5 + 2.0 ** -(n + 2)) * A
        if not lo0 < target < A:
            raise ValueError("theta0 must increase from theta0(0) to A on [0, L/2]")
        out.append(brentq(lambda x: f(x) - target, 0.0, half, xtol=1e-14, rtol=1e-14))
    return np.array(out)


def make_tracker(theta0, grid, count=9) -> CharacteristicTracker:
    levels = tracker_levels(theta0, grid, count)
    f = theta0 if callable(theta0) else (lambda x: float(evaluate_at(theta0, x)))
    return CharacteristicTracker(levels, levels.copy(), float(f(0.5 * grid.L)), grid.mu)


def _antiderivative_at(field: SpectralField1D, x):
    """``int_x^{L/2} f`` for a periodic field, integrated spectrally."""
    g = field.grid
    c = field.coeffs
    mean = c[0].real / g.n
    anti = np.zeros_like(c)
    anti[1:] = c[1:] / (1j * g.wavenumber[1:])
    anti[-1] = 0.0
    half = 0.5 * g.L
    x = np.asarray(x, dtype=float)
    G = lambda z: evaluate_at(anti, z, g) + mean * z
    return G(half) - G(x)


def _tail_error(field: SpectralField1D) -> float:
    # size of the highest retained third of the spectrum, times the period
    c = np.abs(field.coeffs) / field.grid.n
    k0 = 2 * c.size // 3
    return float(2.0 * field.grid.L * np.sum(c[k0:]))


def omega_integrals(state: Model1DState, phi) -> tuple[np.ndarray, float]:
    """``Omega_n = int_{Phi_n}^{L/2} w cot(mu y) dy`` and a quadrature error bound."""
    wc = cot_weighted(state.omega)
    return _antiderivative_at(wc, phi), _tail_error(wc)


def track_characteristics(
    state: Model1DState,
    tracker: CharacteristicTracker,
    dt: float,
    next_state: Model1DState | None = None,
    model=None,
) -> CharacteristicTracker:
    """Advance ``Phi_n`` by one RK2 step and refresh ``Omega_n``.

    With ``next_state`` (the state at ``t + dt``) the step is Heun's method;
    otherwise it is the midpoint rule in the frozen field at ``t``.
    """
    from .rhs import HLModel

    model = model or HLModel(state.grid)
    g = state.grid
    u0 = SpectralField1D(g, model.velocity(state.omega.values))
    k1 = evaluate_at(u0, tracker.phi)
    if next_state is None:
        phi = tracker.phi + dt * evaluate_at(u0, tracker.phi + 0.5 * dt * k1)
        ref = state
    else:
        u1 = SpectralField1D(g, model.velocity(next_state.omega.values))
        k2 = evaluate_at(u1, tracker.phi + dt * k1)
        phi = tracker.phi + 0.5 * dt * (k1 + k2)
        ref = next_state
    if np.any(phi <= 0.0) or np.any(phi >= 0.5 * g.L):
        raise CharacteristicExited("characteristic exited domain")
    om, _ = omega_integrals(ref, phi)
    return replace(tracker, phi=phi, omega_n=om, t=tracker.t + dt)


@dataclass
class TrackerCheck:
    t: float
    psi: np.ndarray
    omega_n: np.ndarray
    dpsi_dt: np.ndarray
    psi_bound: np.ndarray
    domega_dt: np.ndarray
    omega_bound: np.ndarray  # entry 0 is -inf (no bound for n = 0)
    tol_psi: np.ndarray
    tol_omega: np.ndarray

    @property
    def psi_ok(self) -> np.ndarray:
        return self.dpsi_dt >= self.psi_bound - self.tol_psi

    @property
    def omega_ok(self) -> np.ndarray:
        return self.domega_dt >= self.omega_bound - self.tol_omega

    @property
    def passed(self) -> bool:
        return bool(np.all(self.psi_ok) and np.all(self.omega_ok[1:]))


def tracker_inequalities(state: Model1DState, tracker: CharacteristicTracker, model=None, rel_tol=1e-8):
    """Instantaneous rates of ``psi_n`` and ``Omega_n`` against their lower bounds.

    ``d psi_n/dt = -u(Phi_n)/Phi_n`` and
    ``d Omega_n/dt = -w cot(mu Phi_n) u(Phi_n) + int_{Phi_n}^{L/2} w_t cot(mu y) dy``
    are both exact identities for the semi-discrete flow, evaluated with the
    model right-hand side.
    """
    from .rhs import HLModel

    model = model or HLModel(state.grid)
    g = state.grid
    phi = tracker.phi
    w = state.omega.values
    u = SpectralField1D(g, model.velocity(w))
    u_phi = evaluate_at(u, phi)
    dw, _ = model(w, state.theta.values)
    dwf = SpectralField1D(g, dw)

    om, err_om = omega_integrals(state, phi)
    wt_cot = cot_weighted(dwf)
    flux = _antiderivative_at(wt_cot, phi)
    err_flux = _tail_error(wt_cot)
    w_phi = evaluate_at(state.omega, phi)
    domega = -w_phi / np.tan(g.mu * phi) * u_phi + flux

    psi = -np.log(phi)
    dpsi = -u_phi / phi
    psi_bound = (2.0 * g.mu / np.pi) * om
    n = np.arange(phi.size)
    om_bound = np.full(phi.size, -np.inf)
    om_bound[1:] = 2.0 ** -(n[1:] + 2) * tracker.c0 * tracker.amplitude * np.exp(psi[:-1])

    # rates inherit the spectral truncation error of the integrands
    tol_psi = (2.0 * g.mu / np.pi) * err_om + rel_tol * (np.abs(dpsi) + np.abs(psi_bound))
    tol_om = err_flux + rel_tol * (np.abs(domega) + np.where(np.isfinite(om_bound), np.abs(om_bound), 0))
    return TrackerCheck(state.t, psi, om, dpsi, psi_bound, domega, om_bound, tol_psi, tol_om)

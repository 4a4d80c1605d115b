"""Right-hand sides and exact solutions for the 1D vortex-stretching models.

Each model is a small callable object working on raw sample arrays (the hot
path of the time stepper) plus a ``speeds`` method that reports the transport
speed and stretching rate used for step-size control.  The module-level
functions (``clm_rhs``, ``hl_rhs``, ...) are the field-level entry points.
"""

from __future__ import annotations

import numpy as np

from ..spectral1d import PeriodicGrid1D, SpectralField1D
from .state import IntervalField, IntervalGrid, ModelKind

irfft = np.fft.irfft
rfft = np.fft.rfft


class _PeriodicModel:
    kind: ModelKind

    def __init__(self, grid: PeriodicGrid1D):
        self.grid = grid
        self.n = grid.n
        self.dx = grid.dx

    def _dealiased(self, values):
        return irfft(rfft(values) * self.grid.dealias_mask, n=self.n)


class CLMModel(_PeriodicModel):
    """``w_t = w H w``."""

    kind = ModelKind.CLM

    def __call__(self, w, theta=None):
        h = irfft(rfft(w) * self.grid.hilbert_multiplier, n=self.n)
        return self._dealiased(w * h), None

    def speeds(self, w, theta=None):
        h = irfft(rfft(w) * self.grid.hilbert_multiplier, n=self.n)
        return 0.0, float(np.max(np.abs(h)))


class DeGregorioModel(_PeriodicModel):
    """``w_t + u w_x = w H w`` with ``u_x = H w`` and zero-mean ``u``."""

    kind = ModelKind.DEGREGORIO

    def __init__(self, grid):
        super().__init__(grid)
        self.u_mult = grid.bs_multiplier.copy()
        self.u_mult[0] = 0.0

    def __call__(self, w, theta=None):
        c = rfft(w)
        g = self.grid
        u = irfft(c * self.u_mult, n=self.n)
        wx = irfft(c * g.derivative_multiplier, n=self.n)
        h = irfft(c * g.hilbert_multiplier, n=self.n)
        return self._dealiased(-u * wx + w * h), None

    def speeds(self, w, theta=None):
        c = rfft(w)
        u = irfft(c * self.u_mult, n=self.n)
        h = irfft(c * self.grid.hilbert_multiplier, n=self.n)
        return float(np.max(np.abs(u))), float(np.max(np.abs(h)))


class HLModel(_PeriodicModel):
    """Hou-Luo model with the periodic log-of-sine Biot-Savart law."""

    kind = ModelKind.HL

    def velocity(self, w):
        return irfft(rfft(w) * self.grid.bs_multiplier, n=self.n)

    def __call__(self, w, theta):
        g = self.grid
        wc = rfft(w)
        tc = rfft(theta)
        u = irfft(wc * g.bs_multiplier, n=self.n)
        wx = irfft(wc * g.derivative_multiplier, n=self.n)
        tx = irfft(tc * g.derivative_multiplier, n=self.n)
        return self._dealiased(-u * wx + tx), self._dealiased(-u * tx)

    def speeds(self, w, theta=None):
        wc = rfft(w)
        u = irfft(wc * self.grid.bs_multiplier, n=self.n)
        h = irfft(wc * self.grid.hilbert_multiplier, n=self.n)
        return float(np.max(np.abs(u))), float(np.max(np.abs(h)))


class SupportHitBoundary(RuntimeError):
    """CKY fields reached the endpoint cells of the interval."""


def _d1_fourth_order(f, h):
    """Fourth-order centered first derivative; one-sided third-order stencils at the ends."""
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    d[0] = (-11.0 * f[0] + 18.0 * f[1] - 9.0 * f[2] + 2.0 * f[3]) / (6.0 * h)
    d[1] = (-2.0 * f[0] - 3.0 * f[1] + 6.0 * f[2] - f[3]) / (6.0 * h)
    d[-2] = (2.0 * f[-1] + 3.0 * f[-2] - 6.0 * f[-3] + f[-4]) / (6.0 * h)
    d[-1] = (11.0 * f[-1] - 18.0 * f[-2] + 9.0 * f[-3] - 2.0 * f[-4]) / (6.0 * h)
    return d


def _cky_velocity_values(w, x):
    # Product rule on each cell with w linear: int (a + b y)/y dy = a log(y1/y0) + b h.
    # Exact for the 1/y weight, so w = 1 reproduces x log x up to rounding.
    y0, y1 = x[1:-1], x[2:]
    w0, w1 = w[1:-1], w[2:]
    h = y1 - y0
    b = (w1 - w0) / h
    a = w0 - b * y0
    cell = a * np.log(y1 / y0) + b * h
    tail = np.zeros_like(w)
    tail[1:-1] = np.cumsum(cell[::-1])[::-1]
    return -x * tail


class CKYModel:
    """CKY model on ``[0, 1]``: HL transport with ``u = -x int_x^1 w(y)/y dy``."""

    kind = ModelKind.CKY

    def __init__(self, grid: IntervalGrid, margin: int = 2, support_tol: float = 1e-12):
        self.grid = grid
        self.dx = grid.dx
        self.margin = margin
        self.support_tol = support_tol

    def velocity(self, w):
        return _cky_velocity_values(w, self.grid.x)

    def check_support(self, w, theta):
        m = self.margin + 1
        tx = _d1_fourth_order(theta, self.dx)
        scale_w = max(np.max(np.abs(w)), 1.0)
        scale_t = max(np.max(np.abs(tx)), 1.0)
        for name, f, s in (("omega", w, scale_w), ("theta_x", tx, scale_t)):
            edge = np.concatenate([f[:m], f[-m:]])
            if np.max(np.abs(edge)) > self.support_tol * s:
                raise SupportHitBoundary(f"support hit boundary ({name})")

    def __call__(self, w, theta):
        u = self.velocity(w)
        wx = _d1_fourth_order(w, self.dx)
        tx = _d1_fourth_order(theta, self.dx)
        return -u * wx + tx, -u * tx

    def speeds(self, w, theta=None):
        u = self.velocity(w)
        ux = _d1_fourth_order(u, self.dx)
        return float(np.max(np.abs(u))), float(np.max(np.abs(ux)))


def make_model(kind, grid):
    kind = ModelKind(kind)
    return {
        ModelKind.CLM: CLMModel,
        ModelKind.DEGREGORIO: DeGregorioModel,
        ModelKind.HL: HLModel,
        ModelKind.CKY: CKYModel,
    }[kind](grid)


# ---------------------------------------------------------------- field API


def clm_rhs(omega: SpectralField1D) -> SpectralField1D:
    dw, _ = CLMModel(omega.grid)(omega.values)
    return SpectralField1D(omega.grid, dw)


def clm_blowup_time(omega0: SpectralField1D) -> float:
    """First time the closed-form CLM denominator vanishes (``inf`` if never).

    The denominator ``(2 - t Hw0)^2 + t^2 w0^2`` can only vanish where
    ``w0 = 0`` and ``Hw0 > 0``; the blow-up time is ``2 / max Hw0`` over
    those points (sampled on the trigonometric interpolant).
    """
    from ..spectral1d import evaluate_at, hilbert_transform

    g = omega0.grid
    xs = np.linspace(0.0, g.L, 16 * g.n, endpoint=False)
    w = evaluate_at(omega0, xs)
    h = evaluate_at(hilbert_transform(omega0), xs)
    scale = max(np.max(np.abs(w)), 1e-300)
    # sign changes of w locate its zeros; refine Hw0 there linearly
    s = np.sign(w)
    idx = np.flatnonzero(s != np.roll(s, -1))
    best = 0.0
    for i in idx:
        j = (i + 1) % xs.size
        if w[i] == w[j]:
            hz = h[i]
        else:
            lam = w[i] / (w[i] - w[j])
            hz = (1 - lam) * h[i] + lam * h[j]
        best = max(best, hz)
    exact_zero = np.abs(w) <= 1e-14 * scale
    if exact_zero.any():
        best = max(best, float(np.max(h[exact_zero])))
    return 2.0 / best if best > 0 else np.inf


def clm_exact(omega0: SpectralField1D, t: float) -> SpectralField1D:
    """Closed-form CLM solution ``4 w0 / ((2 - t H w0)^2 + t^2 w0^2)``."""
    from ..spectral1d import hilbert_transform

    T = clm_blowup_time(omega0)
    # T is located on a sampled interpolant; reject a relative band below it
    if t >= T * (1.0 - 1e-10):
        raise ValueError(f"t = {t} is at or past the blow-up time {T}")
    w0 = omega0.values
    h0 = hilbert_transform(omega0).values
    return SpectralField1D(omega0.grid, 4.0 * w0 / ((2.0 - t * h0) ** 2 + (t * w0) ** 2))


def degregorio_rhs(omega: SpectralField1D) -> SpectralField1D:
    dw, _ = DeGregorioModel(omega.grid)(omega.values)
    return SpectralField1D(omega.grid, dw)


def hl_rhs(omega: SpectralField1D, theta: SpectralField1D):
    if omega.grid != theta.grid:
        raise ValueError("omega and theta live on different grids")
    dw, dth = HLModel(omega.grid)(omega.values, theta.values)
    return SpectralField1D(omega.grid, dw), SpectralField1D(omega.grid, dth)


def cky_velocity(omega: IntervalField) -> IntervalField:
    return IntervalField(omega.grid, _cky_velocity_values(omega.values, omega.grid.x))


def cky_rhs(omega: IntervalField, theta: IntervalField):
    if omega.grid != theta.grid:
        raise ValueError("omega and theta live on different grids")
    model = CKYModel(omega.grid)
    model.check_support(omega.values, theta.values)
    dw, dth = model(omega.values, theta.values)
    return IntervalField(omega.grid, dw), IntervalField(omega.grid, dth)


# ------------------------------------------------------------ initial data


def hl_initial_data(grid: PeriodicGrid1D, amplitude: float = 1e4):
    """Odd ``w0 = sin(2 pi x / L)`` and even, monotone ``theta0 = A (1 - cos) / 2``."""
    s = 2.0 * np.pi * grid.x / grid.L
    return np.sin(s), amplitude * 0.5 * (1.0 - np.cos(s))


def smooth_bump(x, center=0.5, half_width=0.3):
    z = (np.asarray(x, dtype=float) - center) / half_width
    out = np.zeros_like(z)
    inside = np.abs(z) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - z[inside] ** 2))
    return out


def smooth_step(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1."""
    s = np.asarray(s, dtype=float)

    def f(z):
        out = np.zeros_like(z)
        pos = z > 0
        out[pos] = np.exp(-1.0 / z[pos])
        return out

    a, b = f(s), f(1.0 - s)
    return a / (a + b)


def cky_initial_data(grid: IntervalGrid, amplitude: float = 1.0, center=0.5, half_width=0.3):
    """Bump vorticity and a smoothed ramp of temperature across the bump."""
    x = grid.x
    w0 = smooth_bump(x, center, half_width)
    theta0 = amplitude * smooth_step((x - (center - half_width)) / (2.0 * half_width))
    return w0, theta0

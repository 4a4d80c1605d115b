"""Numerical verifiers for the HL kernel and positivity lemmas."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..spectral1d import (
    PeriodicGrid1D,
    SpectralField1D,
    evaluate_at,
    periodic_bs_velocity,
    spectral_derivative,
)


def _kernel_from_s(s):
    # log|(s+1)/(s-1)| = 2 artanh(min(|s|, 1/|s|)) for s > 0, without cancellation at large s
    a = np.abs(s)
    r = np.where(a > 1.0, 1.0 / a, a)
    return s * 2.0 * np.arctanh(r)


def hl_kernel_K(x, y, grid: PeriodicGrid1D):
    """``K(x, y) = s log|(s+1)/(s-1)|`` with ``s = tan(mu y) / tan(mu x)``.

    Accepts scalars or broadcastable arrays with ``x, y`` in ``(0, L/2)``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    half = 0.5 * grid.L
    for name, v in (("x", x), ("y", y)):
        if np.any(v <= 0.0) or np.any(v >= half):
            raise ValueError(f"{name} must lie strictly inside (0, L/2)")
    if np.any(x == y):
        raise ValueError("kernel is singular at x == y (s = 1)")
    s = np.tan(grid.mu * y) / np.tan(grid.mu * x)
    out = _kernel_from_s(s)
    return float(out) if out.ndim == 0 else out


@dataclass
class KernelReport:
    samples: int
    min_K: float
    min_K_upper: float
    min_Kx_upper: float
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def hl_kernel_property_check(
    grid: PeriodicGrid1D,
    samples: int = 10_000,
    seed: int = 0,
    kernel=hl_kernel_K,
    kx_tol: float = 1e-8,
) -> KernelReport:
    """Sweep random pairs: ``K >= 0``; for ``x < y`` also ``K >= 2`` and ``K_x >= 0``.

    ``K_x`` is a centered finite difference.  ``kernel`` is injectable so a
    corrupted kernel can be fed through the same sweep.
    """
    if samples < 100:
        raise ValueError("need at least 100 samples")
    rng = np.random.default_rng(seed)
    half = 0.5 * grid.L
    x = rng.uniform(0.0, half, samples)
    y = rng.uniform(0.0, half, samples)
    ok = (x > 0) & (y > 0) & (x != y)
    x, y = x[ok], y[ok]
    K = np.asarray(kernel(x, y, grid))
    upper = x < y
    xu, yu = x[upper], y[upper]
    h = np.minimum(1e-6 * grid.L, 0.25 * np.minimum.reduce([xu, yu - xu, half - xu]))
    Kx = (np.asarray(kernel(xu + h, yu, grid)) - np.asarray(kernel(xu - h, yu, grid))) / (2 * h)
    Ku = K[upper]

    violations = []
    for i in np.flatnonzero(~(K >= 0.0))[:20]:
        violations.append(("K >= 0", float(x[i]), float(y[i]), float(K[i])))
    for i in np.flatnonzero(~(Ku >= 2.0))[:20]:
        violations.append(("K >= 2", float(xu[i]), float(yu[i]), float(Ku[i])))
    for i in np.flatnonzero(~(Kx >= -kx_tol))[:20]:
        violations.append(("K_x >= 0", float(xu[i]), float(yu[i]), float(Kx[i])))
    return KernelReport(
        samples=int(x.size),
        min_K=float(np.min(K)),
        min_K_upper=float(np.min(Ku)) if Ku.size else np.inf,
        min_Kx_upper=float(np.min(Kx)) if Kx.size else np.inf,
        violations=violations,
    )


def cot_weighted(f: SpectralField1D, fx0: float | None = None) -> SpectralField1D:
    """Samples of ``f(x) cot(mu x)`` for ``f`` odd about 0.

    The removable singularity at ``x = 0`` takes the limit ``f'(0) / mu``.
    """
    g = f.grid
    vals = np.empty(g.n)
    with np.errstate(divide="ignore"):
        vals[1:] = f.values[1:] / np.tan(g.mu * g.x[1:])
    if fx0 is None:
        fx0 = spectral_derivative(f).values[0]
    vals[0] = fx0 / g.mu
    return SpectralField1D(g, vals)


def _check_admissible(omega: SpectralField1D, tol: float = 1e-10):
    w = omega.values
    scale = max(np.max(np.abs(w)), 1e-300)
    odd_defect = 0.5 * np.max(np.abs(w + np.roll(w[::-1], 1)))
    if odd_defect > tol * scale:
        raise ValueError(f"omega is not odd about 0 (defect {odd_defect:.3e})")
    half = omega.grid.x <= 0.5 * omega.grid.L
    if np.min(w[half]) < -tol * scale:
        raise ValueError("omega must be nonnegative on [0, L/2]")


def _trapezoid_samples(v, a, b):
    return (b - a) / (v.size - 1) * (v.sum() - 0.5 * (v[0] + v[-1]))


def hl_positivity_integral(omega: SpectralField1D, a: float, m: int = 512):
    """``int_a^{L/2} w [u cot(mu x)]_x dx`` with a Richardson error estimate.

    ``u`` comes from the periodic log-of-sine law.  ``u cot(mu x)`` is a
    smooth even periodic function, so it is differentiated spectrally; the
    integral is composite trapezoid on ``m`` and ``2m`` panels.

    Returns ``(value, error_estimate)``.
    """
    g = omega.grid
    half = 0.5 * g.L
    if not 0.0 <= a <= half:
        raise ValueError(f"a must lie in [0, L/2], got {a}")
    _check_admissible(omega)
    if a == half:
        return 0.0, 0.0
    u = periodic_bs_velocity(omega)
    ucot = cot_weighted(u, fx0=SpectralField1D.from_coeffs(g, omega.coeffs * g.hilbert_multiplier).values[0])
    dg = spectral_derivative(ucot)

    # one phase matrix on the fine nodes; the coarse rule uses every other node
    xs = np.linspace(a, half, 2 * m + 1)
    v = evaluate_at(np.stack([omega.coeffs, dg.coeffs], axis=-1), xs, g)
    v = v[:, 0] * v[:, 1]
    coarse = _trapezoid_samples(v[::2], a, half)
    fine = _trapezoid_samples(v, a, half)
    err = abs(fine - coarse) / 3.0
    return fine + (fine - coarse) / 3.0, err

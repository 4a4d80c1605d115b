"""Kernel split and numerical checks of the bad/good velocity bounds near the origin."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate


def _check_alpha(alpha: float, closed_zero: bool = False) -> None:
    ok = (0.0 <= alpha < 0.5) if closed_zero else (0.0 < alpha < 0.5)
    if not ok:
        raise ValueError(f"alpha out of range {'[0' if closed_zero else '(0'}, 0.5)")


@dataclass(frozen=True)
class KernelSplit:
    """The four signed pieces of the odd-symmetric ``u1`` kernel; ``K1 = K11 - K12 - K13 + K14``."""

    K11: float
    K12: float
    K13: float
    K14: float

    @property
    def K1(self) -> float:
        return self.K11 - self.K12 - self.K13 + self.K14


def kernel_split(x, y, alpha: float) -> KernelSplit:
    """Pieces of ``K1(x, y)``: the direct kernel and those of the images ``y~ = (-y1, y2)``,
    ``-y`` and ``y_bar = (y1, -y2)``."""
    _check_alpha(alpha, closed_zero=True)
    x1, x2 = map(float, x)
    y1, y2 = map(float, y)
    p = 2.0 + 2.0 * alpha
    d11 = np.hypot(x1 - y1, x2 - y2)
    d12 = np.hypot(x1 + y1, x2 - y2)
    d13 = np.hypot(x1 + y1, x2 + y2)
    d14 = np.hypot(x1 - y1, x2 + y2)
    if min(d11, d12, d13, d14) == 0.0:
        raise ValueError("x coincides with y or one of its images")
    return KernelSplit((y2 - x2) / d11**p, (y2 - x2) / d12**p, (y2 + x2) / d13**p, (y2 + x2) / d14**p)


def combined_kernel(x, y, alpha: float) -> float:
    """``K1`` evaluated in one expression (reference for ``kernel_split``)."""
    x1, x2 = map(float, x)
    y1, y2 = map(float, y)
    q = 1.0 + alpha
    return ((y2 - x2) * (((x1 - y1) ** 2 + (x2 - y2) ** 2) ** -q - ((x1 + y1) ** 2 + (x2 - y2) ** 2) ** -q)
            + (y2 + x2) * (((x1 - y1) ** 2 + (x2 + y2) ** 2) ** -q - ((x1 + y1) ** 2 + (x2 + y2) ** 2) ** -q))


Bound = Callable[[float], float] | float


@dataclass(frozen=True)
class Region:
    """``{y : y1 in (y1_lo, y1_hi), y2 in (y2_lo(y1), y2_hi(y1))}`` inside the quadrant;
    the ``y2`` limits may be constants or functions of ``y1``; ``y1_hi`` may be ``inf``."""

    y1_lo: float
    y1_hi: float
    y2_lo: Bound
    y2_hi: Bound

    def lo(self, y1):
        return self.y2_lo(y1) if callable(self.y2_lo) else self.y2_lo

    def hi(self, y1):
        return self.y2_hi(y1) if callable(self.y2_hi) else self.y2_hi


def rectangle(a: float, b: float, c: float, d: float) -> Region:
    if not (0.0 <= a < b and 0.0 <= c < d):
        raise ValueError("rectangle must be non-empty and inside the quadrant")
    return Region(a, b, c, d)


def good_region(x) -> Region:
    """``A(x) = {y1 in (x1, x1 + 1), y2 in (x2, x2 + y1 - x1)}``."""
    x1, x2 = map(float, x)
    return Region(x1, x1 + 1.0, x2, lambda y1: x2 + y1 - x1)


def _strip_integral(y1, c, d, p, s, alpha):
    # int_c^d (y2 - s) / ((y1 - p)^2 + (y2 - s)^2)^(1 + alpha) dy2
    # A^-alpha - B^-alpha = B^-alpha expm1(-alpha log1p((A - B)/B)), free of cancellation for small alpha
    a2 = (y1 - p) ** 2
    # B = 0 only at the integrable singular point y1 = p, d = s, which quad may hit after rounding
    B = max(a2 + (d - s) ** 2, 1e-300)
    A_minus_B = (c - d) * (c + d - 2.0 * s)
    return B**-alpha * np.expm1(-alpha * np.log1p(max(A_minus_B / B, -1.0 + 1e-16))) / (2.0 * alpha)


def u1_over_region(x, region: Region, alpha: float) -> tuple[float, float]:
    """``-int_region K1(x, y) dy`` and its quadrature error estimate.

    The ``y2`` integral is exact; the remaining ``y1`` integral is adaptive
    with a breakpoint at ``x1``, where ``|y1 - x1|^(-2 alpha)`` singularities sit.
    """
    _check_alpha(alpha)
    x1, x2 = map(float, x)
    pieces = ((x1, x2, 1.0), (-x1, x2, -1.0), (-x1, -x2, -1.0), (x1, -x2, 1.0))

    def f(y1):
        c, d = region.lo(y1), region.hi(y1)
        if d <= c:
            return 0.0
        return -sum(sg * _strip_integral(y1, c, d, p, s, alpha) for p, s, sg in pieces)

    # geometric breakpoints resolve the structure at scale x1 inside unit-size regions
    scale = max(x1, 1e-300)
    marks = {x1, x1 + 1.0} | {x1 + scale * 4.0**k for k in range(-20, 40)} | {x1 - scale * 2.0**-k for k in range(1, 40)}
    cuts = sorted({region.y1_lo, region.y1_hi} | {v for v in marks if region.y1_lo < v < region.y1_hi})
    total, err = 0.0, 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        with warnings.catch_warnings():
            # slow convergence at the integrable singularity shows up in the returned error
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            v, e = integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=400)
        total += v
        err += e
    return total, err


def bad_coefficient(alpha: float) -> float:
    """``(1/alpha)(1/(1 - 2 alpha) - 2^-alpha)``."""
    _check_alpha(alpha)
    return (1.0 / (1.0 - 2.0 * alpha) - 2.0**-alpha) / alpha


def good_coefficient(alpha: float) -> float:
    """``1 / (6 * 20^alpha * alpha)``."""
    _check_alpha(alpha)
    return 1.0 / (6.0 * 20.0**alpha * alpha)


@dataclass(frozen=True)
class BoundCheck:
    value: float
    bound: float
    error: float
    passed: bool


def _clip_to_strip(region: Region, top: float) -> Region:
    return Region(region.y1_lo, region.y1_hi, lambda y1: max(region.lo(y1), 0.0),
                  lambda y1: min(region.hi(y1), top))


def _check_point(x) -> tuple[float, float]:
    x1, x2 = map(float, x)
    if x1 < 0 or x2 < 0:
        raise ValueError("x must lie in the closed quadrant")
    return x1, x2


def _check_regions(regions) -> None:
    rects = []
    for r in regions:
        if r.y1_lo < 0:
            raise ValueError("regions must lie in the quadrant y1 >= 0")
        if not callable(r.y2_lo) and r.y2_lo < 0:
            raise ValueError("regions must lie in the quadrant y2 >= 0")
        if not (callable(r.y2_lo) or callable(r.y2_hi)):
            rects.append(r)
    # 0 <= omega <= 1 needs disjoint pieces
    for i, p in enumerate(rects):
        for q in rects[i + 1:]:
            if p.y1_lo < q.y1_hi and q.y1_lo < p.y1_hi and p.y2_lo < q.y2_hi and q.y2_lo < p.y2_hi:
                raise ValueError("regions overlap, so omega would exceed 1")


def bad_part_bound_check(regions: list[Region], x, alpha: float, tol: float = 1e-10) -> BoundCheck:
    """``u1_bad(x) = -int_{(0, inf) x (0, x2)} K1 omega`` for ``omega`` the indicator of
    ``regions``, against ``bad_coefficient(alpha) * x1^(1 - 2 alpha)``."""
    _check_alpha(alpha)
    x1, x2 = _check_point(x)
    if x2 > x1:
        raise ValueError("bad-part bound needs x2 <= x1")
    _check_regions(regions)
    value, err = 0.0, 0.0
    if x2 > 0:
        for r in regions:
            v, e = u1_over_region(x, _clip_to_strip(r, x2), alpha)
            value += v
            err += e
    bound = bad_coefficient(alpha) * x1 ** (1.0 - 2.0 * alpha)
    return BoundCheck(value, bound, err, value <= bound + tol + err)


def good_part_bound_check(x, alpha: float, delta: float = 0.05, tol: float = 1e-10) -> BoundCheck:
    """``u1_good(x)`` for ``omega`` the indicator of ``A(x)``, against
    ``-good_coefficient(alpha) * x1^(1 - 2 alpha)``; requires ``x1 <= delta``."""
    _check_alpha(alpha)
    x1, _ = _check_point(x)
    if x1 > delta:
        raise ValueError(f"x1 = {x1:g} exceeds delta_alpha = {delta:g}")
    value, err = u1_over_region(x, good_region(x), alpha)
    bound = -good_coefficient(alpha) * x1 ** (1.0 - 2.0 * alpha)
    return BoundCheck(value, bound, err, value <= bound + tol + err)


def largest_passing_x1(alpha: float, slope: float = 0.5, grid=None) -> float:
    """Largest ``x1`` on ``grid`` (default ``geomspace(1e-12, 0.9, 120)``) below which
    the good-part bound holds at every grid point on the ray ``x2 = slope x1``:
    an empirical estimate of ``delta_alpha``."""
    grid = np.geomspace(1e-12, 0.9, 120) if grid is None else np.asarray(grid)
    best = 0.0
    for x1 in grid:
        if not good_part_bound_check((x1, slope * x1), alpha, delta=np.inf).passed:
            break
        best = float(x1)
    return best


@dataclass(frozen=True)
class CoefficientMargin:
    alpha: float
    good: float
    bad: float
    margin: float
    required: float
    dominates: bool
    asserted: bool  # dominance is only claimed for alpha in (0, 1/24]


def coefficient_margin(alpha: float) -> CoefficientMargin:
    """Good minus bad coefficient, against the ``1/(50 alpha)`` needed for the front bound."""
    g, b = good_coefficient(alpha), bad_coefficient(alpha)
    req = 1.0 / (50.0 * alpha)
    return CoefficientMargin(alpha, g, b, g - b, req, g - b >= req, alpha <= 1.0 / 24.0 + 1e-15)

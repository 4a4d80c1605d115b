"""Kernel and lemma verifier suite behind ``blowuplab verify-kernels``."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .models1d.lemmas import hl_kernel_K, hl_kernel_property_check, hl_positivity_integral
from .spectral1d import PeriodicGrid1D, SpectralField1D
from .sqg_patch.lemmas import (
    bad_part_bound_check,
    coefficient_margin,
    good_part_bound_check,
    largest_passing_x1,
    rectangle,
)

SUITE_ALPHAS = (0.01, 0.02, 1.0 / 24.0)


@dataclass
class VerifyCase:
    name: str
    passed: bool
    detail: str


@dataclass
class VerifyReport:
    cases: list[VerifyCase] = field(default_factory=list)
    delta_alpha: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    def failures(self) -> list[VerifyCase]:
        return [c for c in self.cases if not c.passed]

    def to_text(self) -> str:
        w = max(len(c.name) for c in self.cases) if self.cases else 4
        lines = [f"{'case':<{w}}  result  detail"]
        lines += [f"{c.name:<{w}}  {'pass' if c.passed else 'FAIL':<6}  {c.detail}" for c in self.cases]
        lines.append(f"overall: {'pass' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def positivity_profiles(grid: PeriodicGrid1D, count: int) -> list[SpectralField1D]:
    """Odd profiles, nonnegative on ``[0, L/2]``: ``sin(mu x)^p exp(c cos(mu x))``, ``p`` in {1, 3}."""
    mu = 2 * np.pi / grid.L
    out = []
    cs = np.linspace(-2.0, 2.0, max((count + 1) // 2, 1))
    for k in range(count):
        p = 1 if k % 2 == 0 else 3
        c = cs[k // 2]
        out.append(SpectralField1D.from_function(grid, lambda x: np.sin(mu * x) ** p * np.exp(c * np.cos(mu * x))))
    return out


def _bad_regions(kind, x1, x2, rng):
    if kind == 0:
        return [rectangle(0.0, 2.0 * x1, 0.0, x2)]  # extremal configuration
    a, b = np.sort(rng.uniform(0.0, 4.0 * x1, 2))
    c, d = np.sort(rng.uniform(0.0, 2.0 * x2, 2))
    if kind == 1:
        return [rectangle(a, b + 1e-12, c, d + 1e-12)]
    m = 0.5 * (c + d)
    return [rectangle(a, b + 1e-12, c, m), rectangle(0.5 * a, b + 1e-12, m, d + 1e-12)]


def verify_kernels(verify: dict, seed: int = 0, hl_kernel=hl_kernel_K) -> VerifyReport:
    """Run every verifier; ``verify`` holds the ``[verify]`` table of a run spec.

    ``hl_kernel`` replaces the HL kernel in the property sweep (fault injection).
    Good-part checks sample ``x1`` log-uniformly in ``[1e-3 d, d]``, ``x2 / x1``
    uniformly in ``(0, 1]``, where ``d`` is the measured largest passing ``x1``
    for each ``alpha`` (the empirical ``delta_alpha``).
    """
    rep = VerifyReport()
    rng = np.random.default_rng(seed)

    kr = hl_kernel_property_check(PeriodicGrid1D(256), samples=verify["hl_samples"], seed=seed, kernel=hl_kernel)
    first = kr.violations[0] if kr.violations else None
    rep.cases.append(VerifyCase("hl_kernel_properties", kr.passed,
                                f"samples={kr.samples} min_K={kr.min_K:.6g} min_K_upper={kr.min_K_upper:.6g}"
                                + (f" first violation {first[0]} at x={first[1]:.17g} y={first[2]:.17g}"
                                   if first else "")))

    g = PeriodicGrid1D(256)
    levels = np.linspace(0.05, 0.5 * g.L - 0.05, verify["positivity_levels"])
    worst, where = np.inf, None
    for i, w in enumerate(positivity_profiles(g, verify["positivity_profiles"])):
        for a in levels:
            v, err = hl_positivity_integral(w, float(a))
            if v + err < worst:
                worst, where = v + err, (i, float(a), v, err)
    rep.cases.append(VerifyCase("hl_positivity", worst >= 0.0,
                                f"min(value + error) = {worst:.6g} at profile {where[0]}, a = {where[1]:.6g}"))

    n = verify["bound_points"]
    for alpha in SUITE_ALPHAS:
        d = largest_passing_x1(alpha)
        rep.delta_alpha[alpha] = d
        bad_fail, good_fail = [], []
        for k in range(n):
            x1 = float(np.exp(rng.uniform(np.log(1e-3), np.log(0.5))))
            x2 = float(rng.uniform(0.0, 1.0)) * x1
            chk = bad_part_bound_check(_bad_regions(k % 3, x1, x2, rng), (x1, x2), alpha)
            if not chk.passed:
                bad_fail.append(((x1, x2), chk))
            y1 = float(d * np.exp(rng.uniform(np.log(1e-3), 0.0)))
            y2 = float(rng.uniform(0.0, 1.0)) * y1
            chk = good_part_bound_check((y1, y2), alpha, delta=d)
            if not chk.passed:
                good_fail.append(((y1, y2), chk))
        for name, fails in (("bad_part_bound", bad_fail), ("good_part_bound", good_fail)):
            det = f"{n} points"
            if name == "good_part_bound":
                det += f", x1 <= delta_alpha = {d:.4g}"
            if fails:
                x, c = fails[0]
                det += f"; {len(fails)} failed, first x = ({x[0]:.17g}, {x[1]:.17g}) value {c.value:.6g} bound {c.bound:.6g}"
            rep.cases.append(VerifyCase(f"{name}[alpha={alpha:.6g}]", not fails, det))

    grid = np.unique(np.r_[np.geomspace(1e-3, 1.0 / 24.0, verify["alpha_grid"]), 1.0 / 24.0])
    margins = [coefficient_margin(a) for a in grid]
    bad = [m for m in margins if not m.dominates]
    rep.cases.append(VerifyCase("coefficient_margin", not bad,
                                f"{len(grid)} alphas in [1e-3, 1/24]"
                                + (f"; fails at alpha = {bad[0].alpha:.6g}" if bad else "")))
    m = coefficient_margin(1.0 / 24.0)
    # quoted to four decimals: agreement within one unit in the last place
    close = abs(m.good - 3.5306) <= 1e-4 and abs(m.bad - 2.8650) <= 1e-4
    rep.cases.append(VerifyCase("coefficient_values[alpha=1/24]", close,
                                f"good {m.good:.6f}, bad {m.bad:.6f}, margin {m.margin:.6f} vs {m.required:.6f}"))
    return rep

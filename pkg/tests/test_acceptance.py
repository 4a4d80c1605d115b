"""Acceptance criteria 1-14; each test prints one ``criterion N: PASS|FAIL`` line."""

import time

import numpy as np
import pytest

from blowuplab.cli import run
from blowuplab.config import spec_from_dict
from blowuplab.diagnostics import (
    FitRejected,
    TimeSeries,
    conservation_report,
    estimate_blowup_time,
    fit_double_exponential,
)
from blowuplab.fields2d import (
    FlowController,
    FlowState2D,
    KSTracking,
    PolarGrid,
    direct_bs_quadrature,
    ks_initial_vorticity,
    run_euler,
    to_frame,
    velocity_at,
)
from blowuplab.models1d import (
    IntervalField,
    IntervalGrid,
    StepController,
    cky_velocity,
    hl_positivity_integral,
    hl_kernel_property_check,
    run_cky,
    run_periodic,
)
from blowuplab.spectral1d import (
    PeriodicGrid1D,
    SpectralField1D,
    hilbert_transform,
    periodic_bs_velocity,
    spectral_derivative,
)
from blowuplab.verify import SUITE_ALPHAS, positivity_profiles, verify_kernels

C_B = 5.0  # run constant bounding |B1| / ||omega_0||_inf


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return emit


def collect(rows):
    return TimeSeries(rows[0], rows[1:])


def read_csv(path):
    return TimeSeries.from_csv(path.read_text())


# ---------------------------------------------------------------- reference runs shared with criterion 14

CLM_ORACLE = {"model": "clm", "t_end": 1.0, "grid": {"n": 256}, "time": {"dt": 1e-3, "dt_max": 1e-3}}
CLM_BLOWUP = {"model": "clm", "t_end": 1.9, "grid": {"n": 256}, "time": {"dt": 1e-3, "dt_max": 1e-3}}
HL_REF = {"model": "hl"}
PATCH_REF = {"model": "sqg_patch", "params": {"alpha": 0.04, "eps": 0.05}}


def timed_run(cfg, out):
    spec = spec_from_dict(cfg)
    t0 = time.perf_counter()
    rep = run(spec, str(out))
    return spec, rep, out / spec.output["csv"], time.perf_counter() - t0


@pytest.fixture(scope="module")
def clm_runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("clm")
    return timed_run(CLM_ORACLE, base / "oracle"), timed_run(CLM_BLOWUP, base / "blowup")


@pytest.fixture(scope="module")
def hl_run(tmp_path_factory):
    return timed_run(HL_REF, tmp_path_factory.mktemp("hl"))


@pytest.fixture(scope="module")
def patch_run(tmp_path_factory):
    return timed_run(PATCH_REF, tmp_path_factory.mktemp("patch"))


# ---------------------------------------------------------------- 1

def test_criterion_01_clm(clm_runs, report):
    (_, rep1, _, s1), (_, _, csv2, s2) = clm_runs
    err = rep1.extras["oracle_error"]
    fit = estimate_blowup_time(read_csv(csv2), "max_omega", window=(1.0, 1.9), order=2, exclude_tail=0.0)
    T = fit.params["T"]
    ok = err <= 1e-6 and abs(T - 2.0) <= 0.02 and s1 + s2 < 5.0
    assert report(1, ok, f"oracle error {err:.3g}, T = {T:.5f}, runtime {s1 + s2:.2f} s")


# ---------------------------------------------------------------- 2

def _bandlimited(grid, rng):
    c = np.zeros(grid.n // 2 + 1, complex)
    k = grid.n // 4
    c[1 : k + 1] = rng.normal(size=k) + 1j * rng.normal(size=k)
    return SpectralField1D.from_coeffs(grid, c)


def test_criterion_02_spectral_identities(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst_inv = worst_skew = worst_bs = 0.0
    for i in range(100):
        g = PeriodicGrid1D([64, 256, 1024][i % 3], [2 * np.pi, 1.0, 7.5][i % 3])
        f, h = _bandlimited(g, rng), _bandlimited(g, rng)
        hhf = hilbert_transform(hilbert_transform(f)).values
        worst_inv = max(worst_inv, np.linalg.norm(hhf + f.values) / np.linalg.norm(f.values))
        lhs = np.dot(f.values, hilbert_transform(h).values)
        rhs = -np.dot(h.values, hilbert_transform(f).values)
        worst_skew = max(worst_skew, abs(lhs - rhs) / (np.linalg.norm(f.values) * np.linalg.norm(h.values)))
        ux = spectral_derivative(periodic_bs_velocity(f)).values
        hf = hilbert_transform(f).values
        worst_bs = max(worst_bs, np.max(np.abs(ux - hf)) / max(1.0, np.max(np.abs(hf))))
    secs = time.perf_counter() - t0
    ok = worst_inv <= 1e-12 and worst_skew <= 1e-12 and worst_bs <= 1e-10 and secs < 5.0
    assert report(2, ok, f"H^2+I {worst_inv:.2e}, skew {worst_skew:.2e}, d/dx u - Hw {worst_bs:.2e}, {secs:.2f} s")


# ---------------------------------------------------------------- 3

def test_criterion_03_degregorio_steady(report):
    t0 = time.perf_counter()
    errs = {}
    for name, f in (("sin", np.sin), ("cos", np.cos)):
        rows = []
        rep = run_periodic("degregorio", 256, 10.0, StepController(dt_max=1e-2), rows.append, omega0=f)
        st = rep.extras["final_state"]
        errs[name] = float(np.max(np.abs(st.omega.values - f(st.omega.grid.x))))
        assert rep.verdict == "completed"
    secs = time.perf_counter() - t0
    ok = max(errs.values()) <= 1e-8 and secs < 10.0
    assert report(3, ok, f"sin {errs['sin']:.2e}, cos {errs['cos']:.2e} at t = 10, {secs:.2f} s")


# ---------------------------------------------------------------- 4

def test_criterion_04_hl_kernel(report):
    t0 = time.perf_counter()
    kr = hl_kernel_property_check(PeriodicGrid1D(256), samples=10_000, seed=4)
    secs = time.perf_counter() - t0
    ok = kr.passed and kr.min_K >= 0.0 and kr.min_K_upper >= 2.0 and secs < 5.0
    assert report(4, ok, f"{kr.samples} pairs, min K {kr.min_K:.4g}, min K on x<y {kr.min_K_upper:.6g}, "
                         f"violations {len(kr.violations)}, {secs:.2f} s")


# ---------------------------------------------------------------- 5

def test_criterion_05_hl_positivity(report):
    t0 = time.perf_counter()
    g = PeriodicGrid1D(256)
    worst, where = np.inf, None
    for i, w in enumerate(positivity_profiles(g, 20)):
        for a in np.linspace(0.05, 0.5 * g.L - 0.05, 10):
            v, err = hl_positivity_integral(w, float(a))
            if v + err < worst:
                worst, where = v + err, (i, a)
    secs = time.perf_counter() - t0
    ok = worst >= 0.0 and secs < 10.0
    assert report(5, ok, f"200 cases, min(value + error) {worst:.3g} at profile {where[0]}, a = {where[1]:.4g}, "
                         f"{secs:.2f} s")


# ---------------------------------------------------------------- 6

@pytest.mark.slow
def test_criterion_06_hl_blowup(hl_run, report):
    _, rep, csv, secs = hl_run
    ts = read_csv(csv)
    t, res = ts.t, ts.column("resolved") == 1
    tx = ts.column("max_theta_x")
    ok_rows = ts.column("tracker_ok") == 1
    growth = float(tx[res].max() / tx[0])
    first_bad = t[~ok_rows][0] if not ok_rows.all() else None
    ok = rep.verdict == "blow-up suspected" and growth >= 1e3 and ok_rows.all() and secs < 300
    assert report(6, ok, f"verdict '{rep.verdict}', theta_x growth {growth:.3g} on resolved window "
                         f"[0, {t[res][-1]:.4g}], tracker inequalities "
                         + ("hold at every step" if first_bad is None else f"first fail at t = {first_bad:.4g}")
                         + f", c0 = {rep.extras['c0']:.4f}, {secs:.0f} s")


# ---------------------------------------------------------------- 7

def test_criterion_07_cky(report):
    t0 = time.perf_counter()
    g = IntervalGrid(1001)
    u = cky_velocity(IntervalField(g, np.ones(g.n))).values
    x = g.x
    ref = np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)
    vel_err = float(np.max(np.abs(u - ref)))

    rows = []
    rep = run_cky(512, 5.0, StepController(dt_max=1e-2), rows.append)
    ts = collect(rows)
    keep = len(ts.t) - int(np.floor(0.05 * len(ts.t)))
    t = ts.t[:keep]
    third = keep // 3
    superlinear = True
    for c in (c for c in ts.columns if c.startswith("psi_")):
        psi = ts.column(c)[:keep]
        early = (psi[third] - psi[0]) / (t[third] - t[0])
        late = (psi[-1] - psi[-third]) / (t[-1] - t[-third])
        superlinear &= bool(late > 2.0 * early > 0.0)
    secs = time.perf_counter() - t0
    ok = vel_err <= 1e-10 and rep.verdict == "blow-up suspected" and superlinear and secs < 120
    assert report(7, ok, f"velocity error {vel_err:.2e}, verdict '{rep.verdict}' ({rep.reason}), "
                         f"psi superlinear {superlinear}, {secs:.1f} s")


# ---------------------------------------------------------------- 8

def _gauss(g, x0, y0, s):
    return np.exp(-((g.X - x0) ** 2 + (g.Y - y0) ** 2) / s)


@pytest.mark.slow
def test_criterion_08_euler_conservation(report):
    t0 = time.perf_counter()
    g = PolarGrid(128, 256)
    data = {
        "odd dipole": (_gauss(g, 0.3, -0.4, 0.05) - _gauss(g, -0.3, -0.4, 0.05), True),
        "off-centre vortex": (_gauss(g, 0.3, 0.1, 0.08), False),
    }
    ok, parts = True, []
    for name, (w, odd) in data.items():
        rows = []
        run_euler(FlowState2D("euler_disk", g, 0.0, w, symmetry_enforced=odd), 5.0,
                  FlowController(dt_max=0.05, cfl=1.0), rows.append)
        rep = conservation_report(collect(rows), ["omega_l1", "omega_l2", "omega_inf", "energy"])
        d = rep.drift
        ok &= rep.passed(1e-3, ["omega_l1", "omega_l2", "omega_inf"]) and d["energy"] <= 5e-3
        parts.append(f"{name}: L1 {d['omega_l1']:.1e}, L2 {d['omega_l2']:.1e}, Linf {d['omega_inf']:.1e}, "
                     f"energy {d['energy']:.1e}")
    secs = time.perf_counter() - t0
    assert report(8, ok and secs < 600, "; ".join(parts) + f", {secs:.0f} s")


# ---------------------------------------------------------------- 9

def test_criterion_09_dual_path(report):
    t0 = time.perf_counter()
    g = PolarGrid(128, 256)
    fields = {
        "constant": np.full(g.shape, 4.0),
        "ks": ks_initial_vorticity(g, 0.05),
        "odd bump": _gauss(g, 0.3, -0.4, 0.05) - _gauss(g, -0.3, -0.4, 0.05),
    }
    rng = np.random.default_rng(9)
    worst = {}
    for name, w in fields.items():
        r = 0.9 * np.sqrt(rng.uniform(0.05, 1.0, 20))
        a = rng.uniform(0.0, 2 * np.pi, 20)
        x1, x2 = to_frame(r * np.cos(a), r * np.sin(a))
        d1, d2 = direct_bs_quadrature(w, g, x1, x2)
        p1, p2 = velocity_at(FlowState2D("euler_disk", g, 0.0, w), x1, x2)
        worst[name] = float(np.max(np.hypot(d1 - p1, d2 - p2) / np.hypot(p1, p2)))
    secs = time.perf_counter() - t0
    ok = max(worst.values()) <= 1e-3 and secs < 120
    assert report(9, ok, ", ".join(f"{k} {v:.2e}" for k, v in worst.items()) + f", {secs:.1f} s")


# ---------------------------------------------------------------- 10

@pytest.mark.slow
def test_criterion_10_ks_scenario(report):
    t0 = time.perf_counter()
    g = PolarGrid(256, 512)
    st = FlowState2D("euler_disk", g, 0.0, ks_initial_vorticity(g, 0.05), symmetry_enforced=True)
    rows = []
    run_euler(st, 10.0, FlowController(dt_max=0.05, cfl=1.0), rows.append, KSTracking())
    ts = collect(rows)
    secs = time.perf_counter() - t0
    w0 = ts.column("omega_inf")[0]

    a = ts.column("a")
    live = np.isfinite(a)
    front = TimeSeries(["t", "inv_a"], [[t, 1.0 / v] for t, v in zip(ts.t[live], a[live])])
    try:
        fit = fit_double_exponential(front, "inv_a")
        y = np.log(-np.log(a[live]))
        slope, rel = fit.params["kappa"], fit.residual / (y.max() - y.min())
    except FitRejected:
        slope, rel = float("nan"), float("inf")

    b1 = [c for c in ts.columns if c.startswith("B1_")]
    b1_max = max(float(np.nanmax(np.abs(ts.column(c)))) for c in b1)
    growth = {c: float(np.nanmax(ts.column(c)) - ts.column(c)[0])
              for c in ts.columns if c.startswith("Omega_") and not c.startswith("Omega_err")}
    diag = np.concatenate([ts.column(c) for c in ts.columns if c.startswith("diag_")])
    diag = diag[np.isfinite(diag)]
    ok = (slope > 0 and rel < 0.1 and b1_max <= C_B * w0 and min(growth.values()) >= np.log(2)
          and diag.min() >= 0.5 and diag.max() <= 2.0 and secs < 1800)
    assert report(10, ok, f"slope {slope:.3f}, residual {100 * rel:.1f}% of range (front tracked to "
                          f"t = {ts.t[live][-1]:.3g}), max|B1| {b1_max:.3g} <= {C_B:g}|w0|, Omega growth "
                          + ", ".join(f"{v:.3f}" for v in growth.values())
                          + f" vs log 2, diagonal [{diag.min():.3f}, {diag.max():.3f}], {secs:.0f} s")


# ---------------------------------------------------------------- 11

def test_criterion_11_patch_kernels(report):
    t0 = time.perf_counter()
    rep = verify_kernels({"hl_samples": 100, "positivity_profiles": 1, "positivity_levels": 1,
                          "bound_points": 50, "alpha_grid": 50})
    cases = [c for c in rep.cases if c.name.startswith(("bad_part", "good_part", "coefficient"))]
    secs = time.perf_counter() - t0
    ok = all(c.passed for c in cases) and len(cases) == 2 * len(SUITE_ALPHAS) + 2 and secs < 300
    failed = [c.name for c in cases if not c.passed]
    values = next(c for c in cases if c.name.startswith("coefficient_values"))
    assert report(11, ok, f"{len(cases)} checks, failed {failed or 'none'}; {values.detail}, {secs:.1f} s")


# ---------------------------------------------------------------- 12

@pytest.mark.slow
def test_criterion_12_patch_reference(patch_run, report):
    spec, rep, csv, secs = patch_run
    ts = read_csv(csv)
    alpha, eps = spec.params["alpha"], spec.params["eps"]
    x_f, h = ts.column("front"), ts.column("h_min")
    far = x_f > 3.0 * h
    contained = bool(np.all(ts.column("contained")[far] == 1))
    T = 60.0 * (3.0 * eps) ** (2.0 * alpha)
    near = x_f <= spec.params["delta_alpha"]
    excess = ts.column("front_u1")[near] - ts.column("bound")[near]
    worst = float(excess.max()) if excess.size else float("-inf")
    ok = (contained and rep.verdict == "contact" and rep.t <= 1.2 * T and worst <= 1e-8 and secs < 1800)
    assert report(12, ok, f"containment until front < 3 spacings {contained}, verdict '{rep.verdict}' at "
                          f"t = {rep.t:.4g} (1.2T = {1.2 * T:.4g}), max(u1 - bound) {worst:.3g} on "
                          f"{int(near.sum())} steps with x_f <= {spec.params['delta_alpha']:g}, {secs:.0f} s")


# ---------------------------------------------------------------- 13

@pytest.mark.slow
def test_criterion_13_alpha_zero_control(tmp_path, report):
    cfg = {"model": "sqg_patch", "t_end": 10.0, "params": {"alpha": 0.0, "eps": 0.05}}
    _, rep, csv, secs = timed_run(cfg, tmp_path)
    gap = float(read_csv(csv).column("gap").min())
    if rep.verdict == "contact":
        gap = min(gap, rep.extras["gap"])
    ok = rep.verdict != "contact" and rep.t >= 10.0 * (1 - 1e-12) and gap >= 1e-3 and secs < 1800
    assert report(13, ok, f"verdict '{rep.verdict}' at t = {rep.t:.4g}, min gap {gap:.3g}, {secs:.0f} s")


# ---------------------------------------------------------------- 14

@pytest.mark.slow
def test_criterion_14_determinism(clm_runs, hl_run, patch_run, tmp_path, report):
    same = {}
    for label, cfg, first in (("clm oracle", CLM_ORACLE, clm_runs[0]), ("clm blow-up", CLM_BLOWUP, clm_runs[1]),
                              ("hl", HL_REF, hl_run), ("patch", PATCH_REF, patch_run)):
        _, _, csv, _ = timed_run(cfg, tmp_path / label.replace(" ", "_"))
        same[label] = csv.read_bytes() == first[2].read_bytes()
    assert report(14, all(same.values()), ", ".join(f"{k} {'identical' if v else 'DIFFERS'}" for k, v in same.items()))

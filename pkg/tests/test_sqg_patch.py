import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blowuplab.sqg_patch import (
    PATCH_COLUMNS,
    BarrierState,
    ContactDetected,
    PatchContour,
    PatchController,
    PatchSystem,
    Spacing,
    bad_coefficient,
    bad_part_bound_check,
    barrier_containment,
    barrier_position,
    barrier_time,
    check_contact,
    coefficient_margin,
    combined_kernel,
    contains,
    contour_velocity,
    direct_patch_quadrature,
    evolve_patch,
    front,
    front_bound,
    good_coefficient,
    good_part_bound_check,
    initial_patch,
    kernel_split,
    node_velocities,
    rectangle,
    run_patch,
    u1_over_region,
)


def circle(center, radius, n=128, weight=1.0):
    th = 2 * np.pi * np.arange(n) / n
    return PatchContour(np.c_[center[0] + radius * np.cos(th), center[1] + radius * np.sin(th)], weight)


def box(a, b, c, d, n=16, weight=1.0):
    """Counterclockwise rectangle outline ``[a, b] x [c, d]`` with ``n`` nodes per side."""
    s = np.linspace(0.0, 1.0, n, endpoint=False)
    pts = np.vstack([
        np.c_[a + (b - a) * s, np.full(n, c)],
        np.c_[np.full(n, b), c + (d - c) * s],
        np.c_[b - (b - a) * s, np.full(n, d)],
        np.c_[np.full(n, a), d - (d - c) * s],
    ])
    return PatchContour(pts, weight)


@pytest.fixture(scope="module")
def reference_patch():
    return initial_patch(0.05, spacing=Spacing(h_max=0.05, h_floor=1e-3))


# ---------------------------------------------------------------- contours and systems


def test_contour_validation():
    with pytest.raises(ValueError):
        PatchContour(np.zeros((3, 2)))
    with pytest.raises(ValueError):
        PatchContour(circle((0, 1), 0.5).nodes[::-1])
    with pytest.raises(ValueError):
        PatchContour(circle((0, 0.2), 0.5).nodes)
    with pytest.raises(ValueError):
        PatchSystem([circle((0, 1), 0.5)], 0.0, odd_symmetry=True)


@pytest.mark.parametrize("alpha", [0.5, 0.7, -0.1])
def test_alpha_range(alpha):
    with pytest.raises(ValueError, match=r"alpha out of range \[0, 0.5\)"):
        PatchSystem([circle((1, 1), 0.5)], alpha)


def test_redistribution_spacing():
    sp = Spacing(h_max=0.05, h_floor=1e-3)
    c = circle((1.0, 1.0), 0.5, n=400).redistribute(sp)
    assert c.spacing.min() >= 0.5 * 1e-3
    assert c.spacing.max() <= 2.0 * 0.05
    assert c.area == pytest.approx(np.pi * 0.25, rel=1e-3)
    rel, _ = c.self_gap()
    assert rel >= 0.1


# ---------------------------------------------------------------- velocity


def test_empty_system_has_zero_velocity():
    sys_ = PatchSystem([], 0.04)
    X = np.array([[0.3, 0.2], [1.0, 0.0]])
    assert np.all(contour_velocity(sys_, X) == 0)
    assert np.all(direct_patch_quadrature(sys_, X) == 0)


def _shapes():
    return {
        "box": box(0.2, 0.9, 0.0, 0.6),
        "ellipse": PatchContour(np.c_[0.8 + 0.4 * np.cos(np.linspace(0, 2 * np.pi, 160, endpoint=False)),
                                      0.7 + 0.25 * np.sin(np.linspace(0, 2 * np.pi, 160, endpoint=False))]),
    }


@pytest.mark.parametrize("alpha", [0.0, 0.02, 1.0 / 24.0])
@pytest.mark.parametrize("shape", ["box", "ellipse"])
def test_contour_matches_direct_quadrature(alpha, shape):
    sys_ = PatchSystem([_shapes()[shape]], alpha)
    rng = np.random.default_rng(7)
    X = np.c_[rng.uniform(0.0, 1.5, 50), rng.uniform(0.0, 1.2, 50)]
    uc = contour_velocity(sys_, X)
    ud = direct_patch_quadrature(sys_, X)
    rel = np.hypot(*(uc - ud).T) / np.hypot(*ud.T)
    assert rel.max() <= 1e-3


@pytest.mark.parametrize("dist", [1.0, 2.0, 3.0])
def test_circle_velocity_against_quadrature(dist):
    sys_ = PatchSystem([circle((0.0, 5.0), 0.5)], 0.05, odd_symmetry=False)
    X = np.array([[dist * 1.5 * np.cos(a), 5.0 + dist * 1.5 * np.sin(a)] for a in (0.3, 2.0, 4.0)])
    uc = contour_velocity(sys_, X)
    ud = direct_patch_quadrature(sys_, X)
    assert np.max(np.hypot(*(uc - ud).T) / np.hypot(*ud.T)) <= 1e-3


@pytest.mark.parametrize("alpha", [0.0, 0.04, 0.2])
def test_wall_tangency_and_axis(alpha, reference_patch):
    sys_ = PatchSystem([reference_patch], alpha)
    wall = np.c_[np.linspace(0.0, 4.0, 17), np.zeros(17)]
    axis = np.c_[np.zeros(17), np.linspace(0.0, 4.0, 17)]
    u = contour_velocity(sys_, np.vstack([wall, axis]))
    scale = np.max(np.hypot(*u.T))
    assert np.max(np.abs(u[:17, 1])) <= 1e-8 * scale
    assert np.max(np.abs(u[17:, 0])) <= 1e-8 * scale
    un = node_velocities(sys_)[0]
    assert np.max(np.abs(un[reference_patch.on_wall, 1])) <= 1e-8 * scale


def test_symmetric_pair_gives_zero_at_origin():
    right = box(0.2, 0.5, 0.0, 0.3)
    # opposite weights: the u1 kernel is even in y1, so only the odd pair cancels on the axis
    left = PatchContour((right.nodes * [-1.0, 1.0])[::-1], -1.0)
    sys_ = PatchSystem([right, left], 0.04, odd_symmetry=False)
    u = contour_velocity(sys_, np.array([[0.0, 0.0]]))
    assert np.max(np.abs(u)) <= 1e-12


def test_point_vortex_far_field():
    r = 1.0 / np.sqrt(np.pi)  # unit area
    c = np.array([0.0, 3.0])
    sys_ = PatchSystem([circle(c, r, n=256)], 0.0, odd_symmetry=False)
    X = c + 20 * r * np.array([[1.0, 0.0], [0.0, 1.0], [-0.6, 0.8]])
    u = contour_velocity(sys_, X)
    area = sys_.contours[0].area

    def vortex(x, y, w):
        v = x - y
        return w * np.c_[v[:, 1], -v[:, 0]] / np.sum(v * v, axis=1)[:, None]

    expect = vortex(X, c, area) + vortex(X, c * [1, -1], -area)
    assert np.max(np.hypot(*(u - expect).T) / np.hypot(*expect.T)) <= 1e-2


def test_front_moves_left(reference_patch):
    sys_ = PatchSystem([reference_patch], 0.04)
    u = node_velocities(sys_)[0]
    from blowuplab.sqg_patch.evolve import front_index

    assert u[front_index(reference_patch), 0] < 0


# ---------------------------------------------------------------- evolution


def test_zero_weight_nodes_fixed():
    c = circle((1.0, 1.0), 0.5, n=64, weight=0.0)
    sys_ = PatchSystem([c], 0.04)
    new = evolve_patch(sys_, 0.1)
    assert new.t == pytest.approx(0.1)
    assert np.array_equal(new.contours[0].nodes, c.nodes)


def test_circle_area_and_centroid():
    c = circle((0.0, 1000.0), 0.5, n=96)
    sys_ = PatchSystem([c], 0.05, odd_symmetry=False)
    ctl = PatchController(dt_max=0.05, spacing=Spacing(h_max=0.03))
    a0, c0 = c.area, c.centroid
    u = node_velocities(sys_)
    while sys_.t < 1.0 - 1e-12:
        dt = ctl.step(sys_, u, 1.0)
        sys_ = evolve_patch(sys_, dt, ctl.spacing, velocity=u)
        u = node_velocities(sys_)
    k = sys_.contours[0]
    assert abs(k.area - a0) <= 1e-3 * a0
    assert np.hypot(*(k.centroid - c0)) <= 1e-3


def test_wall_nodes_stay_on_wall():
    sys_ = PatchSystem([box(0.3, 1.0, 0.0, 0.5)], 0.04)
    new = evolve_patch(sys_, 0.01, Spacing(h_max=0.05))
    on = new.contours[0].on_wall
    assert on.sum() >= 2
    assert np.all(new.contours[0].nodes[:, 1] >= 0)


def test_contact_with_mirror_detected():
    sys_ = PatchSystem([box(1e-4, 0.5, 0.0, 0.5, n=40)], 0.04)
    with pytest.raises(ContactDetected) as e:
        check_contact(sys_)
    assert e.value.location[0] == 0.0
    assert e.value.gap == pytest.approx(2e-4)


def test_contact_between_patches_detected():
    a = box(0.2, 0.5, 0.1, 0.4, n=20)
    b = box(0.5005, 0.8, 0.1, 0.4, n=20)
    with pytest.raises(ContactDetected, match="patches touch"):
        check_contact(PatchSystem([a, b], 0.04))


def test_run_patch_short(reference_patch):
    rows = []
    seen = []
    sys_ = PatchSystem([reference_patch], 0.04)
    rep = run_patch(sys_, 0.003, rows.append, PatchController(spacing=Spacing(h_max=0.05)), observer=seen.append)
    assert rep.verdict == "completed"
    assert rows[0] == PATCH_COLUMNS
    assert len(rows) == rep.steps + 2 == len(seen) + 1
    t = [r[0] for r in rows[1:]]
    assert t[-1] == pytest.approx(0.003)
    fronts = [r[2] for r in rows[1:]]
    assert all(b <= a + 1e-15 for a, b in zip(fronts, fronts[1:]))
    assert all(r[8] == 1.0 for r in rows[1:])
    assert not rep.extras["violations"]
    area = [r[5] for r in rows[1:]]
    assert abs(area[-1] - area[0]) <= 1e-3 * area[0]


def test_run_patch_alpha_zero_columns_nan(reference_patch):
    rows = []
    run_patch(PatchSystem([reference_patch], 0.0), 0.001, rows.append)
    r = rows[1]
    assert np.isnan(r[PATCH_COLUMNS.index("X")]) and np.isnan(r[PATCH_COLUMNS.index("bound")])


def test_front_bound_formula():
    assert front_bound(0.01, 0.04) == pytest.approx(-(0.01**0.92) / 2.0)


# ---------------------------------------------------------------- initial data and the barrier


@pytest.mark.parametrize("eps", [0.01, 0.05, 0.09])
def test_initial_patch_geometry(eps):
    c = initial_patch(eps)
    x_f, _ = front(c)
    assert eps <= x_f <= 2 * eps
    n = c.nodes
    assert np.all((n[:, 0] >= eps) & (n[:, 0] <= 4.0) & (n[:, 1] >= 0.0) & (n[:, 1] <= 4.0))
    inner = np.array([[2 * eps, 1e-9], [3.0, 1e-9], [3.0, 3.0], [2 * eps, 3.0]])
    assert np.all(contains(n, inner))
    assert c.on_wall.sum() >= 2
    inside, _ = barrier_containment(PatchSystem([c], 0.04), BarrierState.at(0.0, eps, 0.04))
    assert inside


def test_initial_patch_rejects_eps():
    with pytest.raises(ValueError):
        initial_patch(0.2)


def test_barrier_examples():
    eps, alpha = 0.05, 0.04
    T = barrier_time(eps, alpha)
    assert T == pytest.approx(50 * 0.15**0.08)
    assert barrier_position(0.0, eps, alpha) == pytest.approx(3 * eps)
    assert barrier_position(T, eps, alpha) == pytest.approx(0.0, abs=1e-12)
    assert barrier_position(T / 2, eps, alpha) == pytest.approx(((3 * eps) ** (2 * alpha) / 2) ** (1 / (2 * alpha)))
    with pytest.raises(ValueError):
        barrier_position(1.01 * T, eps, alpha)
    with pytest.raises(ValueError):
        barrier_time(eps, 0.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.001, 0.09), st.floats(0.005, 0.45), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_barrier_nonincreasing(eps, alpha, s, ds):
    T = barrier_time(eps, alpha)
    t0 = s * T
    t1 = min(T, t0 + ds * T)
    assert barrier_position(t1, eps, alpha) <= barrier_position(t0, eps, alpha) + 1e-15


def test_barrier_containment(reference_patch):
    b = BarrierState.at(0.0, 0.05, 0.04)
    inside, margin = barrier_containment(PatchSystem([reference_patch], 0.04), b)
    assert inside and margin > 0
    moved = PatchContour(reference_patch.nodes + [1.0, 0.0])
    inside, margin = barrier_containment(PatchSystem([moved], 0.04), b)
    assert not inside and margin < 0
    assert barrier_containment(PatchSystem([moved], 0.04), BarrierState(0.05, 0.04, 2.5)) == (True, np.inf)


# ---------------------------------------------------------------- kernel bounds


def test_kernel_split_axis_and_level():
    s = kernel_split((0.0, 0.3), (0.2, 0.5), 0.04)
    assert s.K11 == s.K12 and s.K13 == s.K14 and s.K1 == 0.0
    assert kernel_split((0.1, 0.3), (0.4, 0.3), 0.04).K11 == 0.0
    with pytest.raises(ValueError):
        kernel_split((0.1, 0.3), (0.1, 0.3), 0.04)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 1.0), st.floats(0.01, 1.0), st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_kernel_split_matches_combined(x1, x2, y1, y2):
    if np.hypot(x1 - y1, x2 - y2) < 1e-3:
        return
    s = kernel_split((x1, x2), (y1, y2), 0.04)
    ref = combined_kernel((x1, x2), (y1, y2), 0.04)
    assert abs(s.K1 - ref) <= 1e-12 * max(1.0, abs(s.K11) + abs(s.K12) + abs(s.K13) + abs(s.K14))


def test_bad_part_examples():
    zero = bad_part_bound_check([], (0.1, 0.05), 1.0 / 24.0)
    assert zero.value == 0.0 and zero.passed
    assert zero.bound == pytest.approx(0.3470, abs=2e-4)
    assert bad_coefficient(1.0 / 24.0) == pytest.approx(2.8650, abs=1e-4)


@pytest.mark.parametrize("alpha", [0.01, 0.02, 1.0 / 24.0])
@pytest.mark.parametrize("x", [(0.1, 0.05), (0.01, 0.01), (1e-3, 2e-4)])
def test_bad_part_extremal(alpha, x):
    chk = bad_part_bound_check([rectangle(0.0, 2 * x[0], 0.0, x[1])], x, alpha)
    assert chk.passed
    assert chk.value <= chk.bound


def test_bad_part_rejects_overlap_and_far_points():
    with pytest.raises(ValueError):
        bad_part_bound_check([rectangle(0, 1, 0, 1), rectangle(0.5, 2, 0.5, 2)], (0.1, 0.05), 0.04)
    with pytest.raises(ValueError):
        bad_part_bound_check([], (-0.1, 0.05), 0.04)


def test_good_part_examples():
    a = 1.0 / 24.0
    assert good_coefficient(a) == pytest.approx(3.5306, abs=1e-4)
    chk = good_part_bound_check((0.01, 0.005), a)
    # -3.5306 * 0.01^(11/12)
    assert chk.bound == pytest.approx(-0.05182, abs=1e-5)
    assert chk.passed
    with pytest.raises(ValueError):
        good_part_bound_check((0.1, 0.05), a, delta=0.05)


def test_good_part_scaling():
    # A(x) has unit size, so the ratio carries an O(x1^(2 alpha)) correction
    a, lam = 0.04, 0.5
    gaps = []
    for x1 in (1e-4, 1e-6, 1e-8, 1e-10):
        x = np.array([x1, 0.5 * x1])
        v0 = good_part_bound_check(tuple(x), a).value
        v1 = good_part_bound_check(tuple(lam * x), a).value
        gaps.append(abs(v1 / v0 - lam ** (1 - 2 * a)))
    assert all(b < g for g, b in zip(gaps, gaps[1:]))
    assert gaps[-1] <= 0.02 * lam ** (1 - 2 * a)


def test_u1_region_zero_on_axis():
    v, _ = u1_over_region((0.0, 0.1), rectangle(0.0, 1.0, 0.0, 1.0), 0.04)
    assert abs(v) <= 1e-12


def test_coefficient_margin_examples():
    m = coefficient_margin(1.0 / 24.0)
    assert m.good == pytest.approx(3.5306, abs=1e-4)
    assert m.bad == pytest.approx(2.8650, abs=1e-4)
    assert m.margin == pytest.approx(0.6656, abs=1e-4)
    assert m.required == pytest.approx(0.48)
    assert m.dominates and m.asserted
    small = coefficient_margin(1e-7)
    assert small.bad == pytest.approx(2 + np.log(2), abs=1e-5)
    assert small.good > 1e5
    out = coefficient_margin(0.2)
    assert not out.asserted
    assert np.isfinite(out.good) and np.isfinite(out.bad)

"""Patch evolution, initial data and the moving barrier region near the origin."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .contour import PatchContour, PatchSystem, Spacing, contains, point_segment_distance
from .velocity import contour_velocity


class ContactDetected(Exception):
    """Two boundaries (or a boundary and itself) came within the touch tolerance."""

    def __init__(self, message: str, location, gap: float, h_min: float):
        super().__init__(message)
        self.location = np.asarray(location, dtype=float)
        self.gap = gap
        self.h_min = h_min


def initial_patch(eps: float = 0.05, size: float = 3.5, spacing: Spacing | None = None) -> PatchContour:
    """Rectangle ``[1.5 eps, size] x [0, size]`` on the wall with top corners rounded (radius ``eps/2``).

    The bottom corners stay square: with the wall image they are interior
    points of a straight edge.  Nodes run counterclockwise from the front
    ``(1.5 eps, 0)``.
    """
    if not 0.0 < eps < 0.1:
        raise ValueError("eps must lie in (0, 0.1)")
    spacing = spacing or Spacing()
    a, r = 1.5 * eps, 0.5 * eps
    th = np.linspace(0.0, 0.5 * np.pi, 33)
    outline = np.vstack([
        [[a, 0.0], [size, 0.0]],
        np.c_[np.full(2, size), [0.0, size - r]],
        np.c_[size - r + r * np.cos(th), size - r + r * np.sin(th)][1:],
        np.c_[a + r - r * np.sin(th), size - r + r * np.cos(th)][1:],
        [[a, 0.5 * size]],
    ])
    fine = _densify(outline, 0.002)
    fine[np.abs(fine[:, 1]) < 1e-15, 1] = 0.0
    return PatchContour(fine).redistribute(spacing)


def _densify(poly, h):
    # closed polygon with every edge split into pieces no longer than h
    out = []
    for p, q in zip(poly, np.roll(poly, -1, axis=0)):
        n = max(int(np.ceil(np.hypot(*(q - p)) / h)), 1)
        out.append(p[None] + np.linspace(0.0, 1.0, n, endpoint=False)[:, None] * (q - p)[None])
    return np.vstack(out)


def front_index(contour: PatchContour) -> int:
    """Node of least abscissa; ties (a vertical edge) go to the lowest node."""
    x = contour.nodes[:, 0]
    tied = np.flatnonzero(x <= x.min() + 1e-12 * max(1.0, abs(x.min())))
    return int(tied[np.argmin(contour.nodes[tied, 1])])


def front(contour: PatchContour) -> tuple[float, np.ndarray]:
    """Leftmost abscissa and the node attaining it."""
    i = front_index(contour)
    return float(contour.nodes[i, 0]), contour.nodes[i]


def _velocities(system: PatchSystem, pts: list[np.ndarray]) -> list[np.ndarray]:
    sizes = [len(p) for p in pts]
    u = contour_velocity(system, np.vstack(pts))
    return np.split(u, np.cumsum(sizes)[:-1])


def check_contact(system: PatchSystem) -> None:
    """Raise ``ContactDetected`` when the system has lost simplicity at mesh tolerance.

    Distinct boundaries (including the mirror patch) touch below three times
    the smallest node spacing; a contour touches itself below a tenth of the
    local spacing; a free node below the wall has met its image.
    """
    cs = system.contours
    h_min = min(float(c.spacing.min()) for c in cs)
    tol = 3.0 * h_min
    for c in cs:
        if np.any(c.nodes[:, 1] < 0):
            k = int(np.argmin(c.nodes[:, 1]))
            raise ContactDetected("contour crossed the wall", c.nodes[k], 0.0, h_min)
        rel, where = c.self_gap()
        if rel < 0.1:
            raise ContactDetected("contour touches itself", where, rel, h_min)
        if system.odd_symmetry:
            xf, node = front(c)
            if 2.0 * xf < tol:
                raise ContactDetected("patch touches its mirror image", (0.0, node[1]), 2.0 * xf, h_min)
    for i, a in enumerate(cs):
        for b in cs[i + 1:]:
            d = point_segment_distance(a.nodes, b.nodes, np.roll(b.nodes, -1, axis=0))
            k = np.unravel_index(np.argmin(d), d.shape)
            if d[k] < tol:
                raise ContactDetected("patches touch", a.nodes[k[0]], float(d[k]), h_min)


def node_velocities(system: PatchSystem) -> list[np.ndarray]:
    """Velocity at every node, one array per contour."""
    return _velocities(system, [c.nodes for c in system.contours])


def evolve_patch(system: PatchSystem, dt: float, spacing: Spacing | None = None,
                 velocity: list[np.ndarray] | None = None) -> PatchSystem:
    """One Heun step of every node, wall nodes pinned to ``x2 = 0``, then
    arclength redistribution and the contact check.

    ``velocity`` may carry ``node_velocities(system)`` when already computed.
    """
    spacing = spacing or Spacing()
    P0 = [c.nodes for c in system.contours]
    walls = [c.on_wall for c in system.contours]
    u0 = velocity if velocity is not None else _velocities(system, P0)
    if all(not np.any(u) for u in u0):
        return replace(system, t=system.t + dt)
    pred = []
    for p, u, w in zip(P0, u0, walls):
        q = p + dt * u
        q[w, 1] = 0.0
        pred.append(q)
    mid = replace(system, contours=[replace(c, nodes=q) for c, q in zip(system.contours, pred)])
    u1 = _velocities(mid, pred)
    out = []
    for c, p, a, b, w in zip(system.contours, P0, u0, u1, walls):
        q = p + 0.5 * dt * (a + b)
        q[w, 1] = 0.0
        if np.any(q[~w, 1] <= 0.0):
            k = int(np.flatnonzero(~w)[np.argmin(q[~w, 1])])
            raise ContactDetected("contour crossed the wall", q[k], 0.0, float(c.spacing.min()))
        out.append(PatchContour(q, c.weight))
    new = replace(system, contours=[c.redistribute(spacing) for c in out], t=system.t + dt)
    check_contact(new)
    return new


def barrier_time(eps: float, alpha: float) -> float:
    """``T = 50 (3 eps)^(2 alpha)``, when the barrier front reaches the origin."""
    if not 0.0 < alpha < 0.5:
        raise ValueError("barrier needs alpha in (0, 0.5)")
    return 50.0 * (3.0 * eps) ** (2.0 * alpha)


def barrier_position(t: float, eps: float, alpha: float) -> float:
    """``X(t) = ((3 eps)^(2 alpha) - t/50)^(1/(2 alpha))``, solving ``X' = -X^(1 - 2 alpha)/(100 alpha)``."""
    T = barrier_time(eps, alpha)
    if t < 0 or t > T * (1 + 1e-12):
        raise ValueError(f"t = {t:g} outside [0, T = {T:g}]")
    return max((3.0 * eps) ** (2.0 * alpha) - t / 50.0, 0.0) ** (1.0 / (2.0 * alpha))


@dataclass(frozen=True)
class BarrierState:
    """``K(t) = {x1 in (X, 2), x2 in (0, x1)}`` with ``X = X(t)``."""

    eps: float
    alpha: float
    X: float

    @classmethod
    def at(cls, t: float, eps: float, alpha: float) -> "BarrierState":
        return cls(eps, alpha, barrier_position(t, eps, alpha))

    @property
    def empty(self) -> bool:
        return self.X >= 2.0

    @property
    def corners(self) -> np.ndarray:
        X = self.X
        return np.array([[X, 0.0], [2.0, 0.0], [2.0, 2.0], [X, X]])

    def boundary_samples(self, n: int = 200) -> np.ndarray:
        """Points on the left side, the diagonal and the right side; the wall side is shared with the patch."""
        X = self.X
        s = (np.arange(n) + 0.5) / n
        left = np.c_[np.full(n, X), X * s]
        diag = np.c_[X + (2.0 - X) * s, X + (2.0 - X) * s]
        right = np.c_[np.full(n, 2.0), 2.0 * s]
        return np.vstack([left, diag, right])


def barrier_containment(system: PatchSystem, barrier: BarrierState, n: int = 200) -> tuple[bool, float]:
    """Whether ``K(t)`` lies inside the first (right) patch, and the signed margin.

    The margin is the smallest distance from the sampled boundary of ``K``
    to the patch's free boundary, negative when a sample lies outside.
    """
    if barrier.empty:
        return True, float("inf")
    c = system.contours[0]
    pts = barrier.boundary_samples(n)
    inside = contains(c.nodes, pts)
    free = ~c.wall_segments()
    P = c.nodes[free]
    Q = np.roll(c.nodes, -1, axis=0)[free]
    d = point_segment_distance(pts, P, Q).min(axis=1)
    signed = np.where(inside, d, -d)
    return bool(np.all(inside)), float(signed.min())

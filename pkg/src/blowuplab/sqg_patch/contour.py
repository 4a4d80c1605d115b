"""Patch contours in the half-plane: geometry, images and arclength redistribution."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline


def signed_area(nodes: np.ndarray) -> float:
    x, y = nodes[:, 0], nodes[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def centroid(nodes: np.ndarray) -> np.ndarray:
    x, y = nodes[:, 0], nodes[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    c = x * yn - xn * y
    A = 0.5 * np.sum(c)
    return np.array([np.sum((x + xn) * c), np.sum((y + yn) * c)]) / (6.0 * A)


def point_segment_distance(pts: np.ndarray, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Distances ``(n_pts, n_seg)`` from points to segments ``P -> Q``."""
    d = Q - P
    L2 = np.maximum(np.sum(d * d, axis=1), 1e-300)
    w = pts[:, None, :] - P[None, :, :]
    s = np.clip(np.sum(w * d[None], axis=2) / L2[None], 0.0, 1.0)
    r = w - s[..., None] * d[None]
    return np.hypot(r[..., 0], r[..., 1])


def contains(nodes: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Even-odd rule for a closed polygon."""
    x, y = nodes[:, 0], nodes[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    px, py = pts[:, 0][:, None], pts[:, 1][:, None]
    crosses = (y[None] > py) != (yn[None] > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = x[None] + (py - y[None]) * (xn - x)[None] / (yn - y)[None]
    return np.sum(crosses & (px < xi), axis=1) % 2 == 1


@dataclass(frozen=True)
class Spacing:
    """Target node spacing ``clip(min(h_max, c_curv / sqrt(kappa), c_origin |z|), h_floor, h_max)``."""

    h_max: float = 0.05
    c_curv: float = 0.05
    c_origin: float = 0.1
    h_floor: float = 1e-3

    def __call__(self, z: np.ndarray, kappa: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            h = np.minimum(self.h_max, self.c_curv / np.sqrt(np.abs(kappa)))
        h = np.minimum(h, self.c_origin * np.hypot(z[:, 0], z[:, 1]))
        return np.clip(h, self.h_floor, self.h_max)


@dataclass
class PatchContour:
    """Closed counterclockwise polyline in ``x2 >= 0`` carrying the patch value ``weight``.

    Nodes with ``x2 == 0`` exactly form the (single, contiguous) wall segment.
    """

    nodes: np.ndarray
    weight: float = 1.0

    def __post_init__(self):
        self.nodes = np.array(self.nodes, dtype=float)
        if self.nodes.ndim != 2 or self.nodes.shape[1] != 2 or len(self.nodes) < 4:
            raise ValueError("nodes must be an (N >= 4, 2) array")
        if not np.all(np.isfinite(self.nodes)):
            raise ValueError("nodes must be finite")
        if np.any(self.nodes[:, 1] < 0):
            raise ValueError("contour must lie in the closed half-plane x2 >= 0")
        if signed_area(self.nodes) <= 0:
            raise ValueError("contour must be counterclockwise")

    @property
    def area(self) -> float:
        return signed_area(self.nodes)

    @property
    def centroid(self) -> np.ndarray:
        return centroid(self.nodes)

    @property
    def spacing(self) -> np.ndarray:
        """Length of the segment leaving each node."""
        d = np.roll(self.nodes, -1, axis=0) - self.nodes
        return np.hypot(d[:, 0], d[:, 1])

    @property
    def on_wall(self) -> np.ndarray:
        return self.nodes[:, 1] == 0.0

    def wall_segments(self) -> np.ndarray:
        """Mask of segments lying on the wall (both ends on it)."""
        w = self.on_wall
        return w & np.roll(w, -1)

    def self_gap(self) -> tuple[float, np.ndarray]:
        """Smallest node-to-segment distance over non-neighbouring pairs, relative to the
        local spacing, and the node where it occurs."""
        n = len(self.nodes)
        P = self.nodes
        Q = np.roll(P, -1, axis=0)
        D = point_segment_distance(P, P, Q)
        i = np.arange(n)
        # a node touches its own two segments and their immediate neighbours
        for k in (-2, -1, 0, 1):
            D[i, (i + k) % n] = np.inf
        h = np.maximum(self.spacing, np.roll(self.spacing, 1))
        rel = D / h[:, None]
        j = np.unravel_index(np.argmin(rel), rel.shape)
        return float(rel[j]), P[j[0]]

    def redistribute(self, spacing: Spacing) -> "PatchContour":
        """Respline by cumulative arclength and resample at the target spacing.

        The wall segment (if any) stays straight on ``x2 = 0``; the free arc is a
        cubic spline through the old nodes with its ends pinned to the wall.
        """
        wall = self.on_wall
        P = self.nodes
        if wall.sum() >= 2:
            # rotate so the wall run is P[0..m-1], then the free arc runs P[m-1] .. P[0]
            n = len(P)
            start = next(k for k in range(n) if wall[k] and not wall[k - 1])
            P = np.roll(P, -start, axis=0)
            m = int(np.argmin(P[:, 1] == 0.0)) if not np.all(P[:, 1] == 0.0) else n
            wall_pts = _resample_line(P[0], P[m - 1], spacing)
            arc = np.vstack([P[m - 1 :], P[:1]])
            free = _resample_arc(arc, spacing, periodic=False)
            nodes = np.vstack([wall_pts[:-1], free[:-1]])
            nodes[: len(wall_pts) - 1, 1] = 0.0
            nodes[len(wall_pts) - 1, 1] = 0.0
        else:
            nodes = _resample_arc(np.vstack([P, P[:1]]), spacing, periodic=True)[:-1]
        return replace(self, nodes=nodes)


def _cumulative(pts):
    d = np.diff(pts, axis=0)
    return np.concatenate([[0.0], np.cumsum(np.hypot(d[:, 0], d[:, 1]))])


def _place(s_fine, z_fine, kappa, spacing):
    # node positions equidistributing ds / h
    h = spacing(z_fine, kappa)
    dens = np.concatenate([[0.0], np.cumsum(0.5 * (1 / h[1:] + 1 / h[:-1]) * np.diff(s_fine))])
    n = max(int(np.ceil(dens[-1])), 1)
    return np.interp(np.linspace(0.0, dens[-1], n + 1), dens, s_fine)


def _resample_line(a, b, spacing):
    s = np.linspace(0.0, 1.0, 400)
    z = a[None] + s[:, None] * (b - a)[None]
    L = float(np.hypot(*(b - a)))
    t = _place(s * L, z, np.zeros_like(s), spacing) / max(L, 1e-300)
    return a[None] + t[:, None] * (b - a)[None]


def _resample_arc(pts, spacing, periodic):
    s = _cumulative(pts)
    keep = np.concatenate([[True], np.diff(s) > 1e-14 * s[-1]])
    s, pts = s[keep], pts[keep]
    if periodic:
        pts = pts.copy()
        pts[-1] = pts[0]
    cs = CubicSpline(s, pts, bc_type="periodic" if periodic else "not-a-knot")
    fine = np.linspace(0.0, s[-1], 8 * len(s) + 1)
    z = cs(fine)
    d1, d2 = cs(fine, 1), cs(fine, 2)
    kappa = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / np.maximum(np.hypot(d1[:, 0], d1[:, 1]) ** 3, 1e-300)
    out = cs(_place(fine, z, kappa, spacing))
    out[0], out[-1] = pts[0], pts[-1]
    return out


@dataclass
class PatchSystem:
    """Patches in the half-plane with exponent ``alpha`` in ``[0, 1/2)``.

    With ``odd_symmetry`` only the right patches are stored; each implies a
    mirror copy across the ``x2``-axis with the opposite weight.
    """

    contours: list[PatchContour]
    alpha: float
    odd_symmetry: bool = True
    t: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.alpha < 0.5:
            raise ValueError("alpha out of range [0, 0.5)")
        if self.odd_symmetry:
            for c in self.contours:
                if np.any(c.nodes[:, 0] < 0):
                    raise ValueError("with odd symmetry, contours must lie in x1 >= 0")

    def source_segments(self):
        """Segments ``(P, Q, weight)`` of all contours and their images.

        The wall image ``(y1, -y2)`` carries the opposite weight; with odd
        symmetry the mirror ``(-y1, y2)`` does too, and the point image ``-y``
        keeps the weight.  Reflections reverse the traversal so every image
        stays counterclockwise.
        """
        Ps, Qs, ws = [], [], []
        maps = [((1, 1), 1.0, False), ((1, -1), -1.0, True)]
        if self.odd_symmetry:
            maps += [((-1, 1), -1.0, True), ((-1, -1), 1.0, False)]
        for c in self.contours:
            if c.weight == 0:
                continue
            for (sx, sy), sw, flip in maps:
                n = c.nodes * np.array([sx, sy])
                if flip:
                    n = n[::-1]
                Ps.append(n)
                Qs.append(np.roll(n, -1, axis=0))
                ws.append(np.full(len(n), sw * c.weight))
        if not Ps:
            return np.zeros((0, 2)), np.zeros((0, 2)), np.zeros(0)
        return np.vstack(Ps), np.vstack(Qs), np.concatenate(ws)

    def source_polygons(self):
        """``(nodes, weight)`` for every contour and image, counterclockwise."""
        out = []
        maps = [((1, 1), 1.0, False), ((1, -1), -1.0, True)]
        if self.odd_symmetry:
            maps += [((-1, 1), -1.0, True), ((-1, -1), 1.0, False)]
        for c in self.contours:
            for (sx, sy), sw, flip in maps:
                n = c.nodes * np.array([sx, sy])
                out.append((n[::-1] if flip else n, sw * c.weight))
        return out

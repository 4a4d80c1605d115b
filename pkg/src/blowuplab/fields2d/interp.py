"""Lagrange interpolation (cubic or quintic) on the padded polar and strip grids."""

from __future__ import annotations

import numpy as np

from .grids import PolarGrid, StripGrid

PAD = 3


def _extrapolate_rows(f, side):
    # PAD quadratic-extrapolation ghost rows, ordered outward
    a, b, c = (f[-1], f[-2], f[-3]) if side == "top" else (f[0], f[1], f[2])
    ghosts = []
    for _ in range(PAD):
        g = 3 * a - 3 * b + c
        ghosts.append(g)
        a, b, c = g, a, b
    return np.stack(ghosts if side == "top" else ghosts[::-1])


def pad_disk(f: np.ndarray, grid: PolarGrid) -> np.ndarray:
    """Ghost rows: reflection through the centre inside, extrapolation outside.

    ``f(-r, theta) = f(r, theta + pi)`` holds for any scalar (it is the same
    point), including Cartesian velocity components.
    """
    h = grid.ntheta // 2
    inner = np.stack([np.roll(f[k], -h) for k in range(PAD - 1, -1, -1)])
    rows = np.concatenate([inner, f, _extrapolate_rows(f, "top")])
    return np.concatenate([rows[:, -PAD:], rows, rows[:, :PAD]], axis=1)


def pad_strip(f: np.ndarray) -> np.ndarray:
    rows = np.concatenate([_extrapolate_rows(f, "bottom"), f, _extrapolate_rows(f, "top")])
    return np.concatenate([rows[:, -PAD:], rows, rows[:, :PAD]], axis=1)


def _weights(s, order):
    """Lagrange weights on nodes ``-(order-1)/2 .. (order+1)/2`` at offset ``s`` in [0, 1)."""
    nodes = np.arange(-(order - 1) // 2, (order + 1) // 2 + 1)
    out = []
    for a in nodes:
        w = np.ones_like(s)
        for b in nodes:
            if b != a:
                w = w * (s - b) / (a - b)
        out.append(w)
    return nodes, out


def interp_padded(P: np.ndarray, rho, phi, period: int, clip: bool = False, order: int = 3):
    """Tensor Lagrange value (``order`` 3 or 5) of the padded array at fractional indices.

    ``rho`` is the row index (may lie in ``[-1/2, n_rows - 1/2]``), ``phi`` the
    periodic column index.  With ``clip`` the result is limited to the range
    of the four surrounding nodes, so no new extrema appear.
    """
    if order not in (3, 5):
        raise ValueError("order must be 3 or 5")
    rho = np.asarray(rho, dtype=float)
    phi = np.mod(np.asarray(phi, dtype=float), period)
    phi = np.where(phi >= period, 0.0, phi)  # mod of a tiny negative can round up to period
    i0 = np.floor(rho).astype(np.int64)
    j0 = np.floor(phi).astype(np.int64)
    s = rho - i0
    q = phi - j0
    nodes, wr = _weights(s, order)
    _, wc = _weights(q, order)
    ii = i0 + PAD
    jj = j0 + PAD
    out = np.zeros(rho.shape)
    for a, wa in zip(nodes, wr):
        row = np.zeros(rho.shape)
        for b, wb in zip(nodes, wc):
            row += wb * P[ii + a, jj + b]
        out += wa * row
    if clip:
        c00 = P[ii, jj]
        c01 = P[ii, jj + 1]
        c10 = P[ii + 1, jj]
        c11 = P[ii + 1, jj + 1]
        lo = np.minimum(np.minimum(c00, c01), np.minimum(c10, c11))
        hi = np.maximum(np.maximum(c00, c01), np.maximum(c10, c11))
        out = np.clip(out, lo, hi)
    return out


def disk_indices(grid: PolarGrid, x, y):
    """Fractional (row, column) indices of Cartesian points; radii are clamped to 1."""
    r = np.minimum(np.hypot(x, y), 1.0)
    th = np.arctan2(y, x)
    return r * grid.nr - 0.5, th / grid.dtheta


def strip_indices(grid: StripGrid, x, y):
    y = np.clip(y, 0.0, grid.H)
    return y / grid.dy - 0.5, np.asarray(x) / grid.dx


def interpolate(f, grid, x, y, clip=False, padded=None, order=3):
    """Value of grid field ``f`` at Cartesian points (disk-centred for the disk)."""
    if isinstance(grid, PolarGrid):
        P = pad_disk(f, grid) if padded is None else padded
        rho, phi = disk_indices(grid, x, y)
        return interp_padded(P, rho, phi, grid.ntheta, clip, order)
    P = pad_strip(f) if padded is None else padded
    rho, phi = strip_indices(grid, x, y)
    return interp_padded(P, rho, phi, grid.nx, clip, order)


def interpolant_range(f: np.ndarray, grid, candidates: int = 4, sub: int = 8, order: int = 5):
    """``(min, max)`` of the Lagrange interpolant, refined around the extreme nodes.

    Node extrema of a smooth field under-read a peak sitting between nodes by
    ``O(h^2 f'')``; each of the ``candidates`` largest and smallest nodes is
    resampled on a ``sub x sub`` lattice over its neighbouring cells.
    """
    P = pad_disk(f, grid) if isinstance(grid, PolarGrid) else pad_strip(f)
    period = grid.ntheta if isinstance(grid, PolarGrid) else grid.nx
    nrow = f.shape[0]
    lo, hi = float(f.min()), float(f.max())
    s = np.linspace(-1.0, 1.0, 2 * sub + 1)
    ds, dq = np.meshgrid(s, s, indexing="ij")
    order_idx = np.argsort(f, axis=None)
    for flat in np.concatenate([order_idx[:candidates], order_idx[-candidates:]]):
        i, j = np.unravel_index(flat, f.shape)
        rho = np.clip(i + ds, -0.5, nrow - 0.5)
        vals = interp_padded(P, rho, j + dq, period, order=order)
        lo = min(lo, float(vals.min()))
        hi = max(hi, float(vals.max()))
    return lo, hi


def interpolant_max_abs(f: np.ndarray, grid, candidates: int = 4, sub: int = 16) -> float:
    """``max |f|`` of the interpolant (see ``interpolant_range``)."""
    lo, hi = interpolant_range(f, grid, candidates, sub)
    return max(abs(lo), abs(hi))

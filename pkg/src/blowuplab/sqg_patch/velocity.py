"""Patch velocity: contour integrals (production) and area quadrature (oracle).

Velocity law: ``u(x) = sum_k theta_k int_{Omega_k} K(x - y) dy`` with
``K(v) = v_perp / |v|^(2 + 2 alpha)`` and ``v_perp = (v2, -v1)``, constant 1,
over the patches and their images.
"""

from __future__ import annotations

import numpy as np
from scipy.special import hyp2f1

from .contour import PatchSystem

_GX, _GW = np.polynomial.legendre.leggauss(6)


def _segment_geometry(X, P, Q):
    d = Q - P
    L = np.hypot(d[:, 0], d[:, 1])
    t = d / L[:, None]
    w = X[:, None, :] - P[None, :, :]
    s0 = np.sum(w * t[None], axis=2)  # foot of the perpendicular along the segment
    dist = np.abs(w[..., 0] * t[None, :, 1] - w[..., 1] * t[None, :, 0])
    return L, t, s0, dist


def _F_power(tau, d, alpha):
    # int_0^tau (d^2 + s^2)^(-alpha) ds, odd in tau
    a = np.abs(tau)
    out = np.empty_like(a)
    zero = d == 0.0
    out[zero] = a[zero] ** (1.0 - 2.0 * alpha) / (1.0 - 2.0 * alpha)
    nz = ~zero
    out[nz] = a[nz] * d[nz] ** (-2.0 * alpha) * hyp2f1(alpha, 0.5, 1.5, -((a[nz] / d[nz]) ** 2))
    return np.sign(tau) * out


def _G_log(tau, d):
    # int_0^tau log sqrt(d^2 + s^2) ds, odd in tau
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = d * d + tau * tau
        base = np.where(r2 > 0, 0.5 * tau * np.log(np.where(r2 > 0, r2, 1.0)), 0.0) - tau
        arc = np.where(d > 0, d * np.arctan(tau / np.where(d > 0, d, 1.0)), 0.0)
    return base + arc


def contour_velocity(system: PatchSystem, X, near: float = 3.0) -> np.ndarray:
    """Velocity at points ``X`` (shape ``(n, 2)``) from the contour form.

    ``u = -(1/(2 alpha)) sum_k theta_k oint |x - z|^(-2 alpha) dz`` for
    ``alpha > 0`` and ``u = sum_k theta_k oint log|x - z| dz`` at ``alpha = 0``
    (Green's theorem applied to the area law).  Each straight segment is
    integrated exactly when ``x`` lies within ``near`` segment lengths of it
    (this covers points on the contour, where the integrand is singular) and
    by 6-point Gauss-Legendre otherwise.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    P, Q, w = system.source_segments()
    if len(P) == 0:
        return np.zeros_like(X)
    alpha = system.alpha
    L, t, s0, dist = _segment_geometry(X, P, Q)
    if alpha == 0.0:
        I = _G_log(L[None] - s0, dist) - _G_log(-s0, dist)
        coef = 1.0
    else:
        # distance from x to the segment (not its line) decides near/far
        seg_dist = np.where(s0 < 0, np.hypot(dist, s0), np.where(s0 > L[None], np.hypot(dist, s0 - L[None]), dist))
        close = seg_dist < near * L[None]
        # far: Gauss-Legendre along the segment, computed for every pair and overwritten where close
        s = 0.5 * (_GX + 1.0)[None, None, :] * L[None, :, None]
        r2 = dist[..., None] ** 2 + (s - s0[..., None]) ** 2
        I = 0.5 * L[None, :] * (np.exp(-alpha * np.log(r2)) @ _GW)
        ci, cj = np.nonzero(close)
        if ci.size:
            a, dd = s0[ci, cj], dist[ci, cj]
            I[ci, cj] = _F_power(L[cj] - a, dd, alpha) - _F_power(-a, dd, alpha)
        coef = -1.0 / (2.0 * alpha)
    return coef * (I * w[None, :]) @ t


def direct_patch_quadrature(system: PatchSystem, X, nphi: int = 24) -> np.ndarray:
    """Velocity at ``X`` by area quadrature of the kernel over each polygon and image.

    Each polygon is fanned into signed triangles ``(x, p_i, p_{i+1})``; in polar
    coordinates about ``x`` the radial integral of ``|v|^(-1 - 2 alpha)`` is
    exact (``R^(1 - 2 alpha) / (1 - 2 alpha)``), which removes the singularity,
    and the angle is integrated by Gauss-Legendre.
    """
    if not 0.0 <= system.alpha < 0.5:
        raise ValueError("alpha out of range [0, 0.5)")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    e = 1.0 - 2.0 * system.alpha
    gx, gw = np.polynomial.legendre.leggauss(nphi)
    out = np.zeros_like(X)
    for nodes, weight in system.source_polygons():
        if weight == 0:
            continue
        for k, x in enumerate(X):
            p = nodes - x
            q = np.roll(p, -1, axis=0)
            cross = p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0]
            dot = np.sum(p * q, axis=1)
            dphi = np.arctan2(cross, dot)  # signed angle subtended by the edge
            ok = (np.abs(cross) > 1e-300) & (dphi != 0)
            p, q, dphi, cross = p[ok], q[ok], dphi[ok], cross[ok]
            phi0 = np.arctan2(p[:, 1], p[:, 0])
            edge = q - p
            phi = phi0[:, None] + 0.5 * dphi[:, None] * (gx[None, :] + 1.0)
            # ray x + R e(phi) meets the edge line where R = cross(p, q) / cross(e(phi), q - p)
            R = cross[:, None] / (np.cos(phi) * edge[:, 1, None] - np.sin(phi) * edge[:, 0, None])
            radial = np.abs(R) ** e / e
            # integrand -(sin phi, -cos phi) R^(1-2a)/(1-2a) over the subtended angle
            wts = 0.5 * dphi[:, None] * gw[None, :]
            out[k, 0] += weight * np.sum(wts * -np.sin(phi) * radial)
            out[k, 1] += weight * np.sum(wts * np.cos(phi) * radial)
    return out

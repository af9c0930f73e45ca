"""Numba twins of the hot numerical kernels.

Import of this module requires numba; the dispatcher falls back to the
numpy implementations when it is missing or disabled.  Loop bodies
mirror _impl_numpy operation for operation so the two backends agree to
rounding error.
"""

from __future__ import annotations

import numba as nb
import numpy as np


@nb.njit(cache=True, nogil=True)
def kde_weights(xs: np.ndarray, xi: np.ndarray, h: float) -> np.ndarray:
    m, d = xs.shape
    scale = (0.75 / h) ** d
    out = np.empty(m)
    for i in range(m):
        w = 1.0
        for k in range(d):
            z = (xs[i, k] - xi[k]) / h
            if z < -1.0 or z > 1.0:
                w = 0.0
                break
            w *= 1.0 - z * z
        out[i] = w * scale
    return out


@nb.njit(cache=True, nogil=True)
def sb_weight_matrix(
    xu: np.ndarray,
    xi: np.ndarray,
    xgrid: np.ndarray,
    delta_t: float,
    delta: float,
) -> np.ndarray:
    m, d = xu.shape
    nx = xgrid.shape[0]
    out = np.empty((m, nx))
    inv_two_dt = 1.0 / (2.0 * delta_t)
    inv_two_delta = 1.0 / (2.0 * delta)
    for i in range(m):
        q_xi = 0.0
        for k in range(d):
            diff = xu[i, k] - xi[k]
            q_xi += diff * diff
        base = q_xi * inv_two_delta
        for g in range(nx):
            q_x = 0.0
            for k in range(d):
                diff = xu[i, k] - xgrid[g, k]
                q_x += diff * diff
            out[i, g] = np.exp(base - q_x * inv_two_dt)
    return out


@nb.njit(cache=True, nogil=True)
def weighted_sums(
    fmat: np.ndarray, w: np.ndarray, xu: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    m, nx = fmat.shape
    d = xu.shape[1]
    g1 = np.zeros(nx)
    g2 = np.zeros((nx, d))
    for i in range(m):
        wi = w[i]
        if wi == 0.0:
            continue
        for g in range(nx):
            wf = wi * fmat[i, g]
            g1[g] += wf
            for k in range(d):
                g2[g, k] += wf * xu[i, k]
    inv_m = 1.0 / m
    for g in range(nx):
        g1[g] *= inv_m
        for k in range(d):
            g2[g, k] *= inv_m
    return g1, g2

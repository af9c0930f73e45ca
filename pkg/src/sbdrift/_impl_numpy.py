"""Pure-numpy implementations of the hot numerical kernels.

Kept in exact arithmetic agreement with the numba twin where possible:
same operation order, division by h rather than multiplication by 1/h.
"""

from __future__ import annotations

import numpy as np


def kde_weights(xs: np.ndarray, xi: np.ndarray, h: float) -> np.ndarray:
    """K_h(X_s^(m) - xi) for all m; xs is (M, d), xi is (d,)."""
    z = (xs - xi) / h
    inside = np.abs(z) <= 1.0
    factors = np.where(inside, 1.0 - z * z, 0.0)
    d = xs.shape[1]
    return factors.prod(axis=1) * (0.75 / h) ** d


def sb_weight_matrix(
    xu: np.ndarray,
    xi: np.ndarray,
    xgrid: np.ndarray,
    delta_t: float,
    delta: float,
) -> np.ndarray:
    """F(t, xi, x_g, X_u^(m)) for all pairs (m, g).

    xu is (M, d), xgrid is (nx, d); returns (M, nx).  The two quadratic
    forms are combined into one exponent before the single exp call.
    """
    to_x = xu[:, None, :] - xgrid[None, :, :]
    q_x = np.einsum("mgk,mgk->mg", to_x, to_x)
    to_xi = xu - xi
    q_xi = np.einsum("mk,mk->m", to_xi, to_xi)
    exponent = q_xi[:, None] / (2.0 * delta) - q_x / (2.0 * delta_t)
    return np.exp(exponent)


def weighted_sums(
    fmat: np.ndarray, w: np.ndarray, xu: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Empirical moments (g1, g2) from the F matrix and kde weights.

    g1[g] = mean_m w[m] F[m, g]; g2[g, :] = mean_m X_u^(m) w[m] F[m, g].
    np.sum over axis 0 reduces each column through the same pairwise
    tree whatever the grid width, keeping single-point and grid calls
    bit-identical (matmul/BLAS would not guarantee that).
    """
    m, d = fmat.shape[0], xu.shape[1]
    wf = w[:, None] * fmat
    g1 = np.sum(wf, axis=0) / m
    g2 = np.empty((fmat.shape[1], d))
    for k in range(d):
        g2[:, k] = np.sum(xu[:, k][:, None] * wf, axis=0) / m
    return g1, g2

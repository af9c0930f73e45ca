"""Product Epanechnikov kernel and its bandwidth-scaled form.

The base kernel is K(z) = prod_i (3/4)(1 - z_i^2) on [-1, 1]^d and the
scaled kernel is K_h(z) = h^{-d} K(z / h).  All estimation code in this
package uses this kernel; the constants recorded on KernelSpec are the
ones that enter variance and error expressions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KernelSpec:
    """Product Epanechnikov kernel in a fixed dimension.

    Attributes
    ----------
    dimension : int
        Ambient dimension d >= 1.
    support_radius : float
        Sup-norm radius of the support (1 for Epanechnikov).
    sup_norm : float
        max_z K(z) = 0.75^d, attained at the origin.
    l2_norm_sq : float
        R(K) = int K(z)^2 dz = 0.6^d.
    """

    dimension: int
    support_radius: float
    sup_norm: float
    l2_norm_sq: float


def epanechnikov_spec(d: int) -> KernelSpec:
    """Build the KernelSpec for the product Epanechnikov kernel in R^d."""
    if not isinstance(d, (int, np.integer)) or isinstance(d, bool) or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    return KernelSpec(
        dimension=int(d),
        support_radius=1.0,
        sup_norm=0.75**d,
        l2_norm_sq=0.6**d,
    )


def eval_kernel(spec: KernelSpec, z: np.ndarray) -> np.ndarray:
    """Evaluate K(z) = prod_i (3/4)(1 - z_i^2) 1{|z_i| <= 1}.

    z may be a single point of shape (d,) or a batch (..., d); the
    product runs over the last axis.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim == 0:
        z = z.reshape(1)
    if z.shape[-1] != spec.dimension:
        raise ValueError(
            f"point dimension {z.shape[-1]} does not match kernel dimension "
            f"{spec.dimension}"
        )
    if not np.all(np.isfinite(z)):
        raise ValueError("kernel argument must be finite")
    inside = np.abs(z) <= 1.0
    factors = np.where(inside, 0.75 * (1.0 - z * z), 0.0)
    return factors.prod(axis=-1)


def eval_scaled(spec: KernelSpec, z: np.ndarray, h: float) -> np.ndarray:
    """Evaluate K_h(z) = h^{-d} K(z / h)."""
    if not h > 0.0:
        raise ValueError(f"bandwidth must be positive, got {h!r}")
    z = np.asarray(z, dtype=float)
    return eval_kernel(spec, z / h) / h**spec.dimension


def kernel_constants(spec: KernelSpec) -> dict[str, float]:
    """Constants used by variance and error formulas.

    Returns R(K) = 0.6^d, the sup norm 0.75^d, and the support radius.
    """
    return {
        "l2_norm_sq": spec.l2_norm_sq,
        "sup_norm": spec.sup_norm,
        "support_radius": spec.support_radius,
    }

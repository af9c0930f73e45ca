"""Backend dispatch for the hot numerical kernels.

Two interchangeable implementations exist: a numba-compiled one and a
pure-numpy one.  Selection order:

1. an explicit `set_backend(...)` call (tests, benchmarks),
2. the SBDRIFT_BACKEND environment variable ("numba", "numpy", "auto"),
3. "auto": numba if it imports, numpy otherwise.

Results agree between backends to rounding error; bit-level determinism
is guaranteed per backend, not across them.
"""

from __future__ import annotations

import os
from types import ModuleType

import numpy as np

from . import _impl_numpy

_ENV_VAR = "SBDRIFT_BACKEND"
_VALID = ("auto", "numba", "numpy")

_forced: str | None = None
_active: ModuleType | None = None
_active_name: str | None = None


def _load_numba_impl() -> ModuleType:
    from . import _impl_numba

    return _impl_numba


def _resolve() -> tuple[ModuleType, str]:
    choice = _forced if _forced is not None else os.environ.get(_ENV_VAR, "auto")
    choice = choice.lower()
    if choice not in _VALID:
        raise ValueError(
            f"{_ENV_VAR} must be one of {_VALID}, got {choice!r}"
        )
    if choice == "numpy":
        return _impl_numpy, "numpy"
    if choice == "numba":
        return _load_numba_impl(), "numba"
    try:
        return _load_numba_impl(), "numba"
    except ImportError:
        return _impl_numpy, "numpy"


def set_backend(name: str | None) -> None:
    """Force a backend ("numba" or "numpy"), or None to re-resolve."""
    global _forced, _active, _active_name
    if name is not None and name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    _forced = name
    _active = None
    _active_name = None


def active_backend() -> str:
    """Name of the implementation that will serve the next call."""
    _ensure()
    assert _active_name is not None
    return _active_name


def _ensure() -> ModuleType:
    global _active, _active_name
    if _active is None:
        _active, _active_name = _resolve()
    return _active


def kde_weights(xs: np.ndarray, xi: np.ndarray, h: float) -> np.ndarray:
    """Vector of K_h(X_s^(m) - xi) over the sample."""
    return _ensure().kde_weights(xs, xi, float(h))


def sb_weight_matrix(
    xu: np.ndarray,
    xi: np.ndarray,
    xgrid: np.ndarray,
    delta_t: float,
    delta: float,
) -> np.ndarray:
    """Matrix of bridge weights F(t, xi, x_g, X_u^(m)), shape (M, nx)."""
    return _ensure().sb_weight_matrix(
        xu, xi, xgrid, float(delta_t), float(delta)
    )


def weighted_sums(
    fmat: np.ndarray, w: np.ndarray, xu: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Kernel-weighted empirical moments (g1, g2) given F and kde weights."""
    return _ensure().weighted_sums(fmat, w, xu)

"""Bandwidth grids, sup-grid loss, oracle bandwidth, and the GL selector.

The grid is geometric, h0 q^k with q = 2^{-1/2}, cut at the stabilized
floor h_min(M, d) = c_min M^{-1/d} (c_min = 81 in d=1, 9 in d=2), so
every grid bandwidth satisfies M h^d >= 81.  The selector is the
raw-max one-sided Goldenshluger-Lepski surrogate

    B(h)  = max_{h' <= h} ( |ahat_{h'} - ahat_h|_{inf,G}
                            - kappa_pair sqrt(log M / (M h'^d)) )_+
    hhat  = argmin_h B(h) + kappa_final sqrt(log M / (M h^d)),

with natural logs and ties resolved toward the larger bandwidth (for
the oracle too).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimator import BandwidthStack, FloorSpec, NO_FLOORS, bandwidth_stack
from .models import SampleSet
from .truth import IntervalSpec, TruthCache

H0_DEFAULT = 1.2
RATIO_DEFAULT = 2.0 ** -0.5
KAPPA_PAIR = 2.0
KAPPA_FINAL = 2.0
_C_MIN = {1: 81.0, 2: 9.0}


@dataclass(frozen=True)
class BandwidthGrid:
    h0: float
    ratio: float
    values: np.ndarray
    floor: float

    def __len__(self) -> int:
        return self.values.size


def build_grid(
    M: int, d: int, h0: float = H0_DEFAULT, q: float = RATIO_DEFAULT
) -> BandwidthGrid:
    """Geometric grid {h0 q^k} cut at the floor c_min M^{-1/d}."""
    if d not in _C_MIN:
        raise ValueError(f"only d in (1, 2) supported, got {d}")
    if M < 1:
        raise ValueError("M must be positive")
    if not 0.0 < q < 1.0 or h0 <= 0.0:
        raise ValueError("need h0 > 0 and ratio q in (0, 1)")
    floor = _C_MIN[d] * float(M) ** (-1.0 / d)
    values = []
    k = 0
    while True:
        h = h0 * q**k
        if h < floor:
            break
        values.append(h)
        k += 1
    if not values:
        raise ValueError(
            f"empty bandwidth grid: floor {floor:.4g} exceeds h0 {h0:.4g} "
            f"(M={M}, d={d})"
        )
    return BandwidthGrid(h0=h0, ratio=q, values=np.array(values), floor=floor)


def penalty(M: int, h: float, d: int) -> float:
    """sqrt(log M / (M h^d)); natural log."""
    return float(np.sqrt(np.log(M) / (M * h**d)))


def sup_grid_error(values: np.ndarray, astar: np.ndarray) -> float:
    """max over the x-grid of |ahat - a*| (Euclidean norm per point)."""
    values = np.asarray(values, dtype=float)
    astar = np.asarray(astar, dtype=float)
    if values.shape != astar.shape:
        raise ValueError(
            f"estimate grid {values.shape} does not match truth grid {astar.shape}"
        )
    return float(np.max(np.linalg.norm(values - astar, axis=-1)))


def grid_ise(values: np.ndarray, astar: np.ndarray, xgrid) -> float:
    """Root integrated squared error, (int |ahat - a*|^2 dx)^(1/2),
    approximated by an equal-weight cell average over the grid."""
    values = np.asarray(values, dtype=float)
    astar = np.asarray(astar, dtype=float)
    xgrid = np.asarray(xgrid, dtype=float)
    if values.shape != astar.shape:
        raise ValueError("estimate grid does not match truth grid")
    sq = np.sum((values - astar) ** 2, axis=-1)
    volume = float(np.prod(np.max(xgrid, axis=0) - np.min(xgrid, axis=0)))
    return float(np.sqrt(np.mean(sq) * volume))


def _argmin_prefer_larger(values: np.ndarray, h_values: np.ndarray) -> int:
    """Index of the minimum; exact ties go to the larger bandwidth.

    h_values is descending, so the first attained minimum wins.
    """
    return int(np.argmin(values))


@dataclass(frozen=True)
class OracleResult:
    h_or: float
    index: int
    errors: np.ndarray


def oracle_from_errors(errors: np.ndarray, grid: BandwidthGrid) -> OracleResult:
    errors = np.asarray(errors, dtype=float)
    if errors.shape != grid.values.shape:
        raise ValueError("one error per grid bandwidth required")
    idx = _argmin_prefer_larger(errors, grid.values)
    return OracleResult(h_or=float(grid.values[idx]), index=idx, errors=errors)


def oracle_bandwidth(
    sample: SampleSet,
    interval: IntervalSpec,
    t0: float,
    xi0,
    xgrid: np.ndarray,
    grid: BandwidthGrid,
    truth: TruthCache,
    floors: FloorSpec = NO_FLOORS,
) -> OracleResult:
    """Grid bandwidth minimizing the sup-grid error against cached truth."""
    stack = bandwidth_stack(
        sample, interval, t0, xi0, xgrid, grid.values, floors
    )
    return oracle_from_stack(stack, grid, truth)


def oracle_from_stack(
    stack: BandwidthStack, grid: BandwidthGrid, truth: TruthCache
) -> OracleResult:
    errors = np.array(
        [sup_grid_error(stack.values[i], truth.astar) for i in range(len(grid))]
    )
    return oracle_from_errors(errors, grid)


@dataclass(frozen=True)
class SelectorDiagnostics:
    selected_h: float
    index: int
    b_values: np.ndarray
    penalties: np.ndarray
    boundary_hit: bool


def gl_select(
    sample: SampleSet,
    interval: IntervalSpec,
    t0: float,
    xi0,
    xgrid: np.ndarray,
    grid: BandwidthGrid,
    kappa_pair: float = KAPPA_PAIR,
    kappa_final: float = KAPPA_FINAL,
    floors: FloorSpec = NO_FLOORS,
) -> SelectorDiagnostics:
    """Goldenshluger-Lepski bandwidth choice without truth access."""
    stack = bandwidth_stack(
        sample, interval, t0, xi0, xgrid, grid.values, floors
    )
    return select_from_stack(stack, grid, len(sample), kappa_pair, kappa_final)


def select_from_stack(
    stack: BandwidthStack,
    grid: BandwidthGrid,
    M: int,
    kappa_pair: float = KAPPA_PAIR,
    kappa_final: float = KAPPA_FINAL,
) -> SelectorDiagnostics:
    """Selector core on a precomputed stack (shared with the oracle)."""
    h_values = grid.values
    n = h_values.size
    d = stack.values.shape[2]
    pen = np.array([penalty(M, h, d) for h in h_values])
    b_values = np.empty(n)
    for i in range(n):
        # h' <= h_i means indices j >= i on the descending grid
        worst = 0.0
        for j in range(i, n):
            disc = float(
                np.max(
                    np.linalg.norm(stack.values[j] - stack.values[i], axis=-1)
                )
            )
            worst = max(worst, max(disc - kappa_pair * pen[j], 0.0))
        b_values[i] = worst
    objective = b_values + kappa_final * pen
    idx = _argmin_prefer_larger(objective, h_values)
    return SelectorDiagnostics(
        selected_h=float(h_values[idx]),
        index=idx,
        b_values=b_values,
        penalties=pen,
        boundary_hit=bool(idx == 0 or idx == n - 1),
    )


def oracle_ratio(err_hat: float, err_or: float) -> float:
    """Gamma = selected error / oracle error; >= 1 when err_or is the
    grid minimum on the same data."""
    if err_or <= 0.0:
        raise ValueError("oracle error must be positive for the ratio")
    return float(err_hat) / float(err_or)

"""Kernel plug-in drift estimator with the denominator-floor convention.

With kde weights K_h(X_s - xi) and bridge weights F(t, xi, x, X_u):

    fhat_j = mean K_{h_j},  ghat_1 = mean F K_{h_1},  ghat_2 = mean X_u F K_{h_2},
    Dhat = ghat_1 / fhat_1,  Nhat = ghat_2 / fhat_2,
    ahat = (Nhat / Dhat - x) / (u - t),

set to zero whenever fhat_1 < f_min/2, fhat_2 < f_min/2, or
Dhat < D_min/2 (nonpositive or nonfinite denominators always floor).
Summation over the sample is in fixed index order, so identical inputs
give identical bits regardless of evaluation order over grid points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import RatioTransferNotApplicableError
from .models import SampleSet
from .truth import IntervalSpec, Query


@dataclass(frozen=True)
class FloorSpec:
    """Population floors; the estimator triggers at half these values."""

    f_min: float
    d_min: float

    def __post_init__(self):
        if self.f_min < 0.0 or self.d_min < 0.0:
            raise ValueError("floors must be nonnegative")


NO_FLOORS = FloorSpec(0.0, 0.0)


@dataclass(frozen=True)
class DriftEstimate:
    value: np.ndarray
    fhat1: float
    fhat2: float
    dhat: float
    floor_triggered: bool


@dataclass(frozen=True)
class DriftGridEstimates:
    """estimate_drift results over an x-grid at shared (t, xi, h)."""

    values: np.ndarray
    fhat: float
    dhat: np.ndarray
    floor_triggered: np.ndarray

    def __len__(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, i: int) -> DriftEstimate:
        return DriftEstimate(
            value=self.values[i],
            fhat1=self.fhat,
            fhat2=self.fhat,
            dhat=float(self.dhat[i]),
            floor_triggered=bool(self.floor_triggered[i]),
        )

    def __iter__(self):
        return (self[i] for i in range(len(self)))


def _check_sample(sample: SampleSet) -> None:
    if len(sample) < 1:
        raise ValueError("sample must contain at least one pair")


def estimate_f(sample: SampleSet, xi, h: float) -> float:
    """Kernel density estimate (1/M) sum_m K_h(X_s^(m) - xi)."""
    _check_sample(sample)
    if not h > 0.0:
        raise ValueError(f"bandwidth must be positive, got {h!r}")
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    w = backend.kde_weights(sample.xs, xi, h)
    return float(np.sum(w) / len(sample))


def estimate_g(
    sample: SampleSet,
    interval: IntervalSpec,
    query: Query,
    h: float,
    weighted_by_y: bool = False,
):
    """(1/M) sum_m [X_u^(m) if weighted_by_y] F(t,xi,x,X_u^(m)) K_h(X_s^(m)-xi).

    Returns a scalar when weighted_by_y is false, else a vector in R^d.
    """
    _check_sample(sample)
    if not h > 0.0:
        raise ValueError(f"bandwidth must be positive, got {h!r}")
    delta_t = interval.delta_t(query.t)
    w = backend.kde_weights(sample.xs, query.xi, h)
    fmat = backend.sb_weight_matrix(
        sample.xu, query.xi, query.x[None, :], delta_t, interval.delta
    )
    g1, g2 = backend.weighted_sums(fmat, w, sample.xu)
    return g2[0] if weighted_by_y else float(g1[0])


def _floor_mask(fhat1, fhat2, dhat, floors: FloorSpec) -> np.ndarray:
    bad = ~np.isfinite(dhat) | (dhat <= 0.0)
    return (
        bad
        | (fhat1 < 0.5 * floors.f_min)
        | (fhat2 < 0.5 * floors.f_min)
        | (dhat < 0.5 * floors.d_min)
        | (fhat1 <= 0.0)
        | (fhat2 <= 0.0)
    )


def estimate_drift(
    sample: SampleSet,
    interval: IntervalSpec,
    query: Query,
    h1: float,
    h2: float,
    floors: FloorSpec = NO_FLOORS,
) -> DriftEstimate:
    """Plug-in drift estimate at a single query point."""
    _check_sample(sample)
    if not (h1 > 0.0 and h2 > 0.0):
        raise ValueError("bandwidths must be positive")
    m = len(sample)
    delta_t = interval.delta_t(query.t)
    w1 = backend.kde_weights(sample.xs, query.xi, h1)
    w2 = w1 if h2 == h1 else backend.kde_weights(sample.xs, query.xi, h2)
    fhat1 = float(np.sum(w1) / m)
    fhat2 = fhat1 if w2 is w1 else float(np.sum(w2) / m)
    fmat = backend.sb_weight_matrix(
        sample.xu, query.xi, query.x[None, :], delta_t, interval.delta
    )
    g1_arr, g2_arr = backend.weighted_sums(fmat, w1, sample.xu)
    ghat1 = g1_arr[0]
    ghat2 = (
        g2_arr[0] if w2 is w1 else backend.weighted_sums(fmat, w2, sample.xu)[1][0]
    )
    dhat = ghat1 / fhat1 if fhat1 > 0.0 else 0.0
    floored = bool(_floor_mask(fhat1, fhat2, np.asarray(dhat), floors))
    if floored:
        value = np.zeros(query.x.shape)
    else:
        nhat = ghat2 / fhat2
        value = (nhat / dhat - query.x) / delta_t
    return DriftEstimate(
        value=value,
        fhat1=fhat1,
        fhat2=fhat2,
        dhat=float(dhat),
        floor_triggered=floored,
    )


def estimate_drift_grid(
    sample: SampleSet,
    interval: IntervalSpec,
    t: float,
    xi,
    xgrid: np.ndarray,
    h: float,
    floors: FloorSpec = NO_FLOORS,
) -> DriftGridEstimates:
    """Diagonal-bandwidth drift estimates over an x-grid.

    The kde weights depend only on (xi, h) and are shared across grid
    points; per-point results are bit-identical to estimate_drift.
    """
    stack = bandwidth_stack(sample, interval, t, xi, xgrid, [h], floors)
    return DriftGridEstimates(
        values=stack.values[0],
        fhat=float(stack.fhat[0]),
        dhat=stack.dhat[0],
        floor_triggered=stack.floor_triggered[0],
    )


@dataclass(frozen=True)
class BandwidthStack:
    """Drift estimates for every (bandwidth, grid point) pair of one sample."""

    h_values: np.ndarray
    values: np.ndarray  # (nh, nx, d)
    fhat: np.ndarray  # (nh,)
    dhat: np.ndarray  # (nh, nx)
    floor_triggered: np.ndarray  # (nh, nx)


def bandwidth_stack(
    sample: SampleSet,
    interval: IntervalSpec,
    t: float,
    xi,
    xgrid: np.ndarray,
    h_values,
    floors: FloorSpec = NO_FLOORS,
) -> BandwidthStack:
    """Shared evaluation pass: one F matrix, one kde pass per bandwidth.

    Oracle and selector diagnostics both consume this stack so they see
    identical randomness.
    """
    _check_sample(sample)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    xgrid = np.asarray(xgrid, dtype=float)
    if xgrid.ndim != 2 or xgrid.shape[1] != sample.dim:
        raise ValueError("xgrid must have shape (n, d) matching the sample")
    h_values = np.asarray(h_values, dtype=float)
    if np.any(h_values <= 0.0):
        raise ValueError("bandwidths must be positive")
    m = len(sample)
    nh, (nx, d) = h_values.size, xgrid.shape
    delta_t = interval.delta_t(t)
    fmat = backend.sb_weight_matrix(sample.xu, xi, xgrid, delta_t, interval.delta)
    values = np.empty((nh, nx, d))
    fhat = np.empty(nh)
    dhat = np.empty((nh, nx))
    floored = np.empty((nh, nx), dtype=bool)
    for i, h in enumerate(h_values):
        w = backend.kde_weights(sample.xs, xi, h)
        fh = np.sum(w) / m
        g1, g2 = backend.weighted_sums(fmat, w, sample.xu)
        with np.errstate(divide="ignore", invalid="ignore"):
            dh = np.where(fh > 0.0, g1 / fh, 0.0)
            mask = _floor_mask(fh, fh, dh, floors)
            nh_over_dh = (g2 / fh) / dh[:, None]
            vals = (nh_over_dh - xgrid) / delta_t
        vals[mask] = 0.0
        fhat[i] = fh
        dhat[i] = dh
        floored[i] = mask
        values[i] = vals
    return BandwidthStack(
        h_values=h_values,
        values=values,
        fhat=fhat,
        dhat=dhat,
        floor_triggered=floored,
    )


def ratio_transfer_bound(
    fhat1: float,
    fhat2: float,
    ghat1: float,
    ghat2,
    f: float,
    g1: float,
    g2,
    qstar,
    f_min: float,
    d_min: float,
    delta_t: float,
) -> float:
    """Deterministic transfer bound on |ahat - a*| from block errors.

    Valid only on the event that the empirical floors hold; raises
    RatioTransferNotApplicableError otherwise.  Vector blocks (ghat2,
    g2, qstar) are measured in the Euclidean norm.
    """
    ghat2 = np.atleast_1d(np.asarray(ghat2, dtype=float))
    g2 = np.atleast_1d(np.asarray(g2, dtype=float))
    qstar = np.atleast_1d(np.asarray(qstar, dtype=float))
    dhat = ghat1 / fhat1 if fhat1 > 0.0 else 0.0
    if fhat1 < 0.5 * f_min or fhat2 < 0.5 * f_min or dhat < 0.5 * d_min:
        raise RatioTransferNotApplicableError(
            "empirical floors violated; the transfer bound makes no claim"
        )
    num_block = (
        f * np.linalg.norm(ghat2 - g2) + np.linalg.norm(g2) * abs(fhat2 - f)
    ) / f_min**2
    den_block = (
        f * abs(ghat1 - g1) + abs(g1) * abs(fhat1 - f)
    ) / f_min**2
    return float(
        4.0 / (delta_t * d_min) * (num_block + np.linalg.norm(qstar) * den_block)
    )

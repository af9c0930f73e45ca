"""Deterministic ground truth for the bridge drift.

For a pair law with joint density p(xi, y) on B x B the drift at
(t, x; xi) is a*(t,x;xi) = (N*/D* - x) / (u - t) with

    D* = int_B F(t,xi,x,y) p(xi,y)/f(xi) dy,
    N* = int_B y F(t,xi,x,y) p(xi,y)/f(xi) dy,

computed by quadrature, never Monte Carlo: adaptive panel-doubled
Gauss-Legendre in d=1, a dense tensor grid in d=2.  A truth cache is
accepted only after recomputation at doubled resolution changes nothing
beyond the certificate tolerance.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegenerateConditioningError, TruthNotConvergedError
from .models import PairLaw, SupportBox

GL_PANEL_ORDER = 32
GL_START_PANELS = 8
GL_MAX_PANELS = 2**17
GL_INTERNAL_TOL = 1e-10
TENSOR_AXIS_NODES = 400
CACHE_TOL = 1e-6
MIN_CONDITIONING_DENSITY = 1e-12


@dataclass(frozen=True)
class IntervalSpec:
    """Time interval [s, u] with the query-set geometry constants.

    eta is the terminal buffer (queries keep t <= u - eta), state_radius
    bounds |x|, and margin is the interior margin for xi.
    """

    s: float = 0.2
    u: float = 1.0
    eta: float = 0.05
    state_radius: float = 2.5
    margin: float = 0.5

    def __post_init__(self):
        if not self.s < self.u:
            raise ValueError("interval requires s < u")
        if not 0.0 < self.eta < self.u - self.s:
            raise ValueError("eta must lie in (0, u - s)")

    @property
    def delta(self) -> float:
        return self.u - self.s

    def delta_t(self, t: float) -> float:
        if not t < self.u:
            raise ValueError(f"t must be < u={self.u}, got {t}")
        return self.u - t


@dataclass(frozen=True)
class Query:
    """Evaluation point (t, x, xi)."""

    t: float
    x: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, dtype=float)))
        object.__setattr__(self, "xi", np.atleast_1d(np.asarray(self.xi, dtype=float)))
        if self.x.shape != self.xi.shape:
            raise ValueError("x and xi must have the same dimension")


def sb_weight(interval: IntervalSpec, t: float, xi, x, y) -> np.ndarray:
    """Bridge weight F(t,xi,x,y) = exp(-|y-x|^2/(2(u-t)) + |y-xi|^2/(2 Delta)).

    y may be a batch of shape (..., d); xi and x are single points.
    """
    delta_t = interval.delta_t(t)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float)
    to_x = y - x
    to_xi = y - xi
    exponent = np.sum(to_xi * to_xi, axis=-1) / (2.0 * interval.delta) - np.sum(
        to_x * to_x, axis=-1
    ) / (2.0 * delta_t)
    return np.exp(exponent)


def weight_upper_bound(box: SupportBox, interval: IntervalSpec) -> float:
    """C_F = exp(diam(B)^2 / (2 Delta)), a uniform upper bound for F on
    queries with x in the box."""
    return float(np.exp(box.diameter**2 / (2.0 * interval.delta)))


def weight_lower_bound(box: SupportBox, interval: IntervalSpec) -> float:
    """Uniform lower bound exp(-(R_B + R)^2 / (2 eta)) for F over queries
    with |x| <= state_radius, t <= u - eta, and y in the box."""
    reach = box.radius + interval.state_radius
    return float(np.exp(-(reach**2) / (2.0 * interval.eta)))


@lru_cache(maxsize=64)
def _leggauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def _panel_rule(lo: float, hi: float, panels: int, order: int):
    """Composite Gauss-Legendre rule: `panels` equal panels of `order`."""
    x, w = _leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    wts = (half[:, None] * w).ravel()
    return nodes, wts


def _axis_rule(lo: float, hi: float, order: int):
    x, w = _leggauss(order)
    half = 0.5 * (hi - lo)
    return 0.5 * (hi + lo) + half * x, half * w


def _conditional_base(law, interval, xi, nodes, wts):
    """Common integrand factor w(y) p(y|xi) exp(|y-xi|^2 / (2 Delta))."""
    cond = law.conditional_density(xi, nodes)
    to_xi = nodes - xi
    q_xi = np.sum(to_xi * to_xi, axis=-1)
    return wts * cond * np.exp(q_xi / (2.0 * interval.delta))


def _moments_on_nodes(nodes, base, xgrid, delta_t, chunk_target=2_000_000):
    """D*, N* at every x in xgrid given precomputed node weights."""
    nx, d = xgrid.shape
    dstar = np.empty(nx)
    nstar = np.empty((nx, d))
    chunk = max(1, int(chunk_target // max(1, nodes.shape[0])))
    base_nodes = base[:, None] * nodes
    for start in range(0, nx, chunk):
        xg = xgrid[start : start + chunk]
        diff = nodes[:, None, :] - xg[None, :, :]
        q_x = np.einsum("ngk,ngk->ng", diff, diff)
        chi = np.exp(-q_x / (2.0 * delta_t))
        dstar[start : start + chunk] = base @ chi
        nstar[start : start + chunk] = chi.T @ base_nodes
    return dstar, nstar


def _moments_1d(law, interval, t, xi, xgrid, panels):
    lo, hi = law.box.lower[0], law.box.upper[0]
    nodes1, wts = _panel_rule(lo, hi, panels, GL_PANEL_ORDER)
    nodes = nodes1[:, None]
    base = _conditional_base(law, interval, xi, nodes, wts)
    return _moments_on_nodes(nodes, base, xgrid, interval.delta_t(t))


def _moments_2d(law, interval, t, xi, xgrid, axis_nodes):
    ax0, w0 = _axis_rule(law.box.lower[0], law.box.upper[0], axis_nodes)
    ax1, w1 = _axis_rule(law.box.lower[1], law.box.upper[1], axis_nodes)
    g0, g1 = np.meshgrid(ax0, ax1, indexing="ij")
    nodes = np.stack([g0.ravel(), g1.ravel()], axis=1)
    wts = np.outer(w0, w1).ravel()
    base = _conditional_base(law, interval, xi, nodes, wts)
    return _moments_on_nodes(nodes, base, xgrid, interval.delta_t(t))


def _raw_moments_with_refinement(law, interval, t, xi, xgrid):
    """(coarse, fine) unnormalized moments and the converged resolution.

    d=1: panel count doubles until the internal 1e-10 tolerance is met,
    then one further doubling provides the certificate pair.  d=2: the
    dense tensor grid and its doubled version form the pair.
    """
    if law.dim == 1:
        # Two consecutive sub-tolerance doublings are required so that an
        # integrand invisible at coarse resolution cannot fake convergence.
        panels = GL_START_PANELS
        prev = _moments_1d(law, interval, t, xi, xgrid, panels)
        quiet = 0
        while True:
            panels *= 2
            if panels > GL_MAX_PANELS:
                raise TruthNotConvergedError(
                    f"1d quadrature did not converge within {GL_MAX_PANELS} panels"
                )
            cur = _moments_1d(law, interval, t, xi, xgrid, panels)
            change = max(
                np.max(np.abs(cur[0] - prev[0])), np.max(np.abs(cur[1] - prev[1]))
            )
            quiet = quiet + 1 if change < GL_INTERNAL_TOL else 0
            if quiet >= 2:
                break
            prev = cur
        fine = _moments_1d(law, interval, t, xi, xgrid, panels * 2)
        return cur, fine, panels * 2
    coarse = _moments_2d(law, interval, t, xi, xgrid, TENSOR_AXIS_NODES)
    fine = _moments_2d(law, interval, t, xi, xgrid, 2 * TENSOR_AXIS_NODES)
    return coarse, fine, 2 * TENSOR_AXIS_NODES


def _marginal_at(law, xi) -> float:
    f_xi = float(law.marginal_density(xi))
    if f_xi < MIN_CONDITIONING_DENSITY:
        raise DegenerateConditioningError(
            f"marginal density {f_xi:.3e} at xi={np.ravel(xi)} is below "
            f"{MIN_CONDITIONING_DENSITY}"
        )
    return f_xi


def population_moments(law: PairLaw, interval: IntervalSpec, query: Query) -> dict:
    """D* and N* at a single query, certified by one refinement doubling."""
    if query.t > interval.u - interval.eta:
        raise ValueError("query.t must satisfy t <= u - eta")
    _marginal_at(law, query.xi)  # conditioning guard only
    xgrid = query.x[None, :]
    _, fine, _ = _raw_moments_with_refinement(law, interval, query.t, query.xi, xgrid)
    return {"dstar": float(fine[0][0]), "nstar": fine[1][0]}


def true_drift(law: PairLaw, interval: IntervalSpec, query: Query) -> np.ndarray:
    """a*(t, x; xi) = (N*/D* - x) / (u - t)."""
    mom = population_moments(law, interval, query)
    return (mom["nstar"] / mom["dstar"] - query.x) / interval.delta_t(query.t)


@dataclass(frozen=True)
class TruthCache:
    """Ground-truth moments on a fixed x-grid at one (t, xi)."""

    t: float
    xi: np.ndarray
    xgrid: np.ndarray
    dstar: np.ndarray
    nstar: np.ndarray
    astar: np.ndarray
    refinement_error: float
    resolution: int

    @property
    def dim(self) -> int:
        return self.xgrid.shape[1]


def build_truth_cache(
    law: PairLaw,
    interval: IntervalSpec,
    t: float,
    xi,
    xgrid: np.ndarray,
    tol: float = CACHE_TOL,
) -> TruthCache:
    """Compute D*, N*, a* over xgrid with a refinement certificate.

    The cached values come from the finer of two resolutions; the
    certificate is the sup change in (D*, N*, a*) between the two.
    Raises TruthNotConvergedError when the certificate exceeds tol.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    xgrid = np.asarray(xgrid, dtype=float)
    if xgrid.ndim != 2 or xgrid.shape[1] != law.dim:
        raise ValueError("xgrid must have shape (n, d) matching the law dimension")
    _marginal_at(law, xi)  # conditioning guard only
    delta_t = interval.delta_t(t)
    coarse, fine, resolution = _raw_moments_with_refinement(law, interval, t, xi, xgrid)

    def _finish(raw):
        # conditional_density already carries the 1/f(xi) normalization
        dstar, nstar = raw
        astar = (nstar / dstar[:, None] - xgrid) / delta_t
        return dstar, nstar, astar

    d_c, n_c, a_c = _finish(coarse)
    d_f, n_f, a_f = _finish(fine)
    err = max(
        np.max(np.abs(d_f - d_c)),
        np.max(np.abs(n_f - n_c)),
        np.max(np.abs(a_f - a_c)),
    )
    if err > tol:
        raise TruthNotConvergedError(
            f"refinement certificate {err:.3e} exceeds tolerance {tol:.1e}"
        )
    if np.any(d_f <= 0.0):
        raise DegenerateConditioningError("nonpositive population denominator on grid")
    return TruthCache(
        t=float(t),
        xi=xi,
        xgrid=xgrid,
        dstar=d_f,
        nstar=n_f,
        astar=a_f,
        refinement_error=float(err),
        resolution=resolution,
    )


def save_truth_cache(cache: TruthCache, path) -> None:
    d = cache.dim
    header = (
        ["t"]
        + [f"x{k+1}" for k in range(d)]
        + [f"xi{k+1}" for k in range(d)]
        + ["dstar"]
        + [f"nstar{k+1}" for k in range(d)]
        + [f"astar{k+1}" for k in range(d)]
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(cache.xgrid.shape[0]):
            row = (
                [cache.t]
                + list(cache.xgrid[i])
                + list(cache.xi)
                + [cache.dstar[i]]
                + list(cache.nstar[i])
                + list(cache.astar[i])
            )
            writer.writerow(format(v, ".17g") for v in row)


def load_truth_cache(path) -> TruthCache:
    """Read back a truth-cache CSV (no re-certification: the stored
    refinement error is not in the file, so it loads as nan)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], np.array(rows[1:], dtype=float)
    d = sum(1 for name in header if name.startswith("x") and not name.startswith("xi"))
    cols = {name: data[:, j] for j, name in enumerate(header)}
    return TruthCache(
        t=float(cols["t"][0]),
        xi=np.array([cols[f"xi{k+1}"][0] for k in range(d)]),
        xgrid=np.stack([cols[f"x{k+1}"] for k in range(d)], axis=1),
        dstar=cols["dstar"],
        nstar=np.stack([cols[f"nstar{k+1}"] for k in range(d)], axis=1),
        astar=np.stack([cols[f"astar{k+1}"] for k in range(d)], axis=1),
        refinement_error=float("nan"),
        resolution=0,
    )


def evaluation_grid(lo: float, hi: float, points: int, d: int) -> np.ndarray:
    """Uniform grid on [lo, hi]^d: (points, 1) for d=1, row-major
    (points^2, 2) for d=2."""
    if points < 1:
        raise ValueError("points must be >= 1")
    axis = np.linspace(lo, hi, points)
    if d == 1:
        return axis[:, None]
    if d == 2:
        g0, g1 = np.meshgrid(axis, axis, indexing="ij")
        return np.stack([g0.ravel(), g1.ravel()], axis=1)
    raise ValueError(f"only d in (1, 2) supported, got {d}")


@dataclass(frozen=True)
class PreflightReport:
    """Quantities frozen before any estimation run."""

    testbed: str
    variant: str
    f_xi0: float
    min_f_grid: float
    min_dstar: float
    truth_error: float
    cache: TruthCache

    def row(self) -> dict:
        return {
            "testbed": self.testbed,
            "f_xi0": self.f_xi0,
            "min_f_grid": self.min_f_grid,
            "min_dstar": self.min_dstar,
            "truth_error": self.truth_error,
        }


PREFLIGHT_COLUMNS = ("testbed", "f_xi0", "min_f_grid", "min_dstar", "truth_error")
CONDITIONING_GRID_POINTS = 21


def preflight(
    law: PairLaw,
    interval: IntervalSpec,
    t0: float,
    xi0,
    xgrid: np.ndarray,
    conditioning_grid_points: int = CONDITIONING_GRID_POINTS,
    tol: float = CACHE_TOL,
) -> PreflightReport:
    """Source density at xi0, min source density on the conditioning
    grid, min D* on the evaluation grid, and the refinement certificate."""
    xi0 = np.atleast_1d(np.asarray(xi0, dtype=float))
    xgrid = np.asarray(xgrid, dtype=float)
    cache = build_truth_cache(law, interval, t0, xi0, xgrid, tol=tol)
    lo = float(np.min(xgrid))
    hi = float(np.max(xgrid))
    cond_grid = evaluation_grid(lo, hi, conditioning_grid_points, law.dim)
    f_vals = law.marginal_density(cond_grid)
    return PreflightReport(
        testbed=law.name,
        variant=law.variant,
        f_xi0=float(law.marginal_density(xi0)),
        min_f_grid=float(np.min(f_vals)),
        min_dstar=float(np.min(cache.dstar)),
        truth_error=cache.refinement_error,
        cache=cache,
    )

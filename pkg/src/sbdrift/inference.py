"""Pointwise CLT machinery for the d=1 drift estimator.

The plug-in variance at (t, x, xi) with diagonal bandwidth h is

    Sigma = R(K) / (fhat_h(xi) Delta(t)^2 Dhat_h^2)
            * (Ehat[psi^2 | xi] - Ehat[psi | xi]^2),
    psi(y) = (y - x - Delta(t) ahat) F(t, xi, x, y),

where Ehat[phi | xi] = (mean_m phi(X_u^m) K_h(X_s^m - xi)) / fhat_h(xi)
is the kernel-weighted conditional average.  The standardized statistic
is Z = sqrt(M h^d) (ahat - a*) / sqrt(Sigma); the nominal 95% interval
is ahat +/- 1.96 sqrt(Sigma / (M h^d)), so coverage of a* is exactly
|Z| <= 1.96.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from . import backend
from .errors import EstimatorFlooredError
from .estimator import FloorSpec, NO_FLOORS, estimate_drift
from .kernels import epanechnikov_spec
from .models import SampleSet
from .truth import IntervalSpec, Query

Z_CRITICAL_95 = 1.96
AD_CRITICAL_5PCT = 0.75
_PHI_LO = 1e-300
_PHI_HI = 1.0 - 1e-16


@dataclass(frozen=True)
class CltRecord:
    rep: int
    M: int
    h: float
    a_hat: float
    a_star: float
    sigma_hat: float
    z: float
    ci_lo: float
    ci_hi: float
    covered: bool


def plugin_variance(
    sample: SampleSet,
    interval: IntervalSpec,
    query: Query,
    h: float,
    floors: FloorSpec = NO_FLOORS,
) -> float:
    """Plug-in asymptotic variance estimate at a single d=1 query.

    Raises EstimatorFlooredError when the drift estimate at (query, h)
    is floored, since the statistic conditions on the non-floored event.
    """
    if sample.dim != 1:
        raise ValueError("plug-in variance is defined for the d=1 experiment")
    est = estimate_drift(sample, interval, query, h, h, floors)
    if est.floor_triggered:
        raise EstimatorFlooredError(
            "drift estimate floored; variance not applicable"
        )
    m = len(sample)
    delta_t = interval.delta_t(query.t)
    w = backend.kde_weights(sample.xs, query.xi, h)
    fhat = np.sum(w) / m
    fvec = backend.sb_weight_matrix(
        sample.xu, query.xi, query.x[None, :], delta_t, interval.delta
    )[:, 0]
    psi = (sample.xu[:, 0] - query.x[0] - delta_t * est.value[0]) * fvec
    e_psi = np.sum(psi * w) / m / fhat
    e_psi2 = np.sum(psi * psi * w) / m / fhat
    rk = epanechnikov_spec(1).l2_norm_sq
    return float(rk / (fhat * delta_t**2 * est.dhat**2) * (e_psi2 - e_psi**2))


def standardized_stat(
    a_hat: float, a_star: float, sigma_hat: float, M: int, h: float, d: int
) -> float:
    """Z = sqrt(M h^d) (ahat - a*) / sqrt(Sigma)."""
    if not sigma_hat > 0.0:
        raise ValueError(f"sigma_hat must be positive, got {sigma_hat!r}")
    return float(np.sqrt(M * h**d) * (a_hat - a_star) / np.sqrt(sigma_hat))


@dataclass(frozen=True)
class ConfidenceInterval:
    lo: float
    hi: float
    covered: bool


def confidence_interval(
    a_hat: float,
    sigma_hat: float,
    M: int,
    h: float,
    d: int,
    a_star: float,
    level: float = 0.95,
) -> ConfidenceInterval:
    """Normal interval around ahat; covered is decided through the Z
    statistic so that covered <=> |Z| <= z_crit holds bit-exactly."""
    if sigma_hat < 0.0:
        raise ValueError("sigma_hat must be nonnegative")
    crit = Z_CRITICAL_95 if level == 0.95 else float(ndtri(0.5 * (1.0 + level)))
    half = crit * float(np.sqrt(sigma_hat / (M * h**d)))
    if sigma_hat > 0.0:
        covered = abs(standardized_stat(a_hat, a_star, sigma_hat, M, h, d)) <= crit
    else:
        covered = a_hat == a_star
    return ConfidenceInterval(lo=a_hat - half, hi=a_hat + half, covered=covered)


@dataclass(frozen=True)
class AndersonDarlingResult:
    statistic: float
    reject_5pct: bool
    clamped: bool


def anderson_darling(z) -> AndersonDarlingResult:
    """A^2 against a fully specified N(0,1); reject at 5% iff A^2 > 0.75.

    Phi values at +/-inf of double precision are clamped to
    [1e-300, 1 - 1e-16] and flagged.
    """
    z = np.sort(np.asarray(z, dtype=float))
    n = z.size
    if n < 1:
        raise ValueError("need at least one observation")
    phi = ndtr(z)
    clamped = bool(np.any(phi < _PHI_LO) or np.any(phi > _PHI_HI))
    phi = np.clip(phi, _PHI_LO, _PHI_HI)
    i = np.arange(1, n + 1)
    stat = -n - np.mean((2 * i - 1) * (np.log(phi) + np.log(1.0 - phi[::-1])))
    return AndersonDarlingResult(
        statistic=float(stat),
        reject_5pct=bool(stat > AD_CRITICAL_5PCT),
        clamped=clamped,
    )


def qq_data(z) -> np.ndarray:
    """Pairs (Phi^-1((i - 0.5)/n), z_(i)) for a normal QQ plot."""
    z = np.sort(np.asarray(z, dtype=float))
    n = z.size
    if n < 2:
        raise ValueError("need at least two observations")
    theo = ndtri((np.arange(1, n + 1) - 0.5) / n)
    return np.stack([theo, z], axis=1)


def ols_slope(xs, ys) -> float:
    """Least-squares slope of ys on xs."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1 or xs.size < 2:
        raise ValueError("need two equal-length 1-d arrays")
    if np.ptp(xs) == 0.0:
        raise ValueError("degenerate design: all abscissae equal")
    return float(np.polyfit(xs, ys, 1)[0])


def theory_secant_slope(M1: int, M2: int, d: int) -> float:
    """Finite-range reference slope between sample sizes M1 and M2.

    With p = 2/(4+d), the rate (log M / M)^p has secant slope
    -p + p log(log M2 / log M1) / log(M2 / M1) on the log-log scale.
    """
    if M1 == M2:
        raise ValueError("M1 and M2 must differ")
    if M1 <= 1 or M2 <= 1:
        raise ValueError("sample sizes must exceed 1")
    p = 2.0 / (4.0 + d)
    return float(
        -p + p * np.log(np.log(M2) / np.log(M1)) / np.log(M2 / M1)
    )

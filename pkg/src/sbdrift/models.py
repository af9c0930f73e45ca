"""Synthetic pair laws on a bounded support box.

Two families, each in d=1 and d=2:

* Gaussian-to-Gaussian (GG1, GG2): X_s ~ TruncNormal(m_s, Sigma_s; B),
  X_u | X_s=xi ~ TruncNormal(A xi + b, Sigma_eps; B).
* Mixture-to-Mixture (MM1, MM2): X_s is an equal mixture of two
  truncated normals and X_u | X_s=xi mixes two truncated normal
  components with logistic gate pi(xi) = sigmoid(alpha0 + alpha.xi).

"wide" variants enlarge the box (and, for MM1, the variances) to stress
low-density boundary behavior.  All truncation is of the joint vector:
a draw is accepted only if every coordinate lands inside the box.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import expit, ndtr

from .errors import SamplingBudgetError

REJECTION_BUDGET = 10**6


@dataclass(frozen=True)
class SupportBox:
    """Axis-aligned box [lower_1, upper_1] x ... x [lower_d, upper_d]."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower and upper must be 1-d arrays of equal length")
        if not np.all(lower < upper):
            raise ValueError("box must satisfy lower < upper coordinatewise")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def radius(self) -> float:
        """sup over the box of the Euclidean norm |y|."""
        corner = np.maximum(np.abs(self.lower), np.abs(self.upper))
        return float(np.linalg.norm(corner))

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return np.all((pts >= self.lower) & (pts <= self.upper), axis=-1)

    def _key(self) -> tuple:
        return (tuple(self.lower), tuple(self.upper))


def _as_matrix(a, d: int) -> np.ndarray:
    m = np.atleast_2d(np.asarray(a, dtype=float))
    if m.shape != (d, d):
        raise ValueError(f"expected a ({d}, {d}) matrix, got shape {m.shape}")
    m.flags.writeable = False
    return m


def _as_vector(a, d: int) -> np.ndarray:
    v = np.atleast_1d(np.asarray(a, dtype=float))
    if v.shape != (d,):
        raise ValueError(f"expected a ({d},) vector, got shape {v.shape}")
    v.flags.writeable = False
    return v


def _check_spd(m: np.ndarray, name: str) -> None:
    if not np.allclose(m, m.T):
        raise ValueError(f"{name} must be symmetric")
    if np.any(np.linalg.eigvalsh(m) <= 0):
        raise ValueError(f"{name} must be positive definite")


@lru_cache(maxsize=256)
def _box_gaussian_mass_cached(
    mean_key: tuple, cov_key: tuple, box_key: tuple
) -> float:
    """P(N(mean, cov) in box) for a non-diagonal 2x2 covariance.

    Tensor Gauss-Legendre quadrature of the density over the box; 80
    nodes per axis is far past convergence for the configured laws.
    """
    mean = np.array(mean_key)
    cov = np.array(cov_key)
    lower, upper = (np.array(k) for k in box_key)
    n = 80
    nodes, wts = np.polynomial.legendre.leggauss(n)
    axes, axwts = [], []
    for lo, hi in zip(lower, upper):
        half = 0.5 * (hi - lo)
        axes.append(0.5 * (hi + lo) + half * nodes)
        axwts.append(half * wts)
    g0, g1 = np.meshgrid(axes[0], axes[1], indexing="ij")
    pts = np.stack([g0.ravel(), g1.ravel()], axis=1)
    w2 = np.outer(axwts[0], axwts[1]).ravel()
    dens = _gaussian_pdf(pts, mean, cov)
    return float(np.sum(w2 * dens))


def _box_gaussian_mass(mean: np.ndarray, cov: np.ndarray, box: SupportBox) -> float:
    """Normal mass inside the box (the truncation normalizer)."""
    diag = np.count_nonzero(cov - np.diag(np.diagonal(cov))) == 0
    if diag:
        sig = np.sqrt(np.diagonal(cov))
        hi = ndtr((box.upper - mean) / sig)
        lo = ndtr((box.lower - mean) / sig)
        return float(np.prod(hi - lo))
    return _box_gaussian_mass_cached(tuple(mean), tuple(map(tuple, cov)), box._key())


def _gaussian_pdf(pts: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """Multivariate normal density at pts of shape (..., d)."""
    pts = np.asarray(pts, dtype=float)
    d = mean.size
    diff = pts - mean
    diag = np.count_nonzero(cov - np.diag(np.diagonal(cov))) == 0
    if diag:
        var = np.diagonal(cov)
        quad = np.sum(diff * diff / var, axis=-1)
        det = np.prod(var)
    else:
        inv = np.linalg.inv(cov)
        quad = np.einsum("...i,ij,...j->...", diff, inv, diff)
        det = np.linalg.det(cov)
    return np.exp(-0.5 * quad) / np.sqrt((2.0 * np.pi) ** d * det)


def _trunc_gaussian_pdf(
    pts: np.ndarray, mean: np.ndarray, cov: np.ndarray, box: SupportBox
) -> np.ndarray:
    mass = _box_gaussian_mass(mean, cov, box)
    dens = _gaussian_pdf(pts, mean, cov) / mass
    return np.where(box.contains(pts), dens, 0.0)


def _rejection_sample(
    rng: np.random.Generator,
    means: np.ndarray,
    chol: np.ndarray,
    box: SupportBox,
    budget: int = REJECTION_BUDGET,
) -> np.ndarray:
    """Draw one truncated normal per row of means by rejection."""
    n, d = means.shape
    out = np.empty((n, d))
    pending = np.arange(n)
    rounds = 0
    while pending.size:
        z = rng.standard_normal((pending.size, d))
        cand = means[pending] + z @ chol.T
        ok = box.contains(cand)
        out[pending[ok]] = cand[ok]
        pending = pending[~ok]
        rounds += 1
        if rounds > budget:
            raise SamplingBudgetError(
                f"rejection sampling exceeded {budget} attempts per draw"
            )
    return out


@dataclass(frozen=True)
class SampleSet:
    """M i.i.d. pairs (X_s, X_u), stored as (M, d) arrays."""

    xs: np.ndarray
    xu: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        xu = np.asarray(self.xu, dtype=float)
        if xs.shape != xu.shape or xs.ndim != 2:
            raise ValueError("xs and xu must share a (M, d) shape")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "xu", xu)

    def __len__(self) -> int:
        return self.xs.shape[0]

    @property
    def dim(self) -> int:
        return self.xs.shape[1]


@dataclass(frozen=True)
class GaussianPairLaw:
    """X_s truncated normal, X_u | X_s=xi truncated normal around A xi + b."""

    name: str
    variant: str
    box: SupportBox
    source_mean: np.ndarray
    source_cov: np.ndarray
    lin: np.ndarray
    offset: np.ndarray
    noise_cov: np.ndarray
    _source_chol: np.ndarray = field(init=False, repr=False)
    _noise_chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        d = self.box.dim
        object.__setattr__(self, "source_mean", _as_vector(self.source_mean, d))
        object.__setattr__(self, "source_cov", _as_matrix(self.source_cov, d))
        object.__setattr__(self, "lin", _as_matrix(self.lin, d))
        object.__setattr__(self, "offset", _as_vector(self.offset, d))
        object.__setattr__(self, "noise_cov", _as_matrix(self.noise_cov, d))
        _check_spd(self.source_cov, "source covariance")
        _check_spd(self.noise_cov, "noise covariance")
        object.__setattr__(self, "_source_chol", np.linalg.cholesky(self.source_cov))
        object.__setattr__(self, "_noise_chol", np.linalg.cholesky(self.noise_cov))

    @property
    def dim(self) -> int:
        return self.box.dim

    def marginal_density(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return _trunc_gaussian_pdf(xi, self.source_mean, self.source_cov, self.box)

    def conditional_density(self, xi: np.ndarray, y: np.ndarray) -> np.ndarray:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        mean = self.lin @ xi + self.offset
        return _trunc_gaussian_pdf(y, mean, self.noise_cov, self.box)

    def joint_density(self, xi: np.ndarray, y: np.ndarray) -> np.ndarray:
        f = self.marginal_density(xi)
        return f * self.conditional_density(xi, y) if f > 0.0 else np.zeros(np.shape(y)[:-1])

    def sample(self, m: int, rng: np.random.Generator) -> SampleSet:
        d = self.dim
        means = np.broadcast_to(self.source_mean, (m, d)).copy()
        xs = _rejection_sample(rng, means, self._source_chol, self.box)
        cond_means = xs @ self.lin.T + self.offset
        xu = _rejection_sample(rng, cond_means, self._noise_chol, self.box)
        return SampleSet(xs, xu)

    def sample_conditional(
        self, xi: np.ndarray, n: int, rng: np.random.Generator
    ) -> np.ndarray:
        """n draws of X_u | X_s = xi."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        mean = self.lin @ xi + self.offset
        means = np.broadcast_to(mean, (n, self.dim)).copy()
        return _rejection_sample(rng, means, self._noise_chol, self.box)


@dataclass(frozen=True)
class MixturePairLaw:
    """Equal two-component truncated-normal source with a logistic gate
    choosing between two truncated-normal conditional components."""

    name: str
    variant: str
    box: SupportBox
    source_means: np.ndarray
    source_cov: np.ndarray
    lins: tuple[np.ndarray, np.ndarray]
    offsets: tuple[np.ndarray, np.ndarray]
    noise_covs: tuple[np.ndarray, np.ndarray]
    gate_bias: float
    gate_weights: np.ndarray
    _source_chol: np.ndarray = field(init=False, repr=False)
    _noise_chols: tuple = field(init=False, repr=False)

    def __post_init__(self):
        d = self.box.dim
        sm = np.asarray(self.source_means, dtype=float).reshape(2, d)
        sm.flags.writeable = False
        object.__setattr__(self, "source_means", sm)
        object.__setattr__(self, "source_cov", _as_matrix(self.source_cov, d))
        object.__setattr__(self, "lins", tuple(_as_matrix(a, d) for a in self.lins))
        object.__setattr__(self, "offsets", tuple(_as_vector(b, d) for b in self.offsets))
        object.__setattr__(
            self, "noise_covs", tuple(_as_matrix(s, d) for s in self.noise_covs)
        )
        object.__setattr__(self, "gate_weights", _as_vector(self.gate_weights, d))
        _check_spd(self.source_cov, "source covariance")
        for s in self.noise_covs:
            _check_spd(s, "noise covariance")
        object.__setattr__(self, "_source_chol", np.linalg.cholesky(self.source_cov))
        object.__setattr__(
            self, "_noise_chols", tuple(np.linalg.cholesky(s) for s in self.noise_covs)
        )

    @property
    def dim(self) -> int:
        return self.box.dim

    def gate(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return expit(self.gate_bias + np.sum(xi * self.gate_weights, axis=-1))

    def marginal_density(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        parts = [
            _trunc_gaussian_pdf(xi, mean, self.source_cov, self.box)
            for mean in self.source_means
        ]
        return 0.5 * parts[0] + 0.5 * parts[1]

    def conditional_density(self, xi: np.ndarray, y: np.ndarray) -> np.ndarray:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        p = self.gate(xi)
        comps = [
            _trunc_gaussian_pdf(y, lin @ xi + off, cov, self.box)
            for lin, off, cov in zip(self.lins, self.offsets, self.noise_covs)
        ]
        return p * comps[0] + (1.0 - p) * comps[1]

    def joint_density(self, xi: np.ndarray, y: np.ndarray) -> np.ndarray:
        f = self.marginal_density(xi)
        return f * self.conditional_density(xi, y) if f > 0.0 else np.zeros(np.shape(y)[:-1])

    def sample(self, m: int, rng: np.random.Generator) -> SampleSet:
        d = self.dim
        comp = rng.random(m) < 0.5
        means = np.where(comp[:, None], self.source_means[0], self.source_means[1])
        xs = _rejection_sample(rng, means, self._source_chol, self.box)
        take_first = rng.random(m) < self.gate(xs)
        xu = np.empty((m, d))
        for which, lin, off, chol in zip(
            (take_first, ~take_first), self.lins, self.offsets, self._noise_chols
        ):
            idx = np.flatnonzero(which)
            if idx.size:
                cond_means = xs[idx] @ lin.T + off
                xu[idx] = _rejection_sample(rng, cond_means, chol, self.box)
        return SampleSet(xs, xu)

    def sample_conditional(
        self, xi: np.ndarray, n: int, rng: np.random.Generator
    ) -> np.ndarray:
        """n draws of X_u | X_s = xi."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        take_first = rng.random(n) < self.gate(xi)
        out = np.empty((n, self.dim))
        for which, lin, off, chol in zip(
            (take_first, ~take_first), self.lins, self.offsets, self._noise_chols
        ):
            idx = np.flatnonzero(which)
            if idx.size:
                mean = lin @ xi + off
                means = np.broadcast_to(mean, (idx.size, self.dim)).copy()
                out[idx] = _rejection_sample(rng, means, chol, self.box)
        return out


PairLaw = GaussianPairLaw | MixturePairLaw


def _box(d: int, half_width: float) -> SupportBox:
    return SupportBox(np.full(d, -half_width), np.full(d, half_width))


def _build_gg1(variant: str) -> GaussianPairLaw:
    half = 5.0 if variant == "wide" else 3.0
    return GaussianPairLaw(
        name="GG1",
        variant=variant,
        box=_box(1, half),
        source_mean=[0.0],
        source_cov=[[1.0]],
        lin=[[0.7]],
        offset=[0.3],
        noise_cov=[[0.35**2]],
    )


def _build_gg2(variant: str) -> GaussianPairLaw:
    return GaussianPairLaw(
        name="GG2",
        variant=variant,
        box=_box(2, 3.0),
        source_mean=[0.0, 0.0],
        source_cov=[[1.0, 0.0], [0.0, 0.8]],
        lin=[[0.75, 0.15], [-0.10, 0.65]],
        offset=[0.25, -0.20],
        noise_cov=[[0.14, 0.03], [0.03, 0.12]],
    )


def _build_mm1(variant: str) -> MixturePairLaw:
    wide = variant == "wide"
    return MixturePairLaw(
        name="MM1",
        variant=variant,
        box=_box(1, 5.0 if wide else 3.0),
        source_means=[[-1.2], [1.2]],
        source_cov=[[0.8**2 if wide else 0.45**2]],
        lins=([[0.8]], [[-0.5]]),
        offsets=([0.4], [-0.3]),
        noise_covs=([[0.9**2 if wide else 0.25**2]], [[1.0**2 if wide else 0.30**2]]),
        gate_bias=0.0,
        gate_weights=[1.5],
    )


def _build_mm2(variant: str) -> MixturePairLaw:
    return MixturePairLaw(
        name="MM2",
        variant=variant,
        box=_box(2, 3.0),
        source_means=[[-0.9, 0.9], [0.9, -0.9]],
        source_cov=[[0.16, 0.0], [0.0, 0.16]],
        lins=([[0.8, 0.1], [0.0, 0.7]], [[-0.4, 0.2], [0.15, -0.6]]),
        offsets=([0.3, -0.2], [-0.35, 0.25]),
        noise_covs=(
            [[0.0484, 0.0], [0.0, 0.0324]],
            [[0.08, 0.02], [0.02, 0.07]],
        ),
        gate_bias=0.0,
        gate_weights=[1.2, -1.0],
    )


_BUILDERS = {"GG1": _build_gg1, "GG2": _build_gg2, "MM1": _build_mm1, "MM2": _build_mm2}
_WIDE_CAPABLE = ("GG1", "MM1")

TESTBEDS = tuple(_BUILDERS)


def make_law(name: str, variant: str = "compact") -> PairLaw:
    """Construct one of the four benchmark laws.

    variant "wide" (GG1, MM1 only) enlarges the box to [-5, 5] and, for
    MM1, inflates the source and conditional variances to 0.8^2, 0.9^2,
    1.0^2.
    """
    if name not in _BUILDERS:
        raise ValueError(f"unknown law {name!r}; expected one of {sorted(_BUILDERS)}")
    if variant not in ("compact", "wide"):
        raise ValueError(f"unknown variant {variant!r}; expected compact or wide")
    if variant == "wide" and name not in _WIDE_CAPABLE:
        raise ValueError(f"wide variant is defined only for {_WIDE_CAPABLE}")
    return _BUILDERS[name](variant)


def sample_dataset(law: PairLaw, m: int, rng: np.random.Generator) -> SampleSet:
    """Draw M i.i.d. pairs from the law using the supplied stream."""
    if m < 1:
        raise ValueError(f"sample size must be >= 1, got {m}")
    return law.sample(int(m), rng)


def joint_density(law: PairLaw, xi: np.ndarray, y: np.ndarray) -> np.ndarray:
    """f(xi) p(y | xi); zero outside B x B. y may be a batch (..., d)."""
    return law.joint_density(xi, y)


def marginal_density(law: PairLaw, xi: np.ndarray) -> np.ndarray:
    """Source density f(xi); zero outside B. xi may be a batch (..., d)."""
    return law.marginal_density(xi)

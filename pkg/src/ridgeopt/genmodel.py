"""Synthetic data: covariance profiles, Haar-random parameters, (X, y) sampling.

Rows of X are drawn from N(0, Sigma) with Sigma diagonal in its eigenbasis,
labels from y = X theta + eps z with standard Gaussian z, and both are
mean-centered before being returned.

Random streams are addressed by an integer key path below a master seed
(``stream(seed, *key)``), so any replicate of a nested experiment can be
regenerated independently of execution order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSampleError, DimensionMismatchError
from .linalg_core import center_columns

PROFILE_KINDS = ("bulk", "spiked", "explicit")


def stream(seed, *key) -> np.random.Generator:
    """Independent generator for the node ``key`` below master ``seed``."""
    if isinstance(seed, np.random.Generator):
        if key:
            raise TypeError("key paths need an integer master seed")
        return seed
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


@dataclass(frozen=True)
class CovarianceProfile:
    kind: str
    eigenvalues: np.ndarray

    @property
    def dimension(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.eigenvalues)


@dataclass(frozen=True)
class GenerativeSpec:
    covariance: CovarianceProfile
    theta: np.ndarray
    epsilon: float

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if np.shape(self.theta) != (self.covariance.dimension,):
            raise DimensionMismatchError(
                f"theta has shape {np.shape(self.theta)}, expected "
                f"({self.covariance.dimension},)"
            )


@dataclass(frozen=True)
class ThetaBatch:
    vectors: np.ndarray  # m x d, one unit vector per row
    group_size: int = field(default=0)

    @property
    def count(self) -> int:
        return self.vectors.shape[0]

    def __iter__(self):
        return iter(self.vectors)

    def __getitem__(self, i):
        return self.vectors[i]


def make_profile(kind: str, d: int, eigenvalues=None) -> CovarianceProfile:
    """Eigenvalue profile of Sigma.

    bulk:     1, (d-1)/d, ..., 1/d
    spiked:   exp(-x^2) at d points evenly spaced on [0, 3], i.e. a unit-peak
              Gaussian density on [0, 3] sets the per-coordinate standard deviation
    explicit: caller-supplied positive eigenvalues, used as given
    """
    if kind not in PROFILE_KINDS:
        raise ValueError(f"unknown profile kind {kind!r}; expected one of {PROFILE_KINDS}")
    if kind == "explicit":
        if eigenvalues is None:
            raise ValueError("explicit profile needs eigenvalues")
        ev = np.asarray(eigenvalues, dtype=float)
        if ev.ndim != 1 or ev.size == 0 or np.any(ev <= 0) or not np.all(np.isfinite(ev)):
            raise ValueError("explicit eigenvalues must be a nonempty vector of positive reals")
        if d is not None and d != ev.size:
            raise DimensionMismatchError(f"d={d} but {ev.size} eigenvalues given")
        return CovarianceProfile("explicit", ev)
    if d is None or d < 1:
        raise ValueError(f"profile dimension must be >= 1, got {d}")
    if kind == "bulk":
        ev = np.arange(d, 0, -1, dtype=float) / d
    else:
        grid = np.linspace(0.0, 3.0, d) if d > 1 else np.zeros(1)
        ev = np.exp(-(grid**2))
    return CovarianceProfile(kind, ev)


def gen_x(n: int, profile: CovarianceProfile, rng_seed) -> np.ndarray:
    if n < 2:
        raise DegenerateSampleError(f"need n >= 2 rows, got {n}")
    rng = stream(rng_seed)
    z = rng.standard_normal((n, profile.dimension))
    return center_columns(z * np.sqrt(profile.eigenvalues))


def gen_y(x, theta, epsilon: float, rng_seed) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if x.ndim != 2 or theta.shape != (x.shape[1],):
        raise DimensionMismatchError(
            f"X shape {x.shape} incompatible with theta shape {theta.shape}"
        )
    rng = stream(rng_seed)
    y = x @ theta + epsilon * rng.standard_normal(x.shape[0])
    return y - y.mean()


def haar_orthogonal(d: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def sample_theta_batch(d: int, m_theta: int, rng_seed) -> ThetaBatch:
    """m_theta unit vectors: columns of ceil(m_theta/d) Haar orthogonal matrices,
    the last one truncated."""
    if d < 1 or m_theta < 1:
        raise ValueError(f"need d >= 1 and m_theta >= 1, got d={d}, m_theta={m_theta}")
    rng = stream(rng_seed)
    n_mats = -(-m_theta // d)
    cols = [haar_orthogonal(d, rng).T for _ in range(n_mats)]
    return ThetaBatch(np.concatenate(cols, axis=0)[:m_theta], group_size=d)


def write_xy_csv(path, x, y) -> None:
    """Dump a sample as CSV with header x1..xd,y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{j + 1}" for j in range(x.shape[1])] + ["y"])
        for row, label in zip(x, y):
            w.writerow([f"{v:.17g}" for v in row] + [f"{label:.17g}"])

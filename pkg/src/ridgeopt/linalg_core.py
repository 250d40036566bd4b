"""Centering, thin SVD and SVD-based ridge solves.

Every analytic formula in the package sums over the k = min(N, d) nonzero
singular values, so only the thin decomposition is stored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSampleError,
    DimensionMismatchError,
    NonConvexObjectiveError,
    SingularityError,
)

RANK_TOL = 1e-12
# lambda must exceed -sigma_min**2 by this fraction of sigma_min**2
PENALTY_GUARD = 1e-9


@dataclass(frozen=True)
class SvdBundle:
    """Thin decomposition X = U diag(s) V^T with k = min(N, d)."""

    left_vectors: np.ndarray  # U, N x k
    singular_values: np.ndarray  # s, nonincreasing, length k
    right_vectors: np.ndarray  # V, d x k
    source_shape: tuple[int, int]

    @property
    def n_rows(self) -> int:
        return self.source_shape[0]

    @property
    def n_cols(self) -> int:
        return self.source_shape[1]

    @property
    def rank(self) -> int:
        return self.singular_values.shape[0]

    @property
    def sigma_min_sq(self) -> float:
        return float(self.singular_values[-1] ** 2)

    def projections(self, theta) -> np.ndarray:
        """Return v_j^T theta for j = 1..k."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_cols,):
            raise DimensionMismatchError(
                f"theta has shape {theta.shape}, expected ({self.n_cols},)"
            )
        return self.right_vectors.T @ theta

    def reconstruct(self) -> np.ndarray:
        return (self.left_vectors * self.singular_values) @ self.right_vectors.T


@dataclass(frozen=True)
class RidgeFit:
    lam: float
    theta_hat: np.ndarray
    in_sample_residual_ss: float


def center_columns(x) -> np.ndarray:
    """Subtract column means, i.e. apply (I - 11^T/n) on the left."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 2:
        raise DegenerateSampleError(f"need at least 2 rows to center, got {x.shape[0]}")
    return x - x.mean(axis=0, keepdims=True)


def is_centered(x) -> bool:
    x = np.asarray(x, dtype=float)
    scale = np.max(np.abs(x)) if x.size else 0.0
    return bool(np.all(np.abs(x.sum(axis=0)) <= 1e-10 * x.shape[0] * max(scale, 1e-300)))


def decompose(x) -> SvdBundle:
    """Thin SVD of a (centered) data matrix.

    Raises SingularityError when sigma_min < 1e-12 * sigma_max: the analytic
    risk formulas divide by every sigma_j and a pseudo-inverse fallback would
    silently change them. The one exception is structural: a column-centered
    matrix with N <= d has rank at most N - 1 (the all-ones vector spans its
    left null space), and that single null direction is dropped.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or min(x.shape) < 1:
        raise DegenerateSampleError(f"expected a nonempty 2-D matrix, got shape {x.shape}")
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    if s[0] <= 0:
        raise SingularityError("design matrix is identically zero")
    n, d = x.shape
    if n <= d and n >= 2 and s[-1] < RANK_TOL * s[0] and is_centered(x):
        u, s, vt = u[:, :-1], s[:-1], vt[:-1]
    if s[-1] < RANK_TOL * s[0]:
        raise SingularityError(
            f"rank-deficient design: sigma_min={s[-1]:.3e}, sigma_max={s[0]:.3e}"
        )
    return SvdBundle(u, s, vt.T, (n, d))


def check_penalty(singular_values, lam) -> None:
    s2_min = float(np.min(np.asarray(singular_values) ** 2))
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr + s2_min <= PENALTY_GUARD * s2_min) or np.any(np.isnan(lam_arr)):
        raise NonConvexObjectiveError(
            f"lambda must exceed -sigma_min^2 = {-s2_min:.6g}; got {lam}"
        )


def shrinkage_factors(svd: SvdBundle, lam: float) -> np.ndarray:
    """sigma_j / (sigma_j^2 + lam), the diagonal of the ridge pseudo-inverse."""
    check_penalty(svd.singular_values, lam)
    s = svd.singular_values
    return s / (s**2 + lam)


def ridge_solve(svd: SvdBundle, y, lam: float) -> RidgeFit:
    """theta_hat = V diag(s/(s^2+lam)) U^T y; one formula for d <= N and d > N."""
    y = np.asarray(y, dtype=float)
    if y.shape != (svd.n_rows,):
        raise DimensionMismatchError(f"y has shape {y.shape}, expected ({svd.n_rows},)")
    uty = svd.left_vectors.T @ y
    theta_hat = svd.right_vectors @ (shrinkage_factors(svd, lam) * uty)
    s2 = svd.singular_values**2
    fitted = svd.left_vectors @ (s2 / (s2 + lam) * uty)
    resid = y - fitted
    return RidgeFit(float(lam), theta_hat, float(resid @ resid))


def predict(x, fit: RidgeFit) -> np.ndarray:
    """Return X @ theta_hat. ``x`` may be a matrix or an SvdBundle."""
    if isinstance(x, SvdBundle):
        coef = x.right_vectors.T @ fit.theta_hat
        return x.left_vectors @ (x.singular_values * coef)
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != fit.theta_hat.shape[0]:
        raise DimensionMismatchError(
            f"matrix with shape {x.shape} cannot multiply theta_hat of length "
            f"{fit.theta_hat.shape[0]}"
        )
    return x @ fit.theta_hat

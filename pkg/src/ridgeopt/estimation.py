"""Sample-based estimates of the hidden parameters and the resulting penalty.

The generative theta is replaced by a preliminary ridge fit at ``lambda0``.
The noise amplitude is read off the residual, discounting the fraction of
noise variance absorbed by the fit (the regularized rank r_p):

    d <  N:  eps_hat^2 = RSS / (N - 1) / (1 - r_p / N)
    d >= N:  eps_hat^2 = N / (N - 1) * MSE_cv / (1 + r_p / N)

where MSE_cv is a k-fold (default 2) cross-validated out-of-sample error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSampleError, EstimationError
from .genmodel import stream
from .linalg_core import (
    RidgeFit,
    SvdBundle,
    center_columns,
    check_penalty,
    decompose,
    ridge_solve,
)
from .risk_analytics import (
    DEFAULT_DELTA,
    DEFAULT_MAX_ITER,
    FixedPointOutcome,
    RiskInputs,
    model_opt_reg,
)

DEFAULT_LAMBDA0 = 1.0
DEFAULT_P = 0.25
DEFAULT_FOLDS = 2

NOISE_METHODS = ("unregularized", "regularized_rank", "cv_overparameterized")


@dataclass(frozen=True)
class NoiseEstimate:
    epsilon_hat: float
    method: str
    regularized_rank_value: float
    exponent_p: float


@dataclass(frozen=True)
class SampleEstimates:
    svd: SvdBundle
    fit: RidgeFit
    noise: NoiseEstimate

    @property
    def theta_hat_norm(self) -> float:
        return float(np.linalg.norm(self.fit.theta_hat))


@dataclass(frozen=True)
class RegStrengthRecommendation:
    lam: float
    method: str  # "sfp", "sn" or "default"
    epsilon_hat_used: float
    theta_hat_norm: float
    fixed_point: FixedPointOutcome | None = None
    noise: NoiseEstimate | None = None


def regularized_rank(singular_values, lam: float, p: float) -> float:
    """r_p = sum_j (s_j^2 / (s_j^2 + lam))^p."""
    if p < 0:
        raise ValueError(f"exponent p must be >= 0, got {p}")
    check_penalty(singular_values, lam)
    s2 = np.asarray(singular_values, dtype=float) ** 2
    return float(np.sum((s2 / (s2 + lam)) ** p))


def estimate_noise_under(svd: SvdBundle, y, theta_hat, lam: float, p: float) -> NoiseEstimate:
    """Residual-based noise amplitude; reduces to the unregularized estimate at lam = 0."""
    y = np.asarray(y, dtype=float)
    n = svd.n_rows
    fitted = svd.left_vectors @ (svd.singular_values * (svd.right_vectors.T @ theta_hat))
    rss = float(np.sum((fitted - y) ** 2))
    r = regularized_rank(svd.singular_values, lam, p)
    frac = 1.0 - r / n
    if frac <= 0:
        raise EstimationError(
            f"regularized rank {r:.6g} >= N={n}; use the overparameterized estimator"
        )
    method = "unregularized" if lam == 0 or p == 0 else "regularized_rank"
    return NoiseEstimate(float(np.sqrt(rss / (n - 1) / frac)), method, r, float(p))


def cv_mse(x, y, lam: float, rng_seed, folds: int = DEFAULT_FOLDS) -> float:
    """k-fold out-of-sample MSE of ridge(lam); every fold is re-centered."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    if folds < 2 or n < 2 * folds:
        raise DegenerateSampleError(f"{folds}-fold split needs at least {2 * folds} rows, got {n}")
    perm = stream(rng_seed).permutation(n)
    parts = np.array_split(perm, folds)
    errs = []
    for i, test in enumerate(parts):
        train = np.concatenate([q for j, q in enumerate(parts) if j != i])
        y_tr = y[train] - y[train].mean()
        fit = ridge_solve(decompose(center_columns(x[train])), y_tr, lam)
        x_te = center_columns(x[test])
        y_te = y[test] - y[test].mean()
        errs.append(float(np.mean((x_te @ fit.theta_hat - y_te) ** 2)))
    return float(np.mean(errs))


def estimate_noise_over(
    x,
    y,
    lambda0: float,
    p: float,
    rng_seed=0,
    folds: int = DEFAULT_FOLDS,
    svd: SvdBundle | None = None,
) -> NoiseEstimate:
    """Cross-validated noise amplitude for d >= N, where the in-sample residual vanishes.

    r_p is taken from the full-sample spectrum (``svd`` if given).
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if n < 4:
        raise DegenerateSampleError(f"overparameterized noise estimate needs N >= 4, got {n}")
    if svd is None:
        svd = decompose(x)
    oos = cv_mse(x, y, lambda0, rng_seed, folds)
    r = regularized_rank(svd.singular_values, lambda0, p)
    eps2 = n / (n - 1) * oos / (1.0 + r / n)
    return NoiseEstimate(float(np.sqrt(eps2)), "cv_overparameterized", r, float(p))


def estimate_parameters(
    x,
    y,
    lambda0: float = DEFAULT_LAMBDA0,
    p: float = DEFAULT_P,
    rng_seed=0,
    folds: int = DEFAULT_FOLDS,
    svd: SvdBundle | None = None,
) -> SampleEstimates:
    """Preliminary ridge fit at lambda0 plus the matching noise estimate."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if svd is None:
        svd = decompose(x)
    fit = ridge_solve(svd, y, lambda0)
    n, d = x.shape
    if d < n:
        noise = estimate_noise_under(svd, y, fit.theta_hat, lambda0, p)
    else:
        noise = estimate_noise_over(x, y, lambda0, p, rng_seed, folds, svd=svd)
    return SampleEstimates(svd, fit, noise)


def sample_opt_reg(
    x,
    y,
    lambda0: float = DEFAULT_LAMBDA0,
    p: float = DEFAULT_P,
    delta: float = DEFAULT_DELTA,
    rng_seed=0,
    folds: int = DEFAULT_FOLDS,
    max_iter: int = DEFAULT_MAX_ITER,
    estimates: SampleEstimates | None = None,
) -> RegStrengthRecommendation:
    """Optimal penalty from the data alone: plug theta_hat, eps_hat into the fixed point."""
    if lambda0 <= 0:
        raise ValueError(f"lambda0 must be > 0, got {lambda0}")
    est = estimates or estimate_parameters(x, y, lambda0, p, rng_seed, folds)
    inputs = RiskInputs.from_svd(est.svd, est.fit.theta_hat, est.noise.epsilon_hat)
    fp = model_opt_reg(inputs, lambda0, delta, max_iter)
    return RegStrengthRecommendation(
        lam=fp.lambda_star,
        method="sfp",
        epsilon_hat_used=est.noise.epsilon_hat,
        theta_hat_norm=est.theta_hat_norm,
        fixed_point=fp,
        noise=est.noise,
    )


def lambda_signal_to_noise(d: int, epsilon_hat: float, theta_hat_norm: float) -> float:
    """d * eps_hat^2 / |theta_hat|^2."""
    if theta_hat_norm <= 0:
        raise EstimationError("signal-to-noise penalty needs a nonzero theta_hat")
    return d * epsilon_hat**2 / theta_hat_norm**2


def recommend_signal_to_noise(estimates: SampleEstimates) -> RegStrengthRecommendation:
    eps = estimates.noise.epsilon_hat
    norm = estimates.theta_hat_norm
    return RegStrengthRecommendation(
        lam=lambda_signal_to_noise(estimates.svd.n_cols, eps, norm),
        method="sn",
        epsilon_hat_used=eps,
        theta_hat_norm=norm,
        noise=estimates.noise,
    )

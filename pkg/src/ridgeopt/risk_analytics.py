"""Analytic fixed-X risk of ridge regression and the optimal-penalty fixed point.

With X = U diag(s) V^T and projections p_j = v_j^T theta, the expected
out-of-sample MSE at penalty lam is

    mse(lam) = (bias^2 + var) / N + eps^2
    bias^2   = sum_j (lam s_j p_j / (s_j^2 + lam))^2
    var      = eps^2 sum_j (s_j^2 / (s_j^2 + lam))^2

Setting d mse / d lam = 0 gives lam = eps^2 H(lam) with

    H(lam) = sum_j s_j^4/(s_j^2+lam)^3  /  sum_j s_j^4 p_j^2/(s_j^2+lam)^3

which ``model_opt_reg`` iterates to a fixed point. All risk functions accept
a scalar or an array of penalties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateParameterError, DegenerateSampleError
from .linalg_core import PENALTY_GUARD, SvdBundle, check_penalty

DEFAULT_DELTA = 1e-4
DEFAULT_MAX_ITER = 1000
SEARCH_BOUNDS = (-1.0, 1e6)
LOG_GRID_POINTS = 512
NEG_GRID_POINTS = 64
LOG_GRID_FLOOR = 1e-8
REFINE_RTOL = 1e-10

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class RiskInputs:
    singular_values: np.ndarray
    projections: np.ndarray
    epsilon: float
    n: int
    theta_tail_ss: float = 0.0  # |theta|^2 outside span(V); diagnostics only

    def __post_init__(self):
        s = np.asarray(self.singular_values, dtype=float)
        p = np.asarray(self.projections, dtype=float)
        if s.ndim != 1 or s.shape != p.shape or s.size == 0:
            raise ValueError("singular_values and projections must be 1-D of equal length")
        if np.any(s <= 0):
            raise ValueError("all singular values must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        object.__setattr__(self, "singular_values", s)
        object.__setattr__(self, "projections", p)

    @classmethod
    def from_svd(cls, svd: SvdBundle, theta, epsilon: float) -> RiskInputs:
        theta = np.asarray(theta, dtype=float)
        p = svd.projections(theta)
        tail = max(float(theta @ theta - p @ p), 0.0)
        return cls(svd.singular_values, p, float(epsilon), svd.n_rows, tail)

    @property
    def k(self) -> int:
        return self.singular_values.shape[0]

    @property
    def sigma_min_sq(self) -> float:
        return float(self.singular_values[-1] ** 2) if self.k else 0.0

    def with_epsilon(self, epsilon: float) -> RiskInputs:
        return RiskInputs(self.singular_values, self.projections, epsilon, self.n, self.theta_tail_ss)


@dataclass(frozen=True)
class RiskReport:
    lam: float
    bias_sq: float
    variance: float
    expected_oos_mse: float
    stationarity_residual: float


@dataclass(frozen=True)
class FixedPointOutcome:
    lambda_star: float
    iterations: int
    converged: bool
    final_step: float
    fallback_used: bool
    mse_at_lambda: float


def _terms(inputs: RiskInputs, lam):
    check_penalty(inputs.singular_values, lam)
    lam = np.asarray(lam, dtype=float)
    s2 = inputs.singular_values**2
    return lam, s2, s2 + lam[..., None]


def bias_sq(inputs: RiskInputs, lam):
    lam, s2, denom = _terms(inputs, lam)
    t = lam[..., None] * inputs.singular_values * inputs.projections / denom
    return np.sum(t * t, axis=-1)


def variance(inputs: RiskInputs, lam):
    _, s2, denom = _terms(inputs, lam)
    return inputs.epsilon**2 * np.sum((s2 / denom) ** 2, axis=-1)


def mse(inputs: RiskInputs, lam):
    """Expected out-of-sample MSE; vectorized over ``lam``."""
    return (bias_sq(inputs, lam) + variance(inputs, lam)) / inputs.n + inputs.epsilon**2


def stationarity_residual(inputs: RiskInputs, lam):
    """(lam * sum s^4 p^2/(s^2+lam)^3 - eps^2 sum s^4/(s^2+lam)^3) / (1 + |lam|)."""
    lam, s2, denom = _terms(inputs, lam)
    w = s2 * s2 / denom**3
    lhs = lam * np.sum(w * inputs.projections**2, axis=-1)
    rhs = inputs.epsilon**2 * np.sum(w, axis=-1)
    return (lhs - rhs) / (1.0 + np.abs(lam))


def expected_mse(inputs: RiskInputs, lam: float) -> RiskReport:
    b = float(bias_sq(inputs, lam))
    v = float(variance(inputs, lam))
    return RiskReport(
        lam=float(lam),
        bias_sq=b,
        variance=v,
        expected_oos_mse=(b + v) / inputs.n + inputs.epsilon**2,
        stationarity_residual=float(stationarity_residual(inputs, lam)),
    )


def _h_sums(inputs: RiskInputs, lam):
    _, s2, denom = _terms(inputs, lam)
    p2 = inputs.projections**2
    w3 = s2 * s2 / denom**3
    w4 = w3 / denom
    num = np.sum(w3, axis=-1)
    den = np.sum(w3 * p2, axis=-1)
    if np.any(den <= 0):
        raise DegenerateParameterError("theta has no component along any right singular vector")
    return num, den, np.sum(w4, axis=-1), np.sum(w4 * p2, axis=-1)


def h_operator(inputs: RiskInputs, lam):
    num, den, _, _ = _h_sums(inputs, lam)
    return num / den


def h_derivative(inputs: RiskInputs, lam):
    """dH/dlam = 3 (A - B), A = num * sum(w4 p^2) / den^2, B = sum(w4) / den."""
    num, den, num4, den4 = _h_sums(inputs, lam)
    a = num * den4 / den**2
    b = num4 / den
    return 3.0 * (a - b)


def contraction_diagnostic(inputs: RiskInputs, lambda_grid) -> float:
    """sup over the grid of eps^2 |H'(lam)|; below 1 means the update contracts there."""
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.size == 0 or np.any(grid < 0):
        raise ValueError("lambda_grid must be nonempty and nonnegative")
    if inputs.epsilon == 0:
        return 0.0
    return float(np.max(inputs.epsilon**2 * np.abs(h_derivative(inputs, grid))))


def golden_section(f, a: float, b: float, rtol: float = REFINE_RTOL, max_iter: int = 200):
    """Minimize a unimodal scalar f on [a, b]; returns (x, f(x))."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= rtol * max(abs(a), abs(b)) or b - a <= 1e-300:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def penalty_grid(lower: float, upper: float, sigma_min_sq: float) -> np.ndarray:
    """Coarse search grid: linear on the negative part, log-spaced on the positive."""
    floor = -sigma_min_sq + 2 * PENALTY_GUARD * sigma_min_sq
    lo = max(lower, floor)
    if not lo < upper:
        raise DegenerateSampleError(f"empty feasible penalty interval ({lo}, {upper})")
    parts = []
    if lo < 0:
        parts.append(np.linspace(lo, 0.0, NEG_GRID_POINTS, endpoint=False))
        parts.append(np.zeros(1))
    if upper > LOG_GRID_FLOOR:
        parts.append(np.geomspace(max(lo, LOG_GRID_FLOOR), upper, LOG_GRID_POINTS))
    return np.unique(np.concatenate(parts))


def grid_minimize(objective, lower: float, upper: float, sigma_min_sq: float):
    """Global coarse-grid scan followed by golden-section refinement.

    ``objective`` must accept an array of penalties. Returns (lam, value) and
    never returns a value above the best grid point.
    """
    grid = penalty_grid(lower, upper, sigma_min_sq)
    values = np.asarray(objective(grid), dtype=float)
    values = np.where(np.isfinite(values), values, np.inf)
    i = int(np.argmin(values))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, grid.size - 1)]
    lam_best, f_best = float(grid[i]), float(values[i])
    if b > a:
        x, fx = golden_section(lambda t: float(objective(np.array([t]))[0]), a, b)
        if fx < f_best:
            lam_best, f_best = float(x), float(fx)
    return lam_best, f_best


def lambda_min_search(inputs: RiskInputs, lower: float = SEARCH_BOUNDS[0], upper: float = SEARCH_BOUNDS[1]):
    """Global minimizer of the expected MSE on (lower, upper)."""
    return grid_minimize(lambda lam: mse(inputs, lam), lower, upper, inputs.sigma_min_sq)


def model_opt_reg(
    inputs: RiskInputs,
    lambda0: float = 1.0,
    delta: float = DEFAULT_DELTA,
    max_iter: int = DEFAULT_MAX_ITER,
) -> FixedPointOutcome:
    """Iterate lam <- eps^2 H(lam) from lambda0 until successive iterates differ by <= delta.

    If the iteration does not settle within max_iter steps, the global search
    of ``lambda_min_search`` supplies the penalty and ``fallback_used`` is set.
    """
    if lambda0 < 0:
        raise ValueError(f"lambda0 must be >= 0, got {lambda0}")
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    eps2 = inputs.epsilon**2
    lam, lam_prev = float(lambda0), math.inf  # always take the first step
    it = 0
    while abs(lam - lam_prev) > delta and it < max_iter:
        lam_prev = lam
        lam = eps2 * float(h_operator(inputs, lam))
        it += 1
        if not math.isfinite(lam):
            break
    step = abs(lam - lam_prev)
    converged = math.isfinite(lam) and step <= delta
    if converged:
        return FixedPointOutcome(lam, it, True, step, False, float(mse(inputs, lam)))
    lam_fb, mse_fb = lambda_min_search(inputs)
    return FixedPointOutcome(lam_fb, it, False, step, True, mse_fb)

"""Fixed-X and random-X benchmark protocols for penalty-selection methods.

Methods:
    min      global minimizer of the analytic MSE (fixed-X) or of the test MSE (random-X)
    fp       fixed point with the true theta and eps
    sfp      fixed point with sample estimates theta_hat, eps_hat
    sn       signal-to-noise plug-in d eps_hat^2 / |theta_hat|^2
    default  the fixed penalty lambda0

Fixed-X scores every penalty by the analytic expected MSE under the true
parameters; random-X scores it by empirical MSE on a held-out test sample
drawn once per theta. Replicate cells run independently (optionally on a
thread pool) from seeds derived from their indices and are reduced in index
order, so results do not depend on the thread count.
"""

from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import estimation, risk_analytics
from .bootstrap import CiSummary, bca_interval
from .errors import ExcessiveSkipError, RidgeOptError
from .genmodel import make_profile, sample_theta_batch, stream, gen_x, gen_y
from .linalg_core import decompose, shrinkage_factors

log = logging.getLogger(__name__)

METHODS = ("min", "fp", "sfp", "sn", "default")
SETTINGS = ("fixed_x", "random_x")
DEFAULT_METHODS = {
    "fixed_x": ("min", "fp", "sfp", "sn", "default"),
    "random_x": ("min", "sfp", "sn", "default"),
}

# stream tags below the master seed
_THETA, _X, _Y, _SPLIT, _TEST_X, _TEST_Y, _BOOT = range(7)


class ConfigError(ValueError):
    """Invalid evaluation configuration; ``field`` names the offending key."""

    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class EvalConfig:
    setting: str = "random_x"
    n: int = 100
    d: int = 90
    profile: str = "spiked"
    eigenvalues: tuple | None = None
    epsilon: float = 1.0
    m_theta: int = 20
    m_x: int = 10
    m_y: int = 10
    m_xy: int = 20
    n_test: int = 1000
    methods: tuple | None = None
    seed: int = 42
    bootstrap_resamples: int = 2000
    confidence: float = 0.95
    lambda0: float = estimation.DEFAULT_LAMBDA0
    p: float = estimation.DEFAULT_P
    delta: float = risk_analytics.DEFAULT_DELTA
    max_iter: int = risk_analytics.DEFAULT_MAX_ITER
    folds: int = estimation.DEFAULT_FOLDS
    threads: int = 1
    max_skip_rate: float = 0.01

    def __post_init__(self):
        if self.methods is None:
            object.__setattr__(self, "methods", DEFAULT_METHODS.get(self.setting, ()))
        else:
            object.__setattr__(self, "methods", tuple(self.methods))
        if self.eigenvalues is not None:
            object.__setattr__(self, "eigenvalues", tuple(float(v) for v in self.eigenvalues))
        self.validate()

    def validate(self):
        if self.setting not in SETTINGS:
            raise ConfigError("setting", f"must be one of {SETTINGS}, got {self.setting!r}")
        for name in ("n", "d", "m_theta", "m_x", "m_y", "m_xy", "bootstrap_resamples",
                     "max_iter", "threads"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
                raise ConfigError(name, f"expected an integer >= 1, got {v!r}")
        if self.n < 2:
            raise ConfigError("n", f"sample size must be >= 2, got {self.n}")
        if self.setting == "random_x" and self.n_test < 2:
            raise ConfigError("n_test", f"must be >= 2, got {self.n_test}")
        if self.profile not in ("bulk", "spiked", "explicit"):
            raise ConfigError("profile", f"must be bulk, spiked or explicit, got {self.profile!r}")
        if self.profile == "explicit":
            if self.eigenvalues is None or len(self.eigenvalues) != self.d:
                raise ConfigError("eigenvalues", f"explicit profile needs exactly d={self.d} values")
            if any(v <= 0 for v in self.eigenvalues):
                raise ConfigError("eigenvalues", "must all be positive")
        if not self.epsilon >= 0:
            raise ConfigError("epsilon", f"must be >= 0, got {self.epsilon}")
        if not self.lambda0 > 0:
            raise ConfigError("lambda0", f"must be > 0, got {self.lambda0}")
        if not self.p >= 0:
            raise ConfigError("p", f"must be >= 0, got {self.p}")
        if not self.delta > 0:
            raise ConfigError("delta", f"must be > 0, got {self.delta}")
        if not 0 < self.confidence < 1:
            raise ConfigError("confidence", f"must lie in (0, 1), got {self.confidence}")
        if self.folds < 2:
            raise ConfigError("folds", f"must be >= 2, got {self.folds}")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown or not self.methods:
            raise ConfigError("methods", f"expected a nonempty subset of {METHODS}, got {self.methods}")

    def covariance(self):
        if self.profile == "explicit":
            return make_profile("explicit", self.d, self.eigenvalues)
        return make_profile(self.profile, self.d)


@dataclass(frozen=True)
class EvalRecord:
    method: str
    i_theta: int
    i_x: int  # i_xy in the random-X setting
    i_y: int | None
    lam: float
    mse: float


@dataclass(frozen=True)
class EstimateRecord:
    i_theta: int
    i_x: int
    i_y: int | None
    epsilon_hat: float
    rank_p: float
    theta_hat_norm: float
    noise_method: str


@dataclass(frozen=True)
class SkipRecord:
    i_theta: int
    i_x: int
    i_y: int | None
    units: int
    error: str


@dataclass
class EvalResult:
    config: EvalConfig
    records: list = field(default_factory=list)
    estimates: list = field(default_factory=list)
    summaries: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    units: int = 0

    @property
    def skip_rate(self) -> float:
        return sum(s.units for s in self.skipped) / self.units if self.units else 0.0

    def check_skip_rate(self):
        if self.skip_rate > self.config.max_skip_rate:
            raise ExcessiveSkipError(
                f"{self.skip_rate:.2%} of replicates failed numerically "
                f"(limit {self.config.max_skip_rate:.2%})",
                self,
            )

    def summary(self, method: str, statistic: str) -> CiSummary:
        for s in self.summaries:
            if s.method == method and s.statistic == statistic:
                return s
        raise KeyError((method, statistic))

    def values(self, method: str, attr: str = "mse") -> np.ndarray:
        return np.array([getattr(r, attr) for r in self.records if r.method == method])


@dataclass
class _CellOutput:
    records: list = field(default_factory=list)
    estimates: list = field(default_factory=list)
    skipped: list = field(default_factory=list)


def _run_cells(fn, cells, threads):
    if threads <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, cells))


def _sample_methods(cfg, x, y, svd, split_seed, out, idx):
    """sfp / sn / default on one (X, y) sample; returns {method: lam}."""
    want = [m for m in ("sfp", "sn") if m in cfg.methods]
    lams = {}
    if not want:
        return lams
    est = estimation.estimate_parameters(x, y, cfg.lambda0, cfg.p, split_seed, cfg.folds, svd=svd)
    out.estimates.append(
        EstimateRecord(*idx, est.noise.epsilon_hat, est.noise.regularized_rank_value,
                       est.theta_hat_norm, est.noise.method)
    )
    if "sfp" in want:
        rec = estimation.sample_opt_reg(
            x, y, cfg.lambda0, cfg.p, cfg.delta, max_iter=cfg.max_iter, estimates=est
        )
        lams["sfp"] = rec.lam
    if "sn" in want:
        lams["sn"] = estimation.recommend_signal_to_noise(est).lam
    return lams


def _fixed_x_cell(cfg, thetas, cov, cell):
    i_t, i_x = cell
    out = _CellOutput()
    theta = thetas[i_t]
    try:
        x = gen_x(cfg.n, cov, stream(cfg.seed, _X, i_t, i_x))
        svd = decompose(x)
        truth = risk_analytics.RiskInputs.from_svd(svd, theta, cfg.epsilon)
        score = lambda lam: float(risk_analytics.mse(truth, lam))
        if "min" in cfg.methods:
            lam, val = risk_analytics.lambda_min_search(truth)
            out.records.append(EvalRecord("min", i_t, i_x, None, lam, val))
        if "fp" in cfg.methods:
            fp = risk_analytics.model_opt_reg(truth, cfg.lambda0, cfg.delta, cfg.max_iter)
            out.records.append(EvalRecord("fp", i_t, i_x, None, fp.lambda_star, fp.mse_at_lambda))
        if "default" in cfg.methods:
            out.records.append(EvalRecord("default", i_t, i_x, None, cfg.lambda0, score(cfg.lambda0)))
    except RidgeOptError as exc:
        out.skipped.append(SkipRecord(i_t, i_x, None, cfg.m_y, repr(exc)))
        return out
    if not any(m in cfg.methods for m in ("sfp", "sn")):
        return out
    for i_y in range(cfg.m_y):
        try:
            y = gen_y(x, theta, cfg.epsilon, stream(cfg.seed, _Y, i_t, i_x, i_y))
            lams = _sample_methods(
                cfg, x, y, svd, stream(cfg.seed, _SPLIT, i_t, i_x, i_y), out, (i_t, i_x, i_y)
            )
            for m, lam in lams.items():
                out.records.append(EvalRecord(m, i_t, i_x, i_y, lam, score(lam)))
        except RidgeOptError as exc:
            out.skipped.append(SkipRecord(i_t, i_x, i_y, 1, repr(exc)))
    return out


class HeldOutMse:
    """Empirical test-set MSE of the ridge fit on (X, y), vectorized over penalties.

    Uses |A c - b|^2 = c^T G c - 2 h^T c + b^T b with A = X_test V, so each
    penalty costs O(k^2) after an O(N_test k^2) setup.
    """

    def __init__(self, svd, y, x_test, y_test):
        self.svd = svd
        self.uty = svd.left_vectors.T @ y
        a = x_test @ svd.right_vectors
        self.gram = a.T @ a
        self.h = a.T @ y_test
        self.bb = float(y_test @ y_test)
        self.n_test = y_test.shape[0]

    def coefficients(self, lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        s = self.svd.singular_values
        s2 = s**2
        if np.any(lam + s2[-1] <= 0):
            shrinkage_factors(self.svd, float(lam.min()))  # raises
        return s * self.uty / (s2 + lam[:, None])

    def __call__(self, lam):
        c = self.coefficients(lam)
        quad = np.einsum("li,ij,lj->l", c, self.gram, c)
        val = (quad - 2.0 * c @ self.h + self.bb) / self.n_test
        return np.maximum(val, 0.0)


def _random_x_cell(cfg, thetas, cov, tests, cell):
    i_t, i_xy = cell
    out = _CellOutput()
    theta = thetas[i_t]
    x_test, y_test = tests[i_t]
    try:
        x = gen_x(cfg.n, cov, stream(cfg.seed, _X, i_t, i_xy))
        y = gen_y(x, theta, cfg.epsilon, stream(cfg.seed, _Y, i_t, i_xy))
        svd = decompose(x)
        test_mse = HeldOutMse(svd, y, x_test, y_test)
        score = lambda lam: float(test_mse(lam)[0])
        recs = []
        if "min" in cfg.methods:
            lam, val = risk_analytics.grid_minimize(
                test_mse, *risk_analytics.SEARCH_BOUNDS, svd.sigma_min_sq
            )
            recs.append(("min", lam, val))
        if "fp" in cfg.methods:
            truth = risk_analytics.RiskInputs.from_svd(svd, theta, cfg.epsilon)
            fp = risk_analytics.model_opt_reg(truth, cfg.lambda0, cfg.delta, cfg.max_iter)
            recs.append(("fp", fp.lambda_star, score(fp.lambda_star)))
        lams = _sample_methods(
            cfg, x, y, svd, stream(cfg.seed, _SPLIT, i_t, i_xy), out, (i_t, i_xy, None)
        )
        for m in ("sfp", "sn"):
            if m in lams:
                recs.append((m, lams[m], score(lams[m])))
        if "default" in cfg.methods:
            recs.append(("default", cfg.lambda0, score(cfg.lambda0)))
    except RidgeOptError as exc:
        out.estimates.clear()
        out.skipped.append(SkipRecord(i_t, i_xy, None, 1, repr(exc)))
        return out
    order = {m: i for i, m in enumerate(METHODS)}
    for m, lam, val in sorted(recs, key=lambda r: order[r[0]]):
        out.records.append(EvalRecord(m, i_t, i_xy, None, float(lam), float(val)))
    return out


def _collect(cfg, outputs, units):
    res = EvalResult(cfg, units=units)
    for o in outputs:
        res.records.extend(o.records)
        res.estimates.extend(o.estimates)
        res.skipped.extend(o.skipped)
    order = {m: i for i, m in enumerate(METHODS)}
    res.records.sort(key=lambda r: (order[r.method], r.i_theta, r.i_x, -1 if r.i_y is None else r.i_y))
    for s in res.skipped:
        log.warning("skipped replicate theta=%d x=%d y=%s: %s", s.i_theta, s.i_x, s.i_y, s.error)
    res.summaries = aggregate_medians(
        res.records, cfg.bootstrap_resamples, cfg.seed, cfg.confidence, methods=cfg.methods
    ) + _estimate_summaries(res.estimates, cfg)
    return res


def _threads(cfg):
    env = os.environ.get("RIDGEOPT_THREADS")
    return int(env) if env and cfg.threads == 1 else cfg.threads


def evaluate_fixed_x(cfg: EvalConfig) -> EvalResult:
    if cfg.setting != "fixed_x":
        cfg = replace(cfg, setting="fixed_x")
    cov = cfg.covariance()
    thetas = sample_theta_batch(cfg.d, cfg.m_theta, stream(cfg.seed, _THETA)).vectors
    cells = [(i, j) for i in range(cfg.m_theta) for j in range(cfg.m_x)]
    outputs = _run_cells(lambda c: _fixed_x_cell(cfg, thetas, cov, c), cells, _threads(cfg))
    return _collect(cfg, outputs, cfg.m_theta * cfg.m_x * cfg.m_y)


def evaluate_random_x(cfg: EvalConfig) -> EvalResult:
    if cfg.setting != "random_x":
        cfg = replace(cfg, setting="random_x")
    cov = cfg.covariance()
    thetas = sample_theta_batch(cfg.d, cfg.m_theta, stream(cfg.seed, _THETA)).vectors
    tests = []
    for i in range(cfg.m_theta):
        xt = gen_x(cfg.n_test, cov, stream(cfg.seed, _TEST_X, i))
        tests.append((xt, gen_y(xt, thetas[i], cfg.epsilon, stream(cfg.seed, _TEST_Y, i))))
    cells = [(i, j) for i in range(cfg.m_theta) for j in range(cfg.m_xy)]
    outputs = _run_cells(lambda c: _random_x_cell(cfg, thetas, cov, tests, c), cells, _threads(cfg))
    return _collect(cfg, outputs, cfg.m_theta * cfg.m_xy)


def evaluate(cfg: EvalConfig) -> EvalResult:
    return evaluate_fixed_x(cfg) if cfg.setting == "fixed_x" else evaluate_random_x(cfg)


def aggregate_medians(records, resamples=2000, seed=42, confidence=0.95, methods=None):
    """Median penalty and MSE per method, each with a BCa interval."""
    methods = methods or tuple(dict.fromkeys(r.method for r in records))
    out = []
    for i_m, m in enumerate(METHODS):
        if m not in methods:
            continue
        group = [r for r in records if r.method == m]
        if not group:
            raise ValueError(f"no records for method {m!r}")
        for i_s, (stat, attr) in enumerate((("median_lambda", "lam"), ("median_mse", "mse"))):
            vals = np.array([getattr(r, attr) for r in group])
            ci = bca_interval(vals, resamples, confidence, stream(seed, _BOOT, i_m, i_s))
            out.append(replace(ci, method=m, statistic=stat))
    return out


def _estimate_summaries(estimates, cfg):
    out = []
    if not estimates:
        return out
    fields = (("median_epsilon_hat", "epsilon_hat"), ("median_rank_p", "rank_p"),
              ("median_theta_hat_norm", "theta_hat_norm"))
    for i_s, (stat, attr) in enumerate(fields):
        vals = np.array([getattr(e, attr) for e in estimates])
        ci = bca_interval(vals, cfg.bootstrap_resamples, cfg.confidence,
                          stream(cfg.seed, _BOOT, len(METHODS), i_s))
        out.append(replace(ci, method="sfp", statistic=stat))
    return out


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_result(result: EvalResult, out_dir) -> dict:
    """Write records.csv, summary.csv, estimates.csv (and skipped.csv if any)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "records": out_dir / "records.csv",
        "summary": out_dir / "summary.csv",
        "estimates": out_dir / "estimates.csv",
    }
    write_csv(paths["records"], ["method", "i_theta", "i_x", "i_y", "lambda", "mse"],
              [(r.method, r.i_theta, r.i_x, r.i_y, r.lam, r.mse) for r in result.records])
    write_csv(paths["summary"], ["method", "statistic", "point", "lo", "hi", "resamples"],
              [(s.method, s.statistic, s.point, s.lo, s.hi, s.resamples) for s in result.summaries])
    write_csv(paths["estimates"],
              ["i_theta", "i_x", "i_y", "epsilon_hat", "rank_p", "theta_hat_norm", "noise_method"],
              [(e.i_theta, e.i_x, e.i_y, e.epsilon_hat, e.rank_p, e.theta_hat_norm, e.noise_method)
               for e in result.estimates])
    stale = out_dir / "skipped.csv"
    if stale.exists() and not result.skipped:
        stale.unlink()
    if result.skipped:
        paths["skipped"] = stale
        write_csv(paths["skipped"], ["i_theta", "i_x", "i_y", "units", "error"],
                  [(s.i_theta, s.i_x, s.i_y, s.units, s.error) for s in result.skipped])
    return paths

"""Command-line front end.

    ridgeopt recommend --input data.csv [--lambda0 1] [--p 0.25] [--delta 1e-4] [--json out.json]
    ridgeopt evaluate  --config run.yaml --out dir/
    ridgeopt sweep     --config run.yaml --axis {n|aspect|noise} --out dir/
    ridgeopt landscape --config run.yaml --out dir/

Exit status: 0 success, 2 configuration or input error, 3 numerical failure
(including a replicate skip rate above the configured limit).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import estimation, risk_analytics
from .config import RunConfig, load_config, with_axis
from .errors import ExcessiveSkipError, RidgeOptError
from .eval_harness import ConfigError, EvalResult, evaluate, write_csv, write_result
from .genmodel import gen_x, sample_theta_batch, stream
from .linalg_core import center_columns, decompose

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("ridgeopt")


class InputError(ValueError):
    pass


def read_xy_csv(path):
    """Numeric CSV, last column = y; a non-numeric first row is taken as a header."""
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if rows:
        try:
            [float(c) for c in rows[0]]
        except ValueError:
            rows = rows[1:]
    if not rows:
        raise InputError(f"{path}: no data rows")
    width = len(rows[0])
    if width < 2:
        raise InputError(f"{path}: need at least one feature column and a label column")
    try:
        data = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise InputError(f"{path}: unparseable value ({exc})") from exc
    except Exception as exc:  # ragged rows
        raise InputError(f"{path}: rows have unequal lengths") from exc
    if data.ndim != 2 or not np.all(np.isfinite(data)):
        raise InputError(f"{path}: rows have unequal lengths or non-finite values")
    return data[:, :-1], data[:, -1]


def recommend(x, y, lambda0=1.0, p=0.25, delta=1e-4, seed=42, folds=2) -> dict:
    """Centered sample-based recommendation plus the baselines, as a flat dict."""
    x = center_columns(x)
    y = np.asarray(y, dtype=float)
    y = y - y.mean()
    est = estimation.estimate_parameters(x, y, lambda0, p, stream(seed), folds)
    rec = estimation.sample_opt_reg(x, y, lambda0, p, delta, estimates=est)
    sn = estimation.recommend_signal_to_noise(est)
    fp = rec.fixed_point
    return {
        "n": int(x.shape[0]),
        "d": int(x.shape[1]),
        "lambda_sfp": rec.lam,
        "epsilon_hat": est.noise.epsilon_hat,
        "theta_hat_norm": est.theta_hat_norm,
        "rank_p": est.noise.regularized_rank_value,
        "noise_method": est.noise.method,
        "iterations": fp.iterations,
        "converged": fp.converged,
        "fallback_used": fp.fallback_used,
        "lambda_sn": sn.lam,
        "lambda0": float(lambda0),
        "p": float(p),
        "delta": float(delta),
    }


def cmd_recommend(args) -> int:
    x, y = read_xy_csv(args.input)
    report = recommend(x, y, args.lambda0, args.p, args.delta, args.seed, args.folds)
    for key, value in report.items():
        print(f"{key}: {json.dumps(value)}")
    if args.json:
        Path(args.json).write_text(json.dumps(report, indent=2) + "\n")
    return EXIT_OK


def _load(args) -> RunConfig:
    # threads: flag > config file > RIDGEOPT_THREADS > available cores
    env = os.environ.get("RIDGEOPT_THREADS")
    try:
        fallback = int(env) if env else (os.cpu_count() or 1)
    except ValueError as exc:
        raise ConfigError("RIDGEOPT_THREADS", f"expected an integer, got {env!r}") from exc
    return load_config(args.config, {"seed": args.seed, "threads": args.threads},
                       {"threads": fallback})


def _finish(result: EvalResult) -> int:
    try:
        result.check_skip_rate()
    except ExcessiveSkipError as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_evaluate(args) -> int:
    run = _load(args)
    result = evaluate(run.eval)
    paths = write_result(result, args.out)
    print(f"wrote {', '.join(str(p) for p in paths.values())}")
    return _finish(result)


SWEEP_HEADER = ["axis", "value", "n", "d", "epsilon", "method", "statistic",
                "point", "lo", "hi", "resamples", "relative_to_min"]


def run_sweep(run: RunConfig, axis: str, out_dir):
    out_dir = Path(out_dir)
    rows, status = [], EXIT_OK
    for i, value in enumerate(run.sweep_values(axis)):
        cfg = with_axis(run.eval, axis, value)
        result = evaluate(cfg)
        write_result(result, out_dir / f"point_{i:03d}")
        best = {s.statistic: s.point for s in result.summaries if s.method == "min"}
        for s in result.summaries:
            rel = None
            if s.statistic == "median_mse" and best.get("median_mse"):
                rel = s.point / best["median_mse"]
            rows.append((axis, float(value), cfg.n, cfg.d, cfg.epsilon, s.method, s.statistic,
                         s.point, s.lo, s.hi, s.resamples, rel))
        status = max(status, _finish(result))
    path = out_dir / "sweep.csv"
    write_csv(path, SWEEP_HEADER, rows)
    return path, status


def cmd_sweep(args) -> int:
    run = _load(args)
    path, status = run_sweep(run, args.axis, args.out)
    print(f"wrote {path}")
    return status


def _landscape_instances(run: RunConfig):
    """Yield RiskInputs for each theta (or the crafted spectrum) of a landscape config."""
    cfg, extras = run.eval, run.extras
    if "singular_values" in extras:
        s = np.asarray(extras["singular_values"], dtype=float)
        proj = extras.get("projections")
        if proj is None:
            raise ConfigError("projections", "required together with singular_values")
        proj = np.atleast_2d(np.asarray(proj, dtype=float))
        if proj.shape[1] != s.size:
            raise ConfigError("projections", f"each vector needs {s.size} entries")
        return [risk_analytics.RiskInputs(s, p, cfg.epsilon, cfg.n) for p in proj]
    x = gen_x(cfg.n, cfg.covariance(), stream(cfg.seed, 1, 0, 0))
    svd = decompose(x)
    theta = extras.get("theta", "principal")
    if theta == "principal":
        thetas = np.eye(cfg.d)
    elif theta == "random":
        thetas = sample_theta_batch(cfg.d, cfg.m_theta, stream(cfg.seed, 0)).vectors
    else:
        thetas = np.atleast_2d(np.asarray(theta, dtype=float))
        if thetas.shape[1] != cfg.d:
            raise ConfigError("theta", f"each vector needs d={cfg.d} entries")
    return [risk_analytics.RiskInputs.from_svd(svd, t, cfg.epsilon) for t in thetas]


def run_landscape(run: RunConfig, out_dir):
    cfg, extras = run.eval, run.extras
    lo = extras.get("lambda_lo", 1e-3)
    hi = extras.get("lambda_hi", 1e4)
    points = extras.get("grid_points", 200)
    if not 0 < lo < hi or points < 2:
        raise ConfigError("lambda_lo", "need 0 < lambda_lo < lambda_hi and grid_points >= 2")
    grid = np.geomspace(lo, hi, points)
    curve, markers = [], []
    for i, inputs in enumerate(_landscape_instances(run)):
        b = risk_analytics.bias_sq(inputs, grid)
        v = risk_analytics.variance(inputs, grid)
        m = risk_analytics.mse(inputs, grid)
        r = risk_analytics.stationarity_residual(inputs, grid)
        curve.extend((i, lam, bb, vv, mm, rr) for lam, bb, vv, mm, rr in zip(grid, b, v, m, r))
        fp = risk_analytics.model_opt_reg(inputs, cfg.lambda0, cfg.delta, cfg.max_iter)
        lam_min, mse_min = risk_analytics.lambda_min_search(inputs)
        markers.append((i, "fp", fp.lambda_star, fp.mse_at_lambda))
        markers.append((i, "min", lam_min, mse_min))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(out_dir / "landscape.csv",
              ["i_theta", "lambda", "bias_sq", "variance", "mse", "stationarity_residual"], curve)
    write_csv(out_dir / "markers.csv", ["i_theta", "marker", "lambda", "mse"], markers)
    return out_dir / "landscape.csv", out_dir / "markers.csv"


def cmd_landscape(args) -> int:
    run = _load(args)
    paths = run_landscape(run, args.out)
    print(f"wrote {', '.join(str(p) for p in paths)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ridgeopt", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("recommend", help="optimal ridge penalty for a CSV sample")
    p.add_argument("--input", required=True)
    p.add_argument("--lambda0", type=float, default=estimation.DEFAULT_LAMBDA0)
    p.add_argument("--p", type=float, default=estimation.DEFAULT_P)
    p.add_argument("--delta", type=float, default=risk_analytics.DEFAULT_DELTA)
    p.add_argument("--folds", type=int, default=estimation.DEFAULT_FOLDS)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--json")
    p.set_defaults(func=cmd_recommend)

    for name, func, helptext in (
        ("evaluate", cmd_evaluate, "run a fixed-X or random-X benchmark"),
        ("sweep", cmd_sweep, "run a benchmark along one axis"),
        ("landscape", cmd_landscape, "tabulate the analytic MSE over a penalty grid"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        if name == "sweep":
            p.add_argument("--axis", required=True, choices=("n", "aspect", "noise"))
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RidgeOptError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

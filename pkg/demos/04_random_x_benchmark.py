"""Out-of-sample comparison of penalty rules on fresh designs.

For each of m_theta unit regression vectors we draw m_xy independent samples
(N=100, d=90, spiked covariance, unit noise) and one shared test set of 1000
points. Every rule picks a penalty from the training sample; the held-out MSE
is recorded, and medians are reported with 95% BCa bootstrap intervals.

  min      best penalty on the test set (an oracle lower bound)
  sfp      sample-based fixed point
  sn       d * eps_hat^2 / |theta_hat|^2
  default  lambda0 = 1

Usage: python demos/04_random_x_benchmark.py [out_dir] [m]. With out_dir the CSV
files are written too; m (default 10) sets both replicate counts.
"""

import sys

from ridgeopt.eval_harness import EvalConfig, evaluate, write_result

m = int(sys.argv[2]) if len(sys.argv) > 2 else 10
cfg = EvalConfig(setting="random_x", n=100, d=90, profile="spiked", epsilon=1.0,
                 m_theta=m, m_xy=m, n_test=1000, threads=4, bootstrap_resamples=1000)
result = evaluate(cfg)

print(f"{m} x {m} replicates, skip rate {result.skip_rate:.1%}\n")
print(f"{'method':>8} {'median MSE':>24} {'median lambda':>26}")
for method in cfg.methods:
    e = result.summary(method, "median_mse")
    lam = result.summary(method, "median_lambda")
    print(f"{method:>8} {e.point:8.4f} [{e.lo:.4f}, {e.hi:.4f}] {lam.point:10.3f} [{lam.lo:.3f}, {lam.hi:.3f}]")

for stat in ("median_epsilon_hat", "median_rank_p", "median_theta_hat_norm"):
    s = result.summary("sfp", stat)
    print(f"{stat:>22}: {s.point:.4f}")

if len(sys.argv) > 1:
    paths = write_result(result, sys.argv[1])
    print("\nwrote", ", ".join(str(p) for p in paths.values()))

"""How close does the fixed-point penalty get to the true optimum?

A small fixed design (N=10, d=5, covariance diag(5,4,3,2,1), unit noise) and
five regression vectors, one along each principal axis. For each we compare
the penalty found by iterating lam <- eps^2 H(lam) with the global minimizer
of the expected out-of-sample MSE.
"""

import numpy as np

from ridgeopt.genmodel import gen_x, make_profile, stream
from ridgeopt.linalg_core import decompose
from ridgeopt.risk_analytics import RiskInputs, lambda_min_search, model_opt_reg

x = gen_x(10, make_profile("explicit", 5, [5, 4, 3, 2, 1]), stream(42, 1))
svd = decompose(x)

print(f"{'axis':>4} {'lambda_fp':>12} {'lambda_min':>12} {'rel dlambda':>12} {'rel dMSE':>10} {'iters':>5}")
for j in range(5):
    inputs = RiskInputs.from_svd(svd, np.eye(5)[j], epsilon=1.0)
    fp = model_opt_reg(inputs, lambda0=1.0)
    lam_min, mse_min = lambda_min_search(inputs)
    print(f"{j + 1:>4} {fp.lambda_star:12.6f} {lam_min:12.6f} "
          f"{abs(fp.lambda_star - lam_min) / lam_min:12.2e} "
          f"{abs(fp.mse_at_lambda - mse_min) / mse_min:10.1e} {fp.iterations:5d}")

# The iteration needs a handful of steps and agrees with the expensive global
# search to better than 1e-4 in lambda; the MSE values agree to ~1e-12
# because the objective is flat at its minimum.

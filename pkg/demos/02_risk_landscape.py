"""The expected-MSE curve is not always bowl shaped.

With two widely separated clusters of singular values, and the signal living
mostly along the weak directions, the stationarity residual changes sign three
times: two local minima separated by a local maximum. The fixed-point
iteration then converges to whichever basin it starts in, while the global
grid + golden-section search always finds the better one.
"""

import numpy as np

from ridgeopt.risk_analytics import (
    RiskInputs,
    bias_sq,
    lambda_min_search,
    model_opt_reg,
    mse,
    stationarity_residual,
    variance,
)

s = np.array([30.0] * 5 + [0.3] * 5)
p = np.array([0.02] * 5 + [5.0] * 5)
inputs = RiskInputs(s, p, epsilon=0.5, n=20)

grid = np.geomspace(1e-4, 1e6, 20001)
res = stationarity_residual(inputs, grid)
crossings = grid[np.nonzero(np.diff(np.sign(res)))[0]]
print("stationary points near", ", ".join(f"{c:.4g}" for c in crossings))

print(f"\n{'lambda':>10} {'bias^2':>10} {'variance':>10} {'mse':>10}")
for lam in (1e-3, 1e-2, 1e-1, 1, 10, 30, 100, 620, 1e4):
    print(f"{lam:10.4g} {bias_sq(inputs, lam):10.4g} {variance(inputs, lam):10.4g} {mse(inputs, lam):10.5f}")

lam_min, mse_min = lambda_min_search(inputs)
print(f"\nglobal minimum: lambda={lam_min:.6g}, mse={mse_min:.6f}")
for lam0 in (1.0, 100.0):
    fp = model_opt_reg(inputs, lambda0=lam0)
    print(f"fixed point from lambda0={lam0:g}: lambda={fp.lambda_star:.6g}, mse={fp.mse_at_lambda:.6f}")

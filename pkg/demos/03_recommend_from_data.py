"""Pick a ridge penalty for a data set using only the data.

We simulate one sample (spiked covariance, N=100, d=90, unit noise), write
it to CSV, and ask the command-line tool for a recommendation. The sample-based
fixed point plugs a preliminary ridge fit (lambda0=1) and a noise estimate into
the same iteration used for the true model. The signal-to-noise rule
d * eps_hat^2 / |theta_hat|^2 and lambda0 itself are printed for comparison.
"""

import json
import sys
import tempfile
from pathlib import Path

from ridgeopt.cli import main
from ridgeopt.genmodel import gen_x, gen_y, make_profile, sample_theta_batch, stream, write_xy_csv

n, d = 100, 90
x = gen_x(n, make_profile("spiked", d), stream(7, 1))
theta = sample_theta_batch(d, 1, stream(7, 0)).vectors[0]
y = gen_y(x, theta, 1.0, stream(7, 2))

with tempfile.TemporaryDirectory() as tmp:
    data, out = Path(tmp) / "data.csv", Path(tmp) / "rec.json"
    write_xy_csv(data, x, y)
    code = main(["recommend", "--input", str(data), "--json", str(out)])
    report = json.loads(out.read_text())

print(f"\nexit status {code}; the JSON file holds the same {len(report)} fields")
print(f"sample-based penalty {report['lambda_sfp']:.2f} vs signal-to-noise {report['lambda_sn']:.2f}")
sys.exit(code)

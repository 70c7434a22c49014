"""
ISTA on a lazily revealed Gaussian design
=========================================

Runs the lasso/ISTA iteration on an ``m x n`` design with i.i.d.
``N(0, 1/m)`` entries, once with the matrix-free lazy operator and once
with an explicitly sampled matrix, and prints the two trial-averaged MSE
curves side by side.
"""

import numpy as np

from lazyrm.experiments import IstaConfig, ista_run

# Default lasso parameters; a modest dimension keeps this quick.
cfg = IstaConfig(n=512, T=30, trials=200, seed=1)
hd = ista_run(cfg, "hd")
direct = ista_run(cfg, "direct")

print(f"n={cfg.n}, m={cfg.rows}, T={cfg.T}, {cfg.trials} trials per backend")
print(f"{'t':>3} {'hd':>10} {'direct':>10} {'z':>6}")
for t in range(0, cfg.T + 1, 3):
    z = (hd.mse_mean[t] - direct.mse_mean[t]) / np.hypot(hd.mse_stderr[t], direct.mse_stderr[t])
    print(f"{t:3d} {hd.mse_mean[t]:10.5f} {direct.mse_mean[t]:10.5f} {z:6.2f}")

# The lazy operator only ever stores 2T+1 reflectors of length ~n, so it
# also runs at sizes where the dense matrix would not fit in memory.
big = ista_run(IstaConfig(n=200_000, T=10, seed=2), "hd")
print("n=200000, one trial, final MSE:", round(float(big.mse_mean[-1]), 5))

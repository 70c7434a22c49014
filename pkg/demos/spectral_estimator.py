"""
Spectral estimator on a subsampled Haar design
==============================================

``D = (1/m) A diag(y) A^T`` is never formed.  Each eigensolver matvec is a
left probe, a diagonal scaling by ``y/m`` and a right probe.
"""

from lazyrm.experiments import SpectralConfig, spectral_run

for alpha in (1.5, 2.0, 3.0, 5.0):
    cfg = SpectralConfig(n=500, alpha=alpha, trials=5, seed=0)
    res = spectral_run(cfg, "hd")
    print(f"alpha={alpha:3.1f}  m={cfg.m:5d}  rho={res.rho_mean:.3f} +- {res.rho_stderr:.3f}  "
          f"lambda_max={res.lam_max.mean():.4f}")

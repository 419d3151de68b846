"""Default-statistics Monte-Carlo runs shared by the acceptance and validation tests.

Each run uses the library defaults (dt = 1e-3, 2^16 samples, 400
trajectories); runs are cached for the lifetime of the test process.
"""
from functools import lru_cache

import numpy as np

from lgdopo.classical import DopoParams
from lgdopo.linear_quantum import QuadratureSelector
from lgdopo.stochastic import SimConfig, simulate_spectra

OMEGA = np.arange(0.0, 5.01, 0.25)
SELECTORS = tuple(QuadratureSelector(2, k, q) for k in "cs" for q in "yx")


@lru_cache(maxsize=None)
def default_run(sigma: float, family: int = 2, g: float = 0.01, seed: int = 0):
    cfg = SimConfig(DopoParams(family, sigma, g), seed=seed)
    sels = [s for s in SELECTORS if s.l in cfg.params.oams]
    spectra, res = simulate_spectra(cfg, sels, omega=OMEGA)
    return cfg, spectra, res

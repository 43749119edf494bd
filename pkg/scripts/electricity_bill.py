"""Energy dissipated by an ideal resistor read off as a Levy area.

With voltage V and charge Q sampled over k periods, the area term of the
(V, Q) path grows linearly in k, while the increments stay near zero.
"""
import argparse
from dataclasses import dataclass

import numpy as np

from sigstream import PiecewiseLinearPath, log_signature


@dataclass
class Config:
    samples_per_period: int = 400
    periods: tuple = (1, 2, 4, 8, 16)
    phase_lag: float = np.pi / 2


def main(cfg: Config):
    print(f"{'periods':>7} {'dV':>10} {'dQ':>10} {'area':>12} {'area/period':>12}")
    for k in cfg.periods:
        t = np.linspace(0.0, 2.0 * np.pi * k, cfg.samples_per_period * k + 1)
        V, Q = np.sin(t), np.sin(t - cfg.phase_lag)
        c = log_signature(PiecewiseLinearPath(t, np.c_[V, Q]), 2)
        print(f"{k:>7} {c['1']:10.2e} {c['2']:10.2e} {c['12']:12.6f} {c['12'] / k:12.6f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples-per-period", type=int, default=Config.samples_per_period)
    ap.add_argument("--phase-lag", type=float, default=Config.phase_lag)
    a = ap.parse_args()
    main(Config(samples_per_period=a.samples_per_period, phase_lag=a.phase_lag))

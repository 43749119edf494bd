"""Log-ODE error on a linear 2x2 system as the partition is halved, at depths 1-4.

The reference is the signature contracted against the matrices at a high
truncation depth, which is exact to rounding for this small path.
"""
import argparse
from dataclasses import dataclass

import numpy as np

from sigstream import LogOdeConfig, PiecewiseLinearPath, VectorFieldSet, signature, solve_cde
from sigstream.logode import contract_signature, uniform_partition


@dataclass
class Config:
    seed: int = 20240601
    scale: float = 0.5
    max_depth: int = 4
    steps: tuple = (1, 2, 4, 8, 16, 32, 64)
    oracle_depth: int = 16


def main(cfg: Config):
    A = cfg.scale * np.random.default_rng(cfg.seed).normal(size=(2, 2, 2))
    path = PiecewiseLinearPath([0.0, 0.3, 1.0], [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
    z0 = np.array([1.0, -0.5])
    ref = contract_signature(signature(path, cfg.oracle_depth).sig, A, z0)
    vf = VectorFieldSet.linear(A)

    print("steps " + "".join(f"{f'depth {n}':>12}" for n in range(1, cfg.max_depth + 1)))
    for m in cfg.steps:
        row = []
        for n in range(1, cfg.max_depth + 1):
            z = solve_cde(vf, path, LogOdeConfig(n, uniform_partition(path, m)), z0).final
            row.append(np.max(np.abs(z - ref)))
        print(f"{m:>5} " + "".join(f"{e:12.3e}" for e in row))


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=Config.seed)
    ap.add_argument("--max-depth", type=int, default=Config.max_depth)
    a = ap.parse_args()
    main(Config(seed=a.seed, max_depth=a.max_depth))

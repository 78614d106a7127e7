"""Which (radius, block size) pair moves fastest between two symmetric modes?

A 14-covariate regression with one duplicated covariate has two equally
likely sparse explanations that differ in two positions.  Every cell of the
(m, K) grid runs under a comparable compute budget; sampling efficiency is
the mode-switch rate per sweep and overall efficiency divides it by the
number of candidates scored per sweep.

    python demos/efficiency_grid.py --budget 50000
"""
import argparse

import numpy as np

from hamball.diagnostics import NearestModeClassifier, efficiency_grid
from hamball.models import simulate_experiment


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--budget", type=int, default=50_000)
    p.add_argument("--seed", type=int, default=1)
    args = p.parse_args()

    ds = simulate_experiment("regression", {"n": 100, "d": 14, "confounders": (3, 10)},
                             np.random.default_rng(args.seed))
    model = ds.build_model()
    modes = [np.eye(14, dtype=np.int8)[c - 1] for c in (3, 10)]
    grid = efficiency_grid(model, NearestModeClassifier(modes), budget=args.budget,
                           seed=args.seed, x0=modes[0])
    print("overall efficiency x 1e6 (rows m, columns K)")
    print("m\\K " + "".join(f"{K:>7d}" for K in range(1, 15)))
    for m in range(1, 15):
        cells = [f"{grid.cell(m, K).overall * 1e6:7.1f}" if m <= K else " " * 7
                 for K in range(1, 15)]
        print(f"{m:3d} " + "".join(cells))
    best = grid.best()
    print(f"best cell: m={best.m}, K={best.K}")


if __name__ == "__main__":
    main()

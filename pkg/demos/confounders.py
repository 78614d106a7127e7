"""Running inclusion probabilities of two perfectly confounded covariates.

Column c2 of the design is a copy of column c1, so the posterior gives both
the same inclusion probability.  A block Hamming-ball sweep (K=10, m=1) can
swap the two in one move; single-site Gibbs must pass through a state with
both or neither included.

    python demos/confounders.py --d 200 --iters 20000
"""
import argparse

import numpy as np

from hamball import BallSpec, SamplerConfig, run_chain
from hamball.diagnostics import running_inclusion
from hamball.models import simulate_experiment


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--d", type=int, default=200)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--iters", type=int, default=20_000)
    p.add_argument("--seed", type=int, default=1)
    args = p.parse_args()

    ds = simulate_experiment("regression", {"n": args.n, "d": args.d},
                             np.random.default_rng(args.seed))
    model = ds.build_model()
    c1, c2 = (c - 1 for c in ds.truth["confounders"])
    x0 = np.zeros(args.d, dtype=np.int8)
    x0[c1] = 1
    runs = {
        "HB1 (K=10, m=1)": SamplerConfig(scheme="hb-block", ball=BallSpec(1), block_size=10,
                                         iterations=args.iters, burnin=0, seed=args.seed),
        "BG1 (K=m=1)": SamplerConfig(scheme="block-gibbs", block_size=1, iterations=args.iters,
                                     burnin=0, seed=args.seed),
    }
    checkpoints = np.unique(np.geomspace(100, args.iters, 6).astype(int)) - 1
    print("sweeps".ljust(18) + "".join(f"{c + 1:>16d}" for c in checkpoints))
    for name, cfg in runs.items():
        trace = run_chain(cfg, model, x0=x0)
        p1, p2 = running_inclusion(trace, c1), running_inclusion(trace, c2)
        print(name.ljust(18) + "".join(f"{p1[c]:>8.3f}/{p2[c]:<7.3f}" for c in checkpoints))


if __name__ == "__main__":
    main()

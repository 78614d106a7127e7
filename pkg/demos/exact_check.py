"""Exact transition kernels on a tiny model.

Enumerates the posterior of a four-covariate regression and builds the exact
one-iteration kernel of every scheme, then prints how far each moves the
posterior (it should not move it at all) and the two-step mixing distance.

    python demos/exact_check.py
"""
import numpy as np

from hamball import BallSpec, oracle
from hamball.models import RegressionModel


def main():
    rng = np.random.default_rng(0)
    Z = rng.standard_normal((12, 4))
    Z[:, 1] = Z[:, 0]
    y = Z[:, 0] + 0.5 * rng.standard_normal(12)
    model = RegressionModel(y, Z)
    table = oracle.exact_posterior(model)
    print("exact inclusion probabilities:", np.round(oracle.exact_marginals(table)[:, 1], 4))
    for scheme in ("hb", "hb-block", "block-gibbs", "pure-mh"):
        P = oracle.exact_kernel(scheme, model, spec=BallSpec(1), block_size=2, table=table)
        tv = 0.5 * np.abs(np.linalg.matrix_power(P, 2) - table.probs).sum(axis=1).max()
        print(f"{scheme:12s} max|pi P - pi| = {oracle.stationarity_error(P, table):.1e}   "
              f"worst TV after 2 steps = {tv:.3f}")


if __name__ == "__main__":
    main()

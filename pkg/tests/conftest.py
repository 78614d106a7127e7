"""Tiny model instances shared by the test modules.

Every fixture here is small enough for exhaustive enumeration, so exact
posteriors and transition kernels are available as ground truth.
"""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings
from scipy import stats

from hamball.models import FhmmModel, RegressionModel, TumorModel
from hamball.models.tumor import TumorParams

# wall-clock deadlines flake on a loaded single core; example counts bound the cost
settings.register_profile("hamball", deadline=None)
settings.load_profile("hamball")


def regression_toy(D=4, n=12, seed=0, duplicate=True):
    """Small regression problem; column 2 copies column 1 when ``duplicate``."""
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, D))
    if duplicate and D > 1:
        Z[:, 1] = Z[:, 0]
    y = Z[:, 0] + 0.5 * rng.standard_normal(n)
    return RegressionModel(y, Z)


def tumor_toy():
    """Two clone slots, two mutations, shallow reads so every column is plausible."""
    model = TumorModel(reads=[6, 2], depth=[10, 10], n_clones=2)
    theta = TumorParams(np.array([0.7, 0.3]), np.array([0.6, 0.4]))
    return model, theta


def fhmm_toy(K=2, N=3, seed=1):
    """Additive FHMM with one observed dimension and well separated weights."""
    rng = np.random.default_rng(seed)
    w = np.array([1.0, 0.6, 0.35, 0.2])[:K]
    x = rng.integers(0, 2, size=(K, N))
    y = x.T @ w + 0.3 * rng.standard_normal(N)
    return FhmmModel(y, w, rho=0.2, nu=0.4), 0.25


# (name, model, theta, vector block size)
def tiny_fixtures():
    tumor, tumor_theta = tumor_toy()
    fhmm, sigma2 = fhmm_toy()
    return [("regression", regression_toy(), None, 2),
            ("tumor", tumor, tumor_theta, None),
            ("fhmm", fhmm, sigma2, None)]


# one verdict line per acceptance criterion, printed after the test summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def chi_square_pvalue(counts, probs):
    """Goodness-of-fit p-value, pooling cells with tiny expected counts."""
    counts = np.asarray(counts, dtype=float)
    probs = np.asarray(probs, dtype=float)
    expected = probs * counts.sum()
    keep = expected >= 5
    obs = np.append(counts[keep], counts[~keep].sum())
    exp = np.append(expected[keep], expected[~keep].sum())
    if exp[-1] == 0:
        obs, exp = obs[:-1], exp[:-1]
    if obs.size < 2:
        return 1.0
    return float(stats.chisquare(obs, exp).pvalue)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import regression_toy
from hamball import ball_volume
from hamball.diagnostics import (NearestModeClassifier, Transitions, autocovariance,
                                 efficiency_grid, ess, iat, is_degenerate, mode_transitions,
                                 running_inclusion, sweep_complexity)


def ar1(rho, n, seed):
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = e[0] / math.sqrt(1 - rho ** 2)
    for i in range(1, n):
        x[i] = rho * x[i - 1] + e[i]
    return x


def ar1_fast(rho, n, seed):
    from scipy.signal import lfilter
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(n)
    e[0] /= math.sqrt(1 - rho ** 2)
    return lfilter([1.0], [1.0, -rho], e)


# -- autocorrelation --------------------------------------------------------

def test_autocovariance_matches_direct_sum(rng):
    x = rng.standard_normal(50)
    acov = autocovariance(x)
    xc = x - x.mean()
    for lag in (0, 1, 7, 49):
        assert acov[lag] == pytest.approx(np.dot(xc[: 50 - lag], xc[lag:]) / 50, abs=1e-12)


def test_filtered_ar1_matches_recursion():
    np.testing.assert_allclose(ar1_fast(0.5, 200, 3), ar1(0.5, 200, 3), atol=1e-12)


def test_iat_iid_is_one(rng):
    assert iat(rng.standard_normal(100_000)) == pytest.approx(1.0, abs=0.05)


@pytest.mark.parametrize("rho", [0.0, 0.3, 0.5, 0.8])
def test_iat_ar1_matches_analytic_value(rho):
    want = (1 + rho) / (1 - rho)
    assert iat(ar1_fast(rho, 1_000_000, seed=int(rho * 10))) == pytest.approx(want, rel=0.05)


def test_constant_series_is_degenerate():
    x = np.full(50, 2.5)
    assert is_degenerate(x)
    assert math.isinf(iat(x))
    assert ess(x) == 0.0


def test_short_series_rejected():
    with pytest.raises(ValueError):
        iat(np.arange(9.0))


def test_ess_iid(rng):
    assert ess(rng.standard_normal(1000)) == pytest.approx(1000, rel=0.1)


@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=10, max_size=300))
@settings(max_examples=100)
def test_ess_never_exceeds_length(values):
    assert 0 <= ess(values) <= len(values)


def test_tiny_spread_does_not_underflow():
    x = np.zeros(10)
    x[-1] = 2.5e-173
    assert 0 < ess(x) <= 10
    assert iat(x) == pytest.approx(iat(x * 1e173))


@given(st.floats(1e-200, 1e200))
def test_iat_is_scale_free(scale):
    x = ar1_fast(0.5, 500, 3)
    assert iat(x * scale) == pytest.approx(iat(x), rel=1e-9)


def test_thinning_by_two_at_most_halves_ess():
    x = ar1_fast(0.7, 200_000, 11)
    full, half = ess(x), ess(x[::2])
    assert half >= full / 2 * 0.95
    assert half <= full * 1.05


# -- inclusion and transitions ----------------------------------------------

def test_running_inclusion_examples():
    np.testing.assert_array_equal(running_inclusion(np.ones((5, 3)), 1), np.ones(5))
    alternating = np.array([[0], [1]] * 500)
    assert running_inclusion(alternating, 0)[-1] == pytest.approx(0.5)
    np.testing.assert_allclose(running_inclusion(alternating, 0)[:4], [0, 0.5, 1 / 3, 0.5])


def test_mode_transition_examples(rng):
    assert mode_transitions([0] * 20) == Transitions(0, 0.0)
    alt = mode_transitions([0, 1] * 10)
    assert alt.count == 19 and alt.rate == 1.0
    iid = mode_transitions(rng.integers(0, 2, size=200_000))
    assert iid.rate == pytest.approx(0.5, abs=0.01)
    assert mode_transitions([1]).count == 0


def test_classifier_nearest_and_ties():
    modes = [np.array([1, 1, 0, 0]), np.array([0, 0, 1, 1])]
    clf = NearestModeClassifier(modes)
    states = np.array([[1, 1, 0, 0], [1, 0, 0, 0], [1, 0, 1, 0], [0, 0, 1, 1], [1, 0, 1, 0]])
    # the equidistant state keeps the previous label
    np.testing.assert_array_equal(clf(states), [0, 0, 0, 1, 1])
    np.testing.assert_array_equal(clf(states[2:3]), [0])


def test_classifier_row_permutations():
    mode_a = np.array([[1, 1, 1], [1, 1, 0], [1, 0, 0]])
    mode_b = np.array([[1, 0, 0], [1, 1, 0], [1, 0, 1]])
    clf = NearestModeClassifier([mode_a, mode_b], row_permutations=True)
    shuffled = mode_b[[2, 0, 1]]
    assert clf(shuffled[None])[0] == 1
    assert clf(mode_a[[1, 2, 0]][None])[0] == 0
    assert NearestModeClassifier([mode_a, mode_b])(shuffled[None])[0] == 0


# -- efficiency grid --------------------------------------------------------

def test_sweep_complexity_examples():
    assert sweep_complexity(14, 1, 1) == 2 * 14
    for D, K, m in [(12, 3, 2), (14, 7, 1), (20, 5, 5)]:
        assert sweep_complexity(D, K, m) == ball_volume(K, 2, m) * D // K
    # a ragged final block scores its own, smaller ball
    assert sweep_complexity(14, 4, 2) == 3 * ball_volume(4, 2, 2) + ball_volume(2, 2, 2)


def test_grid_complexity_matches_engine_counters():
    model = regression_toy(D=6, n=20)
    clf = NearestModeClassifier([np.array([1, 0, 0, 0, 0, 0]), np.array([0, 1, 0, 0, 0, 0])])
    grid = efficiency_grid(model, clf, budget=2000, seed=1, min_iterations=30)
    assert len(grid.cells) == 21
    for cell in grid.cells:
        assert cell.m <= cell.K
        assert cell.measured_evaluations == cell.complexity * cell.iterations
        assert cell.overall == pytest.approx(cell.efficiency / cell.complexity)
    assert grid.best() in grid.cells


def test_grid_csv(tmp_path):
    model = regression_toy(D=4, n=20)
    clf = NearestModeClassifier([np.array([1, 0, 0, 0]), np.array([0, 1, 0, 0])])
    grid = efficiency_grid(model, clf, budget=500, seed=2, min_iterations=20, radii=[1],
                           block_sizes=[1, 2])
    grid.to_csv(tmp_path / "grid.csv")
    rows = (tmp_path / "grid.csv").read_text().splitlines()
    assert rows[0] == "m,K,complexity,efficiency,overall"
    assert [r.split(",")[:3] for r in rows[1:]] == [["1", "1", "8"], ["1", "2", "6"]]

"""Chain diagnostics and the (m, K) efficiency grid."""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .ball import BallSpec, ball_volume
from .engine import SamplerConfig, run_chain, stream_seed

MIN_SERIES = 10


def autocovariance(series) -> np.ndarray:
    """Biased autocovariance at every lag, by FFT."""
    x = np.asarray(series, dtype=float)
    n = x.size
    x = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, size)
    return np.fft.irfft(f * np.conj(f), size)[:n] / n


def iat(series) -> float:
    """Integrated autocorrelation time, initial positive sequence estimator.

    Autocovariances are summed in adjacent pairs ``gamma(2j) + gamma(2j+1)``
    until the first non-positive pair.  A constant series has no defined
    autocorrelation and returns ``inf`` (see :func:`is_degenerate`).

    Raises
    ------
    ValueError
        If the series has fewer than 10 values.
    """
    x = np.asarray(series, dtype=float)
    if x.size < MIN_SERIES:
        raise ValueError(f"need at least {MIN_SERIES} values, got {x.size}")
    if is_degenerate(x):
        return math.inf
    # the IAT is scale free; rescaling keeps tiny spreads from underflowing
    x = x - x.mean()
    acov = autocovariance(x / np.abs(x).max())
    if acov[0] <= 0:
        return math.inf
    n_pairs = acov.size // 2
    pairs = acov[: 2 * n_pairs].reshape(n_pairs, 2).sum(axis=1)
    nonpos = np.flatnonzero(pairs <= 0)
    stop = nonpos[0] if nonpos.size else n_pairs
    return float((2.0 * pairs[:stop].sum() - acov[0]) / acov[0])


def is_degenerate(series) -> bool:
    """True for a constant series, whose IAT is reported as infinite."""
    x = np.asarray(series, dtype=float)
    return bool(np.all(x == x[0]))


def ess(series) -> float:
    """Effective sample size ``n / IAT``; 0 for a constant series.

    The IAT is floored at 1 so that the ESS never exceeds ``n``.
    """
    x = np.asarray(series, dtype=float)
    tau = iat(x)
    if math.isinf(tau):
        return 0.0
    return x.size / max(tau, 1.0)


def _states(trace_or_states):
    return np.asarray(getattr(trace_or_states, "states", trace_or_states))


def running_inclusion(trace_or_states, position) -> np.ndarray:
    """Prefix means of the indicator ``x[position] != 0`` over recorded states."""
    states = _states(trace_or_states)
    flat = states.reshape(states.shape[0], -1)
    ind = (flat[:, position] != 0).astype(float)
    return np.cumsum(ind) / np.arange(1, ind.size + 1)


@dataclass(frozen=True)
class Transitions:
    count: int
    rate: float


def mode_transitions(labels) -> Transitions:
    """Number of label changes between consecutive records and the rate per step.

    The rate divides by the number of consecutive pairs, so labels that
    alternate at every record give exactly 1.
    """
    labels = np.asarray(labels)
    if labels.size < 2:
        return Transitions(0, 0.0)
    count = int(np.count_nonzero(labels[1:] != labels[:-1]))
    return Transitions(count, count / (labels.size - 1))


class NearestModeClassifier:
    """Label states by the closest reference configuration in Hamming distance.

    Ties keep the previous label (the first record takes the lowest tied
    index).  With ``row_permutations=True`` a matrix state is compared with
    every row permutation of each mode, which makes clone labels
    interchangeable.
    """

    def __init__(self, modes, row_permutations: bool = False):
        modes = [np.asarray(m) for m in modes]
        self.shape = modes[0].shape
        refs, owners = [], []
        for label, mode in enumerate(modes):
            variants = [mode]
            if row_permutations and mode.ndim == 2:
                variants = [mode[list(p)] for p in permutations(range(mode.shape[0]))]
            for v in variants:
                refs.append(v.ravel())
                owners.append(label)
        self.refs = np.array(refs)
        self.owners = np.array(owners)
        self.n_modes = len(modes)

    def distances(self, states) -> np.ndarray:
        """``(n, n_modes)`` minimum Hamming distance to each mode."""
        flat = np.asarray(states).reshape(len(states), -1)
        d = np.stack([(flat != r).sum(axis=1) for r in self.refs], axis=1)
        out = np.full((flat.shape[0], self.n_modes), np.iinfo(np.int64).max)
        for j, owner in enumerate(self.owners):
            out[:, owner] = np.minimum(out[:, owner], d[:, j])
        return out

    def __call__(self, states) -> np.ndarray:
        d = self.distances(states)
        best = d.min(axis=1, keepdims=True)
        tied = (d == best).sum(axis=1) > 1
        labels = d.argmin(axis=1)
        for i in np.flatnonzero(tied):
            if i > 0:
                cand = np.flatnonzero(d[i] == best[i, 0])
                labels[i] = labels[i - 1] if labels[i - 1] in cand else cand[0]
        return labels


# -- efficiency grid ---------------------------------------------------------

def sweep_complexity(D: int, K: int, m: int, S: int = 2) -> int:
    """Candidate evaluations of one block sweep over ``D`` entries.

    Blocks have length ``K`` except a shorter final block when ``K`` does not
    divide ``D``; each block scores its whole ball.  Equals
    ``ball_volume(K, S, m) * D / K`` when ``K`` divides ``D``.
    """
    sizes = [K] * (D // K) + ([D % K] if D % K else [])
    return sum(ball_volume(k, S, min(m, k)) for k in sizes)


@dataclass
class GridCell:
    m: int
    K: int
    complexity: int
    efficiency: float
    overall: float
    iterations: int = 0
    transitions: int = 0
    measured_evaluations: int = 0


@dataclass
class EfficiencyGrid:
    """Upper-triangular grid of cells with ``1 <= m <= K <= D``."""

    D: int
    cells: list = field(default_factory=list)

    def cell(self, m, K) -> GridCell:
        for c in self.cells:
            if c.m == m and c.K == K:
                return c
        raise KeyError((m, K))

    def best(self) -> GridCell:
        return max(self.cells, key=lambda c: (c.overall, -c.complexity))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["m", "K", "complexity", "efficiency", "overall"])
            for c in self.cells:
                w.writerow([c.m, c.K, c.complexity, repr(c.efficiency), repr(c.overall)])


def _run_cell(args):
    model, classifier, scheme, m, K, iterations, seed, stream, x0 = args
    rng = np.random.default_rng(stream_seed(seed, stream))
    config = SamplerConfig(scheme=scheme, ball=BallSpec(radius=m), iterations=iterations,
                           burnin=0, block_size=K, seed=seed, theta_update="fixed")
    trace = run_chain(config, model, rng=rng, x0=x0)
    tr = mode_transitions(classifier(trace.states))
    return m, K, iterations, tr, trace.counters.candidate_evaluations


def grid_threads() -> int:
    """Worker count from ``HB_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("HB_THREADS", "1")))
    except ValueError:
        return 1


def efficiency_grid(model, classifier, budget: int, seed: int = 0, x0=None,
                    min_iterations: int = 200, max_iterations: int | None = None,
                    radii=None, block_sizes=None, scheme: str = "hb-block",
                    threads: int | None = None) -> EfficiencyGrid:
    """Estimate sampling and overall efficiency over ``(m, K)``.

    Each cell runs ``max(min_iterations, budget // complexity)`` sweeps (capped
    by ``max_iterations``) so cells get comparable compute.  Sampling
    efficiency is the mode-transition rate per sweep reported by
    ``classifier``; overall efficiency divides it by the per-sweep complexity.
    Cells run in worker processes when ``threads`` (default ``HB_THREADS``)
    exceeds 1, each on its own RNG stream.
    """
    D = int(np.prod(model.shape))
    S = model.n_symbols
    block_sizes = range(1, D + 1) if block_sizes is None else block_sizes
    jobs = []
    for K in block_sizes:
        for m in (range(1, K + 1) if radii is None else [r for r in radii if r <= K]):
            cx = sweep_complexity(D, K, m, S)
            iters = max(min_iterations, budget // cx)
            if max_iterations is not None:
                iters = min(iters, max_iterations)
            jobs.append((model, classifier, scheme, m, K, iters, seed, len(jobs), x0))
    threads = grid_threads() if threads is None else threads
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_cell, jobs))
    else:
        results = [_run_cell(j) for j in jobs]
    grid = EfficiencyGrid(D)
    for m, K, iters, tr, evals in results:
        cx = sweep_complexity(D, K, m, S)
        grid.cells.append(GridCell(m, K, cx, tr.rate, tr.rate / cx, iters, tr.count, evals))
    return grid

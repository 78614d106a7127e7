"""Chain driver: one iteration per scheme, traces, move-bound checks."""
from __future__ import annotations

import csv
import hashlib
import time
from dataclasses import dataclass, field

import numpy as np

from ..ball import BallSpec
from ..errors import ConfigError, MoveBoundViolation, NumericalDegeneracyError
from ..models.base import CHAIN, UNSTRUCTURED
from .auxiliary import draw_radius_vector, partition_sizes, random_partition, resample_auxiliary
from .config import SamplerConfig
from .slices import Counters
from .updates import hb_block_sweep, hb_state_update, pure_mh_step, row_gibbs_sweep, theta_update_joint_mh

# matrices with at most this many entries are written out symbol by symbol
SMALL_MATRIX = 64


class SamplerStepError(RuntimeError):
    """A sampler move failed; carries the iteration index and the cause."""

    def __init__(self, iteration: int, cause: Exception):
        super().__init__(f"iteration {iteration}: {type(cause).__name__}: {cause}")
        self.iteration = iteration
        self.cause = cause


def stream_seed(seed: int, stream: int) -> np.random.SeedSequence:
    """Independent RNG stream ``stream`` derived from a 64-bit seed."""
    return np.random.SeedSequence(entropy=seed, spawn_key=(stream,))


@dataclass
class Trace:
    """Recorded chain output after burn-in and thinning."""

    iterations: np.ndarray
    log_joint: np.ndarray
    elapsed_ms: np.ndarray          # cumulative wall time at each record
    theta: np.ndarray               # (records, q)
    states: np.ndarray              # (records, *state shape), int8
    theta_names: list
    counters: Counters = field(default_factory=Counters)
    sweeps: int = 0
    max_move: int = 0
    move_checks: int = 0
    final_state: np.ndarray | None = None
    final_theta: object = None

    def __len__(self):
        return self.iterations.size

    @property
    def evaluations_per_sweep(self) -> float:
        return self.counters.candidate_evaluations / self.sweeps if self.sweeps else 0.0

    def state_summaries(self) -> list:
        return [state_summary(s) for s in self.states]

    def to_csv(self, path, timing: bool = True) -> None:
        """Write one row per record.

        ``timing=False`` writes zeros in ``elapsed_ms`` so that reruns with the
        same seed produce byte-identical files.
        """
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["iter", "log_joint", "elapsed_ms"] + list(self.theta_names) + ["state"])
            for r in range(len(self)):
                ms = f"{self.elapsed_ms[r]:.3f}" if timing else "0"
                w.writerow([int(self.iterations[r]), repr(float(self.log_joint[r])), ms]
                           + [repr(float(v)) for v in self.theta[r]]
                           + [state_summary(self.states[r])])


def state_summary(x) -> str:
    """Compact text form of a state.

    Binary vectors list their active positions (1-based, ``;``-separated),
    other vectors list ``position:symbol`` for non-zero entries, small matrices
    are written row-major as a digit string and larger matrices as one 64-bit
    hash per column.
    """
    x = np.asarray(x)
    if x.ndim == 1:
        nz = np.flatnonzero(x)
        if x.max(initial=0) <= 1:
            return ";".join(str(i + 1) for i in nz)
        return ";".join(f"{i + 1}:{x[i]}" for i in nz)
    if x.size <= SMALL_MATRIX:
        return "".join(str(v) for v in x.ravel().tolist())
    cols = np.ascontiguousarray(x.T.astype(np.int8))
    return ";".join(hashlib.blake2b(c.tobytes(), digest_size=8).hexdigest() for c in cols)


def _blocks(config: SamplerConfig, model, rng):
    """Per-iteration block partition (``None`` for column blocks of matrices)."""
    if model.structure != UNSTRUCTURED:
        return None
    size = int(np.prod(model.shape))
    K = config.block_size if config.block_size is not None else size
    return random_partition(size, min(K, size), rng)


def effective_ball(config: SamplerConfig):
    """Block Gibbs is the Hamming-ball block sweep with the radius at its maximum."""
    if config.scheme == "block-gibbs":
        return BallSpec(radius=10 ** 9, lam=0.0)
    return config.ball


def check_config(config: SamplerConfig, model) -> None:
    """Reject scheme/model pairings the engine cannot run."""
    if config.scheme == "block-gibbs" and config.block_axis == "rows" and model.structure != CHAIN:
        raise ConfigError("row blocks need a chain model", key="sampler.block_axis")
    if config.theta_update == "joint-mh":
        try:
            model.propose_theta(model.initial_theta(), np.random.default_rng(0))
        except NotImplementedError as exc:
            raise ConfigError(str(exc), key="sampler.theta_update") from None
    if model.structure == UNSTRUCTURED and np.ndim(config.ball.radius) > 0:
        size = int(np.prod(model.shape))
        K = config.block_size or size
        if len(config.ball.radius) != -(-size // K):
            raise ConfigError("need one radius per block", key="sampler.m")


def sampler_step(x, theta, model, config: SamplerConfig, rng, counters=None):
    """One iteration of ``config.scheme``.

    Returns ``(x, theta, bound)`` where ``bound`` is the largest Hamming
    distance the move may legally cover.
    """
    scheme = config.scheme
    spec = effective_ball(config)
    lam = spec.lam
    if scheme == "block-gibbs" and config.block_axis == "rows":
        if config.theta_update == "conditional-gibbs":
            theta = model.update_theta(x, theta, rng)
        x = row_gibbs_sweep(x, theta, model, config.block_size or 1, rng, counters)
        return x, theta, int(np.size(x))
    blocks = _blocks(config, model, rng)
    radii = draw_radius_vector(spec, partition_sizes(x, blocks), rng)
    if scheme == "hb":
        U = resample_auxiliary(x, radii, lam, rng, blocks, model.n_symbols)
        if config.theta_update == "joint-mh":
            theta, x, _ = theta_update_joint_mh(theta, U, model, radii, lam, rng, blocks,
                                                config.product_bound, counters)
            theta = model.update_theta_rest(x, theta, rng)
        else:
            if config.theta_update == "conditional-gibbs":
                theta = model.update_theta(x, theta, rng)
            x, _ = hb_state_update(U, theta, model, radii, lam, rng, blocks,
                                   config.product_bound, counters)
        return x, theta, 2 * int(radii.sum())
    if config.theta_update == "conditional-gibbs":
        theta = model.update_theta(x, theta, rng)
    if scheme == "pure-mh":
        x, _ = pure_mh_step(x, theta, model, radii, rng, blocks, config.product_bound, counters)
        return x, theta, int(radii.sum())
    x = hb_block_sweep(x, theta, model, radii, lam, rng, blocks, counters)
    return x, theta, 2 * int(radii.sum())


def run_chain(config: SamplerConfig, model, rng=None, x0=None, theta0=None) -> Trace:
    """Run one chain and record it.

    The RNG defaults to a generator seeded from ``config.seed``; the run is
    then a deterministic function of ``(config, model, x0, theta0)``.  After
    every iteration the Hamming distance between consecutive states is checked
    against the scheme's bound and :class:`MoveBoundViolation` is raised on
    any excess.
    """
    check_config(config, model)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    x = model.initial_state() if x0 is None else np.array(x0, dtype=np.int8, copy=True)
    if x.shape != tuple(model.shape):
        raise ConfigError(f"initial state has shape {x.shape}, model expects {model.shape}",
                          key="sampler.init")
    theta = model.initial_theta() if theta0 is None else theta0
    n = config.n_records
    q = len(model.theta_names())
    trace = Trace(np.zeros(n, dtype=np.int64), np.zeros(n), np.zeros(n), np.zeros((n, q)),
                  np.zeros((n,) + x.shape, dtype=np.int8), model.theta_names())
    counters = trace.counters
    elapsed = 0.0
    r = 0
    for t in range(config.iterations):
        start = time.perf_counter()
        try:
            x_new, theta, bound = sampler_step(x, theta, model, config, rng, counters)
        except (NumericalDegeneracyError, FloatingPointError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise SamplerStepError(t, exc) from exc
        elapsed += time.perf_counter() - start
        moved = int(np.count_nonzero(x_new != x))
        if moved > bound:
            raise MoveBoundViolation(f"iteration {t}: moved {moved} entries, bound {bound}")
        trace.max_move = max(trace.max_move, moved)
        trace.move_checks += 1
        x = x_new
        kept = t - config.burnin
        if kept >= 0 and kept % config.thin == 0:
            trace.iterations[r] = t
            trace.log_joint[r] = model.log_joint(x, theta)
            trace.elapsed_ms[r] = 1000.0 * elapsed
            trace.theta[r] = model.theta_vector(theta)
            trace.states[r] = x
            r += 1
    trace.sweeps = config.iterations
    trace.final_state = x
    trace.final_theta = theta
    return trace

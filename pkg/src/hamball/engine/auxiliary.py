"""Block partitions, radius vectors and auxiliary-state draws."""
from __future__ import annotations

import math

import numpy as np

from ..ball import BallSpec, ball_table
from ..errors import ConfigError, ContractError, NumericalDegeneracyError


def random_partition(size: int, block_size: int, rng) -> list:
    """Fresh uniform permutation of ``0..size-1`` cut into contiguous chunks.

    The last block is shorter when ``block_size`` does not divide ``size``.
    """
    if block_size < 1:
        raise ContractError("block size must be >= 1")
    perm = rng.permutation(size)
    return [perm[i:i + block_size] for i in range(0, size, block_size)]


def partition_sizes(x, blocks) -> np.ndarray:
    """Block lengths: rows per column for matrices, chunk lengths for vectors."""
    if blocks is None:
        return np.full(np.shape(x)[1], np.shape(x)[0], dtype=np.int64)
    return np.array([len(b) for b in blocks], dtype=np.int64)


def draw_radius_vector(spec: BallSpec, sizes, rng) -> np.ndarray:
    """Radius of every block for one iteration.

    ``fixed`` consumes no randomness; ``per-block-categorical`` draws every
    radius independently (clipped to the block length); ``gibbs-mimic`` gives
    one uniformly chosen block its full length and every other block 0.
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    dist = spec.radius_distribution
    if dist == "fixed":
        return spec.fixed_radii(sizes)
    if dist == "per-block-categorical":
        probs = np.asarray(spec.radius_probs)
        r = rng.choice(probs.size, size=sizes.size, p=probs)
        return np.minimum(r, sizes).astype(np.int64)
    if dist == "gibbs-mimic":
        r = np.zeros(sizes.size, dtype=np.int64)
        i = int(rng.integers(sizes.size))
        r[i] = sizes[i]
        return r
    raise ConfigError(f"unknown radius distribution {dist!r}", key="radius_distribution")


def resample_auxiliary(x, radii, lam: float, rng, blocks=None, n_symbols: int = 2) -> np.ndarray:
    """Draw ``U`` from the (``lam``-weighted) uniform on the generalized ball of ``x``.

    Matrix states use one block per column (``blocks=None``); vector states
    pass the block index arrays.  Blocks of equal radius share one vectorized
    draw, taken in ascending order of radius.
    """
    x = np.asarray(x)
    radii = np.asarray(radii, dtype=np.int64)
    u = x.copy()
    if blocks is None:
        K = x.shape[0]
        for r in np.unique(radii):
            if r == 0:
                continue
            cols = np.flatnonzero(radii == r)
            table = ball_table(K, n_symbols, int(r))
            idx = table.draw_many(rng.random(cols.size), lam)
            codes = table.codes[idx].T.astype(np.int64)
            centers = x[:, cols]
            alt = codes - 1
            u[:, cols] = np.where(codes == 0, centers, alt + (alt >= centers))
        return u
    uniforms = rng.random(len(blocks))
    for b, (idx, r) in enumerate(zip(blocks, radii)):
        if r == 0:
            continue
        table = ball_table(len(idx), n_symbols, int(r))
        u[idx] = table.member(x[idx], table.draw(uniforms[b], lam))
    return u


# -- categorical draws in the log domain -----------------------------------

def check_weights(logw, labels) -> None:
    """Raise when a column of ``logw`` ``(M, n)`` has no finite weight or a NaN.

    ``labels`` names the block of every column for the error report.
    """
    bad = np.isnan(logw).any(axis=0) | ~np.isfinite(logw.max(axis=0))
    if bad.any():
        raise NumericalDegeneracyError(int(labels[int(np.flatnonzero(bad)[0])]))


def log_normalizers(logw) -> np.ndarray:
    """Column-wise log-sum-exp of a ``(M, n)`` weight array."""
    mx = logw.max(axis=0)
    return mx + np.log(np.exp(logw - mx).sum(axis=0))


def categorical_columns(logw, log_norm, uniforms) -> np.ndarray:
    """One draw per column of ``logw``; ties resolve to the earliest candidate."""
    cum = np.cumsum(np.exp(logw - log_norm), axis=0)
    target = uniforms * cum[-1]
    idx = np.count_nonzero(cum <= target, axis=0)
    return np.minimum(idx, logw.shape[0] - 1)


def categorical_index(logw, uniform: float, block=None) -> int:
    """Single categorical draw from unnormalized log weights (1-D array)."""
    logw = np.asarray(logw, dtype=float)
    mx = logw.max()
    if not np.isfinite(mx) or np.isnan(logw).any():
        raise NumericalDegeneracyError(block)
    cum = np.cumsum(np.exp(logw - mx))
    idx = int(np.count_nonzero(cum <= uniform * cum[-1]))
    return min(idx, logw.size - 1)


def categorical_list(scores: list, uniform: float, block=None) -> int:
    """Pure-Python version of :func:`categorical_index` for short lists."""
    mx = max(scores)
    if not -math.inf < mx < math.inf:
        raise NumericalDegeneracyError(block)
    exp = math.exp
    weights = [exp(s - mx) for s in scores]
    total = sum(weights)
    if total != total:
        raise NumericalDegeneracyError(block)
    target = uniform * total
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if acc > target:
            return i
    # rounding at the top end: fall back to the last positive weight
    return max(i for i, w in enumerate(weights) if w > 0)

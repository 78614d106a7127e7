"""Hamming-ball geometry: distances, volumes, canonical enumeration and sampling.

A *block* is a short vector over the alphabet ``{0, ..., S-1}``.  The Hamming
ball of radius ``m`` around a block ``c`` holds every block of the same length
that differs from ``c`` in at most ``m`` positions.

Balls are enumerated in a fixed canonical order:

1. ascending distance ``j`` from the center,
2. within ``j``, position subsets in lexicographic order
   (``itertools.combinations`` order),
3. within a subset, replacement values in lexicographic order.

Replacements are stored as *alternative indices* ``a`` in ``{0, ..., S-2}``;
the symbol written at a position holding ``c`` is ``a + (a >= c)``, i.e. the
``a``-th symbol of the alphabet once ``c`` is removed.  The map is monotone, so
lexicographic order on alternatives is lexicographic order on values.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import ContractError

# above this block length weighted volumes are summed in log space
LOG_DOMAIN_MIN_K = 30


@dataclass(frozen=True)
class Block:
    """A block of symbols together with its alphabet size."""

    symbols: tuple
    alphabet_size: int = 2

    def __post_init__(self):
        symbols = tuple(int(s) for s in self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if self.alphabet_size < 2:
            raise ContractError("alphabet_size must be >= 2")
        if not symbols:
            raise ContractError("a block needs at least one symbol")
        if any(s < 0 or s >= self.alphabet_size for s in symbols):
            raise ContractError(f"symbols must lie in 0..{self.alphabet_size - 1}")

    def __len__(self):
        return len(self.symbols)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.symbols, dtype=dtype)


def _symbols_and_alphabet(block, n_symbols):
    if isinstance(block, Block):
        if n_symbols is not None and n_symbols != block.alphabet_size:
            raise ContractError("alphabet size does not match the block's alphabet")
        return np.asarray(block.symbols, dtype=np.int64), block.alphabet_size
    arr = np.asarray(block, dtype=np.int64)
    if arr.ndim != 1 or arr.size == 0:
        raise ContractError("a block must be a non-empty 1-D sequence")
    S = 2 if n_symbols is None else int(n_symbols)
    if S < 2:
        raise ContractError("alphabet size must be >= 2")
    if arr.min() < 0 or arr.max() >= S:
        raise ContractError(f"symbols must lie in 0..{S - 1}")
    return arr, S


def hamming_distance(a, b) -> int:
    """Number of positions at which two equal-length blocks differ."""
    if isinstance(a, Block) and isinstance(b, Block) and a.alphabet_size != b.alphabet_size:
        raise ContractError("blocks are over different alphabets")
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ContractError(f"shape mismatch: {a.shape} vs {b.shape}")
    return int(np.count_nonzero(a != b))


def _check_ball_args(K, S, m):
    if S < 2:
        raise ContractError("alphabet size S must be >= 2")
    if K < 1:
        raise ContractError("block length K must be >= 1")
    if m < 0 or m > K:
        raise ContractError(f"radius m={m} outside 0..K={K}")


def ball_volume(K: int, S: int, m: int) -> int:
    """Exact number of blocks within distance ``m`` of any center.

    ``sum_{j<=m} (S-1)^j C(K, j)``, computed with Python integers so it never
    overflows.
    """
    _check_ball_args(K, S, m)
    return sum((S - 1) ** j * math.comb(K, j) for j in range(m + 1))


def log_weighted_ball_volume(K: int, S: int, m: int, lam: float) -> float:
    """Log of :func:`weighted_ball_volume`, safe for very large ``K``."""
    _check_ball_args(K, S, m)
    if lam < 0:
        raise ContractError("lambda must be >= 0")
    j = np.arange(m + 1)
    log_terms = np.array(
        [-lam * k + k * math.log(S - 1) + _log_comb(K, k) for k in j]
    )
    return float(logsumexp(log_terms))


def weighted_ball_volume(K: int, S: int, m: int, lam: float) -> float:
    """``sum_{j<=m} exp(-lam j) (S-1)^j C(K, j)``.

    Equals :func:`ball_volume` when ``lam == 0``.
    """
    _check_ball_args(K, S, m)
    if lam < 0:
        raise ContractError("lambda must be >= 0")
    if lam == 0:
        return float(ball_volume(K, S, m))
    if K > LOG_DOMAIN_MIN_K:
        return math.exp(log_weighted_ball_volume(K, S, m, lam))
    return float(sum(math.exp(-lam * j) * (S - 1) ** j * math.comb(K, j)
                     for j in range(m + 1)))


@lru_cache(maxsize=None)
def _log_comb(n, k):
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


class BallTable:
    """Canonical offset patterns for balls of one ``(K, S, m)`` shape.

    The table is independent of the center: ``codes[i, p]`` is 0 when the
    ``i``-th ball member keeps the center's symbol at position ``p`` and
    ``a + 1`` when it takes alternative ``a`` there.
    """

    def __init__(self, K: int, S: int, m: int):
        _check_ball_args(K, S, m)
        self.size = K
        self.n_symbols = S
        self.radius = m
        patterns = []
        for j in range(m + 1):
            for positions in combinations(range(K), j):
                for alts in product(range(S - 1), repeat=j):
                    patterns.append(tuple(zip(positions, alts)))
        #: per member, tuple of (position, alternative index) pairs
        self.patterns = patterns
        codes = np.zeros((len(patterns), K), dtype=np.int16)
        for i, pat in enumerate(patterns):
            for p, a in pat:
                codes[i, p] = a + 1
        self.codes = codes
        self.distances = np.count_nonzero(codes, axis=1)
        self._distance_list = self.distances.tolist()
        self._cum = {}

    def __len__(self):
        return len(self.patterns)

    def members(self, center) -> np.ndarray:
        """All ball members around ``center``.

        ``center`` has shape ``(K,)`` or ``(K, n)`` for ``n`` independent
        centers; the result has shape ``(M, K)`` or ``(M, K, n)``.
        """
        c = np.asarray(center)
        codes = self.codes if c.ndim == 1 else self.codes[:, :, None]
        alt = codes.astype(np.int64) - 1
        val = alt + (alt >= c)
        return np.where(codes == 0, c, val).astype(c.dtype, copy=False)

    def member(self, center, index: int) -> np.ndarray:
        c = np.array(center, copy=True)
        for p, a in self.patterns[index]:
            c[p] = a + (a >= c[p])
        return c

    def log_weights(self, lam: float) -> np.ndarray:
        return -lam * self.distances

    def cumulative(self, lam: float) -> list:
        """Normalized cumulative member probabilities ``∝ exp(-lam d)``."""
        cum = self._cum.get(lam)
        if cum is None:
            w = np.exp(-lam * self.distances.astype(float))
            cum = np.cumsum(w / w.sum()).tolist()
            cum[-1] = 1.0
            self._cum[lam] = cum
        return cum

    def draw(self, uniform: float, lam: float = 0.0) -> int:
        """Index of the member selected by one ``U(0, 1)`` variate."""
        return bisect.bisect_right(self.cumulative(lam), uniform)

    def draw_many(self, uniforms, lam: float = 0.0) -> np.ndarray:
        cum = np.asarray(self.cumulative(lam))
        return np.minimum(np.searchsorted(cum, uniforms, side="right"), len(cum) - 1)


@lru_cache(maxsize=256)
def ball_table(K: int, S: int, m: int) -> BallTable:
    """Cached :class:`BallTable` for ``(K, S, m)``."""
    return BallTable(K, S, m)


def enumerate_ball(center, m: int, n_symbols: int | None = None) -> np.ndarray:
    """Every block within distance ``m`` of ``center``, in canonical order.

    Returns an array of shape ``(ball_volume(K, S, m), K)`` whose first row is
    the center itself.
    """
    c, S = _symbols_and_alphabet(center, n_symbols)
    _check_ball_args(c.size, S, m)
    return ball_table(c.size, S, m).members(c)


def distance_probabilities(K: int, S: int, m: int, lam: float = 0.0) -> np.ndarray:
    """Probability of each distance ``0..m`` under ``p(u|c) ∝ exp(-lam d)``."""
    _check_ball_args(K, S, m)
    log_w = np.array([-lam * j + j * math.log(S - 1) + _log_comb(K, j)
                      for j in range(m + 1)])
    return np.exp(log_w - logsumexp(log_w))


def sample_in_ball(center, m: int, lam: float, rng: np.random.Generator,
                   n_symbols: int | None = None) -> np.ndarray:
    """Exact draw from ``p(u | center) ∝ exp(-lam d(u, center))`` on the ball.

    Draws the distance first, then a uniform subset of that many positions,
    then a uniform replacement symbol at each of them.  ``O(K)`` per draw.
    """
    c, S = _symbols_and_alphabet(center, n_symbols)
    K = c.size
    _check_ball_args(K, S, m)
    if lam < 0:
        raise ContractError("lambda must be >= 0")
    if m == 0:
        return c.copy()
    probs = distance_probabilities(K, S, m, lam)
    j = int(rng.choice(m + 1, p=probs))
    u = c.copy()
    if j == 0:
        return u
    positions = rng.choice(K, size=j, replace=False)
    alts = rng.integers(0, S - 1, size=j)
    u[positions] = alts + (alts >= c[positions])
    return u


def in_ball(a, b, m: int) -> bool:
    return hamming_distance(a, b) <= m


def block_radii(sizes: Sequence[int], radius) -> np.ndarray:
    """Broadcast a scalar radius over blocks (clipped to each block length).

    A per-block sequence is validated strictly against the block lengths.
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    if np.ndim(radius) == 0:
        r = int(radius)
        if r < 0:
            raise ContractError("radius must be >= 0")
        return np.minimum(r, sizes)
    r = np.asarray(radius, dtype=np.int64)
    if r.shape != sizes.shape:
        raise ContractError(f"got {r.size} radii for {sizes.size} blocks")
    if np.any(r < 0) or np.any(r > sizes):
        raise ContractError("every radius must satisfy 0 <= m_i <= K_i")
    return r


RADIUS_DISTRIBUTIONS = ("fixed", "per-block-categorical", "gibbs-mimic")


@dataclass(frozen=True)
class BallSpec:
    """Radius, weighting and radius-randomisation settings of a sampler.

    Parameters
    ----------
    radius : int or sequence of int
        Scalar radius broadcast to every block, or one radius per block.
    lam : float
        Weighting of the auxiliary draw, ``p(u|x) ∝ exp(-lam d(u, x))``.
        ``0`` gives the uniform auxiliary distribution.
    radius_distribution : str
        ``"fixed"``, ``"per-block-categorical"`` (independent radius per block
        drawn from ``radius_probs`` over ``0, 1, ...``) or ``"gibbs-mimic"``
        (one uniformly chosen block gets its full length, all others 0).
    radius_probs : sequence of float, optional
        Categorical weights for ``"per-block-categorical"``.
    """

    radius: object = 1
    lam: float = 0.0
    radius_distribution: str = "fixed"
    radius_probs: tuple | None = None

    def __post_init__(self):
        if np.ndim(self.radius) == 0:
            object.__setattr__(self, "radius", int(self.radius))
            if self.radius < 0:
                raise ContractError("radius must be >= 0")
        else:
            r = tuple(int(v) for v in self.radius)
            if any(v < 0 for v in r):
                raise ContractError("radii must be >= 0")
            object.__setattr__(self, "radius", r)
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise ContractError("lambda must be a finite value >= 0")
        if self.radius_distribution not in RADIUS_DISTRIBUTIONS:
            from .errors import ConfigError
            raise ConfigError(f"unknown radius distribution {self.radius_distribution!r}",
                              key="radius_distribution")
        if self.radius_probs is not None:
            p = tuple(float(v) for v in self.radius_probs)
            if any(v < 0 for v in p) or not math.isclose(sum(p), 1.0, rel_tol=1e-9):
                raise ContractError("radius_probs must be non-negative and sum to 1")
            object.__setattr__(self, "radius_probs", p)
        elif self.radius_distribution == "per-block-categorical":
            raise ContractError("per-block-categorical needs radius_probs")

    @property
    def non_ergodic(self) -> bool:
        """True when every radius is zero, so the chain can never move."""
        if self.radius_distribution != "fixed":
            return False
        if isinstance(self.radius, tuple):
            return all(v == 0 for v in self.radius)
        return self.radius == 0

    def fixed_radii(self, sizes) -> np.ndarray:
        return block_radii(sizes, self.radius)

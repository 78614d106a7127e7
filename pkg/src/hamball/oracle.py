"""Brute-force ground truth on tiny state spaces.

States are enumerated as ``itertools.product(range(S), repeat=n)`` over the
entries flattened block by block (column-major for matrices, natural order for
vectors), so the first entry is the most significant digit.  Within a block
this is the lexicographic order of block values.

Kernels are assembled as dense matrices from exact per-block pieces: for every
block partition and radius outcome the auxiliary draw, the restricted draw and
the Metropolis correction are summed in closed form, never sampled.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from itertools import permutations, product

import numpy as np
from scipy.special import logsumexp

from .ball import BallSpec, ball_table
from .errors import ConfigError, ContractError
from .models.base import UNSTRUCTURED

POSTERIOR_BOUND = 10 ** 6
KERNEL_BOUND = 4096
PERMUTATION_BOUND = 5040


def _flat(x) -> np.ndarray:
    x = np.asarray(x)
    return x.T.ravel() if x.ndim == 2 else x.ravel()


def _unflat(f, shape) -> np.ndarray:
    f = np.asarray(f)
    if len(shape) == 2:
        return f.reshape(shape[1], shape[0]).T
    return f.reshape(shape)


@dataclass
class ExactTable:
    """Every configuration of a tiny model with its log density."""

    shape: tuple
    n_symbols: int
    states: np.ndarray        # (n, *shape) int8, canonical order
    log_density: np.ndarray   # (n,)

    @property
    def log_normalizer(self) -> float:
        return float(logsumexp(self.log_density))

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_density - self.log_normalizer)

    def __len__(self):
        return self.log_density.size

    def index(self, x) -> int:
        code = 0
        for v in _flat(x).tolist():
            code = code * self.n_symbols + int(v)
        return code

    def to_csv(self, path) -> None:
        shape = "x".join(str(s) for s in self.shape)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "shape", "n_symbols", "state", "log_density"])
            for i, (x, v) in enumerate(zip(self.states, self.log_density)):
                digits = "".join(str(s) for s in np.asarray(x).ravel().tolist())
                w.writerow([i, shape, self.n_symbols, digits, repr(float(v))])

    @classmethod
    def from_csv(cls, path) -> "ExactTable":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise ContractError(f"{path} holds no table rows")
        shape = tuple(int(s) for s in rows[0]["shape"].split("x"))
        S = int(rows[0]["n_symbols"])
        states = np.array([[int(c) for c in r["state"]] for r in rows], dtype=np.int8)
        return cls(shape, S, states.reshape((len(rows),) + shape),
                   np.array([float(r["log_density"]) for r in rows]))


def enumerate_states(shape, n_symbols: int) -> np.ndarray:
    """All states of ``shape`` in canonical order, shape ``(S**n, *shape)``."""
    n = int(np.prod(shape))
    flat = np.array(list(product(range(n_symbols), repeat=n)), dtype=np.int8).reshape(-1, n)
    return np.stack([_unflat(f, shape) for f in flat]) if len(shape) == 2 \
        else flat.reshape((-1,) + tuple(shape))


def exact_posterior(model, theta=None, bound: int = POSTERIOR_BOUND) -> ExactTable:
    """Full table of ``log p(y, X, theta)`` with ``theta`` held fixed."""
    shape = tuple(model.shape)
    S = model.n_symbols
    n = S ** int(np.prod(shape))
    if n > bound:
        raise ContractError(f"state space of {n} configurations exceeds the bound {bound}; "
                            "the oracle only handles tiny instances")
    states = enumerate_states(shape, S)
    log_density = np.array([model.log_joint(x, theta) for x in states], dtype=float)
    return ExactTable(shape, S, states, log_density)


def exact_marginals(table: ExactTable) -> np.ndarray:
    """``P(entry = s)`` with shape ``(*shape, S)``; ``[..., 1]`` is inclusion for binary states."""
    p = table.probs
    out = np.zeros(table.shape + (table.n_symbols,))
    for s in range(table.n_symbols):
        out[..., s] = np.tensordot(p, (table.states == s).astype(float), axes=1)
    return out


# -- kernels -----------------------------------------------------------------

class _Space:
    """Index arithmetic over the canonical enumeration."""

    def __init__(self, table: ExactTable):
        self.S = table.n_symbols
        self.flat = np.stack([_flat(x) for x in table.states]).astype(np.int64)
        self.n, self.size = self.flat.shape
        self.weights = self.S ** np.arange(self.size - 1, -1, -1, dtype=np.int64)
        self.logp = table.log_density

    def ball_moves(self, block, radius):
        """For every state: indices and distances of the states whose ``block``
        lies in the ball of radius ``radius`` around the state's block."""
        block = np.asarray(block)
        table = ball_table(block.size, self.S, int(radius))
        members = table.members(self.flat[:, block].T)           # (M, k, n)
        delta = np.einsum("mkn,k->mn", members - self.flat[:, block].T[None], self.weights[block])
        idx = np.arange(self.n)[None, :] + delta                 # (M, n)
        return idx, table.distances

    def replace_matrix(self, block, radius, lam):
        """``x -> x`` with ``block`` redrawn from ``exp(-lam d)`` on its ball."""
        idx, dist = self.ball_moves(block, radius)
        w = np.exp(-lam * dist.astype(float))
        w = w / w.sum()
        A = np.zeros((self.n, self.n))
        np.add.at(A, (np.broadcast_to(np.arange(self.n), idx.shape), idx),
                  np.broadcast_to(w[:, None], idx.shape))
        return A

    def conditional_matrix(self, block, radius, lam):
        """``u -> x`` with ``block`` drawn from ``p(x) exp(-lam d(x, u))`` on the ball of ``u``."""
        idx, dist = self.ball_moves(block, radius)
        logw = self.logp[idx] - lam * dist[:, None]
        P = np.zeros((self.n, self.n))
        finite = np.isfinite(logw.max(axis=0))
        probs = np.zeros_like(logw)
        probs[:, finite] = np.exp(logw[:, finite] - logsumexp(logw[:, finite], axis=0))
        np.add.at(P, (np.broadcast_to(np.arange(self.n), idx.shape), idx), probs)
        # states with no mass around them are never visited; keep rows stochastic
        P[~finite, np.flatnonzero(~finite)] = 1.0
        return P

    def product_moves(self, blocks, radii):
        """Indices and total distances of every state in the product ball."""
        idx = np.arange(self.n)[None, :]
        dist = np.zeros((1, 1), dtype=np.int64)
        for block, r in zip(blocks, radii):
            b_idx, b_dist = self.ball_moves(block, r)
            delta = b_idx - np.arange(self.n)[None, :]
            idx = (idx[:, None, :] + delta[None, :, :]).reshape(-1, self.n)
            dist = (dist[:, None] + b_dist[None, :, None]).reshape(-1, 1)
        return idx, dist


def _component_kernel(space: _Space, scheme, blocks, radii, lam):
    n = space.n
    if scheme == "hb":
        A = np.eye(n)
        for b, r in zip(blocks, radii):
            A = A @ space.replace_matrix(b, r, lam)
        idx, dist = space.product_moves(blocks, radii)
        logw = space.logp[idx] - lam * dist
        B = np.zeros((n, n))
        finite = np.isfinite(logw.max(axis=0))
        probs = np.zeros_like(logw)
        probs[:, finite] = np.exp(logw[:, finite] - logsumexp(logw[:, finite], axis=0))
        np.add.at(B, (np.broadcast_to(np.arange(n), idx.shape), idx), probs)
        B[~finite, np.flatnonzero(~finite)] = 1.0
        return A @ B
    if scheme == "hb-block":
        P = np.eye(n)
        for b, r in zip(blocks, radii):
            P = P @ space.replace_matrix(b, r, lam) @ space.conditional_matrix(b, r, lam)
        return P
    if scheme == "block-gibbs":
        P = np.eye(n)
        for b in blocks:
            P = P @ _gibbs_matrix(space, b)
        return P
    if scheme == "pure-mh":
        idx, _ = space.product_moves(blocks, radii)
        logq = space.logp[idx]
        logz = logsumexp(logq, axis=0)                           # log Z_m(x) per x
        P = np.zeros((n, n))
        rows = np.broadcast_to(np.arange(n), idx.shape)
        log_acc = np.minimum(0.0, logz[None, :] - logz[idx])
        np.add.at(P, (rows, idx), np.exp(logq - logz[None, :] + log_acc))
        P[np.arange(n), np.arange(n)] += 1.0 - P.sum(axis=1)
        return P
    raise ConfigError(f"unknown scheme {scheme!r}", key="sampler.scheme")


def _gibbs_matrix(space: _Space, block):
    """Exact full conditional of ``block``, built directly from the table."""
    block = np.asarray(block)
    n = space.n
    rest = np.setdiff1d(np.arange(space.size), block)
    # group states that agree off the block
    keys = space.flat[:, rest] @ space.weights[rest] if rest.size else np.zeros(n, dtype=np.int64)
    G = np.zeros((n, n))
    for key in np.unique(keys):
        members = np.flatnonzero(keys == key)
        lp = space.logp[members]
        G[np.ix_(members, members)] = np.exp(lp - logsumexp(lp))[None, :]
    return G


def _radius_outcomes(spec: BallSpec, sizes):
    sizes = np.asarray(sizes)
    if spec.radius_distribution == "fixed":
        return [(1.0, spec.fixed_radii(sizes))]
    if spec.radius_distribution == "gibbs-mimic":
        out = []
        for i in range(sizes.size):
            r = np.zeros(sizes.size, dtype=np.int64)
            r[i] = sizes[i]
            out.append((1.0 / sizes.size, r))
        return out
    probs = spec.radius_probs
    out = []
    for combo in product(range(len(probs)), repeat=sizes.size):
        w = math.prod(probs[c] for c in combo)
        if w > 0:
            out.append((w, np.minimum(np.array(combo), sizes)))
    return out


def _partitions(model, block_size):
    """Weighted block partitions the engine can draw, in sweep order."""
    shape = tuple(model.shape)
    if model.structure != UNSTRUCTURED:
        K, N = shape
        return [(1.0, [np.arange(i * K, (i + 1) * K) for i in range(N)])]
    D = int(np.prod(shape))
    K = D if block_size is None else min(block_size, D)
    if math.factorial(D) > PERMUTATION_BOUND:
        raise ContractError(f"{D}! block orderings exceed the oracle bound")
    w = 1.0 / math.factorial(D)
    return [(w, [np.array(perm[i:i + K]) for i in range(0, D, K)])
            for perm in permutations(range(D))]


def exact_kernel(scheme: str, model, theta=None, spec: BallSpec | None = None,
                 block_size: int | None = None, block_axis: str = "columns",
                 rows_per_block: int = 1, table: ExactTable | None = None,
                 bound: int = KERNEL_BOUND) -> np.ndarray:
    """Exact one-iteration transition matrix of a scheme with ``theta`` fixed.

    Rows and columns follow the canonical state order of :func:`exact_posterior`.
    Vector states average over every block ordering; every scheme averages
    over the outcomes of the radius distribution.  ``block-gibbs`` is built
    directly from full conditionals, independent of the ball machinery.
    """
    spec = BallSpec() if spec is None else spec
    n = model.n_symbols ** int(np.prod(model.shape))
    if n > bound:
        raise ContractError(f"state space of {n} configurations exceeds the kernel bound {bound}")
    table = exact_posterior(model, theta) if table is None else table
    space = _Space(table)
    if scheme == "block-gibbs" and block_axis == "rows":
        K, N = model.shape
        P = np.eye(n)
        for start in range(0, K, rows_per_block):
            rows = range(start, min(start + rows_per_block, K))
            block = np.array([i * K + k for i in range(N) for k in rows])
            P = P @ _gibbs_matrix(space, block)
        return P
    P = np.zeros((n, n))
    for w_part, blocks in _partitions(model, block_size):
        sizes = [len(b) for b in blocks]
        outcomes = [(1.0, np.array(sizes))] if scheme == "block-gibbs" else _radius_outcomes(spec, sizes)
        for w_r, radii in outcomes:
            P += w_part * w_r * _component_kernel(space, scheme, blocks, radii, spec.lam)
    return P


def stationarity_error(P, table: ExactTable) -> float:
    """``max |pi P - pi|``."""
    pi = table.probs
    return float(np.abs(pi @ P - pi).max())


def detailed_balance_error(P, table: ExactTable) -> float:
    """``max |pi_x P(x, x') - pi_x' P(x', x)|``."""
    flow = table.probs[:, None] * P
    return float(np.abs(flow - flow.T).max())

"""Target restricted to a generalized Hamming ball.

A *slice* holds every candidate of the restricted target around a center
state, their log weights and the log normalizer

    log sum_{X in H_m(center)} p(y, X, theta) exp(-lam d(X, center)).

Slices are built by structure: vectorized per column for factorized models,
a forward pass for chain models and an explicit product enumeration for
unstructured models.  ``draw`` then samples a state from the slice.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from ..ball import ball_table
from ..errors import ConfigError, NumericalDegeneracyError
from ..models.base import CHAIN, FACTORIZED, decode_state, encode_state
from .auxiliary import categorical_columns, categorical_index, categorical_list, check_weights, log_normalizers


@dataclass
class Counters:
    """Work and acceptance counters accumulated over a chain."""

    candidate_evaluations: int = 0
    theta_proposals: int = 0
    theta_accepts: int = 0
    mh_proposals: int = 0
    mh_accepts: int = 0

    def rates(self) -> dict:
        def rate(a, n):
            return a / n if n else float("nan")
        return {"theta_acceptance": rate(self.theta_accepts, self.theta_proposals),
                "state_acceptance": rate(self.mh_accepts, self.mh_proposals)}


def _count(counters, n):
    if counters is not None:
        counters.candidate_evaluations += int(n)


# -- factorized ------------------------------------------------------------

@dataclass
class FactorizedSlice:
    shape: tuple
    groups: list = field(default_factory=list)  # (cols, candidates, logw, log_norm)
    log_normalizer: float = 0.0

    def draw(self, rng) -> np.ndarray:
        x = np.empty(self.shape, dtype=np.int8)
        for cols, cand, logw, norm in self.groups:
            idx = categorical_columns(logw, norm, rng.random(cols.size))
            x[:, cols] = cand[idx, :, np.arange(cols.size)].T
        return x


def factorized_slice(center, theta, model, radii, lam, counters=None) -> FactorizedSlice:
    center = np.asarray(center)
    radii = np.asarray(radii, dtype=np.int64)
    K = center.shape[0]
    out = FactorizedSlice(center.shape, log_normalizer=model.theta_log_prior(theta))
    for r in np.unique(radii):
        cols = np.flatnonzero(radii == r)
        table = ball_table(K, model.n_symbols, int(r))
        cand = table.members(center[:, cols])
        logw = np.asarray(model.column_logp(theta, cand, cols), dtype=float)
        if lam:
            logw = logw - lam * table.distances[:, None]
        check_weights(logw, cols)
        norm = log_normalizers(logw)
        out.groups.append((cols, cand, logw, norm))
        out.log_normalizer += float(norm.sum())
        _count(counters, len(table) * cols.size)
    return out


# -- chain -------------------------------------------------------------------

@dataclass
class ChainSlice:
    shape: tuple
    members: list          # per column, (M_i, K) candidate columns
    alphas: list           # per column, forward log messages (M_i,)
    transitions: list      # per column i >= 1, (M_{i-1}, M_i) log transition
    log_normalizer: float

    def draw(self, rng) -> np.ndarray:
        """Backward sampling of one column path."""
        N = len(self.members)
        uniforms = rng.random(N)
        x = np.empty(self.shape, dtype=np.int8)
        j = categorical_index(self.alphas[-1], uniforms[N - 1], N - 1)
        x[:, N - 1] = self.members[N - 1][j]
        for i in range(N - 2, -1, -1):
            # forward messages are finite, so only the transition can remove mass
            w = self.alphas[i] + self.transitions[i + 1][:, j]
            mx = w.max()
            if not np.isfinite(mx):
                raise NumericalDegeneracyError(i)
            cum = np.cumsum(np.exp(w - mx))
            j = min(int(np.searchsorted(cum, uniforms[i] * cum[-1], side="right")), w.size - 1)
            x[:, i] = self.members[i][j]
        return x


@dataclass
class ScaledChainSlice:
    """Chain slice with equal candidate counts, kept as scaled probabilities.

    ``probs[i]`` is the forward message of column ``i`` normalized to sum 1
    and ``trans[i - 1]`` the transition probabilities into column ``i``.
    """
    stacked: np.ndarray    # (M, K, N) candidates
    probs: np.ndarray      # (N, M)
    trans: np.ndarray      # (N - 1, M, M)
    log_normalizer: float

    def draw(self, rng) -> np.ndarray:
        """Backward sampling; every conditional table is built up front."""
        M, K, N = self.stacked.shape
        uniforms = rng.random(N)
        # cum[i, j] is the cumulative weight of column i's candidates given j at i + 1
        cum = np.cumsum(self.probs[:-1, None, :] * np.swapaxes(self.trans, 1, 2), axis=2)
        last = np.cumsum(self.probs[-1])
        js = np.empty(N, dtype=np.int64)
        j = js[N - 1] = min(int(np.searchsorted(last, uniforms[N - 1] * last[-1], side="right")),
                            M - 1)
        for i in range(N - 2, -1, -1):
            c = cum[i, j]
            if not c[-1] > 0:
                raise NumericalDegeneracyError(i)
            j = js[i] = min(int(np.searchsorted(c, uniforms[i] * c[-1], side="right")), M - 1)
        return self.stacked[js, :, np.arange(N)].T.astype(np.int8)


def chain_members(center, radii, n_symbols) -> list:
    center = np.asarray(center)
    K, N = center.shape
    radii = np.asarray(radii, dtype=np.int64)
    if np.all(radii == radii[0]):
        stacked = ball_table(K, n_symbols, int(radii[0])).members(center)
        return [stacked[:, :, i] for i in range(N)], stacked
    return [ball_table(K, n_symbols, int(r)).members(center[:, i])
            for i, r in enumerate(radii)], None


def chain_forward(members, theta, model, extra=None, counters=None,
                  stacked=None) -> ChainSlice | ScaledChainSlice:
    """Forward filtering over per-column candidate sets.

    ``members[i]`` has shape ``(M_i, K)``.  ``extra`` optionally adds per
    candidate log weights (a list of ``(M_i,)`` arrays).  ``stacked`` is the
    ``(M, K, N)`` array of ``members`` when every column has the same count,
    which lets the emissions be scored in one call.
    """
    N = len(members)
    if stacked is not None:
        emis = np.asarray(model.emission_logp(theta, stacked, np.arange(N)), dtype=float).T
        if N > 1:
            scaled = _scaled_forward(stacked, emis, theta, model, extra)
            if scaled is not None:
                _count(counters, stacked.shape[0] * N)
                return scaled
    else:
        emis = [np.asarray(model.emission_logp(theta, m[:, :, None], np.array([i])),
                           dtype=float)[:, 0] for i, m in enumerate(members)]
    alphas = []
    transitions = [None]
    a = np.asarray(model.initial_logp(theta, members[0]), dtype=float) + emis[0]
    if extra is not None:
        a = a + extra[0]
    _finite_or_raise(a, 0)
    alphas.append(a)
    total = sum(m.shape[0] for m in members)
    if stacked is not None and N > 1:
        # the scaled pass gave up; redo every step at once in the log domain
        by_step = np.moveaxis(stacked, 2, 0)
        all_t = np.asarray(model.transition_logp(theta, by_step[:-1, :, None, :],
                                                 by_step[1:, None, :, :]), dtype=float)
    with np.errstate(invalid="ignore"):
        for i in range(1, N):
            if stacked is not None:
                t = all_t[i - 1]
            else:
                t = np.asarray(model.transition_logp(theta, members[i - 1][:, None, :],
                                                     members[i][None, :, :]), dtype=float)
            A = a[:, None] + t
            mx = A.max(axis=0)
            a = mx + np.log(np.exp(A - mx).sum(axis=0)) + emis[i]
            a[~np.isfinite(mx)] = -np.inf
            if extra is not None:
                a = a + extra[i]
            _finite_or_raise(a, i)
            alphas.append(a)
            transitions.append(t)
    mx = a.max()
    log_norm = model.theta_log_prior(theta) + float(mx + np.log(np.exp(a - mx).sum()))
    _count(counters, total)
    shape = (members[0].shape[1], N)
    return ChainSlice(shape, members, alphas, transitions, log_norm)


def _scaled_forward(stacked, emis, theta, model, extra):
    """Forward pass in scaled probabilities; ``None`` when the scaling underflows.

    Each step keeps the message normalized to sum 1, so a step can only lose
    all its mass when every surviving path sits more than about 700 nats
    below a path the scaling already discarded.  The log-domain pass then
    decides, and reports the failing column if there is one.
    """
    N = stacked.shape[2]
    by_step = np.moveaxis(stacked, 2, 0)
    log_t = np.asarray(model.transition_logp(theta, by_step[:-1, :, None, :],
                                             by_step[1:, None, :, :]), dtype=float)
    logw = emis + np.stack(extra) if extra is not None else emis.copy()
    logw[0] += np.asarray(model.initial_logp(theta, by_step[0]), dtype=float)
    shift = logw.max(axis=1)
    if not np.all(np.isfinite(shift)):
        return None
    with np.errstate(under="ignore"):
        trans = np.exp(log_t)
        weights = np.exp(logw - shift[:, None])
    probs = np.empty_like(weights)
    scales = np.empty(N)
    p = weights[0]
    for i in range(N):
        if i:
            p = (p @ trans[i - 1]) * weights[i]
        total = p.sum()
        if not 0 < total < np.inf:
            return None
        p = p / total
        probs[i] = p
        scales[i] = total
    log_norm = model.theta_log_prior(theta) + float(shift.sum() + np.log(scales).sum())
    return ScaledChainSlice(stacked, probs, trans, log_norm)


def _finite_or_raise(a, i):
    # max propagates NaN, so one reduction catches NaN and all -inf
    if not np.isfinite(a.max()):
        raise NumericalDegeneracyError(i)


def chain_slice(center, theta, model, radii, lam, counters=None) -> ChainSlice | ScaledChainSlice:
    center = np.asarray(center)
    members, stacked = chain_members(center, radii, model.n_symbols)
    extra = None
    if lam:
        extra = [-lam * np.count_nonzero(m != center[:, i], axis=1) for i, m in enumerate(members)]
    return chain_forward(members, theta, model, extra, counters, stacked)


# -- unstructured ------------------------------------------------------------

@dataclass
class ProductSlice:
    size: int
    n_symbols: int
    codes: list
    logw: list
    log_normalizer: float

    def draw(self, rng) -> np.ndarray:
        k = categorical_list(self.logw, rng.random())
        return decode_state(self.codes[k], self.size, self.n_symbols)


def block_deltas(xs, idx, table, powers):
    """Code offsets and distances of every ball member of one vector block."""
    out = []
    for pat in table.patterns:
        delta = 0
        for pos, a in pat:
            p = idx[pos]
            c = xs[p]
            delta += (a + (a >= c) - c) * powers[p]
        out.append((delta, len(pat)))
    return out


def product_slice(center, theta, model, blocks, radii, lam, bound, counters=None) -> ProductSlice:
    """Explicit enumeration of the product ball of a vector state."""
    center = np.asarray(center)
    S = model.n_symbols
    size = center.size
    volumes = [len(ball_table(len(b), S, int(r))) for b, r in zip(blocks, radii)]
    total = int(np.prod(volumes, dtype=object))
    if total > bound:
        raise ConfigError(f"product ball holds {total} states, above the bound {bound}; "
                          "use hb-block or a smaller radius", key="sampler.product_bound")
    xs = center.tolist()
    powers = [S ** p for p in range(size)]
    base = encode_state(center, S)
    per_block = [block_deltas(xs, b.tolist(), ball_table(len(b), S, int(r)), powers)
                 for b, r in zip(blocks, radii)]
    codes = []
    dists = []
    for combo in product(*per_block):
        codes.append(base + sum(c for c, _ in combo))
        dists.append(sum(d for _, d in combo))
    logw = [float(v) for v in model.log_joint_codes(codes, theta)]
    if lam:
        logw = [w - lam * d for w, d in zip(logw, dists)]
    arr = np.asarray(logw)
    if np.isnan(arr).any() or not np.isfinite(arr.max()):
        raise NumericalDegeneracyError(0)
    mx = arr.max()
    log_norm = float(mx + np.log(np.exp(arr - mx).sum()))
    _count(counters, total)
    return ProductSlice(size, S, codes, logw, log_norm)


def make_slice(center, theta, model, radii, lam, blocks=None, bound=100_000, counters=None):
    """Dispatch on the model structure."""
    if model.structure == FACTORIZED:
        return factorized_slice(center, theta, model, radii, lam, counters)
    if model.structure == CHAIN:
        return chain_slice(center, theta, model, radii, lam, counters)
    return product_slice(center, theta, model, blocks, radii, lam, bound, counters)

"""Single sampler moves: state updates, parameter updates and sweeps."""
from __future__ import annotations

import math
import warnings
from itertools import product

import numpy as np

from ..ball import ball_table
from ..errors import ContractError
from ..models.base import CHAIN, FACTORIZED, UNSTRUCTURED, encode_state
from .auxiliary import categorical_index, categorical_list
from .slices import block_deltas, chain_forward, chain_slice, factorized_slice, make_slice


def _require(model, structure):
    if model.structure != structure:
        raise ContractError(f"needs a {structure} model, got {model.structure}")


def hb_state_update_factorized(U, theta, model, radii, lam, rng, counters=None):
    """Draw ``X ~ p(X | theta, U, y)`` column by column inside the ball of ``U``.

    Returns ``(X, log_normalizer)``.
    """
    _require(model, FACTORIZED)
    sl = factorized_slice(U, theta, model, radii, lam, counters)
    return sl.draw(rng), sl.log_normalizer


def hb_state_update_chain(U, theta, model, radii, lam, rng, counters=None):
    """Forward filtering / backward sampling over the ball members of each column.

    Returns ``(X, log_normalizer)`` where the normalizer is
    ``log sum_{X in H_m(U)} p(y, X, theta) exp(-lam d(X, U))``.
    """
    _require(model, CHAIN)
    sl = chain_slice(U, theta, model, radii, lam, counters)
    return sl.draw(rng), sl.log_normalizer


def hb_state_update_unstructured(U, theta, model, blocks, radii, lam, rng,
                                 bound=100_000, counters=None):
    """Exhaustive draw over the product ball of a vector state (small balls only)."""
    _require(model, UNSTRUCTURED)
    sl = make_slice(U, theta, model, radii, lam, blocks, bound, counters)
    return sl.draw(rng), sl.log_normalizer


def hb_state_update(U, theta, model, radii, lam, rng, blocks=None, bound=100_000, counters=None):
    sl = make_slice(U, theta, model, radii, lam, blocks, bound, counters)
    return sl.draw(rng), sl.log_normalizer


def theta_update_conditional(x, theta, model, rng):
    """``theta ~ p(theta | X, y)`` through the model's own parameter step."""
    return model.update_theta(x, theta, rng)


def theta_update_joint_mh(theta, U, model, radii, lam, rng, blocks=None, bound=100_000,
                          counters=None):
    """Metropolis-Hastings on ``theta`` with ``X`` summed out over the ball of ``U``.

    Accepts ``theta'`` with probability
    ``min(1, p(theta', U, y) q(theta | theta') / p(theta, U, y) q(theta' | theta))``
    and then draws ``X`` from the restricted conditional at the retained value.
    Returns ``(theta, X, accepted)``.
    """
    current = make_slice(U, theta, model, radii, lam, blocks, bound, counters)
    proposal, log_q_ratio = model.propose_theta(theta, rng)
    u = rng.random()
    try:
        candidate = make_slice(U, proposal, model, radii, lam, blocks, bound, counters)
        log_alpha = candidate.log_normalizer - current.log_normalizer + log_q_ratio
    except (ContractError, FloatingPointError) as exc:
        warnings.warn(f"rejecting parameter proposal: {exc}", RuntimeWarning, stacklevel=2)
        candidate, log_alpha = None, -math.inf
    if not math.isfinite(log_alpha) and log_alpha != math.inf:
        if candidate is not None:
            warnings.warn("rejecting parameter proposal with non-finite density",
                          RuntimeWarning, stacklevel=2)
        log_alpha = -math.inf
    accepted = math.log(u) < log_alpha if u > 0 else True
    if counters is not None:
        counters.theta_proposals += 1
        counters.theta_accepts += int(accepted)
    if accepted:
        return proposal, candidate.draw(rng), True
    return theta, current.draw(rng), False


def pure_mh_step(x, theta, model, radii, rng, blocks=None, bound=100_000, counters=None):
    """Propose from the target restricted to the ball of ``x``; accept by volume ratio.

    The acceptance probability is ``min(1, Z_m(x) / Z_m(x'))``, the sliced mass
    around the current state over the sliced mass around the proposal.
    Returns ``(X, accepted)``.
    """
    here = make_slice(x, theta, model, radii, 0.0, blocks, bound, counters)
    proposal = here.draw(rng)
    there = make_slice(proposal, theta, model, radii, 0.0, blocks, bound, counters)
    u = rng.random()
    accepted = math.log(u) < here.log_normalizer - there.log_normalizer if u > 0 else True
    if counters is not None:
        counters.mh_proposals += 1
        counters.mh_accepts += int(accepted)
    return (proposal if accepted else np.array(x, dtype=np.int8, copy=True)), accepted


# -- sequential block sweeps -------------------------------------------------

def hb_block_sweep(x, theta, model, radii, lam, rng, blocks=None, counters=None):
    """One block Hamming-ball sweep.

    For every block in turn: draw ``u_i`` in the ball of ``x_i``, then redraw
    ``x_i`` from its full conditional restricted to the ball of ``u_i`` with
    the other blocks held fixed.  Matrix states sweep their columns in order;
    vector states sweep the given blocks in order.
    """
    if model.structure == UNSTRUCTURED:
        return _block_sweep_codes(x, theta, model, blocks, radii, lam, rng, counters)
    x = np.array(x, dtype=np.int8, copy=True)
    K, N = x.shape
    S = model.n_symbols
    uniforms = rng.random(2 * N)
    for i in range(N):
        r = int(radii[i])
        table = ball_table(K, S, r)
        u = table.member(x[:, i], table.draw(uniforms[2 * i], lam)) if r else x[:, i]
        cand = table.members(u)
        scores = np.asarray(model.block_scores(x, theta, i, cand), dtype=float)
        if lam:
            scores = scores - lam * table.distances
        x[:, i] = cand[categorical_index(scores, uniforms[2 * i + 1], i)]
        if counters is not None:
            counters.candidate_evaluations += len(table)
    return x


def _block_sweep_codes(x, theta, model, blocks, radii, lam, rng, counters):
    # vector states are handled through integer codes so that models with a
    # memo cache (regression) score candidates with dictionary lookups only
    S = model.n_symbols
    size = np.size(x)
    xs = np.asarray(x).tolist()
    powers = [S ** p for p in range(size)]
    code = encode_state(x, S)
    uniforms = rng.random(2 * len(blocks)).tolist()
    for b, (idx, r) in enumerate(zip(blocks, radii)):
        idx = idx.tolist()
        r = int(r)
        table = ball_table(len(idx), S, r)
        if counters is not None:
            counters.candidate_evaluations += len(table)
        if r == 0:
            continue
        # auxiliary block
        for pos, a in table.patterns[table.draw(uniforms[2 * b], lam)]:
            p = idx[pos]
            v = a + (a >= xs[p])
            code += (v - xs[p]) * powers[p]
            xs[p] = v
        deltas = block_deltas(xs, idx, table, powers)
        scores = model.log_joint_codes([code + d for d, _ in deltas], theta)
        if lam:
            scores = [s - lam * d for s, (_, d) in zip(scores, deltas)]
        k = categorical_list(list(scores), uniforms[2 * b + 1], b)
        for pos, a in table.patterns[k]:
            p = idx[pos]
            v = a + (a >= xs[p])
            code += (v - xs[p]) * powers[p]
            xs[p] = v
    return np.asarray(xs, dtype=np.int8)


def row_gibbs_sweep(x, theta, model, rows_per_block, rng, counters=None):
    """Block Gibbs over groups of rows of a chain model.

    Rows ``0..K-1`` are cut into consecutive groups of ``rows_per_block``;
    each group is redrawn jointly over all time steps by forward filtering /
    backward sampling with the remaining rows held fixed.
    """
    _require(model, CHAIN)
    x = np.array(x, dtype=np.int8, copy=True)
    K, N = x.shape
    S = model.n_symbols
    for start in range(0, K, rows_per_block):
        rows = np.arange(start, min(start + rows_per_block, K))
        combos = np.array(list(product(range(S), repeat=rows.size)), dtype=np.int8)
        stacked = np.repeat(x[None], combos.shape[0], axis=0)
        stacked[:, rows, :] = combos[:, :, None]
        members = [stacked[:, :, i] for i in range(N)]
        x = chain_forward(members, theta, model, None, counters, stacked).draw(rng)
    return x


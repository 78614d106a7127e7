"""The interface every model exposes to the samplers.

Three structures are recognised:

``factorized``
    Matrix state whose columns are conditionally independent given the
    parameters.  Such models implement :meth:`FactorizedModel.column_logp`.
``chain``
    Matrix state whose columns form a Markov chain.  Such models implement
    initial, transition and emission terms so that forward filtering can run
    over restricted column state spaces.
``unstructured``
    Vector state with no exploitable structure.  Such models score whole
    states given as integer codes (see :func:`encode_state`).
"""
from __future__ import annotations

import numpy as np

FACTORIZED = "factorized"
CHAIN = "chain"
UNSTRUCTURED = "unstructured"
STRUCTURES = (FACTORIZED, CHAIN, UNSTRUCTURED)


def encode_state(x, n_symbols: int) -> int:
    """Integer code of a flat state: ``sum_p x[p] * S**p``."""
    x = np.asarray(x).ravel()
    if n_symbols == 2:
        return int.from_bytes(np.packbits(x.astype(np.uint8), bitorder="little").tobytes(),
                              "little")
    code = 0
    for v in x[::-1].tolist():
        code = code * n_symbols + v
    return code


def decode_state(code: int, size: int, n_symbols: int) -> np.ndarray:
    """Inverse of :func:`encode_state`."""
    if n_symbols == 2:
        raw = np.frombuffer(code.to_bytes((size + 7) // 8, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[:size].astype(np.int8)
    out = np.empty(size, dtype=np.int8)
    for p in range(size):
        code, out[p] = divmod(code, n_symbols)
    return out


class ModelTarget:
    """Base class for a joint density ``p(y, X, theta)`` over a discrete ``X``.

    Subclasses set ``structure``, ``shape`` and ``n_symbols`` and implement
    :meth:`log_joint`.  Parameter objects (``theta``) are model specific.
    """

    structure = UNSTRUCTURED
    n_symbols = 2
    shape: tuple = ()

    def log_joint(self, x, theta) -> float:
        raise NotImplementedError

    def block_scores(self, x, theta, block, candidates) -> np.ndarray:
        """Log joint of ``x`` with ``block`` replaced by each candidate.

        ``block`` is a column index for matrix states and an array of flat
        positions for vector states.  Values may be shifted by any constant
        shared across candidates.
        """
        x = np.array(x, copy=True)
        out = np.empty(len(candidates))
        for i, cand in enumerate(candidates):
            if x.ndim == 2:
                x[:, block] = cand
            else:
                x[block] = cand
            out[i] = self.log_joint(x, theta)
        return out

    # -- parameter steps ---------------------------------------------------
    def update_theta(self, x, theta, rng):
        """One conditional update ``theta ~ p(theta | X, y)`` (or a valid MH sweep)."""
        return theta

    def propose_theta(self, theta, rng):
        """Proposal for the joint MH update.

        Returns ``(theta_new, log_q_ratio)`` with
        ``log_q_ratio = log q(theta | theta_new) - log q(theta_new | theta)``.
        """
        raise NotImplementedError(f"{type(self).__name__} has no parameter proposal")

    def update_theta_rest(self, x, theta, rng):
        """Conditional update of parameters not moved by :meth:`propose_theta`."""
        return theta

    def theta_vector(self, theta) -> np.ndarray:
        return np.zeros(0)

    def theta_names(self) -> list:
        return []

    def initial_theta(self, rng=None):
        return None

    def initial_state(self) -> np.ndarray:
        return np.zeros(self.shape, dtype=np.int8)


class FactorizedModel(ModelTarget):
    """Matrix model whose log joint is ``prior(theta) + sum_i column_logp(x_i)``."""

    structure = FACTORIZED

    def theta_log_prior(self, theta) -> float:
        return 0.0

    def column_logp(self, theta, candidates, cols) -> np.ndarray:
        """Exact log contribution of candidate columns.

        ``candidates`` has shape ``(M, K, n)`` holding ``M`` candidates for each
        of the ``n`` columns listed in ``cols``; returns ``(M, n)``.
        """
        raise NotImplementedError

    def log_joint(self, x, theta) -> float:
        x = np.asarray(x)
        cols = np.arange(x.shape[1])
        return float(self.theta_log_prior(theta)
                     + self.column_logp(theta, x[None], cols).sum())

    def block_scores(self, x, theta, block, candidates) -> np.ndarray:
        cand = np.asarray(candidates)[:, :, None]
        return self.column_logp(theta, cand, np.array([block]))[:, 0]


class ChainModel(ModelTarget):
    """Matrix model whose columns form a Markov chain.

    ``log_joint = prior(theta) + initial(x_0) + sum_i transition(x_{i-1}, x_i)
    + sum_i emission_i(x_i)``.
    """

    structure = CHAIN

    def theta_log_prior(self, theta) -> float:
        return 0.0

    def initial_logp(self, theta, cols) -> np.ndarray:
        """``cols`` is ``(..., K)``; returns ``(...)``."""
        raise NotImplementedError

    def transition_logp(self, theta, prev, nxt) -> np.ndarray:
        """Broadcasting log transition probability between ``(..., K)`` arrays."""
        raise NotImplementedError

    def emission_logp(self, theta, candidates, cols) -> np.ndarray:
        """``candidates`` is ``(M, K, n)`` for the columns ``cols``; returns ``(M, n)``."""
        raise NotImplementedError

    def log_joint(self, x, theta) -> float:
        x = np.asarray(x)
        cols = x.T
        total = self.theta_log_prior(theta) + self.initial_logp(theta, cols[0])
        if x.shape[1] > 1:
            total += self.transition_logp(theta, cols[:-1], cols[1:]).sum()
        total += self.emission_logp(theta, x[None], np.arange(x.shape[1])).sum()
        return float(total)

    def block_scores(self, x, theta, block, candidates) -> np.ndarray:
        x = np.asarray(x)
        cand = np.asarray(candidates)
        i = int(block)
        n = x.shape[1]
        out = self.emission_logp(theta, cand[:, :, None], np.array([i]))[:, 0]
        if i == 0:
            out = out + self.initial_logp(theta, cand)
        else:
            out = out + self.transition_logp(theta, x[:, i - 1], cand)
        if i < n - 1:
            out = out + self.transition_logp(theta, cand, x[:, i + 1])
        return out


class UnstructuredModel(ModelTarget):
    """Vector model scored through integer state codes.

    Subclasses may override :meth:`log_joint_codes` with a cached fast path;
    the default decodes each code and calls :meth:`log_joint`.
    """

    structure = UNSTRUCTURED

    def log_joint_codes(self, codes, theta) -> list:
        size = int(np.prod(self.shape))
        return [self.log_joint(decode_state(c, size, self.n_symbols), theta)
                for c in codes]

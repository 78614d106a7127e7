"""Sparse linear regression with a g-prior, coefficients marginalised out.

The latent state is a binary inclusion vector over the ``D`` covariates.  With
the regression coefficients, noise variance and inclusion probability
integrated out, the log joint of an active set ``A`` is, up to a constant,

    - |A|/2 log(1+g) + lgamma(|A| + a_pi) + lgamma(D - |A| + b_pi)
    - (2 a_sigma + N - 1)/2 * log(2 b_sigma + S(A))

with ``S(A) = y'y - g/(1+g) * y' P_A y`` and ``P_A`` the orthogonal projection
onto the span of the active columns.  ``y' P_A y`` is computed from a
column-by-column factorization of the Gram matrix that drops linearly
dependent columns, so collinear (even duplicated) columns are well defined.
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import ContractError
from .base import UnstructuredModel, decode_state, encode_state

CACHE_LIMIT = 2_000_000
# relative residual norm below which a column counts as collinear
COLLINEAR_TOL = 1e-10


class RegressionModel(UnstructuredModel):
    """Bayesian variable selection target over a binary inclusion vector.

    Parameters
    ----------
    y : array_like, shape (N,)
        Responses; centred on construction.
    Z : array_like, shape (N, D)
        Design matrix; columns are centred on construction, which is what the
        ``N - 1`` exponent assumes (a flat-prior intercept integrated out).
    g : float, optional
        g-prior scale, default ``N``.
    """

    def __init__(self, y, Z, g=None, a_sigma=0.1, b_sigma=0.1, a_pi=0.001, b_pi=1.0):
        y = np.asarray(y, dtype=float)
        Z = np.asarray(Z, dtype=float)
        if y.ndim != 1 or Z.ndim != 2 or Z.shape[0] != y.size:
            raise ContractError("need y of shape (N,) and Z of shape (N, D)")
        self.y = y - y.mean()
        self.Z = Z - Z.mean(axis=0)
        self.n_obs, self.n_covariates = self.Z.shape
        self.shape = (self.n_covariates,)
        self.g = float(self.n_obs if g is None else g)
        self.a_sigma = float(a_sigma)
        self.b_sigma = float(b_sigma)
        self.a_pi = float(a_pi)
        self.b_pi = float(b_pi)
        if min(self.g, self.a_sigma, self.b_sigma, self.a_pi, self.b_pi) <= 0:
            raise ContractError("hyperparameters must be positive")
        self.yty = float(self.y @ self.y)
        # Gram quantities for the projections
        self._zty = (self.Z.T @ self.y).tolist()
        self._gram = self.Z.T @ self.Z
        self._zz = np.diag(self._gram).tolist()
        self._exponent = (2.0 * self.a_sigma + self.n_obs - 1.0) / 2.0
        self._shrink = self.g / (1.0 + self.g)
        self._cache = {}
        self.cache_misses = 0

    def residual_sum(self, active) -> float:
        """``S(A) = y'y - g/(1+g) y' P_A y``."""
        active = np.asarray(active, dtype=np.int64)
        return self.yty - self._shrink * self._projected(active)

    def _projected(self, active) -> float:
        """``y' P_A y`` with pseudo-inverse semantics for collinear columns.

        Runs a Cholesky factorization of the active Gram block one column at a
        time and skips any column whose residual norm vanishes relative to its
        own norm, so the result is the projection onto the span of the active
        columns whatever their rank.
        """
        k = active.size
        if k == 0:
            return 0.0
        if k == 1:
            j = int(active[0])
            return self._zty[j] ** 2 / self._zz[j] if self._zz[j] > 0 else 0.0
        G = self._gram[np.ix_(active, active)].tolist()
        zty = self._zty
        rows, kept, z = [], [], []
        quad = 0.0
        for t, j in enumerate(active.tolist()):
            g = G[t]
            row = []
            for s, i in enumerate(kept):
                prev = rows[s]
                v = g[i]
                for q in range(s):
                    v -= row[q] * prev[q]
                row.append(v / prev[s])
            d = g[t] - sum(v * v for v in row)
            if d <= COLLINEAR_TOL * g[t]:
                continue
            diag = math.sqrt(d)
            row.append(diag)
            zj = (zty[j] - sum(a * b for a, b in zip(row, z))) / diag
            rows.append(row)
            kept.append(t)
            z.append(zj)
            quad += zj * zj
        return quad

    def log_marginal(self, active) -> float:
        """Log marginal joint density of the active set (up to a constant)."""
        active = np.unique(np.asarray(active, dtype=np.int64))
        if active.size and (active[0] < 0 or active[-1] >= self.n_covariates):
            raise ContractError("active indices out of range")
        code = sum(1 << int(j) for j in active)
        value = self._cache.get(code)
        if value is None:
            value = self._compute(active)
            self._store(code, value)
        return value

    def _compute(self, active) -> float:
        self.cache_misses += 1
        k = active.size
        D = self.n_covariates
        log_c = (-0.5 * k * math.log1p(self.g) + math.lgamma(k + self.a_pi)
                 + math.lgamma(D - k + self.b_pi))
        s = self.residual_sum(active)
        return log_c - self._exponent * math.log(2.0 * self.b_sigma + s)

    def _store(self, code, value):
        if len(self._cache) >= CACHE_LIMIT:
            self._cache.clear()
        self._cache[code] = value

    def log_joint(self, x, theta=None) -> float:
        x = np.asarray(x)
        if x.shape != self.shape:
            raise ContractError(f"state must have shape {self.shape}")
        return self.log_marginal(np.flatnonzero(x))

    def log_joint_codes(self, codes, theta=None) -> list:
        cache = self._cache
        out = []
        for c in codes:
            v = cache.get(c)
            if v is None:
                active = np.flatnonzero(decode_state(c, self.n_covariates, 2))
                v = self._compute(active)
                self._store(c, v)
            out.append(v)
        return out

    def code(self, x) -> int:
        return encode_state(x, 2)

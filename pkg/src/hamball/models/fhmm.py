"""Additive factorial hidden Markov model with binary chains.

``K`` independent binary chains run over ``N`` time steps; chain ``k`` flips
with probability ``rho_k`` and starts on with probability ``nu_k``.  The
observation at time ``i`` is

    y_i ~ N(w_0 + sum_k x_ki w_k, sigma2 I_L).

The feature contributions ``w`` are treated as known; ``sigma2`` carries an
inverse-gamma prior and is the only sampled parameter.
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import ContractError
from .base import ChainModel


class FhmmModel(ChainModel):
    """Additive FHMM target whose columns are the Hamming-ball blocks.

    Parameters
    ----------
    y : array_like, shape (N, L) or (N,)
        Observations.
    w : array_like, shape (K, L) or (K,)
        Per-chain contribution vectors.
    rho, nu : float or array_like of length K
        Flip and initial-on probabilities, each in ``(0, 1)``.
    w0 : array_like of length L, optional
        Offset, default zero.
    a0, b0 : float
        Inverse-gamma prior on ``sigma2``.
    joint_step : float
        Log-scale random-walk step of the joint ``sigma2`` proposal.
    """

    def __init__(self, y, w, rho=0.05, nu=0.5, w0=None, a0=0.1, b0=0.1, joint_step=0.1):
        y = np.asarray(y, dtype=float)
        w = np.asarray(w, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        if w.ndim == 1:
            w = w[:, None]
        if w.shape[1] != y.shape[1]:
            raise ContractError(f"w has dimension {w.shape[1]}, y has {y.shape[1]}")
        self.y = y
        self.w = w
        self.n_steps, self.dim = y.shape
        self.n_chains = w.shape[0]
        self.shape = (self.n_chains, self.n_steps)
        self.w0 = np.zeros(self.dim) if w0 is None else np.asarray(w0, dtype=float).reshape(self.dim)
        self.rho = np.broadcast_to(np.asarray(rho, dtype=float), (self.n_chains,)).copy()
        self.nu = np.broadcast_to(np.asarray(nu, dtype=float), (self.n_chains,)).copy()
        for name, v in (("rho", self.rho), ("nu", self.nu)):
            if np.any(v <= 0) or np.any(v >= 1):
                raise ContractError(f"{name} must lie in (0, 1)")
        if a0 <= 0 or b0 <= 0:
            raise ContractError("a0 and b0 must be positive")
        self.a0 = float(a0)
        self.b0 = float(b0)
        self.joint_step = float(joint_step)
        self._log_stay = np.log1p(-self.rho)
        self._log_flip = np.log(self.rho)
        self._log_on = np.log(self.nu)
        self._log_off = np.log1p(-self.nu)

    @staticmethod
    def _check_sigma2(sigma2):
        if not sigma2 > 0:
            raise ContractError("sigma2 must be positive")

    # -- densities ----------------------------------------------------------
    def theta_log_prior(self, sigma2) -> float:
        self._check_sigma2(sigma2)
        a, b = self.a0, self.b0
        return a * math.log(b) - math.lgamma(a) - (a + 1) * math.log(sigma2) - b / sigma2

    def means(self, candidates) -> np.ndarray:
        """Observation means of candidate columns ``(M, K, n)`` -> ``(M, n, L)``."""
        return self.w0 + np.einsum("mkn,kl->mnl", candidates, self.w)

    def emission_logp(self, sigma2, candidates, cols) -> np.ndarray:
        self._check_sigma2(sigma2)
        resid = self.y[np.asarray(cols)] - self.means(np.asarray(candidates))
        sq = np.einsum("mnl,mnl->mn", resid, resid)
        return -0.5 * self.dim * math.log(2 * math.pi * sigma2) - sq / (2 * sigma2)

    def transition_logp(self, sigma2, prev, nxt) -> np.ndarray:
        same = np.asarray(prev) == np.asarray(nxt)
        return np.where(same, self._log_stay, self._log_flip).sum(axis=-1)

    def initial_logp(self, sigma2, cols) -> np.ndarray:
        cols = np.asarray(cols)
        return np.where(cols == 1, self._log_on, self._log_off).sum(axis=-1)

    def column_loglik(self, x_col, i: int, sigma2) -> float:
        """Gaussian log density of ``y_i`` given the active chains in ``x_col``."""
        x_col = np.asarray(x_col)
        if x_col.shape != (self.n_chains,):
            raise ContractError(f"column must have length {self.n_chains}")
        return float(self.emission_logp(sigma2, x_col[None, :, None], [i])[0, 0])

    def transition_logprob(self, x_prev, x_col) -> float:
        return float(self.transition_logp(None, x_prev, x_col))

    def residual_sum_squares(self, x) -> float:
        resid = self.y - self.means(np.asarray(x)[None])[0]
        return float((resid ** 2).sum())

    # -- parameter updates --------------------------------------------------
    def sigma2_posterior(self, x):
        """Shape and rate of the inverse-gamma full conditional of ``sigma2``."""
        shape = self.a0 + 0.5 * self.n_steps * self.dim
        rate = self.b0 + 0.5 * self.residual_sum_squares(x)
        return shape, rate

    def sigma2_update(self, x, rng) -> float:
        shape, rate = self.sigma2_posterior(x)
        return float(rate / rng.gamma(shape))

    def update_theta(self, x, theta, rng):
        return self.sigma2_update(x, rng)

    def propose_theta(self, theta, rng):
        step = self.joint_step * rng.standard_normal()
        return float(theta * math.exp(step)), float(step)

    def initial_theta(self, rng=None) -> float:
        return float(self.y.var())

    def theta_vector(self, theta) -> np.ndarray:
        return np.array([theta], dtype=float)

    def theta_names(self) -> list:
        return ["sigma2"]


"""Binomial mixture model for deconvolving tumor subclones.

The latent state is a ``K x N`` binary matrix whose entry ``(k, i)`` marks
mutation ``i`` as present in subclone ``k``.  Subclone weights are
``theta = gamma / sum(gamma)`` with ``gamma_k ~ Gamma(alpha/K, 1)``, and the
variant read count at site ``i`` is ``Binomial(d_i, phi_i)`` with

    p_i   = 0.5 * sum_k theta_k x_ki
    phi_i = (1 - e) p_i + e (1 - p_i)
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betaln, gammaln

from ..errors import ContractError
from .base import FactorizedModel


@dataclass
class TumorParams:
    gamma: np.ndarray
    f: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return self.gamma / self.gamma.sum()

    def copy(self):
        return TumorParams(self.gamma.copy(), self.f.copy())


def allele_frequency(x, weights, e: float) -> np.ndarray:
    """Variant allele frequency of every column of ``x`` (shape ``(K, N)``)."""
    x = np.asarray(x)
    p = 0.5 * np.asarray(weights) @ x
    return (1.0 - e) * p + e * (1.0 - p)


def binomial_logpmf(r, d, phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    if np.any(phi <= 0.0) or np.any(phi >= 1.0):
        raise ContractError("allele frequency outside (0, 1); use an error rate e > 0")
    r = np.asarray(r)
    d = np.asarray(d)
    log_coef = gammaln(d + 1) - gammaln(r + 1) - gammaln(d - r + 1)
    return log_coef + r * np.log(phi) + (d - r) * np.log1p(-phi)


def _gamma_logpdf(x, shape):
    return (shape - 1.0) * np.log(x) - x - gammaln(shape)


def _beta_logpdf(x, a, b):
    return (a - 1.0) * np.log(x) + (b - 1.0) * np.log1p(-x) - betaln(a, b)


class TumorModel(FactorizedModel):
    """Tumor deconvolution mixture; columns are the Hamming-ball blocks.

    Parameters
    ----------
    reads, depth : array_like
        Variant read counts ``r_i`` and total depths ``d_i``.
    n_clones : int
        Number of subclone slots ``K``.
    error_rate : float
        Sequencing error rate ``e`` in ``(0, 1)``.
    alpha : float
        Dirichlet concentration; the per-slot Gamma shape is ``alpha / K``.
    f_alpha, f_beta : float
        Beta prior of the per-site mutation frequencies.
    step : float
        Log-scale random-walk step of the conditional ``gamma`` update.
    joint_step : float
        Log-scale random-walk step of the joint (marginalised) proposal.
    """

    def __init__(self, reads, depth, n_clones=8, error_rate=0.001, alpha=1.0,
                 f_alpha=1.0, f_beta=1.0, step=0.25, joint_step=0.25):
        self.reads = np.asarray(reads, dtype=np.int64)
        self.depth = np.asarray(depth, dtype=np.int64)
        if self.reads.shape != self.depth.shape or self.reads.ndim != 1:
            raise ContractError("reads and depth must be 1-D arrays of equal length")
        if np.any(self.reads < 0) or np.any(self.reads > self.depth):
            raise ContractError("need 0 <= r_i <= d_i")
        if not 0.0 < error_rate < 1.0:
            raise ContractError("error rate must lie in (0, 1)")
        if min(alpha, f_alpha, f_beta) <= 0:
            raise ContractError("hyperparameters must be positive")
        self.n_clones = int(n_clones)
        self.n_sites = self.reads.size
        self.shape = (self.n_clones, self.n_sites)
        self.error_rate = float(error_rate)
        self.alpha = float(alpha)
        self.f_alpha = float(f_alpha)
        self.f_beta = float(f_beta)
        self.step = float(step)
        self.joint_step = float(joint_step)
        self._log_coef = (gammaln(self.depth + 1) - gammaln(self.reads + 1)
                          - gammaln(self.depth - self.reads + 1))

    # -- densities ----------------------------------------------------------
    def theta_log_prior(self, theta: TumorParams) -> float:
        a = self.alpha / self.n_clones
        return float(_gamma_logpdf(theta.gamma, a).sum()
                     + _beta_logpdf(theta.f, self.f_alpha, self.f_beta).sum())

    def _site_loglik(self, weights, candidates, cols):
        # candidates (M, K, n) -> binomial log likelihood (M, n)
        p = 0.5 * np.einsum("k,mkn->mn", weights, candidates)
        phi = (1.0 - self.error_rate) * p + self.error_rate * (1.0 - p)
        if np.any(phi <= 0.0) or np.any(phi >= 1.0):
            raise ContractError("allele frequency outside (0, 1)")
        r = self.reads[cols]
        return self._log_coef[cols] + r * np.log(phi) + (self.depth[cols] - r) * np.log1p(-phi)

    def column_logp(self, theta: TumorParams, candidates, cols) -> np.ndarray:
        cols = np.asarray(cols)
        f = theta.f[cols]
        ones = candidates.sum(axis=1)
        prior = ones * np.log(f) + (self.n_clones - ones) * np.log1p(-f)
        return self._site_loglik(theta.weights, candidates, cols) + prior

    def loglik(self, x, theta: TumorParams) -> float:
        cols = np.arange(self.n_sites)
        return float(self._site_loglik(theta.weights, np.asarray(x)[None], cols).sum())

    # -- parameter updates --------------------------------------------------
    def _gamma_log_target(self, gamma, x):
        a = self.alpha / self.n_clones
        w = gamma / gamma.sum()
        cols = np.arange(self.n_sites)
        lik = self._site_loglik(w, x[None], cols).sum()
        # log-scale random walk: include the Jacobian log(gamma)
        return lik + _gamma_logpdf(gamma, a).sum() + np.log(gamma).sum()

    def gamma_update(self, x, theta: TumorParams, rng, step=None) -> TumorParams:
        """One Metropolis sweep over the components of ``gamma`` on the log scale."""
        step = self.step if step is None else step
        x = np.asarray(x)
        gamma = theta.gamma.copy()
        current = self._gamma_log_target(gamma, x)
        for k in range(self.n_clones):
            if step == 0:
                break
            proposal = gamma.copy()
            proposal[k] *= np.exp(step * rng.standard_normal())
            target = self._gamma_log_target(proposal, x)
            if np.log(rng.random()) < target - current:
                gamma, current = proposal, target
        return TumorParams(gamma, theta.f.copy())

    def f_update(self, x, theta: TumorParams, rng) -> TumorParams:
        """Exact conditional draw ``f_i ~ Beta(f_a + s_i, f_b + K - s_i)``."""
        s = np.asarray(x).sum(axis=0)
        f = rng.beta(self.f_alpha + s, self.f_beta + self.n_clones - s)
        # keep f strictly inside (0, 1) so column log priors stay finite
        f = np.clip(f, np.finfo(float).tiny, 1.0 - np.finfo(float).epsneg)
        return TumorParams(theta.gamma.copy(), f)

    def update_theta(self, x, theta, rng):
        theta = self.gamma_update(x, theta, rng)
        return self.f_update(x, theta, rng)

    def propose_theta(self, theta: TumorParams, rng):
        log_step = self.joint_step * rng.standard_normal(self.n_clones)
        gamma = theta.gamma * np.exp(log_step)
        return TumorParams(gamma, theta.f.copy()), float(log_step.sum())

    def update_theta_rest(self, x, theta, rng):
        return self.f_update(x, theta, rng)

    def initial_theta(self, rng=None) -> TumorParams:
        return TumorParams(np.ones(self.n_clones), np.full(self.n_sites, 0.5))

    def theta_vector(self, theta: TumorParams) -> np.ndarray:
        return np.concatenate([theta.weights, theta.f])

    def theta_names(self) -> list:
        return ([f"theta_{k + 1}" for k in range(self.n_clones)]
                + [f"f_{i + 1}" for i in range(self.n_sites)])

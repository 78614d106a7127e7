import math
from itertools import product

import numpy as np
import pytest
from scipy import integrate, stats

from conftest import fhmm_toy, regression_toy, tumor_toy
from hamball.errors import ConfigError, ContractError
from hamball.models import (FhmmModel, RegressionModel, TumorModel, read_dataset,
                            simulate_experiment, write_dataset)
from hamball.models.base import decode_state, encode_state
from hamball.models.simulate import BRANCHED_ARCHITECTURE, LINEAR_ARCHITECTURE
from hamball.models.tumor import TumorParams, allele_frequency


# -- state codes ------------------------------------------------------------

@pytest.mark.parametrize("S", [2, 3])
def test_state_codes_round_trip(S, rng):
    for size in (1, 7, 70):
        x = rng.integers(0, S, size=size).astype(np.int8)
        code = encode_state(x, S)
        assert code == sum(int(v) * S ** p for p, v in enumerate(x))
        np.testing.assert_array_equal(decode_state(code, size, S), x)


# -- tumor ------------------------------------------------------------------

def test_architectures_share_allele_frequencies():
    for x, theta in (LINEAR_ARCHITECTURE, BRANCHED_ARCHITECTURE):
        np.testing.assert_allclose(allele_frequency(x, theta, 0.0), [0.5, 0.3, 0.15], atol=1e-15)
    assert max(LINEAR_ARCHITECTURE[1]) == 0.4


def test_error_rate_keeps_frequency_positive():
    phi = allele_frequency(np.zeros((3, 2)), [0.2, 0.3, 0.5], 0.001)
    np.testing.assert_allclose(phi, 0.001)
    with pytest.raises(ContractError):
        TumorModel([1], [10], error_rate=0.0)


def test_tumor_rejects_bad_reads():
    with pytest.raises(ContractError):
        TumorModel([11], [10])
    with pytest.raises(ContractError):
        TumorModel([1, 2], [10])


def _tumor_log_joint_direct(model, x, theta):
    """Straight transcription of the tumor joint density, term by term."""
    w = theta.gamma / theta.gamma.sum()
    phi = allele_frequency(x, w, model.error_rate)
    total = stats.binom.logpmf(model.reads, model.depth, phi).sum()
    total += stats.gamma.logpdf(theta.gamma, model.alpha / model.n_clones).sum()
    total += stats.bernoulli.logpmf(x, theta.f[None, :]).sum()
    total += stats.beta.logpdf(theta.f, model.f_alpha, model.f_beta).sum()
    return total


def test_tumor_log_joint_matches_direct_formula(rng):
    model = TumorModel([30, 12, 7], [60, 50, 40], n_clones=3, alpha=0.8, f_alpha=2.0, f_beta=3.0)
    for _ in range(10):
        x = rng.integers(0, 2, size=(3, 3))
        theta = TumorParams(rng.gamma(1.0, size=3) + 0.01, rng.uniform(0.05, 0.95, size=3))
        assert model.log_joint(x, theta) == pytest.approx(_tumor_log_joint_direct(model, x, theta),
                                                          rel=1e-12)


def test_tumor_column_factorization():
    model = TumorModel([6, 3, 1], [10, 10, 10], n_clones=3)
    theta = TumorParams(np.array([0.5, 0.3, 0.2]), np.array([0.6, 0.5, 0.3]))
    cols = [np.array(c) for c in product((0, 1), repeat=3)]
    base = np.zeros((3, 3), dtype=np.int8)
    for i in range(3):
        cand = np.stack(cols)
        scores = model.block_scores(base, theta, i, cand)
        for a, ca in enumerate(cols):
            for b, cb in enumerate(cols):
                xa, xb = base.copy(), base.copy()
                xa[:, i], xb[:, i] = ca, cb
                assert model.log_joint(xa, theta) - model.log_joint(xb, theta) == \
                    pytest.approx(scores[a] - scores[b], abs=1e-9)


def test_gamma_update_with_zero_step_is_fixed(rng):
    model, theta = tumor_toy()
    x = np.array([[1, 0], [1, 1]])
    out = model.gamma_update(x, theta, rng, step=0.0)
    np.testing.assert_array_equal(out.gamma, theta.gamma)


def test_gamma_chain_matches_quadrature(rng):
    # with X and f fixed, theta_1 = gamma_1 / (gamma_1 + gamma_2) has posterior
    # density proportional to likelihood(theta_1) * Beta(theta_1; a, a), a = alpha / K
    model = TumorModel([40, 14], [100, 100], n_clones=2, step=0.6)
    x = np.array([[1, 1], [1, 0]])
    theta = TumorParams(np.array([1.0, 1.0]), np.array([0.5, 0.5]))
    draws = []
    for t in range(40_000):
        theta = model.gamma_update(x, theta, rng)
        if t >= 2000:
            draws.append(theta.gamma[0] / theta.gamma.sum())
    a = model.alpha / model.n_clones

    def density(t):
        w = np.array([t, 1 - t])
        phi = allele_frequency(x, w, model.error_rate)
        return math.exp(stats.binom.logpmf(model.reads, model.depth, phi).sum()
                        + stats.beta.logpdf(t, a, a) + 40.0)

    edges = np.linspace(0.0, 1.0, 41)
    mass = np.array([integrate.quad(density, lo, hi, limit=200)[0]
                     for lo, hi in zip(edges[:-1], edges[1:])])
    mass /= mass.sum()
    hist = np.histogram(draws, bins=edges)[0] / len(draws)
    assert 0.5 * np.abs(hist - mass).sum() < 0.02


def test_f_update_is_conjugate(rng):
    model = TumorModel(np.zeros(2, int), np.full(2, 10), n_clones=8)
    theta = TumorParams(np.ones(8), np.full(2, 0.5))
    x = np.zeros((8, 2), dtype=np.int8)
    x[:, 0] = 1
    draws = np.array([model.f_update(x, theta, rng).f for _ in range(100_000)])
    # Beta(9, 1) for the all-ones column and Beta(1, 9) for the all-zeros column
    for col, (a, b) in enumerate([(9, 1), (1, 9)]):
        mean = a / (a + b)
        se = math.sqrt(a * b / ((a + b) ** 2 * (a + b + 1)) / draws.shape[0])
        assert abs(draws[:, col].mean() - mean) < 3 * se


def test_joint_tumor_proposal_ratio(rng):
    model, theta = tumor_toy()
    prop, log_q = model.propose_theta(theta, rng)
    # log-normal random walk: q ratio is the log Jacobian sum
    assert log_q == pytest.approx(float(np.log(prop.gamma / theta.gamma).sum()), abs=1e-12)


# -- regression -------------------------------------------------------------

def test_regression_empty_model_formula():
    model = regression_toy(D=5, n=20)
    a, b = model.a_pi, model.b_pi
    want = (math.lgamma(a) + math.lgamma(5 + b)
            - (2 * model.a_sigma + 19) / 2 * math.log(2 * model.b_sigma + model.yty))
    assert model.log_marginal([]) == pytest.approx(want, rel=1e-14)


def test_regression_centres_data():
    model = RegressionModel([1.0, 2.0, 6.0], np.array([[1.0], [2.0], [4.0]]))
    assert model.y.sum() == pytest.approx(0.0, abs=1e-14)
    assert model.Z.sum(axis=0) == pytest.approx(0.0, abs=1e-14)
    assert model.g == 3.0


def test_duplicate_columns_have_equal_marginals():
    model = regression_toy(D=6, n=30)
    assert model.log_marginal([0]) == pytest.approx(model.log_marginal([1]), abs=1e-12)
    assert math.isfinite(model.log_marginal([0, 1]))
    assert math.isfinite(model.log_marginal([0, 1, 2]))


def test_projection_matches_least_squares(rng):
    Z = rng.standard_normal((25, 8))
    Z[:, 3] = Z[:, 1]
    Z[:, 5] = 2.0 * Z[:, 0] - Z[:, 2]
    model = RegressionModel(rng.standard_normal(25), Z)
    for active in ([0], [1, 3], [0, 2, 5], [0, 1, 2, 3, 4, 5, 6], list(range(8))):
        Za = model.Z[:, active]
        beta = np.linalg.lstsq(Za, model.y, rcond=None)[0]
        fitted = Za @ beta
        want = model.yty - model.g / (1 + model.g) * float(fitted @ model.y)
        assert model.residual_sum(active) == pytest.approx(want, rel=1e-10)


def test_regression_marginal_matches_quadrature():
    # integrate beta and sigma2 numerically for one centred column; the flat
    # intercept contributes sigma^-(N-1) after centring
    rng = np.random.default_rng(3)
    n = 8
    z = rng.standard_normal(n)
    y = 0.8 * z + 0.4 * rng.standard_normal(n)
    model = RegressionModel(y, z[:, None], g=4.0, a_sigma=1.5, b_sigma=0.5, a_pi=1.0, b_pi=1.0)
    yc, zc = model.y, model.Z[:, 0]
    g, a, b = model.g, model.a_sigma, model.b_sigma
    zz = float(zc @ zc)

    def integrand(beta, log_s2, with_column):
        s2 = math.exp(log_s2)
        r = yc - beta * zc if with_column else yc
        val = -(n - 1) / 2 * math.log(2 * math.pi * s2) - float(r @ r) / (2 * s2)
        val += stats.invgamma.logpdf(s2, a, scale=b) + log_s2
        if with_column:
            val += stats.norm.logpdf(beta, 0.0, math.sqrt(g * s2 / zz))
        return math.exp(val + 5.0)

    with_col = integrate.dblquad(lambda beta, ls: integrand(beta, ls, True),
                                 -8.0, 4.0, -6.0, 6.0, epsabs=0, epsrel=1e-9)[0]
    without = integrate.quad(lambda ls: integrand(0.0, ls, False), -8.0, 4.0,
                             epsabs=0, epsrel=1e-11, limit=200)[0]
    # the inclusion prior contributes the Beta-binomial ratio
    log_prior = (math.lgamma(1 + 1.0) + math.lgamma(0 + 1.0)) - (math.lgamma(1.0) + math.lgamma(1 + 1.0))
    want = math.log(with_col / without) + log_prior
    got = model.log_marginal([0]) - model.log_marginal([])
    assert got == pytest.approx(want, rel=1e-4)


def test_sparsity_prior_penalises_useless_column(rng):
    for seed in range(5):
        r = np.random.default_rng(seed)
        Z = r.standard_normal((40, 3))
        y = r.standard_normal(40)
        model = RegressionModel(y, Z)
        assert model.log_marginal([0]) < model.log_marginal([])


def test_regression_codes_match_states(rng):
    model = regression_toy(D=9, n=20)
    states = rng.integers(0, 2, size=(30, 9))
    codes = [encode_state(s, 2) for s in states]
    np.testing.assert_allclose(model.log_joint_codes(codes),
                               [model.log_joint(s) for s in states], rtol=0, atol=0)


def test_regression_block_scores_consistent(rng):
    model = regression_toy(D=6, n=15)
    x = rng.integers(0, 2, size=6)
    block = np.array([1, 4])
    cand = np.array(list(product((0, 1), repeat=2)))
    scores = model.block_scores(x, None, block, cand)
    for c, s in zip(cand, scores):
        xx = x.copy()
        xx[block] = c
        assert s - scores[0] == pytest.approx(model.log_joint(xx) - model.block_scores(
            x, None, block, cand[:1])[0], abs=1e-10)


# -- fhmm -------------------------------------------------------------------

def test_fhmm_column_loglik_examples():
    w = np.array([[1.0, 0.0], [0.0, 2.0], [0.5, 0.5]])
    w0 = np.array([0.1, -0.2])
    y = np.array([[0.1, -0.2], [1.5, 2.3]])
    model = FhmmModel(y, w, w0=w0)
    s2 = 0.3
    assert model.column_loglik([0, 0, 0], 0, s2) == pytest.approx(-math.log(2 * math.pi * s2),
                                                                  rel=1e-14)
    # additivity: union of two disjoint active sets
    mean = model.means(np.array([[1], [0], [1]])[None])[0, 0]
    np.testing.assert_allclose(mean, w0 + w[0] + w[2])


def test_fhmm_column_loglik_matches_dense_gaussian(rng):
    w = rng.standard_normal((4, 3))
    y = rng.standard_normal((5, 3))
    model = FhmmModel(y, w, w0=rng.standard_normal(3))
    for _ in range(20):
        x = rng.integers(0, 2, size=4)
        i = int(rng.integers(5))
        s2 = float(rng.uniform(0.1, 2.0))
        want = stats.multivariate_normal.logpdf(y[i], model.w0 + x @ w, s2 * np.eye(3))
        assert model.column_loglik(x, i, s2) == pytest.approx(want, abs=1e-12)
    with pytest.raises(ContractError):
        model.column_loglik([0, 1], 0, 1.0)


def test_fhmm_transition_examples():
    model = FhmmModel(np.zeros(3), np.ones(3), rho=0.1)
    a = np.array([0, 1, 1])
    assert model.transition_logprob(a, a) == pytest.approx(3 * math.log(0.9))
    assert model.transition_logprob(a, 1 - a) == pytest.approx(3 * math.log(0.1))


@pytest.mark.parametrize("K", [1, 2, 3, 4])
def test_fhmm_transitions_normalised(K):
    model = FhmmModel(np.zeros(2), np.linspace(0.1, 1, K), rho=np.linspace(0.05, 0.4, K))
    for prev in product((0, 1), repeat=K):
        total = sum(math.exp(model.transition_logprob(np.array(prev), np.array(nxt)))
                    for nxt in product((0, 1), repeat=K))
        assert total == pytest.approx(1.0, abs=1e-14)


def test_fhmm_log_joint_is_product_of_terms(rng):
    model, s2 = fhmm_toy(K=3, N=6)
    x = rng.integers(0, 2, size=(3, 6))
    total = model.theta_log_prior(s2)
    total += float(model.initial_logp(s2, x[:, 0]))
    for i in range(6):
        total += model.column_loglik(x[:, i], i, s2)
        if i:
            total += model.transition_logprob(x[:, i - 1], x[:, i])
    assert model.log_joint(x, s2) == pytest.approx(total, abs=1e-12)


def test_sigma2_posterior_parameters():
    model = FhmmModel(np.array([[1.0], [0.0]]), np.array([[1.0]]), a0=0.1, b0=0.2)
    x = np.array([[1, 0]])
    shape, rate = model.sigma2_posterior(x)
    assert (shape, rate) == (0.1 + 1.0, 0.2)
    shape, rate = model.sigma2_posterior(np.array([[0, 1]]))
    assert rate == pytest.approx(0.2 + 0.5 * 2.0)
    model2 = FhmmModel(np.array([[3.0], [0.0]]), np.array([[1.0]]), a0=0.1, b0=0.2)
    # residuals scaled by c scale the rate increment by c^2
    assert model2.sigma2_posterior(np.array([[0, 0]]))[1] - 0.2 == pytest.approx(9 * 0.5)


def test_sigma2_update_mean(rng):
    model, _ = fhmm_toy(K=2, N=40)
    x = np.zeros((2, 40), dtype=np.int8)
    a, b = model.sigma2_posterior(x)
    draws = np.array([model.sigma2_update(x, rng) for _ in range(50_000)])
    se = math.sqrt(b ** 2 / ((a - 1) ** 2 * (a - 2)) / draws.size)
    assert abs(draws.mean() - b / (a - 1)) < 4 * se


def test_fhmm_validation():
    with pytest.raises(ContractError):
        FhmmModel(np.zeros((3, 2)), np.ones((2, 1)))
    with pytest.raises(ContractError):
        FhmmModel(np.zeros(3), np.ones(2), rho=1.0)
    model, _ = fhmm_toy()
    with pytest.raises(ContractError):
        model.theta_log_prior(-1.0)


# -- simulation and dataset files -------------------------------------------

def test_tumor_simulation_concentrates(rng):
    ds = simulate_experiment("tumor", {"depth": 1000, "error_rate": 0.001}, rng)
    phi = ds.truth["phi"]
    se = np.sqrt(phi * (1 - phi) / 1000)
    assert np.all(np.abs(ds.data["reads"] / 1000 - phi) < 3 * se)


def test_regression_simulation_duplicates_confounders(rng):
    ds = simulate_experiment("regression", {"n": 100, "d": 1200}, rng)
    Z = ds.data["Z"]
    assert ds.truth["confounders"] == (11, 611)
    np.testing.assert_array_equal(Z[:, 10], Z[:, 610])
    assert Z.shape == (100, 1200)


def test_fhmm_simulation_noise_level(rng):
    ds = simulate_experiment("fhmm", {"n": 4000, "k": 4, "sigma2": 0.01}, rng)
    resid = ds.data["y"] - ds.truth["x"].T @ ds.data["w"]
    assert resid.var() == pytest.approx(0.01, rel=0.06)


def test_simulation_rejects_unknown_input(rng):
    with pytest.raises(ConfigError):
        simulate_experiment("mixture", {}, rng)
    with pytest.raises(ConfigError):
        simulate_experiment("fhmm", {"depth": 3}, rng)
    with pytest.raises(ConfigError):
        simulate_experiment("regression", {"d": 10, "confounders": (3, 3)}, rng)


@pytest.mark.parametrize("name,params", [("tumor", {"replicates": 2}),
                                         ("regression", {"n": 20, "d": 30}),
                                         ("fhmm", {"n": 25, "k": 3, "dim": 2})])
def test_dataset_files_round_trip(name, params, tmp_path):
    ds = simulate_experiment(name, params, np.random.default_rng(5))
    write_dataset(ds, tmp_path)
    back = read_dataset(tmp_path)
    assert back.experiment == name
    for key, value in ds.data.items():
        np.testing.assert_allclose(np.asarray(back.data[key], dtype=float),
                                   np.asarray(value, dtype=float), rtol=0, atol=0)
    x = np.zeros(ds.build_model().shape, dtype=np.int8)
    assert back.build_model().log_joint(x, back.build_model().initial_theta()) == \
        ds.build_model().log_joint(x, ds.build_model().initial_theta())

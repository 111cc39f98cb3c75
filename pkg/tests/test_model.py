import math

import numpy as np
import pytest

from btbench.model import (
    BradleyTerryModel,
    DavidsonModel,
    PriorConfig,
    bt_log_posterior,
    davidson_log_posterior,
    davidson_probs,
    pair_prob,
)
from btbench.errors import ConfigError
from btbench.wintable import WinTable, apply_ties_policy


def make_wintable(wins, ties=None, k=None):
    wins = np.asarray(wins, dtype=np.int64)
    k = k or wins.shape[0]
    names = tuple(f"a{i}" for i in range(k))
    if ties is None:
        ties = np.zeros_like(wins)
    return WinTable(names, wins, np.asarray(ties, dtype=np.int64))


# --- pair_prob ---------------------------------------------------------------


def test_pair_prob_symmetry_point():
    assert pair_prob(1.3, 1.3) == 0.5


def test_pair_prob_log2():
    assert pair_prob(math.log(2), 0.0) == pytest.approx(2.0 / 3.0, rel=1e-12)


def test_pair_prob_logistic_two():
    assert pair_prob(1.0, -1.0) == pytest.approx(1.0 / (1.0 + math.exp(-2.0)), rel=1e-12)
    assert pair_prob(1.0, -1.0) == pytest.approx(0.8808, abs=5e-5)


def test_pair_prob_complement_exact():
    rng = np.random.default_rng(3)
    a = rng.normal(scale=20, size=1000)
    b = rng.normal(scale=20, size=1000)
    assert (pair_prob(a, b) + pair_prob(b, a) == 1.0).all()


def test_pair_prob_saturates():
    assert pair_prob(1e4, 0.0) == 1.0
    assert pair_prob(0.0, 1e4) == 0.0
    assert math.isfinite(pair_prob(1e300, -1e300))


# --- davidson_probs ----------------------------------------------------------


def test_davidson_equal_beta_nu_zero():
    p_i, p_t, p_j = davidson_probs(0.7, 0.7, 0.0)
    assert p_i == pytest.approx(1 / 3, rel=1e-12)
    assert p_t == pytest.approx(1 / 3, rel=1e-12)
    assert p_j == pytest.approx(1 / 3, rel=1e-12)


def test_davidson_nu_minus_infinity_recovers_pair_prob():
    p_i, p_t, p_j = davidson_probs(0.9, -0.3, -50.0)
    assert p_t == pytest.approx(0.0, abs=1e-12)
    assert p_i == pytest.approx(pair_prob(0.9, -0.3), rel=1e-9)
    assert p_j == pytest.approx(pair_prob(-0.3, 0.9), rel=1e-9)


def test_davidson_nu_large_all_ties():
    _, p_t, _ = davidson_probs(0.2, 0.2, 50.0)
    assert p_t == pytest.approx(1.0, abs=1e-12)


def test_davidson_probs_sum_to_one():
    rng = np.random.default_rng(11)
    bi, bj, nu = rng.normal(size=(3, 500)) * 5
    p_i, p_t, p_j = davidson_probs(bi, bj, nu)
    np.testing.assert_allclose(p_i + p_t + p_j, 1.0, atol=1e-12)


# --- log posteriors and gradients ---------------------------------------------

PRIORS = [
    PriorConfig("lognormal", 0.5),
    PriorConfig("half_cauchy", 1.0),
    PriorConfig("half_normal", 3.0),
]


def finite_difference(fn, x, h=1e-6):
    g = np.zeros_like(x)
    for d in range(x.size):
        e = np.zeros_like(x)
        e[d] = h
        g[d] = (fn(x + e) - fn(x - e)) / (2 * h)
    return g


@pytest.fixture(scope="module")
def bt_fixture_model(spread_wintable):
    return BradleyTerryModel(spread_wintable)


@pytest.mark.parametrize("prior", PRIORS, ids=lambda p: p.family)
def test_bt_gradient_matches_finite_differences(spread_wintable, prior):
    model = BradleyTerryModel(spread_wintable, prior)
    rng = np.random.default_rng(17)
    for _ in range(20):
        x = rng.normal(scale=0.8, size=model.dim)
        logp, grad = model.logpdf_and_grad(x)
        fd = finite_difference(lambda z: model.logpdf_and_grad(z)[0], x)
        np.testing.assert_allclose(grad, fd, rtol=1e-6, atol=1e-6)
        assert math.isfinite(logp)


@pytest.mark.parametrize("prior", PRIORS, ids=lambda p: p.family)
def test_davidson_gradient_matches_finite_differences(base_wintable, prior):
    model = DavidsonModel(base_wintable, prior)
    rng = np.random.default_rng(29)
    for _ in range(20):
        x = rng.normal(scale=0.8, size=model.dim)
        logp, grad = model.logpdf_and_grad(x)
        fd = finite_difference(lambda z: model.logpdf_and_grad(z)[0], x)
        np.testing.assert_allclose(grad, fd, rtol=1e-6, atol=1e-6)
        assert math.isfinite(logp)


def test_bt_symmetric_two_player():
    wt = make_wintable([[0, 5], [5, 0]])
    model = BradleyTerryModel(wt)
    x = np.array([0.4, -0.4, 0.1])
    logp1, grad1 = model.logpdf_and_grad(x)
    logp2, grad2 = model.logpdf_and_grad(np.array([-0.4, 0.4, 0.1]))
    assert logp1 == pytest.approx(logp2, rel=1e-12)
    np.testing.assert_allclose(grad1[[1, 0, 2]], grad2, rtol=1e-12)


def test_bt_likelihood_shift_invariant(spread_wintable):
    model = BradleyTerryModel(spread_wintable)
    rng = np.random.default_rng(5)
    x = np.concatenate([rng.normal(size=model.k), [0.2]])
    shifted = x.copy()
    shifted[: model.k] += 1.7
    assert model.log_likelihood(x) == pytest.approx(
        model.log_likelihood(shifted), rel=1e-9
    )
    # the full posterior does change, through the prior
    assert model.logpdf_and_grad(x)[0] != pytest.approx(
        model.logpdf_and_grad(shifted)[0], rel=1e-9
    )


def test_bt_rejects_ties(base_wintable):
    with pytest.raises(ConfigError, match="ties"):
        BradleyTerryModel(base_wintable)


def test_bt_posterior_finite_for_extreme_params(spread_wintable):
    model = BradleyTerryModel(spread_wintable)
    for s in (-200.0, 0.0, 200.0):
        for scale in (1e-3, 1.0, 50.0):
            x = np.concatenate([np.full(model.k, scale), [s]])
            logp, grad = model.logpdf_and_grad(x)
            assert math.isfinite(logp)
            assert np.all(np.isfinite(grad))


def test_davidson_approaches_bt_without_ties(spread_wintable):
    bt = BradleyTerryModel(spread_wintable)
    dav = DavidsonModel(spread_wintable)  # zero ties everywhere
    rng = np.random.default_rng(23)
    beta = rng.normal(size=bt.k)
    x_bt = np.concatenate([beta, [0.1]])
    x_dav = np.concatenate([beta, [-50.0], [0.1]])
    # same binomial vs trinomial constants: with T=0 the multinomial
    # coefficient reduces to the binomial one, so likelihoods must agree
    assert dav.log_likelihood(x_dav) == pytest.approx(
        bt.log_likelihood(x_bt), rel=1e-6
    )


def test_davidson_all_ties_prefers_large_nu():
    wt = make_wintable([[0, 0], [0, 0]], ties=[[0, 10], [10, 0]])
    model = DavidsonModel(wt)
    beta = np.zeros(2)
    lls = [
        model.log_likelihood(np.concatenate([beta, [nu], [0.0]]))
        for nu in (-2.0, 0.0, 2.0, 5.0)
    ]
    assert lls == sorted(lls)


def test_wrapper_functions_match_models(spread_wintable, base_wintable):
    rng = np.random.default_rng(2)
    beta = rng.normal(size=5)
    logp, grad = bt_log_posterior(beta, 0.3, spread_wintable)
    model = BradleyTerryModel(spread_wintable)
    logp2, grad2 = model.logpdf_and_grad(np.concatenate([beta, [0.3]]))
    assert logp == logp2
    np.testing.assert_array_equal(grad, grad2)

    logp, grad = davidson_log_posterior(beta, -0.5, 0.3, base_wintable)
    dmodel = DavidsonModel(base_wintable)
    logp2, grad2 = dmodel.logpdf_and_grad(np.concatenate([beta, [-0.5], [0.3]]))
    assert logp == logp2
    np.testing.assert_array_equal(grad, grad2)


def test_prior_config_validation():
    with pytest.raises(ConfigError):
        PriorConfig(family="uniform")
    with pytest.raises(ConfigError):
        PriorConfig(scale=0.0)
    with pytest.raises(ConfigError):
        PriorConfig(nu_prior_sd=-1.0)


def test_bt_requires_wins_not_exceeding_matches():
    # wins exceeding matches is impossible from build_wintable; the model
    # still guards its own contract
    wt = make_wintable([[0, 3], [1, 0]])
    BradleyTerryModel(wt)  # fine

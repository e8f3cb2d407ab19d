import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import optimize

from costvr.bsvr_process import ObservedIntervalSet, exponential_params, generate_bsvrs
from costvr.errors import InsufficientDataError, InvalidParameterError, UndefinedEstimateError
from costvr.inference import (
    SufficientStats,
    estimate_with_bound,
    fim_crlb,
    log_likelihood,
    mle_exponential,
    mle_numeric,
    mome,
    normalized_crlb,
    sufficient_stats,
)
from costvr.lifetimes import Exponential, LognormalDb


def _datasets(n, delta0=0.0, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        rate = rng.uniform(0.5, 5.0)
        lbs = rng.uniform(0.5, 15.0)
        L = rng.uniform(3.0, 15.0)
        obs = generate_bsvrs(exponential_params(rate, lbs, L, delta0), seed=int(rng.integers(2**32)))
        st_ = sufficient_stats(obs)
        if st_.n >= 3 and st_.nu < st_.n:
            out.append(obs)
    return out


def _ll_exp(theta, obs):
    return log_likelihood(theta[0], Exponential(theta[1]), obs)


@pytest.mark.parametrize("delta0", [0.0, 0.2])
def test_closed_form_is_numeric_maximum(delta0):
    for obs in _datasets(15, delta0, seed=1):
        est = mle_exponential(sufficient_stats(obs))
        res = optimize.minimize(lambda x: -_ll_exp(np.exp(x), obs),
                                np.log([est.lambda_hat * 1.3, est.lbs_hat * 0.7]),
                                method="Nelder-Mead", options=dict(xatol=1e-10, fatol=1e-12, maxiter=5000))
        lam, lbs = np.exp(res.x)
        assert lam == pytest.approx(est.lambda_hat, rel=1e-4)
        assert lbs == pytest.approx(est.lbs_hat, rel=1e-4)
        assert _ll_exp((est.lambda_hat, est.lbs_hat), obs) >= -res.fun - 1e-9


def test_score_vanishes_at_mle():
    for obs in _datasets(20, 0.1, seed=2):
        est = mle_exponential(sufficient_stats(obs))
        th = np.array([est.lambda_hat, est.lbs_hat])
        h = 1e-5 * th
        g = [(_ll_exp(th + h * e, obs) - _ll_exp(th - h * e, obs)) / (2 * h[i])
             for i, e in enumerate(np.eye(2))]
        assert np.linalg.norm(np.array(g) * th) < 1e-5 * max(1.0, obs.n)


def test_special_case_root():
    # n00 = n11 + Lambda0 / L0 makes nu * L0 + Lambda0 = 0
    L0 = 10.0
    st_ = SufficientStats(n=10, nu=-4, lambda0_sum=40.0, L0=L0)
    est = mle_exponential(st_)
    assert est.lbs_hat == pytest.approx(math.sqrt(L0 * 40.0 / (10 + 4)), rel=1e-14)


def test_lemma_invariance():
    for obs in _datasets(20, 0.3, seed=3):
        s = obs.shortened()
        for lam, lbs in [(1.0, 2.0), (3.0, 0.7)]:
            lam0 = lam * math.exp(-obs.delta0 / lbs)
            assert log_likelihood(lam, Exponential(lbs), obs) == pytest.approx(
                log_likelihood(lam0, Exponential(lbs), s), abs=1e-10)


def test_all_doubly_censored_gives_infinite_lifetime():
    obs = ObservedIntervalSet([0.0, 0.0], [5.0, 5.0], 0.0, 5.0)
    est = mle_exponential(sufficient_stats(obs))
    assert est.infinite_lifetime and est.lambda_hat == 0


@pytest.mark.parametrize("bad", [
    lambda: SufficientStats(2, 3, 1.0, 1.0),
    lambda: SufficientStats(2, 0, -1.0, 1.0),
    lambda: SufficientStats(2, 0, 1.0, 0.0),
])
def test_bad_stats(bad):
    with pytest.raises(InvalidParameterError):
        bad()


def test_empty_data_errors():
    with pytest.raises(InsufficientDataError):
        mle_exponential(SufficientStats(0, 0, 0.0, 1.0))
    with pytest.raises(InsufficientDataError):
        mome(SufficientStats(0, 0, 0.0, 1.0))
    with pytest.raises(UndefinedEstimateError):
        mome(SufficientStats(2, 2, 20.0, 10.0))


def test_mome_inverts_mean():
    L0, lbs = 10.0, 4.0
    t = lbs * L0 / (lbs + L0)
    est = mome(SufficientStats(7, 0, 7 * t, L0))
    assert est.lbs_hat == pytest.approx(lbs, rel=1e-12)
    assert est.lambda_hat == pytest.approx(7 / (L0 + lbs), rel=1e-12)


@given(st.floats(0.1, 10.0), st.floats(0.1, 50.0), st.floats(0.5, 50.0))
def test_fim_matches_normalized_bound(rate, lbs, L0):
    fb = fim_crlb(rate, lbs, L0)
    ref = normalized_crlb(rate * L0, lbs / L0)
    assert fb.normalized_lambda == pytest.approx(ref, rel=1e-9)
    assert fb.normalized_lbs == pytest.approx(ref, rel=1e-9)


def test_fim_is_score_covariance():
    # Monte Carlo Fisher information: covariance of the exact score
    rate, lbs, L = 2.5, 10.0, 10.0
    p = exponential_params(rate, lbs, L)
    eps = np.array([1e-5 * rate, 1e-5 * lbs])
    scores = []
    for s in range(3000):
        obs = generate_bsvrs(p, seed=s)
        th = np.array([rate, lbs])
        scores.append([(_ll_exp(th + eps[i] * e, obs) - _ll_exp(th - eps[i] * e, obs)) / (2 * eps[i])
                       for i, e in enumerate(np.eye(2))])
    cov = np.cov(np.array(scores).T)
    fim = fim_crlb(rate, lbs, L).fim
    np.testing.assert_allclose(cov, fim, rtol=0.12, atol=0.05 * np.max(np.abs(fim)))


def test_fim_invalid():
    with pytest.raises(InvalidParameterError):
        fim_crlb(0.0, 1.0, 1.0)


def test_estimate_with_bound():
    obs = generate_bsvrs(exponential_params(2.5, 10.0, 10.0), seed=4)
    eb = estimate_with_bound(obs)
    assert eb.crlb_lambda > 0 and eb.crlb_lifetime > 0
    eb4 = estimate_with_bound(obs, n_experiments=4)
    assert eb4.relative_rmse_floor[0] == pytest.approx(eb.relative_rmse_floor[0] / 2)
    with pytest.raises(InvalidParameterError):
        estimate_with_bound(obs, n_experiments=0)


def test_log_likelihood_domain():
    obs = _datasets(1)[0]
    assert log_likelihood(0.0, Exponential(1.0), obs) == -math.inf
    assert log_likelihood(-1.0, Exponential(1.0), obs) == -math.inf


def test_lognormal_mle_beats_truth_and_recovers():
    law = LognormalDb(5.0, 10.0)
    from costvr.bsvr_process import BsVrProcessParams
    obs = generate_bsvrs(BsVrProcessParams(20.0, law, 0.0, 15.0, 0.075), seed=9)
    est = mle_numeric(obs)
    assert est.loglik >= log_likelihood(20.0, law, obs) - 1e-9
    assert est.loglik == pytest.approx(log_likelihood(est.lambda_hat, LognormalDb(est.mu_hat, est.sigma2_hat), obs))
    assert est.mu_hat == pytest.approx(5.0, abs=1.0)
    assert est.sigma2_hat == pytest.approx(10.0, rel=0.35)


def test_lognormal_mle_needs_data():
    with pytest.raises(InsufficientDataError):
        mle_numeric(ObservedIntervalSet([0.1], [0.2], 0.0, 1.0))
    with pytest.raises(InvalidParameterError):
        mle_numeric(_datasets(1)[0], family="weibull")

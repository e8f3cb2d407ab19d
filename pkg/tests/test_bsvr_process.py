import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from costvr.bsvr_process import (
    BsVrProcessParams,
    ObservedIntervalSet,
    count_pmf,
    decompose_counts,
    expected_count,
    exponential_params,
    generate_bsvrs,
    sample_typical_intervals,
    simulate_batch,
)
from costvr.errors import InvalidParameterError
from costvr.lifetimes import Exponential, LognormalDb


@pytest.mark.parametrize("kw", [
    dict(rate=0.0),
    dict(rate=-1.0),
    dict(rate=math.nan),
    dict(x2=0.0),
    dict(delta0=-0.1),
    dict(delta0=7.5),
])
def test_invalid_params(kw):
    base = dict(rate=1.0, lifetime=Exponential(1.0), x1=0.0, x2=7.5, delta0=0.0)
    base.update(kw)
    with pytest.raises(InvalidParameterError):
        BsVrProcessParams(**base)


def test_interval_set_validation():
    with pytest.raises(InvalidParameterError):
        ObservedIntervalSet([1.0], [0.5], 0.0, 2.0)
    with pytest.raises(InvalidParameterError):
        ObservedIntervalSet([-0.1], [0.5], 0.0, 2.0)
    with pytest.raises(InvalidParameterError):
        ObservedIntervalSet([0.1], [0.15], 0.0, 2.0, delta0=0.1)


def test_censoring_classes():
    obs = ObservedIntervalSet([0.5, 0.0, 0.3, 0.0], [1.0, 1.0, 2.0, 2.0], 0.0, 2.0)
    assert obs.class_labels == ["00", "10", "01", "11"]
    assert obs.counts == (1, 1, 1, 1)
    assert decompose_counts(obs) == (2, 2)


def test_shortened_keeps_classes():
    obs = ObservedIntervalSet([0.5, 0.0, 0.3, 0.0], [1.0, 1.0, 2.0, 2.0], 0.0, 2.0, delta0=0.2)
    s = obs.shortened()
    assert s.x2 == 1.8 and s.delta0 == 0.0
    assert s.counts == obs.counts
    np.testing.assert_allclose(s.upsilon, obs.upsilon - 0.2)


def test_generate_deterministic_and_valid():
    p = exponential_params(2.6, 2.9, 7.5, delta0=0.23)
    a = generate_bsvrs(p, seed=5)
    b = generate_bsvrs(p, seed=5)
    np.testing.assert_array_equal(a.a, b.a)
    np.testing.assert_array_equal(a.b, b.b)
    assert np.all(a.upsilon >= 0.23)
    assert np.all((a.a >= 0) & (a.b <= 7.5))


@pytest.mark.parametrize("law,delta0", [
    (Exponential(2.9), 0.0),
    (Exponential(2.9), 0.23),
    (LognormalDb(3.0, 20.0), 0.0),
    (LognormalDb(3.0, 20.0), 0.5),
])
def test_mean_count_matches_formula(law, delta0):
    p = BsVrProcessParams(2.6, law, 0.0, 7.5, delta0)
    c = simulate_batch(p, 20_000, seed=1)
    mean = expected_count(p)
    se = math.sqrt(mean / c.n.size)
    assert abs(c.n.mean() - mean) < 4 * se


def test_expected_count_exponential_closed_form():
    p = exponential_params(2.6, 2.9, 7.5, delta0=0.23)
    ref = 2.6 * math.exp(-0.23 / 2.9) * (7.5 - 0.23 + 2.9)
    assert expected_count(p) == pytest.approx(ref, rel=1e-12)


def test_count_pmf_is_poisson():
    p = exponential_params(2.6, 2.9, 7.5)
    k = np.arange(60)
    np.testing.assert_allclose(count_pmf(p, k), stats.poisson.pmf(k, 2.6 * (7.5 + 2.9)))
    with pytest.raises(InvalidParameterError):
        count_pmf(p, -1)


def test_batch_matches_single_realizations():
    p = exponential_params(1.5, 2.0, 5.0)
    c = simulate_batch(p, 4000, seed=11)
    single = np.array([generate_bsvrs(p, seed=1000 + i).n for i in range(4000)])
    # two-sample comparison of count laws
    assert stats.ks_2samp(c.n, single).pvalue > 1e-3


def test_heavy_tail_burn_in_stationary():
    # the tail correction makes even a zero burn-in exact
    p = BsVrProcessParams(1.0, LognormalDb(10.0, 60.0), 0.0, 5.0)
    c0 = simulate_batch(p, 20_000, seed=3, burn_in=0.0)
    c1 = simulate_batch(p, 20_000, seed=4)
    mean = expected_count(p)
    se = math.sqrt(mean / 20_000)
    assert abs(c0.n.mean() - mean) < 4 * se
    assert abs(c1.n.mean() - mean) < 4 * se


def test_alive_count_mean():
    p = exponential_params(2.6, 2.9, 7.5)
    c = simulate_batch(p, 20_000, seed=2)
    ref = 2.6 * 2.9
    assert abs(c.n_alive.mean() - ref) < 4 * math.sqrt(ref / 20_000)


def test_typical_intervals_match_process():
    p = exponential_params(2.0, 1.5, 4.0, delta0=0.1)
    a, b = sample_typical_intervals(p, 20_000, seed=0)
    pooled = np.concatenate([generate_bsvrs(p, seed=s).upsilon for s in range(2500)])
    assert stats.ks_2samp(b - a, pooled).pvalue > 1e-3
    assert np.all(b - a >= 0.1)


@given(st.floats(0.1, 5.0), st.floats(0.1, 10.0), st.floats(1.0, 20.0), st.integers(0, 2**31))
def test_generate_respects_window(rate, mean, length, seed):
    p = exponential_params(rate, mean, length, x1=-3.0)
    obs = generate_bsvrs(p, seed=seed)
    assert np.all(obs.a >= -3.0) and np.all(obs.b <= -3.0 + length)
    assert np.all(obs.b > obs.a)

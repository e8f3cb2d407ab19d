import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from costvr.errors import InvalidParameterError
from costvr.lifetimes import Exponential, LognormalDb, TruncatedLognormalDb

LAWS = [
    Exponential(2.9),
    Exponential(0.81),
    LognormalDb(-16.92, 94.60),
    LognormalDb(3.0, 4.0),
    TruncatedLognormalDb(-11.09, 89.91, 0.075, 15.0),
]
IDS = ["exp2.9", "exp0.81", "ln-table", "ln-narrow", "trunc"]


def _upper(law):
    return law.upper if isinstance(law, TruncatedLognormalDb) else np.inf


def _quad(f, a, b):
    # split at a few decades to help quad with the lognormal spikes
    pts = [a] + [p for p in (1e-6, 1e-4, 1e-2, 1.0, 10.0) if a < p < b] + [b]
    return sum(integrate.quad(f, lo, hi, limit=400, epsabs=1e-13, epsrel=1e-11)[0]
               for lo, hi in zip(pts[:-1], pts[1:]))


@pytest.mark.parametrize("law", LAWS, ids=IDS)
def test_mean_matches_quadrature(law):
    ref = _quad(lambda y: y * float(law.pdf(y)), 0.0, _upper(law))
    assert law.mean() == pytest.approx(ref, rel=1e-7)


@pytest.mark.parametrize("law", LAWS, ids=IDS)
@pytest.mark.parametrize("x", [0.0, 0.05, 0.5, 3.0, 12.0])
def test_excess_mean_matches_survival_integral(law, x):
    # E[(Y - x)^+] = int_x^inf S(t) dt
    ref = _quad(lambda t: float(law.sf(t)), x, _upper(law))
    assert law.excess_mean(x) == pytest.approx(ref, rel=1e-6, abs=1e-13)


@pytest.mark.parametrize("law", LAWS, ids=IDS)
def test_cdf_is_integral_of_pdf(law):
    for y in [0.1, 1.0, 5.0]:
        lo = law.lower if isinstance(law, TruncatedLognormalDb) else 0.0
        ref = _quad(lambda t: float(law.pdf(t)), lo, y) if y > lo else 0.0
        assert float(law.cdf(y)) == pytest.approx(ref, abs=1e-8)


@pytest.mark.parametrize("law", LAWS, ids=IDS)
def test_sample_mean(law, rng):
    x = law.sample(rng, 200_000)
    se = x.std() / math.sqrt(x.size)
    assert abs(x.mean() - law.mean()) < 5 * se


@pytest.mark.parametrize("law", LAWS, ids=IDS)
def test_samples_follow_cdf(law, rng):
    x = law.sample(rng, 20_000)
    assert stats.kstest(x, lambda v: law.cdf(v)).pvalue > 1e-3


@pytest.mark.parametrize("law,age", [
    (Exponential(2.9), 5.0),
    (LognormalDb(-16.92, 94.60), 0.0),
    (LognormalDb(-16.92, 94.60), 20.0),
    (LognormalDb(3.0, 4.0), 1.0),
    (TruncatedLognormalDb(-11.09, 89.91, 0.075, 15.0), 0.0),
    (TruncatedLognormalDb(-11.09, 89.91, 0.075, 15.0), 2.0),
])
def test_residual_beyond_age_law(law, age, rng):
    # target density proportional to S(age + r)
    up = _upper(law) - age
    norm = _quad(lambda r: float(law.sf(age + r)), 0.0, up)

    def cdf(v):
        v = np.atleast_1d(v)
        return np.array([_quad(lambda r: float(law.sf(age + r)), 0.0, min(t, up)) / norm if t > 0 else 0.0
                         for t in v])

    r = law.sample_residual_beyond(rng, 3000, age)
    assert np.all(r >= 0)
    assert stats.kstest(r, cdf).pvalue > 1e-3


def test_truncated_residual_past_upper_is_zero(rng):
    law = TruncatedLognormalDb(0.0, 1.0, 0.5, 2.0)
    assert np.all(law.sample_residual_beyond(rng, 5, 3.0) == 0)


@given(st.floats(0.01, 100.0), st.floats(0.0, 500.0))
def test_exponential_excess_mean_closed_form(scale, x):
    law = Exponential(scale)
    assert law.excess_mean(x) == pytest.approx(scale * math.exp(-x / scale), rel=1e-12, abs=1e-300)


@given(st.floats(-30.0, 10.0), st.floats(0.5, 150.0), st.floats(1e-3, 50.0))
def test_log_excess_mean_consistent(mu, s2, x):
    law = LognormalDb(mu, s2)
    v = law.excess_mean(x)
    lv = law.log_excess_mean(x)
    if v > 1e-250:
        assert lv == pytest.approx(math.log(v), rel=1e-6, abs=1e-6)
    else:
        assert lv < -500 or lv == -math.inf or v == 0


@given(st.floats(-30.0, 10.0), st.floats(0.5, 150.0))
def test_lognormal_db_parameters(mu, s2):
    law = LognormalDb(mu, s2)
    assert law.median() == pytest.approx(10 ** (mu / 10), rel=1e-12)
    assert law.psi == pytest.approx(s2 * (math.log(10) / 10) ** 2, rel=1e-12)
    assert law.mean() >= law.median()


@pytest.mark.parametrize("bad", [
    lambda: Exponential(0.0),
    lambda: Exponential(-1.0),
    lambda: Exponential(math.inf),
    lambda: LognormalDb(0.0, 0.0),
    lambda: LognormalDb(math.nan, 1.0),
    lambda: TruncatedLognormalDb(0.0, 1.0, 2.0, 1.0),
    lambda: TruncatedLognormalDb(0.0, 1.0, -1.0, 1.0),
])
def test_invalid_parameters(bad):
    with pytest.raises(InvalidParameterError):
        bad()


def test_table_case2_mean():
    # mean lifetime of the case-2 lognormal law
    assert LognormalDb(-16.92, 94.60).mean() == pytest.approx(0.25, abs=0.005)

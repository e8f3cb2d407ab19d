import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from costvr.errors import InsufficientDataError, InvalidParameterError
from costvr.stats import chi_square_gof, ecdf, ecdf_eval, poisson_cdf, poisson_fit


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50))
def test_ecdf_properties(x):
    e = ecdf(x)
    assert np.all(np.diff(e[:, 0]) > 0)
    assert e[-1, 1] == pytest.approx(1.0)
    np.testing.assert_allclose(ecdf_eval(x, e[:, 0]), e[:, 1])


def test_ecdf_empty():
    with pytest.raises(InsufficientDataError):
        ecdf([])


def test_gof_calibrated_under_null():
    rng = np.random.default_rng(0)
    p = np.array([chi_square_gof(rng.poisson(27.04, 2000), 27.04).p_value for _ in range(400)])
    # p-values roughly uniform
    assert stats.kstest(p, "uniform").pvalue > 1e-3
    assert 0.02 < np.mean(p < 0.05) < 0.09


def test_gof_detects_wrong_mean():
    rng = np.random.default_rng(1)
    rep = chi_square_gof(rng.poisson(30.0, 5000), 27.04)
    assert not rep.passed


def test_gof_estimated_mean_loses_a_dof():
    c = np.random.default_rng(2).poisson(8.0, 1000)
    a = chi_square_gof(c, 8.0)
    b = chi_square_gof(c)
    assert b.dof == b.n_bins - 2 and a.dof == a.n_bins - 1


def test_gof_bins_have_min_expected():
    c = np.random.default_rng(3).poisson(3.0, 200)
    rep = chi_square_gof(c, 3.0)
    assert rep.n_bins >= 3


@pytest.mark.parametrize("bad,err", [
    ([], InsufficientDataError),
    ([1, -1], InvalidParameterError),
    ([1.5, 2], InvalidParameterError),
])
def test_gof_rejects(bad, err):
    with pytest.raises(err):
        chi_square_gof(bad, 1.0)


def test_poisson_helpers():
    assert poisson_fit([1, 2, 3]) == 2.0
    assert poisson_cdf(3, 2.0) == pytest.approx(stats.poisson.cdf(3, 2.0))

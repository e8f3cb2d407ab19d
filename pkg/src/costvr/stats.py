"""Small statistics helpers: ECDF, Poisson chi-square test, Poisson fit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import InsufficientDataError, InvalidParameterError


def ecdf(samples) -> np.ndarray:
    """Right-continuous ECDF as sorted ``(value, cumulative)`` rows.

    >>> ecdf([1, 1, 2]).tolist()
    [[1.0, 0.6666666666666666], [2.0, 1.0]]
    """
    x = np.asarray(samples, dtype=float).reshape(-1)
    if x.size == 0:
        raise InsufficientDataError("ECDF of an empty sample")
    vals, counts = np.unique(x, return_counts=True)
    return np.column_stack([vals, np.cumsum(counts) / x.size])


def ecdf_eval(samples, t):
    """Evaluate the ECDF of ``samples`` at points ``t``."""
    x = np.sort(np.asarray(samples, dtype=float).reshape(-1))
    if x.size == 0:
        raise InsufficientDataError("ECDF of an empty sample")
    return np.searchsorted(x, np.asarray(t, dtype=float), side="right") / x.size


@dataclass(frozen=True)
class GofReport:
    statistic: float
    dof: int
    p_value: float
    passed: bool
    n_bins: int


def _pool_bins(expected, observed, min_expected):
    # merge neighbouring bins left to right, then fold a short last bin back
    e_out, o_out = [], []
    e_acc = o_acc = 0.0
    for e, o in zip(expected, observed):
        e_acc += e
        o_acc += o
        if e_acc >= min_expected:
            e_out.append(e_acc)
            o_out.append(o_acc)
            e_acc = o_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        if e_out:
            e_out[-1] += e_acc
            o_out[-1] += o_acc
        else:
            e_out.append(e_acc)
            o_out.append(o_acc)
    return np.array(e_out), np.array(o_out)


def chi_square_gof(counts, poisson_mean: float | None = None, alpha: float = 0.05,
                   min_expected: float = 5.0) -> GofReport:
    """Chi-square goodness of fit of integer ``counts`` to a Poisson law.

    Bins ``0, 1, ..., k`` with tails merged so every expected count is at
    least ``min_expected``; the upper tail bin collects all mass above the
    largest count. With ``poisson_mean=None`` the mean is estimated by the
    sample mean and one degree of freedom is removed.
    """
    c = np.asarray(counts)
    if c.size == 0:
        raise InsufficientDataError("no counts")
    if np.any(c < 0) or np.any(c != np.round(c)):
        raise InvalidParameterError("counts must be nonnegative integers")
    c = c.astype(np.int64)
    estimated = poisson_mean is None
    mean = float(c.mean()) if estimated else float(poisson_mean)
    if not mean > 0:
        raise InvalidParameterError("Poisson mean must be > 0")
    n = c.size
    hi = int(max(c.max(), stats.poisson.ppf(1 - 1e-12, mean)))
    k = np.arange(hi + 1)
    pmf = stats.poisson.pmf(k, mean)
    pmf[-1] += stats.poisson.sf(hi, mean)
    obs = np.bincount(c, minlength=hi + 1)[: hi + 1].astype(float)
    # the leading tail also pools downward into bin 0 via the left-to-right sweep
    e, o = _pool_bins(n * pmf, obs, min_expected)
    dof = e.size - 1 - (1 if estimated else 0)
    if dof < 1:
        raise InsufficientDataError(f"only {e.size} usable bins after pooling")
    stat = float(np.sum((o - e) ** 2 / e))
    p = float(stats.chi2.sf(stat, dof))
    return GofReport(stat, dof, p, p >= alpha, int(e.size))


def poisson_fit(counts) -> float:
    """Maximum-likelihood Poisson mean (the sample mean)."""
    c = np.asarray(counts, dtype=float)
    if c.size == 0:
        raise InsufficientDataError("no counts")
    return float(c.mean())


def poisson_cdf(k, mean: float):
    return stats.poisson.cdf(k, mean)


__all__ = ["GofReport", "chi_square_gof", "ecdf", "ecdf_eval", "poisson_cdf", "poisson_fit"]

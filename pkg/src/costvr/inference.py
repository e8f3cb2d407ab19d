"""Estimation of birth rate and lifetime law from censored interval data.

The exponential case has a closed-form maximum-likelihood estimator; the
lognormal case is maximized numerically. A method-of-moments baseline and the
Fisher information for the exponential model are provided for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import optimize
from scipy.special import gammaln

from .bsvr_process import ObservedIntervalSet
from .errors import (
    ConvergenceError,
    InsufficientDataError,
    InvalidParameterError,
    SingularMatrixError,
    UndefinedEstimateError,
)
from .lifetimes import LifetimeDistribution, LognormalDb


@dataclass(frozen=True)
class SufficientStats:
    """(n, nu = n11 - n00, Lambda0 = sum(upsilon - delta0)) plus the geometry."""

    n: int
    nu: int
    lambda0_sum: float
    L0: float
    delta0: float = 0.0

    def __post_init__(self):
        if self.n < 0 or not -self.n <= self.nu <= self.n:
            raise InvalidParameterError(f"inconsistent counts n={self.n}, nu={self.nu}")
        if self.lambda0_sum < -1e-9 * max(1.0, self.L0 * self.n):
            raise InvalidParameterError("Lambda0 must be >= 0")
        if self.L0 <= 0:
            raise InvalidParameterError("L0 must be > 0")


def sufficient_stats(observed: ObservedIntervalSet) -> SufficientStats:
    n00, _, _, n11 = observed.counts
    lam0 = float(np.sum(observed.upsilon - observed.delta0))
    return SufficientStats(observed.n, n11 - n00, max(lam0, 0.0),
                           observed.length - observed.delta0, observed.delta0)


class RateLifetimeEstimate(NamedTuple):
    lambda_hat: float
    lbs_hat: float

    @property
    def infinite_lifetime(self) -> bool:
        return math.isinf(self.lbs_hat)


def _exp_lifetime_root(n, nu, lam0, L0):
    # positive root of (nu - n) L^2 + (L0 nu + Lambda0) L + L0 Lambda0 = 0
    k = n - nu
    b = L0 * nu + lam0
    disc = math.sqrt(b * b + 4.0 * k * L0 * lam0)
    if b >= 0:
        return (b + disc) / (2.0 * k)
    return 2.0 * L0 * lam0 / (disc - b)


def mle_exponential(stats: SufficientStats) -> RateLifetimeEstimate:
    """Closed-form MLE of (lambda, L_BS) for exponential lifetimes.

    The lifetime estimate is the nonnegative root of the score equations.
    The rate uses the estimated lifetime in ``exp(delta0 / L_BS)``, which by
    invariance of the MLE under reparametrization is the exact maximizer.

    When every interval spans the whole window (``nu == n``) the likelihood
    increases without bound in L_BS; the result then has ``lbs_hat = inf``
    and ``lambda_hat = 0``.
    """
    n, nu = stats.n, stats.nu
    if n == 0:
        raise InsufficientDataError("no observed intervals")
    if nu == n:
        return RateLifetimeEstimate(0.0, math.inf)
    lbs = _exp_lifetime_root(n, nu, stats.lambda0_sum, stats.L0)
    if lbs == 0:
        lam = n / stats.L0 if stats.delta0 == 0 else math.inf
        return RateLifetimeEstimate(lam, 0.0)
    lam = n / (stats.L0 + lbs) * math.exp(stats.delta0 / lbs)
    return RateLifetimeEstimate(lam, lbs)


def mome(stats: SufficientStats) -> RateLifetimeEstimate:
    """Method-of-moments estimate from the mean observed lifetime T.

    Inverts E(upsilon) = L_BS L0 / (L_BS + L0). The returned rate is
    ``n / (L0 + L_BS)``; with ``delta0 > 0`` it targets lambda0 rather than
    lambda.
    """
    if stats.n == 0:
        raise InsufficientDataError("no observed intervals")
    t = stats.lambda0_sum / stats.n
    if t >= stats.L0:
        raise UndefinedEstimateError(f"mean observed lifetime {t} >= L0 = {stats.L0}")
    lbs = t / (1.0 - t / stats.L0)
    return RateLifetimeEstimate(stats.n / (stats.L0 + lbs), lbs)


def log_likelihood(rate: float, lifetime: LifetimeDistribution, observed: ObservedIntervalSet) -> float:
    """Log-likelihood of censored interval data, including the -log n! term.

    Terms: Poisson exponent for regions longer than delta0, density of fully
    observed lifetimes, survival of singly censored ones, and the excess mean
    over the window length for doubly censored ones. Out-of-domain
    parameters give ``-inf``.
    """
    if not (math.isfinite(rate) and rate > 0):
        return -math.inf
    L, d0 = observed.length, observed.delta0
    n = observed.n
    codes = observed.class_codes
    ups = observed.upsilon
    y = lifetime
    expected = rate * ((L - d0) * float(y.sf(d0)) + y.excess_mean(d0))
    if not math.isfinite(expected):
        return -math.inf
    ll = n * math.log(rate) - float(gammaln(n + 1)) - expected
    interior = ups[codes == 0]
    single = ups[(codes == 1) | (codes == 2)]
    n11 = int(np.count_nonzero(codes == 3))
    if interior.size:
        ll += float(np.sum(y.logpdf(interior)))
    if single.size:
        ll += float(np.sum(y.logsf(single)))
    if n11:
        ll += n11 * y.log_excess_mean(L)
    return ll if not math.isnan(ll) else -math.inf


class LognormalEstimate(NamedTuple):
    lambda_hat: float
    mu_hat: float
    sigma2_hat: float
    loglik: float


def _lognormal_objective(observed):
    def f(x):
        lam = math.exp(x[0])
        s2 = math.exp(x[2])
        if not (math.isfinite(lam) and math.isfinite(s2)) or abs(x[1]) > 1e3 or s2 < 1e-8 or s2 > 1e5:
            return math.inf
        ll = log_likelihood(lam, LognormalDb(x[1], s2), observed)
        return -ll if math.isfinite(ll) else math.inf

    return f


def _profile_rate(observed, lifetime):
    L, d0 = observed.length, observed.delta0
    k = (L - d0) * float(lifetime.sf(d0)) + lifetime.excess_mean(d0)
    return observed.n / k if k > 0 else math.nan


def _moment_starts(observed, n_starts, rng):
    ups = observed.upsilon
    db = 10.0 * np.log10(ups)
    mu0 = float(np.mean(db))
    var0 = max(float(np.var(db)), 1e-2)
    starts = []
    # shifts push the guess down/up because short lifetimes go unobserved
    shifts = [(0.0, 1.0), (-5.0, 1.5), (-10.0, 2.0), (5.0, 0.7)]
    for i in range(n_starts):
        if i < len(shifts):
            dmu, fvar = shifts[i]
        else:
            dmu, fvar = rng.normal(-4.0, 6.0), math.exp(rng.normal(0.3, 0.5))
        mu, s2 = mu0 + dmu, var0 * fvar
        lam = _profile_rate(observed, LognormalDb(mu, s2))
        if not (math.isfinite(lam) and lam > 0):
            lam = observed.n / observed.length
        starts.append(np.array([math.log(lam), mu, math.log(s2)]))
    return starts


def mle_numeric(observed: ObservedIntervalSet, family: str = "lognormal", n_starts: int = 8,
                seed: int = 0, xatol: float = 1e-8, max_restarts: int = 3) -> LognormalEstimate:
    """Numerical MLE of (lambda, mu, sigma^2) for dB-lognormal lifetimes.

    Nelder-Mead in (log lambda, mu, log sigma^2) from several moment-based
    starting points; the best local optimum is polished by a restart.
    """
    if family != "lognormal":
        raise InvalidParameterError(f"unsupported family {family!r}")
    if observed.n < 3:
        raise InsufficientDataError("need at least 3 intervals")
    f = _lognormal_objective(observed)
    rng = np.random.default_rng(seed)
    opts = dict(xatol=xatol, fatol=1e-10, maxiter=20000, maxfev=40000)
    best = None
    for x0 in _moment_starts(observed, n_starts, rng):
        if not math.isfinite(f(x0)):
            continue
        res = optimize.minimize(f, x0, method="Nelder-Mead", options=opts)
        if best is None or res.fun < best.fun:
            best = res
    if best is None:
        raise ConvergenceError("no finite starting point")
    for _ in range(max_restarts):
        res = optimize.minimize(f, best.x, method="Nelder-Mead", options=opts)
        improved = res.fun < best.fun - 1e-10
        if res.fun <= best.fun:
            best = res
        if not improved and res.success:
            break
    if not best.success:
        raise ConvergenceError("Nelder-Mead did not converge", best=best.x, residual=best.fun)
    lam, mu, s2 = math.exp(best.x[0]), best.x[1], math.exp(best.x[2])
    return LognormalEstimate(lam, mu, s2, -best.fun)


@dataclass(frozen=True)
class EstimateWithBound:
    lambda_hat: float
    theta_hat: float
    crlb_lambda: float
    crlb_lifetime: float
    relative_rmse_floor: tuple[float, float]


class FisherBound(NamedTuple):
    fim: np.ndarray
    crlb_lambda: float
    crlb_lbs: float
    normalized_lambda: float
    normalized_lbs: float


def normalized_crlb(rate0_L0: float, ratio: float) -> float:
    """(1/(lambda0 L0)) (1 + r) / (1 + 2r) with r = L_BS / L0."""
    return (1.0 + ratio) / (1.0 + 2.0 * ratio) / rate0_L0


def fim_crlb(rate: float, lbs: float, L0: float, delta0: float = 0.0) -> FisherBound:
    """Fisher information and Cramer-Rao bounds for exponential lifetimes."""
    for v in (rate, lbs, L0):
        if not (math.isfinite(v) and v > 0):
            raise InvalidParameterError("rate, lbs and L0 must be positive")
    rate0 = rate * math.exp(-delta0 / lbs)
    s = lbs + L0
    # cross term 1/rate: the value consistent with the normalized bounds
    fim = rate0 * np.array([[s / rate**2, 1.0 / rate], [1.0 / rate, s / lbs**2]])
    det = fim[0, 0] * fim[1, 1] - fim[0, 1] * fim[1, 0]
    if not det > 0:
        raise SingularMatrixError("Fisher information matrix is singular")
    inv = np.array([[fim[1, 1], -fim[0, 1]], [-fim[1, 0], fim[0, 0]]]) / det
    return FisherBound(fim, inv[0, 0], inv[1, 1], inv[0, 0] / rate**2, inv[1, 1] / lbs**2)


def estimate_with_bound(observed: ObservedIntervalSet, n_experiments: int = 1) -> EstimateWithBound:
    """Closed-form exponential MLE together with the CRLB at the estimate.

    ``relative_rmse_floor`` is the square root of the normalized bounds,
    divided by ``sqrt(n_experiments)`` when the data stand for that many
    independent windows of the same size.
    """
    if int(n_experiments) < 1:
        raise InvalidParameterError("n_experiments must be >= 1")
    st = sufficient_stats(observed)
    est = mle_exponential(st)
    if est.infinite_lifetime or est.lbs_hat == 0:
        raise UndefinedEstimateError("bound undefined at a degenerate estimate")
    fb = fim_crlb(est.lambda_hat, est.lbs_hat, st.L0, st.delta0)
    return EstimateWithBound(est.lambda_hat, est.lbs_hat, fb.crlb_lambda, fb.crlb_lbs,
                             (math.sqrt(fb.normalized_lambda / n_experiments),
                              math.sqrt(fb.normalized_lbs / n_experiments)))


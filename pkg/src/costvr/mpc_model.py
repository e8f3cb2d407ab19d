"""Multipath-component visibility regions.

An MPC-VR is a disc in the plane; a user moving along a straight line sees an
MPC for as long as the line stays inside the disc. This module covers

* chord-length laws of such discs and their radius mixtures,
* the simplex-constrained least-squares fit of radius weights to a target
  lifetime CDF, and a dB-lognormal summary of the result,
* fitting of lifetime laws (exponential, lognormal, truncated lognormal) to
  censored MPC observations,
* the Gaussian gain function and the MPC-count scaling rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .bsvr_process import ObservedIntervalSet
from .errors import (
    ConvergenceError,
    DegenerateDistributionError,
    InsufficientDataError,
    InvalidParameterError,
)
from .inference import mle_exponential, mle_numeric, sufficient_stats
from .lifetimes import (
    Exponential,
    LifetimeDistribution,
    LognormalDb,
    TruncatedLognormalDb,
)
from .numerics import db_lognormal_to_natural, norm_cdf

# default grids: sampling lifetimes and sampling radii
DEFAULT_Y_GRID = 0.0025 + 0.05 * np.arange(300)
DEFAULT_R_GRID = 0.025 * np.arange(921)


@dataclass(frozen=True)
class RadiusPmf:
    """Discrete radius law ``P(R = radii[i]) = weights[i]``."""

    radii: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        r = np.array(self.radii, dtype=float).reshape(-1)
        w = np.array(self.weights, dtype=float).reshape(-1)
        if r.size == 0 or r.shape != w.shape:
            raise InvalidParameterError("radii and weights must be nonempty and equally long")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(w))):
            raise InvalidParameterError("radii and weights must be finite")
        if r[0] < 0 or np.any(np.diff(r) <= 0):
            raise InvalidParameterError("radii must be >= 0 and strictly increasing")
        if np.any(w < 0):
            raise InvalidParameterError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-9:
            raise InvalidParameterError(f"weights sum to {w.sum()!r}, not 1")
        r.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "weights", w)

    @classmethod
    def point_mass(cls, radius: float) -> "RadiusPmf":
        return cls(np.array([radius]), np.array([1.0]))

    def mean(self) -> float:
        return float(self.radii @ self.weights)

    def second_moment(self) -> float:
        return float(self.radii**2 @ self.weights)

    def cdf(self, r):
        """Cumulative weight at ``r`` (right-continuous)."""
        cw = np.cumsum(self.weights)
        idx = np.searchsorted(self.radii, np.asarray(r, dtype=float), side="right")
        return np.where(idx > 0, cw[np.maximum(idx - 1, 0)], 0.0)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.choice(self.radii, size=size, p=self.weights)


@dataclass(frozen=True)
class GainFunctionParams:
    """Gaussian amplitude profile of one MPC, centered in the plane."""

    center: np.ndarray
    width: float

    def __post_init__(self):
        c = np.array(self.center, dtype=float).reshape(-1)
        if c.size != 2 or not np.all(np.isfinite(c)):
            raise InvalidParameterError("gain center must be a finite planar point")
        if not (math.isfinite(self.width) and self.width > 0):
            raise InvalidParameterError(f"gain width must be > 0, got {self.width}")
        object.__setattr__(self, "center", c)


def gain(params: GainFunctionParams, ms_position) -> np.ndarray | float:
    """Amplitude factor ``exp(-d^2 / (2 sigma^2))``, d measured in the XY plane.

    ``ms_position`` has shape ``(..., 2)`` or ``(..., 3)``; a z coordinate is
    ignored.
    """
    p = np.asarray(ms_position, dtype=float)
    d2 = np.sum((p[..., :2] - params.center) ** 2, axis=-1)
    out = np.exp(-d2 / (2.0 * params.width**2))
    return float(out) if out.ndim == 0 else out


def chord_cdf(y, R):
    """CDF of the chord length cut from a disc of radius R by a random line.

    ``1 - sqrt(1 - (y / 2R)^2)`` on ``[0, 2R)``. Broadcasts over ``y`` and
    ``R``. ``R = 0`` is treated as the point-disc limit (chords of length 0).
    """
    y = np.asarray(y, dtype=float)
    R = np.asarray(R, dtype=float)
    if np.any(R < 0):
        raise InvalidParameterError("disc radius must be >= 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = 1.0 - np.sqrt(np.clip(1.0 - (y / (2.0 * R)) ** 2, 0.0, 1.0))
    out = np.where(y >= 2.0 * R, 1.0, inner)
    return np.where(y < 0, 0.0, out)


def chord_matrix(y_grid, r_grid) -> np.ndarray:
    """``A[i, j] = chord_cdf(y_i, r_j)``."""
    return chord_cdf(np.asarray(y_grid, float)[:, None], np.asarray(r_grid, float)[None, :])


def mixture_chord_cdf(y, radius_dist, encounter_weighted: bool = True):
    """Chord-length CDF when disc radii are random.

    Discs are met in proportion to their diameter, so by default each radius
    is weighted by ``r / E(R)``. With ``encounter_weighted=False`` the plain
    weights are used, which is the approximant the radius QP fits.

    ``radius_dist`` is a :class:`RadiusPmf` or a :class:`LognormalDb` law.
    """
    y = np.asarray(y, dtype=float)
    if isinstance(radius_dist, RadiusPmf):
        r, w = radius_dist.radii, radius_dist.weights
        if encounter_weighted:
            er = float(r @ w)
            if er <= 0:
                raise DegenerateDistributionError("mean radius is zero")
            w = r * w / er
        vals = chord_cdf(y[..., None], r) @ w
        return np.clip(vals, 0.0, 1.0)
    if isinstance(radius_dist, LognormalDb):
        m, s = radius_dist.m, radius_dist.s
        if encounter_weighted:
            m = m + s * s  # r f(r) / E(R) is lognormal with log-mean m + psi
        return np.clip(_lognormal_chord_cdf(y, m, s), 0.0, 1.0)
    raise InvalidParameterError(f"unsupported radius law {type(radius_dist).__name__}")


def _lognormal_chord_cdf(y, m, s):
    # P(R <= y/2) plus the integral over R > y/2, where chord_cdf(y, R) has a
    # square-root kink; substituting z = z0 + u^2 removes it for quad
    def one(yy):
        if yy <= 0:
            return 0.0
        z0 = (math.log(yy / 2.0) - m) / s
        if s == 0:
            return float(chord_cdf(yy, math.exp(m)))

        def f(u):
            z = z0 + u * u
            return 2.0 * u * float(chord_cdf(yy, math.exp(m + s * z))) * math.exp(-0.5 * z * z)

        hi = math.sqrt(max(0.0, -z0) + 12.0)
        val, _ = integrate.quad(f, 0.0, hi, epsabs=1e-12, epsrel=1e-10, limit=400)
        return float(norm_cdf(z0)) + val / math.sqrt(2.0 * math.pi)

    return np.vectorize(one, otypes=[float])(y)


def sample_radius(mu_R: float, sigma2_R: float, seed=None, size=None):
    """Draw ``10^(Z/10)`` with ``Z ~ N(mu_R, sigma2_R)``."""
    if not (math.isfinite(mu_R) and math.isfinite(sigma2_R)) or sigma2_R < 0:
        raise InvalidParameterError("need finite mu_R and sigma2_R >= 0")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(size)
    m, psi = db_lognormal_to_natural(mu_R, sigma2_R)
    return np.exp(m + math.sqrt(psi) * z)


def required_num_mpcs(n_eff: float, R_C: float, mu_R: float, sigma2_R: float) -> int:
    """MPCs per cluster so that ``n_eff`` are effective on average.

    ``N = n_eff R_C^2 / E(R^2)`` with ``E(R^2) = exp(2m' + 2psi')``. An
    infinite ``mu_R`` selects the backwards-compatible ``N = n_eff``.
    """
    if math.isinf(mu_R) and mu_R > 0:
        return int(math.ceil(n_eff))
    if not (n_eff > 0 and R_C > 0 and sigma2_R >= 0 and math.isfinite(mu_R)):
        raise InvalidParameterError("need n_eff > 0, R_C > 0, sigma2_R >= 0")
    m, psi = db_lognormal_to_natural(mu_R, sigma2_R)
    n = n_eff * R_C**2 / math.exp(2 * m + 2 * psi)
    # guard against 46.000000001 style round-up
    return int(math.ceil(n - 1e-9 * max(1.0, n)))


# ---------------------------------------------------------------------------
# radius-weight QP


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto ``{w >= 0, sum w = 1}`` (sort-based, exact)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    cond = u - css / k > 0
    rho = k[cond][-1]
    tau = css[cond][-1] / rho
    return np.maximum(v - tau, 0.0)


@dataclass(frozen=True)
class RadiusFit:
    pmf: RadiusPmf
    rmse: float
    kkt_residual: float
    kkt_tolerance: float
    multiplier: float
    iterations: int
    method: str
    approximant: np.ndarray = field(repr=False)

    @property
    def certified(self) -> bool:
        return self.kkt_residual <= self.kkt_tolerance


def kkt_residual(A, b, w) -> tuple[float, float]:
    """Projected-gradient residual ``max|w - P(w - grad)|`` and the multiplier.

    The gradient is that of ``0.5 ||Aw - b||^2``; the multiplier is the mean
    gradient over the support.
    """
    g = A.T @ (A @ w - b)
    res = float(np.max(np.abs(w - project_simplex(w - g))))
    supp = w > 0
    nu = float(np.mean(g[supp])) if np.any(supp) else float(np.min(g))
    return res, nu


def _solve_nnls(A, b, ridge, rho, maxiter):
    q = A.shape[1]
    rows = [A, rho * np.ones((1, q))]
    rhs = [b, [rho]]
    if ridge > 0:
        rows.append(math.sqrt(ridge) * np.eye(q))
        rhs.append(np.zeros(q))
    w, _ = optimize.nnls(np.vstack(rows), np.concatenate(rhs), maxiter=maxiter)
    return w, 0


def _solve_apg(A, b, max_iter, tol, rng):
    q = A.shape[1]
    AtA = A.T @ A
    Atb = A.T @ b
    # largest eigenvalue of AtA by power iteration
    v = rng.standard_normal(q)
    lip = 0.0
    for _ in range(200):
        v = AtA @ v
        nv = np.linalg.norm(v)
        v /= nv
        if abs(nv - lip) <= 1e-10 * nv:
            break
        lip = nv
    lip = nv * 1.0001
    w = np.full(q, 1.0 / q)
    z = w.copy()
    t = 1.0
    best, best_f = w, math.inf
    for it in range(1, max_iter + 1):
        w_new = project_simplex(z - (AtA @ z - Atb) / lip)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        z = w_new + ((t - 1.0) / t_new) * (w_new - w)
        w, t = w_new, t_new
        if it % 50 == 0 or it == max_iter:
            r = A @ w - b
            f = float(r @ r)
            if f < best_f:
                best, best_f = w, f
            g = A.T @ r
            if np.max(np.abs(w - project_simplex(w - g / lip))) * lip <= tol:
                return w, it
    raise ConvergenceError("projected gradient did not converge", best=best,
                           residual=math.sqrt(best_f / A.shape[0]))


def solve_radius_weights(target, y_grid=DEFAULT_Y_GRID, radius_grid=DEFAULT_R_GRID,
                         method: str = "nnls", ridge: float = 1e-9, rho: float = 1e4,
                         max_iter: int = 200_000, tol: float = 1e-8,
                         kkt_rtol: float = 1e-8, seed: int = 0) -> RadiusFit:
    """Least-squares radius weights on the probability simplex.

    Minimizes ``||A w - b||^2`` with ``A[i, j] = chord_cdf(y_i, r_j)`` subject
    to ``w >= 0`` and ``sum w = 1``. ``target`` is either the vector ``b`` or a
    CDF (callable or lifetime law) evaluated on ``y_grid``.

    ``method="nnls"`` (default) solves the equality-penalized problem with
    Lawson-Hanson NNLS. A tiny ridge selects a smooth minimizer among the many
    near-optimal ones; the result is renormalized onto the simplex.
    ``method="apg"`` runs accelerated projected gradient with exact simplex
    projection, keeping every iterate feasible.
    """
    y = np.asarray(y_grid, dtype=float).reshape(-1)
    r = np.asarray(radius_grid, dtype=float).reshape(-1)
    if y.size == 0 or r.size == 0:
        raise InvalidParameterError("grids must be nonempty")
    if isinstance(target, LifetimeDistribution):
        b = np.asarray(target.cdf(y), dtype=float)
    elif callable(target):
        b = np.asarray(target(y), dtype=float)
    else:
        b = np.asarray(target, dtype=float).reshape(-1)
    if b.shape != y.shape:
        raise InvalidParameterError("target must have one value per sampling lifetime")
    if np.any(b < -1e-12) or np.any(b > 1 + 1e-12) or np.any(np.diff(b) < -1e-12):
        raise InvalidParameterError("target must be a nondecreasing CDF in [0, 1]")
    A = chord_matrix(y, r)
    if method == "nnls":
        w, iters = _solve_nnls(A, b, ridge, rho, max_iter)
        w = np.maximum(w, 0.0)
        s = w.sum()
        if not s > 0:
            raise ConvergenceError("NNLS returned the zero vector", best=w)
        w = w / s
    elif method == "apg":
        w, iters = _solve_apg(A, b, max_iter, tol, np.random.default_rng(seed))
    else:
        raise InvalidParameterError(f"unknown method {method!r}")
    res, nu = kkt_residual(A, b, w)
    approx = A @ w
    rmse = float(np.sqrt(np.mean((approx - b) ** 2)))
    kkt_tol = kkt_rtol * float(np.linalg.norm(A, 2)) ** 2
    return RadiusFit(RadiusPmf(r, w / w.sum()), rmse, res, kkt_tol, nu, iters, method, approx)


@dataclass(frozen=True)
class LognormalPmfFit:
    mu: float
    sigma2: float
    rmse: float


def fit_lognormal_to_pmf(pmf: RadiusPmf, r_min: float | None = None) -> LognormalPmfFit:
    """Least-squares dB-lognormal CDF through the cumulative weights.

    Only radii above ``r_min`` enter the fit; the default is the smallest
    positive grid step.
    """
    r, w = pmf.radii, pmf.weights
    if np.count_nonzero(w > 0) < 3:
        raise InsufficientDataError("need at least 3 radii with positive weight")
    if r_min is None:
        steps = np.diff(r)
        r_min = float(steps[steps > 0].min()) if steps.size else 0.0
    # strict cutoff, robust to grids like 0.025 * arange(q)
    mask = r > r_min * (1.0 + 1e-9)
    if np.count_nonzero(mask) < 3:
        raise InsufficientDataError("fewer than 3 radii above r_min")
    cw = np.cumsum(w)[mask]
    db = 10.0 * np.log10(r[mask])
    pos = (w > 0) & (r > 0)
    wdb = 10.0 * np.log10(r[pos])
    mu0 = float(np.average(wdb, weights=w[pos]))
    var0 = max(float(np.average((wdb - mu0) ** 2, weights=w[pos])), 1.0)

    def resid(p):
        return norm_cdf((db - p[0]) / math.sqrt(p[1])) - cw

    # the weighted-moment start can stall on flat tails; try a few and keep the best
    best = None
    for start in [(mu0, var0), (mu0, 0.5 * var0), (np.median(db), 50.0), (mu0 - 5.0, 2.0 * var0)]:
        x0 = [float(np.clip(start[0], -199.0, 199.0)), float(np.clip(start[1], 1e-3, 9e4))]
        sol = optimize.least_squares(resid, x0, bounds=([-200.0, 1e-6], [200.0, 1e5]),
                                     xtol=1e-12, ftol=1e-12, gtol=1e-12)
        if best is None or sol.cost < best.cost:
            best = sol
    sol = best
    return LognormalPmfFit(float(sol.x[0]), float(sol.x[1]),
                           float(np.sqrt(np.mean(sol.fun**2))))


# ---------------------------------------------------------------------------
# lifetime fits


def observed_lifetime_cdf(rate: float, lifetime: LifetimeDistribution, length: float,
                          delta0: float, v) -> np.ndarray:
    """Model CDF of observed (clipped, detected) lifetimes in a window.

    With ``G(v) = lambda [(L - v) S(v) + E(Y - v)^+]`` the expected number of
    observations longer than ``v``, ``P(upsilon <= v) = 1 - G(v) / G(delta0)``
    for ``v < L``; the remaining mass sits at ``v = L``.
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))

    def G(x):
        return (length - x) * float(lifetime.sf(x)) + lifetime.excess_mean(x)

    g0 = G(delta0)
    out = np.empty_like(v)
    for i, x in enumerate(v):
        if x < delta0:
            out[i] = 0.0
        elif x >= length:
            out[i] = 1.0
        else:
            out[i] = 1.0 - G(x) / g0
    return out


def ecdf_sup_distance(samples, cdf) -> float:
    """Kolmogorov distance between the sample ECDF and ``cdf`` (callable)."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    F = np.asarray(cdf(x), dtype=float)
    # left limits of the model CDF at each sample catch jumps at the data
    F_left = np.asarray(cdf(np.nextafter(x, -np.inf)), dtype=float)
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    return float(max(np.max(np.abs(upper - F)), np.max(np.abs(F_left - lower))))


@dataclass(frozen=True)
class LifetimeFit:
    case: int
    rate: float
    lifetime: LifetimeDistribution
    sup_distance: float

    @property
    def mean_lifetime(self) -> float:
        return self.lifetime.mean()


def _fit_truncated(observed: ObservedIntervalSet):
    ups = observed.upsilon
    lo, hi = observed.delta0, observed.length
    if lo <= 0:
        lo = min(float(ups.min()), hi) * 0.5 if ups.size else 1e-6
        lo = max(lo, 1e-12)

    def dist(p):
        if not (p[1] > 1e-6 and p[1] < 1e5 and abs(p[0]) < 1e3):
            return math.inf
        law = TruncatedLognormalDb(p[0], p[1], lo, hi)
        if law._mass() <= 0:
            return math.inf
        return ecdf_sup_distance(ups, law.cdf)

    db = 10 * np.log10(np.maximum(ups, 1e-12))
    mu0, var0 = float(db.mean()), max(float(db.var()), 1.0)
    best = None
    for dmu, fv in [(0.0, 1.0), (-5.0, 1.5), (5.0, 1.5), (-10.0, 2.5)]:
        res = optimize.minimize(dist, [mu0 + dmu, var0 * fv], method="Nelder-Mead",
                                options=dict(xatol=1e-6, fatol=1e-9, maxiter=4000))
        if best is None or res.fun < best.fun:
            best = res
    return TruncatedLognormalDb(best.x[0], best.x[1], lo, hi), float(best.fun)


def fit_lifetimes(observed: ObservedIntervalSet, case: int, seed: int = 0) -> LifetimeFit:
    """Fit one of three lifetime models to censored observations.

    case 1
        exponential, closed-form MLE of ``(lambda, L)``.
    case 2
        dB-lognormal, numerical MLE of ``(lambda, mu, sigma^2)``.
    case 3
        truncated dB-lognormal on ``[delta0, L]`` fitted to the observed
        lifetimes by minimizing the sup-distance to their ECDF, with
        ``lambda = n / L``. Censoring is ignored by construction.

    ``sup_distance`` compares the ECDF of the observed lifetimes with the
    CDF of observed lifetimes implied by the fitted model.
    """
    if observed.n < 3:
        raise InsufficientDataError("need at least 3 intervals")
    L, d0 = observed.length, observed.delta0
    if case == 1:
        est = mle_exponential(sufficient_stats(observed))
        if est.infinite_lifetime or est.lbs_hat == 0:
            raise InsufficientDataError("degenerate exponential estimate")
        law = Exponential(est.lbs_hat)
        rate = est.lambda_hat
    elif case == 2:
        est = mle_numeric(observed, seed=seed)
        law = LognormalDb(est.mu_hat, est.sigma2_hat)
        rate = est.lambda_hat
    elif case == 3:
        law, sup = _fit_truncated(observed)
        return LifetimeFit(3, observed.n / L, law, sup)
    else:
        raise InvalidParameterError(f"case must be 1, 2 or 3, got {case}")
    sup = ecdf_sup_distance(observed.upsilon,
                            lambda v: observed_lifetime_cdf(rate, law, L, d0, v))
    return LifetimeFit(case, rate, law, sup)


__all__ = [
    "DEFAULT_R_GRID",
    "DEFAULT_Y_GRID",
    "GainFunctionParams",
    "LifetimeFit",
    "LognormalPmfFit",
    "RadiusFit",
    "RadiusPmf",
    "chord_cdf",
    "chord_matrix",
    "ecdf_sup_distance",
    "fit_lifetimes",
    "fit_lognormal_to_pmf",
    "gain",
    "kkt_residual",
    "mixture_chord_cdf",
    "observed_lifetime_cdf",
    "project_simplex",
    "required_num_mpcs",
    "sample_radius",
    "solve_radius_weights",
]

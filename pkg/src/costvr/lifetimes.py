"""Lifetime laws for visibility regions.

Three families are supported: exponential, lognormal with dB-domain
parameters, and the same lognormal truncated to an observation range.
Besides the usual density functions every family exposes the partial
moments the censored likelihood needs, notably the excess mean
``E[(Y - x)^+]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import InvalidParameterError
from .numerics import (
    db_lognormal_to_natural,
    log_diff_exp,
    log_norm_cdf,
    norm_cdf,
    norm_ppf,
    norm_sf,
)

LOG_2PI = math.log(2.0 * math.pi)


def _finite(*values):
    return all(math.isfinite(v) for v in values)


class LifetimeDistribution:
    """Common interface. Subclasses are frozen dataclasses."""

    def mean(self) -> float:
        raise NotImplementedError

    def logpdf(self, y):
        raise NotImplementedError

    def pdf(self, y):
        return np.exp(self.logpdf(y))

    def cdf(self, y):
        raise NotImplementedError

    def sf(self, y):
        return 1.0 - self.cdf(y)

    def logsf(self, y):
        with np.errstate(divide="ignore"):
            return np.log(self.sf(y))

    def excess_mean(self, x: float) -> float:
        """E[(Y - x)^+]."""
        raise NotImplementedError

    def log_excess_mean(self, x: float) -> float:
        v = self.excess_mean(x)
        return math.log(v) if v > 0 else -math.inf

    def mean_above(self, x: float) -> float:
        """Mean of Y restricted to {Y > x}."""
        s = float(self.sf(x))
        if s <= 0.0:
            return math.inf
        return x + self.excess_mean(x) / s

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        raise NotImplementedError

    def sample_residual_beyond(self, rng: np.random.Generator, size: int, age: float) -> np.ndarray:
        """Remaining life of regions alive at a point and born more than ``age`` before it.

        The density is proportional to ``S(age + r)`` for ``r > 0``.
        """
        raise NotImplementedError


def _tilted_tail_residual(m, s, age, upper, rng, size, max_rounds=10_000):
    # Y ~ (y - age) f(y) on (age, upper] by rejection from y f(y), then r = U (Y - age)
    lo = norm_cdf((math.log(age) - m - s * s) / s) if age > 0 else 0.0
    hi = norm_cdf((math.log(upper) - m - s * s) / s) if math.isfinite(upper) else 1.0
    out = np.empty(0)
    for _ in range(max_rounds):
        if out.size >= size:
            break
        u = lo + rng.uniform(size=2 * (size - out.size) + 8) * (hi - lo)
        y = np.exp(m + s * s + s * norm_ppf(u))
        y = y[np.isfinite(y) & (y > age)]
        acc = rng.uniform(size=y.size) * y < (y - age)
        out = np.concatenate([out, y[acc]])
    else:
        raise RuntimeError("tail residual sampler did not fill the request")
    return rng.uniform(size=size) * (out[:size] - age)


@dataclass(frozen=True)
class Exponential(LifetimeDistribution):
    scale: float

    def __post_init__(self):
        if not _finite(self.scale) or self.scale <= 0:
            raise InvalidParameterError(f"exponential scale must be > 0, got {self.scale}")

    def mean(self):
        return self.scale

    def logpdf(self, y):
        y = np.asarray(y, dtype=float)
        out = -math.log(self.scale) - y / self.scale
        return np.where(y >= 0, out, -np.inf)

    def cdf(self, y):
        y = np.asarray(y, dtype=float)
        return np.where(y > 0, -np.expm1(-np.maximum(y, 0) / self.scale), 0.0)

    def sf(self, y):
        return np.exp(self.logsf(y))

    def logsf(self, y):
        y = np.asarray(y, dtype=float)
        return -np.maximum(y, 0.0) / self.scale

    def excess_mean(self, x):
        if x <= 0:
            return self.scale - x
        return self.scale * math.exp(-x / self.scale)

    def log_excess_mean(self, x):
        if x <= 0:
            return math.log(self.scale - x)
        return math.log(self.scale) - x / self.scale

    def sample(self, rng, size):
        return rng.exponential(self.scale, size)

    def sample_residual_beyond(self, rng, size, age):
        return rng.exponential(self.scale, size)


@dataclass(frozen=True)
class LognormalDb(LifetimeDistribution):
    """Y with 10*log10(Y) ~ Normal(mu, sigma2)."""

    mu: float
    sigma2: float

    def __post_init__(self):
        if not _finite(self.mu, self.sigma2) or self.sigma2 <= 0:
            raise InvalidParameterError(
                f"lognormal needs finite mu and sigma2 > 0, got ({self.mu}, {self.sigma2})"
            )

    @property
    def m(self) -> float:
        return db_lognormal_to_natural(self.mu, self.sigma2)[0]

    @property
    def psi(self) -> float:
        return db_lognormal_to_natural(self.mu, self.sigma2)[1]

    @property
    def s(self) -> float:
        return math.sqrt(self.psi)

    def mean(self):
        return math.exp(self.m + self.psi / 2)

    def median(self):
        return math.exp(self.m)

    def second_moment(self):
        return math.exp(2 * self.m + 2 * self.psi)

    def _z(self, y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (np.log(y) - self.m) / self.s

    def logpdf(self, y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            ly = np.log(y)
            out = -ly - 0.5 * (LOG_2PI + math.log(self.psi)) - (ly - self.m) ** 2 / (2 * self.psi)
        return np.where(y > 0, out, -np.inf)

    def cdf(self, y):
        return norm_cdf(self._z(y))

    def sf(self, y):
        return norm_sf(self._z(y))

    def logsf(self, y):
        return log_norm_cdf(-self._z(y))

    def partial_first_moment(self, lo, hi):
        """E[Y 1{lo < Y <= hi}]."""
        with np.errstate(divide="ignore"):
            z_hi = (np.log(hi) - self.m - self.psi) / self.s
            z_lo = (np.log(lo) - self.m - self.psi) / self.s
        return self.mean() * (norm_cdf(z_hi) - norm_cdf(z_lo))

    def excess_mean(self, x):
        if x <= 0:
            return self.mean() - x
        lx = math.log(x)
        a = float(norm_cdf((self.m + self.psi - lx) / self.s))
        b = float(norm_cdf((self.m - lx) / self.s))
        return max(self.mean() * a - x * b, 0.0)

    def log_excess_mean(self, x):
        if x <= 0:
            return math.log(self.mean() - x)
        lx = math.log(x)
        log_a = self.m + self.psi / 2 + float(log_norm_cdf((self.m + self.psi - lx) / self.s))
        log_b = lx + float(log_norm_cdf((self.m - lx) / self.s))
        if log_b - log_a < -1e-6:
            return log_diff_exp(log_a, log_b)
        # deep tail: the closed form cancels, integrate the survival function
        # instead, E[(Y-x)^+] = int_x^inf S(t) dt, in log-scaled form
        log_sx = float(self.logsf(x))

        def integrand(u):
            t = x * math.exp(u)
            return t * math.exp(float(self.logsf(t)) - log_sx)

        val, _ = integrate.quad(integrand, 0.0, np.inf, limit=200)
        if val <= 0:
            return -math.inf
        return log_sx + math.log(val)

    def sample(self, rng, size):
        return np.exp(self.m + self.s * rng.standard_normal(size))

    def sample_residual_beyond(self, rng, size, age):
        return _tilted_tail_residual(self.m, self.s, max(age, 0.0), math.inf, rng, size)


@dataclass(frozen=True)
class TruncatedLognormalDb(LifetimeDistribution):
    """Lognormal-dB law conditioned on lower <= Y <= upper."""

    mu: float
    sigma2: float
    lower: float
    upper: float

    def __post_init__(self):
        if not _finite(self.mu, self.sigma2, self.lower, self.upper) or self.sigma2 <= 0:
            raise InvalidParameterError("truncated lognormal needs finite mu, sigma2 > 0")
        if not 0 <= self.lower < self.upper:
            raise InvalidParameterError(
                f"need 0 <= lower < upper, got [{self.lower}, {self.upper}]"
            )

    @property
    def base(self) -> LognormalDb:
        return LognormalDb(self.mu, self.sigma2)

    def _mass(self):
        b = self.base
        return float(b.cdf(self.upper) - b.cdf(self.lower))

    def mean(self):
        z = self._mass()
        if z <= 0:
            return math.nan
        return float(self.base.partial_first_moment(self.lower, self.upper)) / z

    def logpdf(self, y):
        y = np.asarray(y, dtype=float)
        inside = (y >= self.lower) & (y <= self.upper)
        with np.errstate(divide="ignore"):
            out = self.base.logpdf(y) - math.log(self._mass())
        return np.where(inside, out, -np.inf)

    def cdf(self, y):
        y = np.clip(np.asarray(y, dtype=float), self.lower, self.upper)
        b = self.base
        z = self._mass()
        if z <= 0:
            return np.where(y >= self.upper, 1.0, 0.0)
        return np.clip((b.cdf(y) - b.cdf(self.lower)) / z, 0.0, 1.0)

    def excess_mean(self, x):
        lo = max(x, self.lower)
        if lo >= self.upper:
            return 0.0
        b = self.base
        part = float(b.partial_first_moment(lo, self.upper))
        mass = float(b.cdf(self.upper) - b.cdf(lo))
        return (part - x * mass) / self._mass()

    def sample(self, rng, size):
        b = self.base
        f_lo, f_hi = float(b.cdf(self.lower)), float(b.cdf(self.upper))
        u = f_lo + rng.uniform(size=size) * (f_hi - f_lo)
        y = np.exp(b.m + b.s * norm_ppf(u))
        return np.clip(y, self.lower, self.upper)

    def sample_residual_beyond(self, rng, size, age):
        b = self.base
        start = max(age, self.lower)
        if start >= self.upper:
            return np.zeros(size)
        # rejection targets (y - age) on y > start; valid since start >= age
        if start == age:
            return _tilted_tail_residual(b.m, b.s, age, self.upper, rng, size)
        y = np.empty(0)
        while y.size < size:
            cand = self.sample(rng, 4 * size + 8)
            cand = cand[cand > age]
            acc = rng.uniform(size=cand.size) * self.upper < (cand - age)
            y = np.concatenate([y, cand[acc]])
        return rng.uniform(size=size) * (y[:size] - age)

"""Standard normal CDF helpers and dB/natural-log conversions."""

import math

import numpy as np
from scipy import special

SQRT2 = math.sqrt(2.0)
DB_TO_NEPER = math.log(10.0) / 10.0


def norm_cdf(x):
    """Phi(x) via erfc, accurate in both tails."""
    return 0.5 * special.erfc(-np.asarray(x, dtype=float) / SQRT2)


def norm_sf(x):
    """1 - Phi(x) without cancellation."""
    return 0.5 * special.erfc(np.asarray(x, dtype=float) / SQRT2)


def log_norm_cdf(x):
    return special.log_ndtr(np.asarray(x, dtype=float))


def norm_ppf(p):
    return special.ndtri(np.asarray(p, dtype=float))


def db_lognormal_to_natural(mu_db, sigma2_db):
    """Map dB-domain (mu, sigma^2) to natural-log (m, psi)."""
    return mu_db * DB_TO_NEPER, sigma2_db * DB_TO_NEPER**2


def natural_to_db_lognormal(m, psi):
    return m / DB_TO_NEPER, psi / DB_TO_NEPER**2


def log_diff_exp(log_a, log_b):
    """log(exp(log_a) - exp(log_b)) for log_a >= log_b."""
    if log_b == -math.inf:
        return log_a
    d = log_b - log_a
    if d >= 0.0:
        return -math.inf
    return log_a + math.log1p(-math.exp(d))

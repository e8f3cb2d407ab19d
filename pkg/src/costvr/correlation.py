"""Autocorrelation functions of visible-cluster and visible-MPC counts.

BS side: the count of regions covering two array points ``dx`` apart is
correlated through the regions covering both, which gives
``R(dx) = E[(Y - |dx|)^+] / E(Y)``.

MS side: with disc-shaped regions placed uniformly in the plane the
correlation at distance ``d`` is the normalized overlap area of two discs,
the circular correlation function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DegenerateDistributionError, InvalidParameterError
from .lifetimes import Exponential, LifetimeDistribution, LognormalDb
from .mpc_model import RadiusPmf

INV_E = math.exp(-1.0)


def acf_bs(delta_x, lifetime: LifetimeDistribution):
    """BS-side ACF ``1 - E[min(Y, |dx|)] / E(Y) = E[(Y - |dx|)^+] / E(Y)``.

    Exact ``exp(-|dx| / L)`` for exponential lifetimes. Vectorized over
    ``delta_x``.
    """
    mean = lifetime.mean()
    if not (math.isfinite(mean) and mean > 0):
        raise DegenerateDistributionError("lifetime needs a finite positive mean")
    dx = np.abs(np.asarray(delta_x, dtype=float))
    if isinstance(lifetime, Exponential):
        out = np.exp(-dx / lifetime.scale)
    else:
        out = np.vectorize(lambda x: lifetime.excess_mean(x) / mean, otypes=[float])(dx)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def acf_bs_quadrature(delta_x: float, lifetime: LifetimeDistribution) -> float:
    """``1 - int_0^inf min(t, |dx|) f(t) dt / E(Y)`` by adaptive quadrature.

    The integral is split at the kink ``t = |dx|``; used as a reference for
    :func:`acf_bs`.
    """
    dx = abs(float(delta_x))
    if dx == 0:
        return 1.0
    pdf = lambda t: float(lifetime.pdf(t))
    lo, _ = integrate.quad(lambda t: t * pdf(t), 0.0, dx, epsabs=1e-13, epsrel=1e-12, limit=400)
    # dx * P(Y > dx) from the survival function avoids integrating a heavy tail
    hi = dx * float(lifetime.sf(dx))
    return 1.0 - (lo + hi) / lifetime.mean()


def acf_circular(d, R):
    """Circular correlation ``(2 chi - sin 2 chi) / pi``, ``chi = arccos(d / 2R)``.

    Zero for ``d > 2R``. A point region (``R = 0``) correlates only with
    itself, so ``acf_circular(0, 0) = 1``.
    """
    d = np.abs(np.asarray(d, dtype=float))
    R = np.asarray(R, dtype=float)
    if np.any(R < 0):
        raise InvalidParameterError("radius must be >= 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.clip(d / (2.0 * R), 0.0, 1.0)
        chi = np.arccos(u)
        out = (2.0 * chi - np.sin(2.0 * chi)) / math.pi
    out = np.where(d >= 2.0 * R, 0.0, out)
    out = np.where((R == 0) & (d == 0), 1.0, out)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def acf_circular_mixture(d, radius_dist, rtol: float = 1e-8):
    """Circular ACF averaged over random radii with weight ``r^2``.

    ``radius_dist`` is a :class:`RadiusPmf` (exact finite sum) or a
    :class:`LognormalDb` law in dB. For the latter, ``r^2 f(r)`` is again
    lognormal with log-mean ``m + 2 psi``, and the average is integrated in
    the standard-normal variable from the support edge ``r = d / 2`` up.
    """
    d_arr = np.abs(np.asarray(d, dtype=float))
    if isinstance(radius_dist, RadiusPmf):
        r, w = radius_dist.radii, radius_dist.weights
        m2 = float(r**2 @ w)
        if m2 <= 0:
            raise DegenerateDistributionError("radius law has zero second moment")
        out = (acf_circular(d_arr[..., None], r) * r**2) @ w / m2
    elif isinstance(radius_dist, LognormalDb):
        m2 = radius_dist.m + 2.0 * radius_dist.psi
        s = radius_dist.s

        def one(dd):
            if dd == 0:
                return 1.0
            z0 = (math.log(dd / 2.0) - m2) / s
            f = lambda z: float(acf_circular(dd, math.exp(m2 + s * z))) * math.exp(-0.5 * z * z)
            val, _ = integrate.quad(f, z0, max(z0, 0.0) + 12.0, epsabs=rtol * 1e-2,
                                    epsrel=rtol, limit=400)
            return val / math.sqrt(2.0 * math.pi)

        out = np.vectorize(one, otypes=[float])(d_arr)
    else:
        raise InvalidParameterError(f"unsupported radius law {type(radius_dist).__name__}")
    out = np.clip(out, 0.0, 1.0)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class AcfQuery:
    """Joint displacement along the array and in the MS plane."""

    delta_x: float
    delta_r: float | tuple
    lifetime: LifetimeDistribution
    R_C: float
    radius_dist: RadiusPmf | LognormalDb | None = None

    def __post_init__(self):
        dr = np.asarray(self.delta_r, dtype=float)
        dist = float(np.linalg.norm(dr)) if dr.ndim else abs(float(dr))
        if not (math.isfinite(self.delta_x) and math.isfinite(dist)):
            raise InvalidParameterError("displacements must be finite")
        if not self.R_C >= 0:
            raise InvalidParameterError("R_C must be >= 0")
        object.__setattr__(self, "delta_r", dist)


def acf_joint(query: AcfQuery) -> float:
    """Separable ACF ``R(dx) R(dr)`` of the number of visible far clusters."""
    return float(acf_bs(query.delta_x, query.lifetime)) * float(acf_circular(query.delta_r, query.R_C))


def is_decorrelated(value: float) -> bool:
    """Two positions are treated as uncorrelated once the ACF is <= 1/e."""
    return bool(value <= INV_E)


def acf_ssf_bound(R_Y_value, R_H_value) -> tuple[complex | float, bool]:
    """Small-scale-fading ACF with gain functions, ``R_H R_Y``, and the bound ``|R| <= |R_Y|``."""
    ry = complex(R_Y_value)
    rh = complex(R_H_value)
    if abs(ry) > 1 + 1e-12 or abs(rh) > 1 + 1e-12:
        raise InvalidParameterError("correlation values must lie in the unit disc")
    prod = rh * ry
    if prod.imag == 0:
        prod = prod.real
    return prod, bool(abs(prod) <= abs(ry) * (1 + 1e-12))


def acf_curve(lags, fn) -> np.ndarray:
    """Evaluate a scalar ACF on a lag grid; returns an ``(n, 2)`` array."""
    lags = np.asarray(lags, dtype=float).reshape(-1)
    vals = np.array([float(fn(x)) for x in lags])
    return np.column_stack([lags, vals])


__all__ = [
    "AcfQuery",
    "INV_E",
    "acf_bs",
    "acf_bs_quadrature",
    "acf_circular",
    "acf_circular_mixture",
    "acf_curve",
    "acf_joint",
    "acf_ssf_bound",
    "is_decorrelated",
]

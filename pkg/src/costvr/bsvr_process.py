"""Birth-death process of base-station-side visibility regions.

Visibility regions are born as a homogeneous Poisson process along the array
axis and live for an independent random length. Only the part that overlaps
the array window ``[x1, x2]`` can be observed, and pieces shorter than the
minimum feature size ``delta0`` are not detected at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import InvalidParameterError, UnsupportedDistributionError
from .lifetimes import Exponential, LifetimeDistribution

CLASS_LABELS = ("00", "01", "10", "11")
MAX_BIRTHS_PER_CHUNK = 2_000_000


@dataclass(frozen=True)
class BsVrProcessParams:
    """Generative model of BS-VRs on a linear array.

    ``rate`` is the birth intensity per meter and ``lifetime`` the law of the
    true (uncensored) visibility-region length.
    """

    rate: float
    lifetime: LifetimeDistribution
    x1: float = 0.0
    x2: float = 7.5
    delta0: float = 0.0

    def __post_init__(self):
        vals = (self.rate, self.x1, self.x2, self.delta0)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidParameterError(f"non-finite process parameter in {vals}")
        if self.rate <= 0:
            raise InvalidParameterError(f"birth rate must be > 0, got {self.rate}")
        if self.x2 <= self.x1:
            raise InvalidParameterError("array window needs x2 > x1")
        if not 0 <= self.delta0 < self.x2 - self.x1:
            raise InvalidParameterError("need 0 <= delta0 < x2 - x1")

    @property
    def length(self) -> float:
        return self.x2 - self.x1

    @property
    def length0(self) -> float:
        """Array length shortened by the minimum feature size."""
        return self.length - self.delta0

    @property
    def rate0(self) -> float:
        """Birth rate of regions that outlive ``delta0``; lambda*exp(-delta0/L_BS) for exponential."""
        return self.rate * float(self.lifetime.sf(self.delta0))

    def default_burn_in(self) -> float:
        return max(20.0 * self.lifetime.mean(), 10.0 * self.length)


@dataclass(frozen=True)
class ObservedIntervalSet:
    """Censored observations ``[a_i, b_i]`` inside the window ``[x1, x2]``.

    Left-censoring is ``a == x1`` and right-censoring ``b == x2``, both as exact
    float equality: clipping stores the window endpoints verbatim.
    """

    a: np.ndarray
    b: np.ndarray
    x1: float
    x2: float
    delta0: float = 0.0
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        a = np.array(self.a, dtype=float).reshape(-1)
        b = np.array(self.b, dtype=float).reshape(-1)
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if not self.check:
            return
        if a.shape != b.shape:
            raise InvalidParameterError("a and b must have equal length")
        if np.any(a < self.x1) or np.any(b > self.x2) or np.any(b < a):
            raise InvalidParameterError("intervals must satisfy x1 <= a <= b <= x2")
        if np.any(b - a < self.delta0 - 1e-12 * max(1.0, abs(self.x2))):
            raise InvalidParameterError("observed lifetime shorter than delta0")

    @property
    def n(self) -> int:
        return int(self.a.size)

    @property
    def length(self) -> float:
        return self.x2 - self.x1

    @property
    def upsilon(self) -> np.ndarray:
        return self.b - self.a

    @property
    def left(self) -> np.ndarray:
        return self.a == self.x1

    @property
    def right(self) -> np.ndarray:
        return self.b == self.x2

    @property
    def class_codes(self) -> np.ndarray:
        """0..3 for classes 00, 01, 10, 11 (left bit first)."""
        return 2 * self.left.astype(int) + self.right.astype(int)

    @property
    def class_labels(self) -> list[str]:
        return [CLASS_LABELS[c] for c in self.class_codes]

    @property
    def counts(self) -> tuple[int, int, int, int]:
        c = np.bincount(self.class_codes, minlength=4)
        return int(c[0]), int(c[1]), int(c[2]), int(c[3])

    def shortened(self) -> "ObservedIntervalSet":
        """Equivalent data set with zero feature size.

        Every observation loses ``delta0`` at its right end and the window
        shrinks to ``[x1, x2 - delta0]``; censoring classes are preserved.
        """
        x2 = self.x2 - self.delta0
        b = np.where(self.right, x2, self.b - self.delta0)
        return ObservedIntervalSet(self.a, b, self.x1, x2, 0.0, check=False)


def _draw(params: BsVrProcessParams, burn_in: float, rng: np.random.Generator, n_real: int):
    """Vectorized core: returns (realization index, a, b) of kept intervals."""
    start = params.x1 - burn_in
    span = params.x2 - start
    per_real = rng.poisson(params.rate * span, size=n_real)
    total = int(per_real.sum())
    idx = np.repeat(np.arange(n_real), per_real)
    u = rng.uniform(start, params.x2, size=total)
    end = u + params.lifetime.sample(rng, total)
    keep = end > params.x1
    idx, u, end = idx[keep], u[keep], end[keep]
    a = np.maximum(u, params.x1)
    b = np.minimum(end, params.x2)
    # regions born before the burn-in window that still reach x1
    tail_mean = params.rate * params.lifetime.excess_mean(burn_in)
    if tail_mean > 0:
        per_tail = rng.poisson(tail_mean, size=n_real)
        n_tail = int(per_tail.sum())
        if n_tail:
            r = params.lifetime.sample_residual_beyond(rng, n_tail, burn_in)
            idx = np.concatenate([idx, np.repeat(np.arange(n_real), per_tail)])
            a = np.concatenate([a, np.full(n_tail, params.x1)])
            b = np.concatenate([b, np.minimum(params.x1 + r, params.x2)])
    keep = (b - a) >= params.delta0
    if params.delta0 == 0:
        keep &= b > a
    return idx[keep], a[keep], b[keep]


def _check_burn_in(params, burn_in):
    if burn_in is None:
        burn_in = params.default_burn_in()
    if not math.isfinite(burn_in) or burn_in < 0:
        raise InvalidParameterError(f"burn_in must be finite and >= 0, got {burn_in}")
    return float(burn_in)


def generate_bsvrs(params: BsVrProcessParams, burn_in: float | None = None, seed=None) -> ObservedIntervalSet:
    """One censored realization of the BS-VR process on ``[x1, x2]``.

    Births are drawn on ``[x1 - burn_in, x2]`` with the default burn-in
    ``max(20 E(Y), 10 L)``. Regions born earlier that still reach ``x1`` are
    added from their exact residual law, so heavy-tailed lifetimes stay
    stationary as well.
    """
    burn_in = _check_burn_in(params, burn_in)
    rng = np.random.default_rng(seed)
    _, a, b = _draw(params, burn_in, rng, 1)
    order = np.lexsort((b, a))
    return ObservedIntervalSet(a[order], b[order], params.x1, params.x2, params.delta0)


@dataclass(frozen=True)
class CensoringCounts:
    """Per-realization summaries of a batch of simulated interval sets."""

    n00: np.ndarray
    n01: np.ndarray
    n10: np.ndarray
    n11: np.ndarray
    upsilon_sum: np.ndarray
    length0: float
    delta0: float

    @property
    def n(self) -> np.ndarray:
        return self.n00 + self.n01 + self.n10 + self.n11

    @property
    def nu(self) -> np.ndarray:
        return self.n11 - self.n00

    @property
    def n_alive(self) -> np.ndarray:
        return self.n10 + self.n11

    @property
    def n_new(self) -> np.ndarray:
        return self.n00 + self.n01

    @property
    def lambda0_sum(self) -> np.ndarray:
        return self.upsilon_sum - self.n * self.delta0

    def __len__(self):
        return int(self.n00.size)


def simulate_batch(params: BsVrProcessParams, n_realizations: int, seed=None,
                   burn_in: float | None = None) -> CensoringCounts:
    """Censoring counts and lifetime sums for many independent realizations.

    Statistically identical to calling :func:`generate_bsvrs` repeatedly, but
    vectorized across realizations.
    """
    burn_in = _check_burn_in(params, burn_in)
    rng = np.random.default_rng(seed)
    births_per_real = params.rate * (params.length + burn_in)
    chunk = max(1, int(MAX_BIRTHS_PER_CHUNK // max(births_per_real, 1.0)))
    counts = np.zeros((4, n_realizations), dtype=np.int64)
    ups = np.zeros(n_realizations)
    for lo in range(0, n_realizations, chunk):
        hi = min(lo + chunk, n_realizations)
        idx, a, b = _draw(params, burn_in, rng, hi - lo)
        code = 2 * (a == params.x1) + (b == params.x2)
        np.add.at(counts, (code, idx + lo), 1)
        ups[lo:hi] = np.bincount(idx, weights=b - a, minlength=hi - lo)
    return CensoringCounts(counts[0], counts[1], counts[2], counts[3], ups,
                           params.length0, params.delta0)


def expected_count(params: BsVrProcessParams) -> float:
    """Mean number of observed BS-VRs.

    For ``delta0 = 0`` this is ``lambda (L + E(Y))``; in general
    ``lambda [(L - delta0) S(delta0) + E(Y - delta0)^+]``.
    """
    y = params.lifetime
    mean = y.mean()
    if not math.isfinite(mean):
        raise UnsupportedDistributionError("lifetime law has no finite mean")
    if params.delta0 == 0:
        return params.rate * (params.length + mean)
    return params.rate * (params.length0 * float(y.sf(params.delta0)) + y.excess_mean(params.delta0))


def count_pmf(params: BsVrProcessParams, n):
    """Poisson mass of observing ``n`` BS-VRs in the window (0**0 = 1)."""
    n = np.asarray(n)
    if np.any(n < 0):
        raise InvalidParameterError("count must be >= 0")
    return stats.poisson.pmf(n, expected_count(params))


def decompose_counts(observed: ObservedIntervalSet) -> tuple[int, int]:
    """Split the observed count into (born inside the window, alive at x1)."""
    alive = int(np.count_nonzero(observed.left))
    return observed.n - alive, alive


def sample_typical_intervals(params: BsVrProcessParams, size: int, seed=None) -> tuple[np.ndarray, np.ndarray]:
    """Intervals ``(a, b)`` of independently chosen observed regions.

    A region seen in the window was alive at ``x1`` with probability
    ``E(Y) / (L + E(Y))`` (then ``a = x1`` and its residual life has density
    ``S(r) / E(Y)``), otherwise it was born uniformly inside the window.
    Intervals shorter than ``delta0`` are redrawn.
    """
    rng = np.random.default_rng(seed)
    y = params.lifetime
    p_alive = y.mean() / (params.length + y.mean())
    a_out, b_out = np.empty(0), np.empty(0)
    while a_out.size < size:
        k = 2 * (size - a_out.size) + 4
        alive = rng.uniform(size=k) < p_alive
        a = np.where(alive, params.x1, rng.uniform(params.x1, params.x2, size=k))
        life = np.empty(k)
        life[alive] = y.sample_residual_beyond(rng, int(alive.sum()), 0.0)
        life[~alive] = y.sample(rng, int((~alive).sum()))
        b = np.minimum(a + life, params.x2)
        keep = (b - a) >= params.delta0
        if params.delta0 == 0:
            keep &= b > a
        a_out = np.concatenate([a_out, a[keep]])
        b_out = np.concatenate([b_out, b[keep]])
    return a_out[:size], b_out[:size]


def exponential_params(rate, mean_lifetime, length, delta0=0.0, x1=0.0) -> BsVrProcessParams:
    return BsVrProcessParams(rate, Exponential(mean_lifetime), x1, x1 + length, delta0)

"""Condition-number statistics of multiuser channel tensors."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidParameterError
from .scenario import ChannelScenario, disc_users
from .synth import ChannelTensor, place_clusters, synthesize_modes

RANK_TOL = 1e-12


@dataclass(frozen=True)
class KappaSummary:
    """Per-(t, f) ``kappa_dB`` and its summary; ``inf`` marks rank-deficient slices."""

    kappa_db: np.ndarray  # (T, B)
    mean_db: float
    median_db: float
    n_infinite: int

    def cdf_samples(self) -> np.ndarray:
        return np.sort(self.kappa_db.reshape(-1))


def kappa_db_matrices(H: np.ndarray) -> np.ndarray:
    """``20 log10(s_1 / s_K)`` over the last two axes of a ``(..., K, M)`` stack."""
    H = np.asarray(H)
    K, M = H.shape[-2:]
    if K > M:
        raise InvalidParameterError(f"need K <= M, got K={K}, M={M}")
    s = np.linalg.svd(H, compute_uv=False)
    s1, sk = s[..., 0], s[..., K - 1]
    with np.errstate(divide="ignore"):
        out = 20.0 * np.log10(s1 / sk)
    return np.where((sk <= RANK_TOL * s1) | (s1 == 0), np.inf, out)


def condition_number_db(tensor: ChannelTensor) -> KappaSummary:
    """Condition numbers of every K x M slice after per-user energy normalization."""
    t = tensor if tensor.normalized else tensor.normalize()
    kd = kappa_db_matrices(t.slices())
    finite = np.isfinite(kd)
    vals = kd[finite]
    mean = float(vals.mean()) if vals.size else math.inf
    median = float(np.median(kd)) if kd.size else math.nan
    return KappaSummary(kd, mean, median, int(kd.size - vals.size))


@dataclass(frozen=True)
class GapRow:
    K: int
    kappa_off: float
    kappa_on: float
    gap: float
    gap_se: float
    n_pairs: int


def run_gap_experiment(base: ChannelScenario, K_list, runs: int = 1, seed: int = 0,
                       T: int | None = None) -> list[GapRow]:
    """Average condition number with the gain function OFF and ON, per user count.

    For a twin-cluster base, users are redrawn uniformly in the user disc at
    every snapshot; otherwise the first K users of the base are used. ON and
    OFF share clusters, MPCs and user drops (paired seeds). The standard error
    of the gap is taken over the per-snapshot paired differences.
    """
    rows = []
    for K in K_list:
        K = int(K)
        diffs, offs, ons = [], [], []
        for r in range(runs):
            ss = np.random.SeedSequence([int(seed), K, r])
            user_seed, cluster_seed = ss.spawn(2)
            sc = _with_users(base, K, T, user_seed)
            cl = place_clusters(sc, cluster_seed)
            h_off, h_on = synthesize_modes(sc, cl, (False, True))
            k_off = condition_number_db(h_off).kappa_db
            k_on = condition_number_db(h_on).kappa_db
            ok = np.isfinite(k_off) & np.isfinite(k_on)
            d = np.where(ok, k_off - k_on, np.nan)
            diffs.append(np.nanmean(d, axis=1))
            offs.append(k_off[np.isfinite(k_off)])
            ons.append(k_on[np.isfinite(k_on)])
        d = np.concatenate(diffs)
        d = d[np.isfinite(d)]
        se = float(d.std(ddof=1) / math.sqrt(d.size)) if d.size > 1 else math.nan
        rows.append(GapRow(K, float(np.concatenate(offs).mean()), float(np.concatenate(ons).mean()),
                           float(d.mean()), se, int(d.size)))
    return rows


def _with_users(base: ChannelScenario, K: int, T: int | None, seed) -> ChannelScenario:
    T = base.T if T is None else int(T)
    if base.twin is not None:
        users = disc_users(K, T, base.twin.user_radius, base.twin.user_center, seed)
    else:
        if K > base.K:
            raise InvalidParameterError(f"base scenario has only {base.K} users")
        users = base.user_positions[:K, :T]
    return dataclasses.replace(base, user_positions=users)


__all__ = ["GapRow", "KappaSummary", "condition_number_db", "kappa_db_matrices", "run_gap_experiment"]

"""Cluster placement and channel synthesis.

Each far cluster is a twin cluster: a BS-side and an MS-side set of scatterer
points joined by a link distance. MPC ``l`` travels antenna -> BS-side point
-> link -> MS-side point -> user, and every leg uses exact distances, so the
wavefront is spherical at both ends. Writing the path length as
``d_bs(l, m) + d_ms(l, k, t)`` makes the channel at each frequency a matrix
product ``U_f V_f`` with ``U_f`` over (user, snapshot) x MPC and ``V_f`` over
MPC x antenna.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..bsvr_process import BsVrProcessParams, sample_typical_intervals
from ..errors import InvalidScenarioError
from ..lifetimes import Exponential
from ..mpc_model import sample_radius
from .scenario import SPEED_OF_LIGHT, ChannelScenario

_STREAMS = ("clusters", "mpcs", "gains", "los", "bsvr")


def _streams(seed):
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return {name: np.random.default_rng(child) for name, child in zip(_STREAMS, ss.spawn(len(_STREAMS)))}


@dataclass(frozen=True)
class ClusterSet:
    """Placed clusters with their MPCs. Per-MPC arrays have shape ``(n, N)``."""

    ms_center: np.ndarray  # (n, 2) MS-VR centers
    R_C: float
    T_C: float
    power: np.ndarray  # (n,) linear cluster power
    bs_points: np.ndarray  # (n, N, 2)
    ms_points: np.ndarray  # (n, N, 2)
    link: np.ndarray  # (n,) meters
    extra: np.ndarray  # (n, N) extra path length in meters
    amp: np.ndarray  # (n, N) complex
    gain_center: np.ndarray  # (n, N, 2)
    gain_width: np.ndarray  # (n, N)
    bs_interval: np.ndarray | None = None  # (n, 2) array coordinates
    bs_slope_db: np.ndarray | None = None  # (n,) dB per meter
    los_k_db: float | None = None
    los_phase: float = 0.0
    los_center: np.ndarray | None = None
    los_radius: float = math.inf
    los_transition: float = 0.0
    twin: bool = False
    extras: dict = field(default_factory=dict)

    @property
    def n_clusters(self) -> int:
        return int(self.ms_center.shape[0])

    @property
    def n_mpc(self) -> int:
        return int(self.amp.shape[1]) if self.amp.ndim == 2 else 0

    def visible_count(self, point) -> int:
        """Clusters whose MS-VR disc contains ``point``."""
        d = np.linalg.norm(self.ms_center - np.asarray(point, float), axis=1)
        return int(np.count_nonzero(d <= self.R_C))


def ramp(dist, radius, transition):
    """Squared-cosine visibility: 1 inside ``radius``, 0 beyond ``radius + transition``."""
    dist = np.asarray(dist, dtype=float)
    if transition <= 0:
        return (dist <= radius).astype(float)
    u = np.clip((dist - radius) / transition, 0.0, 1.0)
    # exact zero outside so invisible clusters are pruned
    return np.where(u >= 1.0, 0.0, np.cos(0.5 * math.pi * u) ** 2)


def _lognormal_db(rng, median, std_db, size=None):
    return median * 10.0 ** (std_db * rng.standard_normal(size) / 10.0)


def _region(scenario: ChannelScenario):
    c = scenario.clusters
    margin = scenario.region_margin
    if margin is None:
        margin = max(3.0 * c.R_C, c.R_C + c.T_C)
    pts = scenario.user_positions.reshape(-1, 2)
    lo = pts.min(axis=0) - margin
    hi = pts.max(axis=0) + margin
    if not np.all(hi > lo):
        raise InvalidScenarioError("simulation region is empty")
    return lo, hi


def place_clusters(scenario: ChannelScenario, seed=None) -> ClusterSet:
    """Draw clusters, their VRs and scattering points.

    MS-VR centers form a Poisson field with density ``N / (pi R_C^2)`` over the
    user region plus a margin, so the number of clusters whose MS-VR covers
    a fixed point is Poisson with mean ``N``: ``lambda (L_BS + L)`` with BS-VRs
    enabled, ``N_C`` otherwise. With BS-VRs, each cluster carries the
    interval of an observed BS-VR on the array.
    """
    if scenario.twin is not None:
        return _place_twin(scenario, seed)
    rs = _streams(seed)
    rng = rs["clusters"]
    c = scenario.clusters
    lo, hi = _region(scenario)
    area = float(np.prod(hi - lo))
    density = scenario.mean_visible_clusters() / (math.pi * c.R_C**2)
    if not (math.isfinite(density) and density >= 0):
        raise InvalidScenarioError("cluster density is not finite")
    n = int(rng.poisson(density * area))
    N = scenario.n_mpc()
    ms_center = lo + rng.uniform(size=(n, 2)) * (hi - lo)

    # cluster delay and power: uniform excess delay below the cut-off,
    # exponential power decay in dB plus lognormal shadowing
    tau_ex = rng.uniform(0.0, c.tau_B, size=n)
    power_db = -c.k_tau * tau_ex + c.sigma_S * rng.standard_normal(n)
    power = 10.0 ** (power_db / 10.0)

    half = math.radians(scenario.bs_sector_deg) / 2.0
    bs_dir = math.pi / 2.0 + rng.uniform(-half, half, size=n)
    bs_dist = rng.uniform(*scenario.bs_cluster_distance, size=n)
    ms_dir = rng.uniform(0.0, 2.0 * math.pi, size=n)
    ms_dist = rng.uniform(*scenario.ms_cluster_distance, size=n)
    psi_bs = np.radians(_lognormal_db(rng, c.m_psi_BS, c.S_psi_BS, n))
    psi_ms = np.radians(_lognormal_db(rng, c.m_psi_MS, c.S_psi_MS, n))
    tau_spread = _lognormal_db(rng, c.m_tau, c.S_tau, n) if c.m_tau > 0 else np.zeros(n)

    mr = rs["mpcs"]
    th_bs = bs_dir[:, None] + psi_bs[:, None] * mr.standard_normal((n, N))
    th_ms = ms_dir[:, None] + psi_ms[:, None] * mr.standard_normal((n, N))
    bs_points = bs_dist[:, None, None] * np.stack([np.cos(th_bs), np.sin(th_bs)], axis=-1)
    ms_points = ms_center[:, None, :] + ms_dist[:, None, None] * np.stack(
        [np.cos(th_ms), np.sin(th_ms)], axis=-1)
    extra = SPEED_OF_LIGHT * 1e-6 * tau_spread[:, None] * mr.exponential(size=(n, N))
    amp = (mr.standard_normal((n, N)) + 1j * mr.standard_normal((n, N))) / math.sqrt(2.0 * max(N, 1))

    # link chosen so the mean path length matches the direct distance plus excess delay
    ref = np.linalg.norm(scenario.user_center())
    link = np.maximum(ref + SPEED_OF_LIGHT * 1e-6 * tau_ex - bs_dist - ms_dist, 0.0)

    gr = rs["gains"]
    rad = c.R_C * np.sqrt(gr.uniform(size=(n, N)))
    phi = gr.uniform(0.0, 2.0 * math.pi, size=(n, N))
    gain_center = ms_center[:, None, :] + np.stack([rad * np.cos(phi), rad * np.sin(phi)], axis=-1)
    gain_width = _gain_widths(scenario, gr, (n, N))

    bs_interval = bs_slope = None
    if scenario.bs_vr.enabled:
        cfg = scenario.bs_vr
        params = BsVrProcessParams(cfg.rate, Exponential(cfg.L_BS), 0.0, max(scenario.array_length, 1e-9))
        br = rs["bsvr"]
        a, b = sample_typical_intervals(params, n, seed=br)
        bs_interval = np.column_stack([a, b])
        bs_slope = cfg.mu_BS + cfg.sigma_BS * br.standard_normal(n)

    los_k = None
    lr = rs["los"]
    k_draw = scenario.los.mu_K_LOS + scenario.los.sigma_K_LOS * lr.standard_normal()
    phase = lr.uniform(0.0, 2.0 * math.pi)
    if scenario.los.enabled:
        los_k = float(k_draw)
    return ClusterSet(
        ms_center=ms_center, R_C=c.R_C, T_C=c.T_C, power=power,
        bs_points=bs_points, ms_points=ms_points, link=link, extra=extra, amp=amp,
        gain_center=gain_center, gain_width=gain_width,
        bs_interval=bs_interval, bs_slope_db=bs_slope,
        los_k_db=los_k, los_phase=float(phase), los_center=scenario.user_center(),
        los_radius=scenario.los.R_L, los_transition=scenario.los.T_L,
    )


def _gain_widths(scenario, rng, shape):
    v = scenario.mpc_vr
    if v.fixed_radius is not None:
        return np.full(shape, float(v.fixed_radius))
    if math.isinf(v.mu_R):
        return np.full(shape, math.inf)
    return sample_radius(v.mu_R, v.sigma2_R, seed=rng, size=shape)


def _place_twin(scenario: ChannelScenario, seed) -> ClusterSet:
    tw = scenario.twin
    rs = _streams(seed)
    N = scenario.n_mpc()
    center = np.asarray(tw.user_center, dtype=float)
    mr = rs["mpcs"]
    th_bs = math.radians(tw.bs_direction_deg) + math.radians(tw.omega_bs) * (mr.uniform(size=N) - 0.5)
    th_ms = math.radians(tw.ms_direction_deg) + math.radians(tw.omega_ms) * (mr.uniform(size=N) - 0.5)
    bs_points = tw.bs_distance * np.stack([np.cos(th_bs), np.sin(th_bs)], axis=-1)
    ms_points = center + tw.ms_distance * np.stack([np.cos(th_ms), np.sin(th_ms)], axis=-1)
    amp = (mr.standard_normal(N) + 1j * mr.standard_normal(N)) / math.sqrt(2.0 * N)
    gr = rs["gains"]
    R = scenario.clusters.R_C
    rad = R * np.sqrt(gr.uniform(size=N))
    phi = gr.uniform(0.0, 2.0 * math.pi, size=N)
    gain_center = center + np.stack([rad * np.cos(phi), rad * np.sin(phi)], axis=-1)
    gain_width = _gain_widths(scenario, gr, (N,))
    return ClusterSet(
        ms_center=center[None, :], R_C=R, T_C=0.0, power=np.ones(1),
        bs_points=bs_points[None], ms_points=ms_points[None], link=np.array([tw.link_distance]),
        extra=np.zeros((1, N)), amp=amp[None], gain_center=gain_center[None],
        gain_width=gain_width[None], twin=True,
    )


@dataclass(frozen=True)
class ChannelTensor:
    """Complex gains ``h[k, m, t, b]`` (users x antennas x snapshots x frequencies)."""

    h: np.ndarray
    frequencies: np.ndarray
    normalized: bool = False
    user_energy: np.ndarray | None = None

    @property
    def shape(self):
        return self.h.shape

    def slices(self) -> np.ndarray:
        """View with shape ``(T, B, K, M)``: one K x M matrix per (t, f)."""
        return np.transpose(self.h, (2, 3, 0, 1))

    def normalize(self) -> "ChannelTensor":
        """Scale each user to total energy ``M T B`` over antennas, snapshots, frequencies."""
        K, M, T, B = self.h.shape
        e = np.sum(np.abs(self.h) ** 2, axis=(1, 2, 3))
        scale = np.zeros_like(e)
        ok = e > 0
        scale[ok] = np.sqrt(M * T * B / e[ok])
        return ChannelTensor(self.h * scale[:, None, None, None], self.frequencies, True, e)


def _pattern_gain(scenario, user_pts, target_pts):
    # amplitude of the user antenna toward each target, shape (P, L)
    pat = scenario.pattern
    if pat.kind == "omni":
        return None
    v = target_pts[None, :, :] - user_pts[:, None, :]
    ang = np.arctan2(v[..., 1], v[..., 0]) - math.radians(pat.boresight_deg)
    half = math.radians(pat.beamwidth_deg) / 2.0
    p = math.log(0.5) / math.log((1.0 + math.cos(half)) / 2.0)
    return ((1.0 + np.cos(ang)) / 2.0) ** (p / 2.0)


def synthesize_modes(scenario: ChannelScenario, clusters: ClusterSet, modes=(True, False),
                     normalize: bool = True) -> list[ChannelTensor]:
    """Channel tensors for several gain-function states on one cluster draw.

    Every state shares the same clusters, MPCs, phases and gain centers; only
    the gain factor differs. This is the paired design used for ON/OFF
    comparisons.
    """
    K, T, M = scenario.K, scenario.T, scenario.M
    up = scenario.user_positions.reshape(-1, 2)  # (P, 2), row = k * T + t
    P = up.shape[0]
    ant = scenario.antenna_positions()
    xcoord = scenario.array_coordinates()
    freqs = scenario.frequencies()
    B = freqs.size
    n, N = clusters.amp.shape

    vis = ramp(np.linalg.norm(up[:, None, :] - clusters.ms_center[None], axis=-1),
               clusters.R_C, clusters.T_C)  # (P, n)
    if clusters.bs_interval is not None:
        a, b = clusters.bs_interval[:, 0], clusters.bs_interval[:, 1]
        inside = (xcoord[None, :] >= a[:, None]) & (xcoord[None, :] <= b[:, None])
        slope = 10.0 ** (clusters.bs_slope_db[:, None] * (xcoord[None, :] - a[:, None]) / 20.0)
        gate = np.where(inside, slope, 0.0)  # (n, M)
    else:
        gate = np.ones((n, M))
    keep = np.flatnonzero((vis.max(axis=0) > 0) & (gate.max(axis=1) > 0))

    outs = [np.zeros((P, M, B), dtype=complex) for _ in modes]
    nlos_power = [np.zeros(P) for _ in modes]
    if keep.size:
        vis_k = vis[:, keep]
        bs_pts = clusters.bs_points[keep].reshape(-1, 2)
        ms_pts = clusters.ms_points[keep].reshape(-1, 2)
        cl_of = np.repeat(np.arange(keep.size), N)
        amp = (clusters.amp[keep] * np.sqrt(clusters.power[keep])[:, None]).reshape(-1)
        base = amp[None, :] * vis_k[:, cl_of]  # (P, Lm)
        pg = _pattern_gain(scenario, up, ms_pts)
        if pg is not None:
            base = base * pg
        gc = clusters.gain_center[keep].reshape(-1, 2)
        gw = clusters.gain_width[keep].reshape(-1)
        d2 = np.sum((up[:, None, :] - gc[None]) ** 2, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(np.isinf(gw)[None, :], 1.0, np.exp(-d2 / (2.0 * gw[None, :] ** 2)))
        amps = [base * g if on else base for on in modes]
        gate_l = gate[keep][cl_of]  # (Lm, M)
        gpow = np.mean(gate_l**2, axis=1)
        for i, am in enumerate(amps):
            nlos_power[i] = np.abs(am) ** 2 @ gpow

        d_ms = np.linalg.norm(up[:, None, :] - ms_pts[None], axis=-1)
        d_ms += (clusters.link[keep][cl_of] + clusters.extra[keep].reshape(-1))[None, :]
        d_bs = np.linalg.norm(bs_pts[:, None, :] - ant[None], axis=-1)  # (Lm, M)
        k0 = 2.0 * math.pi * freqs[0] / SPEED_OF_LIGHT
        dk = 2.0 * math.pi * (freqs[1] - freqs[0]) / SPEED_OF_LIGHT if B > 1 else 0.0
        e1 = np.exp(-1j * k0 * d_ms)
        e2 = gate_l * np.exp(-1j * k0 * d_bs)
        s1 = np.exp(-1j * dk * d_ms)
        s2 = np.exp(-1j * dk * d_bs)
        for bi in range(B):
            if bi:
                # phase recurrence across the uniform frequency grid
                e1 *= s1
                e2 *= s2
            for i, am in enumerate(amps):
                outs[i][:, :, bi] = (am * e1) @ e2

    if clusters.los_k_db is not None:
        d_los = np.linalg.norm(up[:, None, :] - ant[None], axis=-1)  # (P, M)
        lv = ramp(np.linalg.norm(up - clusters.los_center, axis=1), clusters.los_radius,
                  clusters.los_transition)
        pg = _pattern_gain(scenario, up, np.zeros((1, 2)))
        if pg is not None:
            lv = lv * pg[:, 0]
        kf = 10.0 ** (clusters.los_k_db / 10.0)
        kfreq = 2.0 * math.pi * freqs / SPEED_OF_LIGHT
        ph = np.exp(-1j * (d_los[:, :, None] * kfreq[None, None, :] - clusters.los_phase))
        for i in range(len(modes)):
            # K-factor against each user's mean diffuse power in that state
            per_user = nlos_power[i].reshape(K, T).mean(axis=1)
            a_los = np.sqrt(kf * np.repeat(per_user, T)) * lv
            outs[i] += a_los[:, None, None] * ph

    tensors = []
    for o in outs:
        h = o.reshape(K, T, M, B).transpose(0, 2, 1, 3)
        t = ChannelTensor(np.ascontiguousarray(h), freqs)
        tensors.append(t.normalize() if normalize else t)
    return tensors


def synthesize(scenario: ChannelScenario, seed=None, gain: bool | None = None,
               normalize: bool = True) -> ChannelTensor:
    """Channel tensor of a scenario; ``gain`` overrides the MPC gain switch."""
    on = scenario.mpc_vr.enabled if gain is None else bool(gain)
    clusters = place_clusters(scenario, seed)
    return synthesize_modes(scenario, clusters, (on,), normalize=normalize)[0]


__all__ = ["ChannelTensor", "ClusterSet", "place_clusters", "ramp", "synthesize", "synthesize_modes"]

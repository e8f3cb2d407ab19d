"""Channel scenarios: array, users, cluster statistics and the two extensions.

Parameter names follow the usual COST 2100 table entries (``N_C``, ``R_C``,
``k_tau`` and so on). Presets reproduce an outdoor physically-large-array
setup with BS-VRs, an indoor compact-array setup with MPC gain functions, and
a single twin-cluster setup with independently controlled angular spreads.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import InvalidParameterError, InvalidScenarioError
from ..mpc_model import required_num_mpcs

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class ClusterParams:
    """Cluster statistics. Spreads are dB-lognormal: median ``m_*``, std ``S_*`` in dB."""

    N_C: float = 15.0
    R_C: float = 5.0
    T_C: float = 0.5
    N_MPC: int | None = None
    k_tau: float = 31.0  # dB / us
    tau_B: float = 0.25  # us
    sigma_S: float = 2.7  # dB
    m_tau: float = 0.005  # us
    S_tau: float = 1.5
    m_psi_BS: float = 4.6  # deg
    S_psi_BS: float = 2.1
    m_theta_BS: float = 3.7
    S_theta_BS: float = 2.6
    m_psi_MS: float = 3.6
    S_psi_MS: float = 2.1
    m_theta_MS: float = 0.7
    S_theta_MS: float = 3.6
    # carried for completeness; the planar synthesizer does not apply them
    rho: dict = field(default_factory=dict)
    mu_XPR: float = 0.0
    sigma_XPR: float = 0.0


@dataclass(frozen=True)
class LosParams:
    enabled: bool = False
    R_L: float = 30.0
    T_L: float = 0.0
    mu_K_LOS: float = -5.2
    sigma_K_LOS: float = 2.9


@dataclass(frozen=True)
class BsVrConfig:
    enabled: bool = False
    L_BS: float = 3.2
    rate: float = 2.9  # births per meter of array
    mu_BS: float = 0.0  # dB/m
    sigma_BS: float = 0.9  # dB/m


@dataclass(frozen=True)
class MpcVrConfig:
    """MPC visibility regions. ``fixed_radius`` overrides the lognormal radii."""

    enabled: bool = False
    mu_R: float = -19.8
    sigma2_R: float = 10.1**2
    n_eff: float = 10.0
    fixed_radius: float | None = None


@dataclass(frozen=True)
class AntennaPattern:
    kind: str = "omni"
    boresight_deg: float = 90.0
    beamwidth_deg: float = 120.0

    def __post_init__(self):
        if self.kind not in ("omni", "directive"):
            raise InvalidParameterError(f"unknown antenna pattern {self.kind!r}")
        if self.kind == "directive" and not 0 < self.beamwidth_deg < 360:
            raise InvalidParameterError("beamwidth must lie in (0, 360) degrees")


@dataclass(frozen=True)
class TwinClusterParams:
    """Single cluster with separately controlled angular spreads (degrees).

    Scatterer angles are uniform on an arc of total width ``omega`` around the
    cluster direction, seen from the array center (BS side) and from the user
    disc center (MS side).
    """

    omega_ms: float = 15.0
    omega_bs: float = 60.0
    bs_distance: float = 40.0
    ms_distance: float = 20.0
    bs_direction_deg: float = 90.0
    ms_direction_deg: float = 0.0
    link_distance: float = 10.0
    user_radius: float = 2.0
    user_center: tuple = (0.0, 30.0)


@dataclass(frozen=True)
class ChannelScenario:
    """Everything the synthesizer needs.

    ``user_positions`` has shape ``(K, T, 2)``: planar position of user k at
    snapshot t. The BS array is a ULA along the x axis centered at the origin
    and facing +y; its array coordinate runs from 0 to ``array_length``.
    """

    M: int
    user_positions: np.ndarray
    carrier_hz: float = 2.6e9
    bandwidth_hz: float = 50e6
    B: int = 257
    spacing_wl: float = 0.5
    clusters: ClusterParams = field(default_factory=ClusterParams)
    los: LosParams = field(default_factory=LosParams)
    bs_vr: BsVrConfig = field(default_factory=BsVrConfig)
    mpc_vr: MpcVrConfig = field(default_factory=MpcVrConfig)
    pattern: AntennaPattern = field(default_factory=AntennaPattern)
    twin: TwinClusterParams | None = None
    bs_cluster_distance: tuple = (10.0, 50.0)
    ms_cluster_distance: tuple = (5.0, 30.0)
    bs_sector_deg: float = 120.0
    region_margin: float | None = None
    name: str = "custom"

    def __post_init__(self):
        u = np.array(self.user_positions, dtype=float)
        if u.ndim != 3 or u.shape[2] != 2:
            raise InvalidParameterError("user_positions must have shape (K, T, 2)")
        if u.shape[0] < 1 or u.shape[1] < 1 or not np.all(np.isfinite(u)):
            raise InvalidParameterError("need K, T >= 1 and finite user positions")
        u.flags.writeable = False
        object.__setattr__(self, "user_positions", u)
        if self.M < 1 or self.B < 1:
            raise InvalidParameterError("M and B must be >= 1")
        if not (self.carrier_hz > 0 and self.bandwidth_hz >= 0 and self.spacing_wl > 0):
            raise InvalidParameterError("carrier > 0, bandwidth >= 0 and spacing > 0 required")
        c = self.clusters
        spreads = (c.m_tau, c.S_tau, c.m_psi_BS, c.S_psi_BS, c.m_psi_MS, c.S_psi_MS,
                   c.sigma_S, c.tau_B, c.T_C)
        if any(not (math.isfinite(v) and v >= 0) for v in spreads):
            raise InvalidParameterError("spreads and transition widths must be >= 0")
        if not c.R_C > 0:
            raise InvalidScenarioError("cluster visibility radius R_C must be > 0")

    @property
    def K(self) -> int:
        return int(self.user_positions.shape[0])

    @property
    def T(self) -> int:
        return int(self.user_positions.shape[1])

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def spacing(self) -> float:
        return self.spacing_wl * self.wavelength

    @property
    def array_length(self) -> float:
        return (self.M - 1) * self.spacing

    def antenna_positions(self) -> np.ndarray:
        x = (np.arange(self.M) - (self.M - 1) / 2.0) * self.spacing
        return np.column_stack([x, np.zeros(self.M)])

    def array_coordinates(self) -> np.ndarray:
        """Position of each antenna along the array axis, from 0 to L."""
        return np.arange(self.M) * self.spacing

    def frequencies(self) -> np.ndarray:
        if self.B == 1:
            return np.array([self.carrier_hz])
        return self.carrier_hz + np.linspace(-0.5, 0.5, self.B) * self.bandwidth_hz

    def mean_visible_clusters(self) -> float:
        if self.twin is not None:
            return 1.0
        if self.bs_vr.enabled:
            return self.bs_vr.rate * (self.bs_vr.L_BS + self.array_length)
        return self.clusters.N_C

    def n_mpc(self) -> int:
        c = self.clusters
        if c.N_MPC is not None:
            return int(c.N_MPC)
        v = self.mpc_vr
        if v.fixed_radius is not None:
            return int(math.ceil(v.n_eff * c.R_C**2 / v.fixed_radius**2 - 1e-9))
        # independent of the ON/OFF switch so both states share one MPC set
        return required_num_mpcs(v.n_eff, c.R_C, v.mu_R, v.sigma2_R)

    def with_gain(self, enabled: bool) -> "ChannelScenario":
        return dataclasses.replace(self, mpc_vr=dataclasses.replace(self.mpc_vr, enabled=enabled))

    def user_center(self) -> np.ndarray:
        return self.user_positions.reshape(-1, 2).mean(axis=0)


# ---------------------------------------------------------------------------
# presets


def _route(starts, heading_deg, length, T):
    d = np.array([math.cos(math.radians(heading_deg)), math.sin(math.radians(heading_deg))])
    steps = np.linspace(0.0, length, T) if T > 1 else np.zeros(1)
    return starts[:, None, :] + steps[None, :, None] * d


def grid_users(K: int, spacing: float, center) -> np.ndarray:
    """K users on a near-square grid around ``center``."""
    cols = int(math.ceil(math.sqrt(K)))
    rows = int(math.ceil(K / cols))
    ij = np.array([(i, j) for i in range(rows) for j in range(cols)][:K], dtype=float)
    ij -= ij.mean(axis=0)
    return np.asarray(center, float) + spacing * ij[:, ::-1]


def disc_users(K: int, T: int, radius: float, center, seed=None) -> np.ndarray:
    """Independent uniform drops in a disc for every user and snapshot."""
    rng = np.random.default_rng(seed)
    rad = radius * np.sqrt(rng.uniform(size=(K, T)))
    phi = rng.uniform(0.0, 2.0 * math.pi, size=(K, T))
    return np.asarray(center, float) + np.stack([rad * np.cos(phi), rad * np.sin(phi)], axis=-1)


def indoor_scenario(K: int = 9, M: int = 32, T: int = 10, B: int = 257, gain: bool = True,
                    distance: float = 15.0, user_spacing: float = 0.5, route_length: float = 0.25,
                    pattern: AntennaPattern | None = None, n_mpc: int | None = 1000) -> ChannelScenario:
    """Indoor compact-array LOS scenario with MPC gain functions.

    Users stand on a grid ``distance`` meters in front of the array and each
    moves ``route_length`` meters along x over ``T`` snapshots. ``n_mpc``
    defaults to the tabulated per-cluster count of the indoor column.
    """
    starts = grid_users(K, user_spacing, (0.0, distance))
    users = _route(starts, 0.0, route_length, T)
    return ChannelScenario(
        M=M, user_positions=users, B=B,
        clusters=ClusterParams(N_MPC=n_mpc),
        los=LosParams(enabled=True),
        bs_vr=BsVrConfig(enabled=False),
        mpc_vr=MpcVrConfig(enabled=gain),
        pattern=pattern or AntennaPattern(),
        bs_cluster_distance=(5.0, 30.0),
        ms_cluster_distance=(3.0, 20.0),
        name="indoor",
    )


OUTDOOR_CLUSTERS = ClusterParams(
    N_C=math.nan, R_C=10.0, T_C=2.0, N_MPC=31, k_tau=43.0, tau_B=0.91, sigma_S=7.6,
    m_tau=0.14, S_tau=2.85, m_psi_BS=7.0, S_psi_BS=2.4, m_theta_BS=0.0, S_theta_BS=0.0,
    m_psi_MS=19.0, S_psi_MS=2.0, m_theta_MS=0.0, S_theta_MS=0.0,
)


def outdoor_scenario(K: int = 9, M: int = 128, T: int = 1, B: int = 257, distance: float = 50.0,
                     rate: float = 2.9, L_BS: float = 3.2, separation_deg: float = 1.0,
                     bs_vr: bool = True) -> ChannelScenario:
    """Outdoor NLOS scenario with a physically large ULA and BS-VRs.

    Users sit on an arc of radius ``distance`` around the array center,
    ``separation_deg`` apart.
    """
    ang = math.radians(90.0) + math.radians(separation_deg) * (np.arange(K) - (K - 1) / 2.0)
    starts = distance * np.column_stack([np.cos(ang), np.sin(ang)])
    users = _route(starts, 0.0, 0.0, T)
    return ChannelScenario(
        M=M, user_positions=users, B=B,
        clusters=OUTDOOR_CLUSTERS,
        los=LosParams(enabled=False),
        bs_vr=BsVrConfig(enabled=bs_vr, L_BS=L_BS, rate=rate),
        mpc_vr=MpcVrConfig(enabled=False, n_eff=31),
        bs_cluster_distance=(20.0, 120.0),
        ms_cluster_distance=(10.0, 60.0),
        name="outdoor",
    )


def twin_cluster_scenario(omega_ms: float = 15.0, omega_bs: float = 60.0, K: int = 9,
                          M: int = 128, n_mpc_eff: float = 100.0, seed=None, T: int = 300,
                          B: int = 16, user_radius: float = 2.0, r_mpc: float = 0.5,
                          gain: bool = True, distance: float = 30.0) -> ChannelScenario:
    """Single twin cluster; users drop uniformly in a disc at every snapshot.

    The disc of radius ``user_radius`` doubles as the cluster's MS-VR, so the
    cluster is always visible. MPC-VR radii are fixed at ``r_mpc`` and the
    MPC count follows from ``n_mpc_eff``.
    """
    for om in (omega_ms, omega_bs):
        if not 0.0 <= om < 180.0:
            raise InvalidParameterError("angular spreads must lie in [0, 180) degrees")
    users = disc_users(K, T, user_radius, (0.0, distance), seed)
    return ChannelScenario(
        M=M, user_positions=users, B=B,
        clusters=dataclasses.replace(ClusterParams(), R_C=user_radius, T_C=0.0, N_C=1.0,
                                     sigma_S=0.0, m_tau=0.0),
        los=LosParams(enabled=False),
        bs_vr=BsVrConfig(enabled=False),
        mpc_vr=MpcVrConfig(enabled=gain, n_eff=n_mpc_eff, fixed_radius=r_mpc),
        twin=TwinClusterParams(omega_ms=omega_ms, omega_bs=omega_bs, user_radius=user_radius,
                               user_center=(0.0, distance)),
        name="twin",
    )


# ---------------------------------------------------------------------------
# config mapping


_CLUSTER_KEYS = {f.name for f in dataclasses.fields(ClusterParams)}
_LOS_KEYS = {"R_L", "T_L", "mu_K_LOS", "sigma_K_LOS"}


def scenario_from_config(cfg: dict[str, Any]) -> ChannelScenario:
    """Build a scenario from a flat mapping of table-style names.

    ``preset`` selects ``indoor``, ``outdoor`` or ``twin`` (with its keyword
    arguments under ``preset_args``); the remaining keys override fields:
    cluster entries (``R_C``, ``k_tau``, ...), LOS entries (``R_L``, ...),
    ``L_BS``/``lambda``/``mu_BS``/``sigma_BS`` for BS-VRs,
    ``mu_R_MPC``/``sigma_R_MPC``/``N_MPC_eff`` for MPC-VRs, ``gain``, and
    ``B``/``carrier_hz``/``bandwidth_hz``.
    """
    cfg = dict(cfg)
    preset = cfg.pop("preset", "indoor")
    args = dict(cfg.pop("preset_args", {}) or {})
    builders = {"indoor": indoor_scenario, "outdoor": outdoor_scenario, "twin": twin_cluster_scenario}
    if preset not in builders:
        raise InvalidScenarioError(f"unknown preset {preset!r}")
    try:
        sc = builders[preset](**args)
    except TypeError as exc:
        raise InvalidScenarioError(str(exc)) from exc
    cl = {k: cfg.pop(k) for k in list(cfg) if k in _CLUSTER_KEYS}
    los = {k: cfg.pop(k) for k in list(cfg) if k in _LOS_KEYS}
    bs = {}
    for src, dst in (("L_BS", "L_BS"), ("lambda", "rate"), ("mu_BS", "mu_BS"), ("sigma_BS", "sigma_BS"),
                     ("bs_vr", "enabled")):
        if src in cfg:
            bs[dst] = cfg.pop(src)
    mv = {}
    if "mu_R_MPC" in cfg:
        mv["mu_R"] = cfg.pop("mu_R_MPC")
    if "sigma_R_MPC" in cfg:
        mv["sigma2_R"] = float(cfg.pop("sigma_R_MPC")) ** 2
    if "N_MPC_eff" in cfg:
        mv["n_eff"] = cfg.pop("N_MPC_eff")
    if "gain" in cfg:
        mv["enabled"] = bool(cfg.pop("gain"))
    top = {k: cfg.pop(k) for k in ("B", "carrier_hz", "bandwidth_hz", "name") if k in cfg}
    if cfg:
        raise InvalidScenarioError(f"unknown scenario keys: {sorted(cfg)}")
    return dataclasses.replace(
        sc,
        clusters=dataclasses.replace(sc.clusters, **cl),
        los=dataclasses.replace(sc.los, **los),
        bs_vr=dataclasses.replace(sc.bs_vr, **bs),
        mpc_vr=dataclasses.replace(sc.mpc_vr, **mv),
        **top,
    )

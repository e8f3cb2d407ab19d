"""Simplified multi-cluster channel synthesis with BS-VRs and MPC gain functions."""

from .metrics import GapRow, KappaSummary, condition_number_db, kappa_db_matrices, run_gap_experiment
from .scenario import (
    AntennaPattern,
    BsVrConfig,
    ChannelScenario,
    ClusterParams,
    LosParams,
    MpcVrConfig,
    TwinClusterParams,
    disc_users,
    indoor_scenario,
    outdoor_scenario,
    scenario_from_config,
    twin_cluster_scenario,
)
from .synth import ChannelTensor, ClusterSet, place_clusters, synthesize, synthesize_modes

__all__ = [
    "AntennaPattern",
    "BsVrConfig",
    "ChannelScenario",
    "ChannelTensor",
    "ClusterParams",
    "ClusterSet",
    "GapRow",
    "KappaSummary",
    "LosParams",
    "MpcVrConfig",
    "TwinClusterParams",
    "condition_number_db",
    "disc_users",
    "indoor_scenario",
    "kappa_db_matrices",
    "outdoor_scenario",
    "place_clusters",
    "run_gap_experiment",
    "scenario_from_config",
    "synthesize",
    "synthesize_modes",
    "twin_cluster_scenario",
]

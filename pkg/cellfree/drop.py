"""
Per-drop statistics: one deployment, its large-scale channel statistics,
a pilot assignment and the estimator statistics that follow from them.
"""
from dataclasses import dataclass

from .estimation import EstimationStats, PilotAssignment, assign_pilots, compute_estimation_stats
from .geometry import Deployment, generate_deployment
from .propagation import ChannelStats, compute_channel_stats
from .streams import Stream, derive_seed


@dataclass(frozen=True)
class DropInputs:
    index: int
    seed: int
    deployment: Deployment
    stats: ChannelStats
    pilots: PilotAssignment
    estimation: EstimationStats


def drop_seed(campaign_seed, index):
    return derive_seed(campaign_seed, Stream.DROP, index)


def prepare_drop(scenario, seed, index=0, pilots=None):
    deployment = generate_deployment(scenario, seed)
    stats = compute_channel_stats(deployment, scenario.propagation, seed)
    if pilots is None:
        pilots = assign_pilots(scenario.K, scenario.tau_p, seed)
    estimation = compute_estimation_stats(stats, pilots, scenario.tau_p, scenario.rho_p, scenario.noise_power)
    return DropInputs(
        index=int(index),
        seed=int(seed),
        deployment=deployment,
        stats=stats,
        pilots=pilots,
        estimation=estimation,
    )

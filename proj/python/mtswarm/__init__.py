"""Python access to the mtswarm filament-swarm simulator and analysis pipeline."""

from ._core import (
    ActivationTable,
    ClusterStats,
    Dictionary,
    FeatureMatrix,
    SimConfig,
    Trajectory,
    cluster_stats,
    decompose,
    duplex_free_energy,
    featurize,
    learn_stage,
    normalize_temperature,
    parse_config,
    polar_order,
    read_activations,
    read_dictionary,
    read_features,
    read_trajectory,
    run,
    spearman,
    write_features,
    write_trajectory,
)

__all__ = [
    "ActivationTable",
    "ClusterStats",
    "Dictionary",
    "FeatureMatrix",
    "SimConfig",
    "Trajectory",
    "cluster_stats",
    "decompose",
    "duplex_free_energy",
    "featurize",
    "learn_stage",
    "normalize_temperature",
    "parse_config",
    "polar_order",
    "read_activations",
    "read_dictionary",
    "read_features",
    "read_trajectory",
    "run",
    "spearman",
    "write_features",
    "write_trajectory",
]

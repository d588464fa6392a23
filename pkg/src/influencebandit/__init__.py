"""Top-k contextual bandit simulator for learning edge-level peer influence
probabilities in networks, with constrained optimal-design utilities and a
sweep runner that reports the regret / estimation-error trade-off."""

from .design import Allocation, DesignWeights, StaticDesignPolicy, round_allocation, solve_gk_design
from .envgen import (
    EdgeContext,
    GroundTruth,
    NodeRecord,
    assign_linear_ground_truth,
    assign_mlp_ground_truth,
    build_edge_contexts,
    generate_graph,
    generate_node_features,
    load_external,
)
from .errors import ConfigError, DataError, InvariantError, ProtocolError
from .linmodel import LinearModel
from .metrics import MetricSeries, cumulative_regret, pareto_summary, rmse_holdout, series_from_log
from .policies import (
    AdaptiveC,
    BasePolicy,
    CombLinUCB,
    InfluenceCB,
    LinTS,
    SGDLogisticPolicy,
    UniformRandomPolicy,
)
from .seeding import seed_schedule
from .simcore import ActionPool, Environment, RunLog, run_episode, split_holdout

__all__ = [
    "ActionPool",
    "AdaptiveC",
    "Allocation",
    "BasePolicy",
    "CombLinUCB",
    "ConfigError",
    "DataError",
    "DesignWeights",
    "EdgeContext",
    "Environment",
    "GroundTruth",
    "InfluenceCB",
    "InvariantError",
    "LinTS",
    "LinearModel",
    "MetricSeries",
    "NodeRecord",
    "ProtocolError",
    "RunLog",
    "SGDLogisticPolicy",
    "StaticDesignPolicy",
    "UniformRandomPolicy",
    "assign_linear_ground_truth",
    "assign_mlp_ground_truth",
    "build_edge_contexts",
    "cumulative_regret",
    "generate_graph",
    "generate_node_features",
    "load_external",
    "pareto_summary",
    "rmse_holdout",
    "round_allocation",
    "run_episode",
    "seed_schedule",
    "series_from_log",
    "solve_gk_design",
    "split_holdout",
]

__version__ = "0.1.0"

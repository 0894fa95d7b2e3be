"""Causal knowledge-component networks.

Learns a BIC-scored Bayesian network over knowledge components from student
mastery data, estimates interventional effects with back-door adjustment,
refutes edges into strong/weak/removed ties, and plans root-cause-first
learning paths on the resulting causal network.
"""

from .datasets import (
    ContingencyTable,
    MasteryDataset,
    PerformanceRecord,
    TransformResult,
    Variable,
    contingency,
    load_mastery_csv,
    transform_performance,
)
from .effects import (
    AdjustmentPolicy,
    AnnotatedNetwork,
    CausalAnnotation,
    GraphEdit,
    InterventionQuery,
    RefutationReport,
    RefuteConfig,
    Thresholds,
    TieClass,
    adjustment_set,
    ate,
    classify_edge,
    counterfactual_experiment,
    do_distribution,
    refute_edge,
    update_network,
)
from .errors import CapacityError, CausalKcError, DataError, SchemaError
from .network import (
    BicScorer,
    CptSet,
    Dag,
    ScoredNetwork,
    bic_score,
    fit_mle,
    log_likelihood,
    network_from_json,
    network_to_json,
    param_count,
)
from .planning import (
    LearningPath,
    MasteryState,
    WeightPolicy,
    WeightedDigraph,
    plan,
    root_problems,
    shortest_path,
    to_weighted,
    unmastered_set,
)
from .search import Move, MoveKind, SearchConfig, SearchTrace, hill_climb, is_acyclic, neighbors
from .simulate import GroundTruth, sample, true_ate

__version__ = "0.1.0"

__all__ = [
    "AdjustmentPolicy",
    "AnnotatedNetwork",
    "BicScorer",
    "CapacityError",
    "CausalAnnotation",
    "CausalKcError",
    "ContingencyTable",
    "CptSet",
    "Dag",
    "DataError",
    "GraphEdit",
    "GroundTruth",
    "InterventionQuery",
    "LearningPath",
    "MasteryDataset",
    "MasteryState",
    "Move",
    "MoveKind",
    "PerformanceRecord",
    "RefutationReport",
    "RefuteConfig",
    "SchemaError",
    "ScoredNetwork",
    "SearchConfig",
    "SearchTrace",
    "Thresholds",
    "TieClass",
    "TransformResult",
    "Variable",
    "WeightPolicy",
    "WeightedDigraph",
    "adjustment_set",
    "ate",
    "bic_score",
    "classify_edge",
    "contingency",
    "counterfactual_experiment",
    "do_distribution",
    "fit_mle",
    "hill_climb",
    "is_acyclic",
    "load_mastery_csv",
    "log_likelihood",
    "neighbors",
    "network_from_json",
    "network_to_json",
    "param_count",
    "plan",
    "refute_edge",
    "root_problems",
    "sample",
    "shortest_path",
    "to_weighted",
    "transform_performance",
    "true_ate",
    "unmastered_set",
    "update_network",
]

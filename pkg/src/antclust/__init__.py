"""AntClust: clustering by artificial ant colonies.

Every dataset item becomes an ant; random meetings compare the underlying
items through a pluggable similarity function, and a replaceable rule set
turns acceptance or rejection into colony membership. The number of clusters
is never an input. The package ships the built-in rule set, similarity
functions for scalars, binary descriptor sets and precomputed matrices, a
DBSCAN reference baseline, an ARI scorer, and a benchmark harness.
"""

from ._backend import active_backend, compiled_available
from .core_model import Ant, ClusteringResult, Parameters, init_ant, record_meeting_observation
from .engine import (
    EngineState,
    learn_templates,
    meeting_phase,
    nest_shrink,
    prepare_state,
    reassign_unlabeled,
    run_antclust,
)
from .errors import AntClustError, ConfigError, DataError
from .evaluation import (
    BenchmarkGrid,
    LabeledDataset,
    adjusted_rand_index,
    benchmark_grid,
    dbscan_precomputed,
    generate_descriptor_dataset,
    generate_float_dataset,
)
from .rules import (
    LABROCHE_RULES,
    RULE_SETS,
    LabelAllocator,
    MeetingContext,
    Rule,
    acceptance,
    apply_labroche_rules,
    apply_rule_set,
    estimator_decrease,
    estimator_increase,
)
from .similarity import (
    DescriptorColumn,
    DescriptorSet,
    MatrixColumn,
    ScalarColumn,
    SimilarityMatrix,
    aggregate_similarity,
    load_descriptor_sets,
    load_similarity_matrix,
    normalize_scalar_features,
    pairwise_similarity,
    sim_descriptor_sets,
    sim_scalar,
    similarity_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "Ant",
    "AntClustError",
    "BenchmarkGrid",
    "ClusteringResult",
    "ConfigError",
    "DataError",
    "DescriptorColumn",
    "DescriptorSet",
    "EngineState",
    "LABROCHE_RULES",
    "LabelAllocator",
    "LabeledDataset",
    "MatrixColumn",
    "MeetingContext",
    "Parameters",
    "RULE_SETS",
    "Rule",
    "ScalarColumn",
    "SimilarityMatrix",
    "acceptance",
    "active_backend",
    "adjusted_rand_index",
    "aggregate_similarity",
    "apply_labroche_rules",
    "apply_rule_set",
    "benchmark_grid",
    "compiled_available",
    "dbscan_precomputed",
    "estimator_decrease",
    "estimator_increase",
    "generate_descriptor_dataset",
    "generate_float_dataset",
    "init_ant",
    "learn_templates",
    "load_descriptor_sets",
    "load_similarity_matrix",
    "meeting_phase",
    "nest_shrink",
    "normalize_scalar_features",
    "pairwise_similarity",
    "prepare_state",
    "reassign_unlabeled",
    "record_meeting_observation",
    "run_antclust",
    "sim_descriptor_sets",
    "sim_scalar",
    "similarity_matrix",
]

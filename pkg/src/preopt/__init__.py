"""Partial-optimality preprocessing for the maximum-value preordering problem.

Given pair values over a finite element set, the library fixes variables of
the 0/1 transitive-relation formulation to provably optimal values, using
cut, join and subset fixation conditions, and can certify every fixation
against an exhaustive oracle at small scale.
"""

from .conditions import (
    ALL_CONDITIONS,
    DEFAULT_CONDITIONS,
    Fixation,
    PipelineConfig,
    RunStats,
    SoundnessError,
    run_joint,
)
from .instance import (
    GeneratorConfig,
    Instance,
    evaluate,
    generate_synthetic,
    ingest_ego_network,
    load_instance,
    save_instance,
)
from .relations import (
    InconsistentAssignmentError,
    PartialAssignment,
    Relation,
    close,
    is_consistent,
    merge_classes,
    transitive_closure,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_CONDITIONS",
    "DEFAULT_CONDITIONS",
    "Fixation",
    "GeneratorConfig",
    "InconsistentAssignmentError",
    "Instance",
    "PartialAssignment",
    "PipelineConfig",
    "Relation",
    "RunStats",
    "SoundnessError",
    "close",
    "evaluate",
    "generate_synthetic",
    "ingest_ego_network",
    "is_consistent",
    "load_instance",
    "merge_classes",
    "run_joint",
    "save_instance",
    "transitive_closure",
    "__version__",
]

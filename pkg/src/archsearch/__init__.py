"""Search-based recovery of layered architectures from dependency graphs."""

from .errors import (
    ArchSearchError,
    ConfigError,
    ContractViolation,
    GraphParseError,
    NotFoundError,
    PinBindingError,
    PinConflictError,
    ReferentialError,
    StoreError,
)
from .experiments import (
    SCENARIOS,
    ExperimentMatrix,
    MatrixRun,
    ResultSet,
    Scenario,
    StatReport,
    descriptive_stats,
    kruskal_wallis,
    make_synthetic_system,
    problem_document,
    problem_from_document,
    run_matrix,
    stats_to_csv,
)
from .indicators import (
    Front,
    Normalizer,
    ReferenceFront,
    additive_epsilon,
    build_reference_front,
    contribution,
    generational_distance,
    hv_reference_point,
    hypervolume,
    indicator_row,
    inverted_generational_distance,
    normalize,
    spacing,
)
from .model import (
    ArchitectureSolution,
    ConceptualModel,
    DependencyGraph,
    PackageGraph,
    Pin,
    PinTable,
    TypeNode,
    bind_pins,
    graph_document,
    model_document,
    package_graph,
    parse_graph,
    parse_model,
    parse_model_for_graph,
    pin_document,
    resolve_package_slots,
)
from .objectives import (
    MEAN,
    OBJECTIVE_NAMES,
    SUM,
    BatchEvaluator,
    ObjectiveVector,
    evaluate,
)
from .operators import (
    crowding_distance,
    fast_nondominated_ranks,
    nondominated_filter,
    nondominated_mask,
)
from .search import (
    ALGORITHMS,
    FreezeMask,
    Problem,
    RunConfig,
    RunResult,
    Snapshot,
    run,
)
from .store import RunRecord, RunStore

__all__ = [
    "ArchSearchError",
    "ConfigError",
    "ContractViolation",
    "GraphParseError",
    "NotFoundError",
    "PinBindingError",
    "PinConflictError",
    "ReferentialError",
    "StoreError",
    "ArchitectureSolution",
    "ConceptualModel",
    "DependencyGraph",
    "PackageGraph",
    "Pin",
    "PinTable",
    "TypeNode",
    "bind_pins",
    "graph_document",
    "model_document",
    "package_graph",
    "parse_graph",
    "parse_model",
    "parse_model_for_graph",
    "pin_document",
    "resolve_package_slots",
    "MEAN",
    "OBJECTIVE_NAMES",
    "SUM",
    "BatchEvaluator",
    "ObjectiveVector",
    "evaluate",
    "crowding_distance",
    "fast_nondominated_ranks",
    "nondominated_filter",
    "nondominated_mask",
    "Front",
    "Normalizer",
    "ReferenceFront",
    "additive_epsilon",
    "build_reference_front",
    "contribution",
    "generational_distance",
    "hv_reference_point",
    "hypervolume",
    "indicator_row",
    "inverted_generational_distance",
    "normalize",
    "spacing",
    "ALGORITHMS",
    "FreezeMask",
    "Problem",
    "RunConfig",
    "RunResult",
    "Snapshot",
    "run",
    "SCENARIOS",
    "ExperimentMatrix",
    "MatrixRun",
    "ResultSet",
    "Scenario",
    "StatReport",
    "descriptive_stats",
    "kruskal_wallis",
    "make_synthetic_system",
    "problem_document",
    "problem_from_document",
    "run_matrix",
    "stats_to_csv",
    "RunRecord",
    "RunStore",
]

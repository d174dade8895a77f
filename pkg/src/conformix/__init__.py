"""Prediction sets for multi-class classifiers built from weighted
combinations of non-conformity scores, with coverage and efficiency
verification tooling."""

from .conformal import (
    WeightSelectionResult,
    calibrate,
    evaluate,
    quantile_index,
    run_pipeline,
    select_weight,
    split_conformal,
)
from .core import (
    LabelVector,
    PredictionSetBatch,
    ProbabilityMatrix,
    ScoreTensor,
    SimplexGrid,
    Threshold,
    WeightVector,
    grid_cardinality,
    simplex_grid,
    weighted_score,
)
from .diagnostics import (
    DeviationReport,
    deviation_report,
    gamma_deviation,
    omega_deviation,
    vc_bound,
)
from .errors import ConfigError, ConformixError, ContractViolation, DataError
from .io import (
    DatasetFile,
    ExperimentConfig,
    load_config,
    load_dataset,
    read_records,
    read_summaries,
    write_dataset,
    write_results,
)
from .metrics import (
    ExperimentResult,
    RunRecord,
    SelectionRecord,
    SummaryRow,
    avg_size,
    build_experiment_tensor,
    coverage,
    run_experiment,
    run_experiment_on,
    summarize,
)
from .scores import (
    SCORE_REGISTRY,
    ScoreMatrix,
    build_score_tensor,
    minmax_rescale,
    score_aps,
    score_by_name,
    score_rank,
    score_thr,
)
from .splitting import STRATEGIES, IndexSplit, make_split
from .synthetic import (
    OracleResult,
    SyntheticSpec,
    generate,
    oracle_at_coverage,
    oracle_weight,
)

__version__ = "1.0.0"

__all__ = [
    "ConfigError",
    "ConformixError",
    "ContractViolation",
    "DataError",
    "DatasetFile",
    "DeviationReport",
    "ExperimentConfig",
    "ExperimentResult",
    "IndexSplit",
    "LabelVector",
    "OracleResult",
    "PredictionSetBatch",
    "ProbabilityMatrix",
    "RunRecord",
    "SCORE_REGISTRY",
    "STRATEGIES",
    "ScoreMatrix",
    "ScoreTensor",
    "SelectionRecord",
    "SimplexGrid",
    "SummaryRow",
    "SyntheticSpec",
    "Threshold",
    "WeightSelectionResult",
    "WeightVector",
    "avg_size",
    "build_experiment_tensor",
    "build_score_tensor",
    "calibrate",
    "coverage",
    "deviation_report",
    "evaluate",
    "gamma_deviation",
    "generate",
    "grid_cardinality",
    "load_config",
    "load_dataset",
    "minmax_rescale",
    "omega_deviation",
    "oracle_at_coverage",
    "oracle_weight",
    "quantile_index",
    "read_records",
    "read_summaries",
    "run_experiment",
    "run_experiment_on",
    "run_pipeline",
    "score_aps",
    "score_by_name",
    "score_rank",
    "score_thr",
    "select_weight",
    "simplex_grid",
    "split_conformal",
    "summarize",
    "vc_bound",
    "weighted_score",
    "write_dataset",
    "write_results",
]

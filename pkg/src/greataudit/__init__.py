"""Per-class certified-robustness auditing for classifier logits.

The pipeline: load (or synthesise) a logit dataset, turn activation
margins into local robustness scores, aggregate them per class, and
summarise the spread with disparity metrics, finite-sample error bars,
and temperature calibration.  See the README for the CLI.
"""

from .errors import DataValidationError, InfeasibleTargetError, MetricUndefinedError
from .dataset import (
    ClassPartition,
    LogitDataset,
    ModelRecord,
    load_csv,
    load_binary,
    load_logit_dataset,
    load_registry,
    partition_by_class,
    save_binary,
    save_csv,
    save_registry,
)
from .scoring import (
    SCORE_SCALE,
    GreatScorer,
    PerClassProfile,
    ScoreConfig,
    activate,
    counters,
    decomposition_residual,
    local_score,
    local_scores,
    per_class_scores,
)
from .disparity import (
    DisparityReport,
    audit,
    best_class,
    defined_mean,
    fairness_rerank,
    fp_great,
    nrgc,
    rdi,
    vulnerability_summary,
    wcr,
)
from .stats import (
    ConcentrationBound,
    CoverageResult,
    concentration_bound,
    coverage_experiment,
    per_class_epsilon,
    ranks,
    rdi_epsilon,
    required_samples,
    spearman,
)
from .calibration import (
    AccuracyCorrelationCalibrator,
    CalibrationResult,
    GridSpec,
    RankingStabilityCalibrator,
    calibrate_accuracy,
    calibrate_from_registry,
    calibrate_stability,
    rescore_at,
)
from .synth import SyntheticSpec, generate, margin_inverse

__version__ = "0.1.0"

__all__ = [
    "DataValidationError", "MetricUndefinedError", "InfeasibleTargetError",
    "LogitDataset", "ModelRecord", "ClassPartition",
    "load_csv", "load_binary", "load_logit_dataset", "load_registry",
    "save_csv", "save_binary", "save_registry", "partition_by_class",
    "SCORE_SCALE", "ScoreConfig", "PerClassProfile", "GreatScorer",
    "activate", "local_score", "local_scores", "per_class_scores",
    "decomposition_residual", "counters",
    "DisparityReport", "audit", "rdi", "nrgc", "wcr", "best_class",
    "defined_mean", "fp_great", "vulnerability_summary", "fairness_rerank",
    "ranks", "spearman", "per_class_epsilon", "rdi_epsilon",
    "required_samples", "concentration_bound", "ConcentrationBound",
    "coverage_experiment", "CoverageResult",
    "GridSpec", "CalibrationResult", "calibrate_accuracy",
    "calibrate_from_registry", "calibrate_stability", "rescore_at",
    "AccuracyCorrelationCalibrator", "RankingStabilityCalibrator",
    "SyntheticSpec", "generate", "margin_inverse",
]

"""Personality-activity congruence modeling, wellbeing classification, and
activity-range recommendation."""

__version__ = "0.1.0"

from .core import (
    ActivityDistribution,
    CorrelationMatrix,
    DeltaVector,
    PersonalityVector,
    WeightVector,
    compute_median_personality,
    congruence_delta,
    exhibited_personality,
    normalize_activity_counts,
    weight_vector,
)
from .classifier import (
    EvaluationReport,
    FeatureSetKind,
    GaussianNBModel,
    LinearModel,
    TrainingHyper,
    auc_rank,
    binarize_swb,
    build_features,
    cohen_kappa,
    loo_evaluate,
    predict,
    train_gaussian_nb,
    train_linear_svm,
)
from .recommender import (
    ActivityRanges,
    RangeResult,
    RecommenderConfig,
    build_fill,
    enumerate_simplex,
    grid_count,
    select_high_variance,
    simulate_ranges,
)
from .validation import ContainmentResult, in_range, validate_cohort
from .artifact import TrainedArtifact, train_artifact
from .data import (
    EmaEvent,
    ParticipantRecord,
    SyntheticConfig,
    Taxonomy,
    UserRecord,
    aggregate_ema,
    bundled_correlation,
    bundled_taxonomy,
    generate_synthetic,
    load_cohort,
)

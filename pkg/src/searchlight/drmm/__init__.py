"""Neural re-ranking model: histograms, matching network, training."""

from .adadelta import AdadeltaState, adadelta_step, init_state
from .histogram import (
    MODE_COUNT,
    MODE_LOGCOUNT,
    MODE_NORMALIZED,
    HistogramConfig,
    bin_index,
    build_histogram,
    build_histograms,
)
from .model import (
    GATING_EMBEDDING,
    GATING_IDF,
    ModelParams,
    TrainingPair,
    backward,
    forward,
    gating_weights,
    hinge_loss,
    init_params,
    load_model,
    save_model,
    zeros_like_params,
)
from .training import (
    CrossValResult,
    FeatureBank,
    FoldResult,
    Hyperparams,
    QueryFeatures,
    TrainingData,
    TrainingError,
    cross_validate,
    filter_qrels,
    mean_average_precision,
    prepare_training_data,
    rank_documents_maxp,
    sample_pair_ids,
    score_units,
    train_fold,
    write_training_log,
)

__all__ = [
    "AdadeltaState",
    "CrossValResult",
    "FeatureBank",
    "FoldResult",
    "GATING_EMBEDDING",
    "GATING_IDF",
    "HistogramConfig",
    "Hyperparams",
    "MODE_COUNT",
    "MODE_LOGCOUNT",
    "MODE_NORMALIZED",
    "ModelParams",
    "QueryFeatures",
    "TrainingData",
    "TrainingError",
    "TrainingPair",
    "adadelta_step",
    "backward",
    "bin_index",
    "build_histogram",
    "build_histograms",
    "cross_validate",
    "filter_qrels",
    "forward",
    "gating_weights",
    "hinge_loss",
    "init_params",
    "init_state",
    "load_model",
    "mean_average_precision",
    "prepare_training_data",
    "rank_documents_maxp",
    "sample_pair_ids",
    "save_model",
    "score_units",
    "train_fold",
    "write_training_log",
    "zeros_like_params",
]

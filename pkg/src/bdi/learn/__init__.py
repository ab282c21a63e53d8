"""Classifiers, evaluation protocols and metrics."""

from .evaluate import (
    SweepReport,
    SweepRow,
    all_subsets,
    cross_validate,
    evaluate,
    holdout_evaluate,
    holdout_split,
    kfold_test_indices,
    parse_protocol,
    sweep_combinations,
)
from .metrics import ConfusionCounts, MetricsReport, compute_metrics
from .models import (
    KINDS,
    MalformedModel,
    TrainedModel,
    VersionError,
    load_model,
    model_from_dict,
    model_id,
    model_json,
    naive_bayes_posterior,
    predict,
    predict_many,
    save_model,
    train,
    train_decision_tree,
    train_naive_bayes,
    train_random_forest,
)

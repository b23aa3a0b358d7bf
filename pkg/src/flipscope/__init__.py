"""flipscope: diagnostics for binary classifiers on sparse binary data.

Generates instance-level explanations by minimal feature removal against a
black-box scoring model, aggregates them into decision groups with
odds-ratio significance, and serves the three-panel inspection workflow
(summary, explanation explorer, item inspector).
"""

from ._kernels import backend
from .data import SparseDataset, load_dataset, save_dataset, split_dataset
from .explain import (Explanation, ScoreCache, brute_force_min_explanation, explain_all,
                      explain_item)
from .groups import GroupStats, group_explanations, sort_groups
from .models import (LinearModel, PredictionRecord, ScoredModel, calibrate_threshold,
                     predict_items, train_logistic, train_naive_bayes)

__version__ = "0.1.0"

__all__ = [
    "backend",
    "SparseDataset", "load_dataset", "save_dataset", "split_dataset",
    "Explanation", "ScoreCache", "brute_force_min_explanation", "explain_all",
    "explain_item",
    "GroupStats", "group_explanations", "sort_groups",
    "LinearModel", "PredictionRecord", "ScoredModel", "calibrate_threshold",
    "predict_items", "train_logistic", "train_naive_bayes",
    "__version__",
]

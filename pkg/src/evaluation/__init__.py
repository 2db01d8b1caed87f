"""
Evaluation metrics, protocol runners and CSV reports
"""

from .metrics import (
    uar,
    per_class_recall,
    precision,
    recall,
    sum_counts,
    score_proposals_all_modes,
    score_final_proposals,
    pr_curve,
    average_precision,
    mean_average_precision,
    eer_threshold,
    f_beta,
    f_beta_per_trial,
    action_frame_shares,
)

__all__ = [
    "uar",
    "per_class_recall",
    "precision",
    "recall",
    "sum_counts",
    "score_proposals_all_modes",
    "score_final_proposals",
    "pr_curve",
    "average_precision",
    "mean_average_precision",
    "eer_threshold",
    "f_beta",
    "f_beta_per_trial",
    "action_frame_shares",
]

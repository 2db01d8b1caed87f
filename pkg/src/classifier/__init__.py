"""
Per-pixel body part classifier: depth features and random decision forests
"""

from .features import depth_feature, depth_features, generate_candidates
from .forest import (
    TrainingSet,
    SplitChoice,
    sample_pixels,
    entropy,
    partition,
    best_split,
    train_tree,
    train_forest,
    classify_pixel,
    classify_image,
    pixel_confusion,
    forest_node_counts,
)
from .serialization import save_forest, load_forest, forest_to_json, forest_from_json

__all__ = [
    "depth_feature",
    "depth_features",
    "generate_candidates",
    "TrainingSet",
    "SplitChoice",
    "sample_pixels",
    "entropy",
    "partition",
    "best_split",
    "train_tree",
    "train_forest",
    "classify_pixel",
    "classify_image",
    "pixel_confusion",
    "forest_node_counts",
    "save_forest",
    "load_forest",
    "forest_to_json",
    "forest_from_json",
]

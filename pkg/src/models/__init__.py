"""
Data models for the Depth Hand Tracker
"""

from .imaging import (
    BodyPart,
    CameraIntrinsics,
    DepthImage,
    LabelImage,
    LabeledImage,
    WorldPoint,
    TRACKED_PARTS,
)
from .forest import TrainingConfig, OffsetPair, SplitCandidate, DecisionForest
from .proposals import ProposalConfig, ClassifiedPixels, PartMode
from .evaluation import BinaryCounts, ConfusionMatrix, PRCurve, ScoringConfig
from .activity import Activity, Action, Step, ActivityRegion, StepOrdering
from .trial import SceneScript, TrialManifest, SynthConfig
from .run import RunConfig

__all__ = [
    "BodyPart",
    "CameraIntrinsics",
    "DepthImage",
    "LabelImage",
    "LabeledImage",
    "WorldPoint",
    "TRACKED_PARTS",
    "TrainingConfig",
    "OffsetPair",
    "SplitCandidate",
    "DecisionForest",
    "ProposalConfig",
    "ClassifiedPixels",
    "PartMode",
    "BinaryCounts",
    "ConfusionMatrix",
    "PRCurve",
    "ScoringConfig",
    "Activity",
    "Action",
    "Step",
    "ActivityRegion",
    "StepOrdering",
    "SceneScript",
    "TrialManifest",
    "SynthConfig",
    "RunConfig",
]

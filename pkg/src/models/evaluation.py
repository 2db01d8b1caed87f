"""
Evaluation models - confusion matrices, binary counts, PR curves and scoring settings
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, Field

from ..errors import InvalidInputError
from .imaging import BodyPart


@dataclass(frozen=True)
class ConfusionMatrix:
    """K x K counts; rows are ground truth, columns are predictions"""
    counts: np.ndarray
    class_names: Tuple[str, ...] = ()

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64, copy=True)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise InvalidInputError(f"Confusion matrix must be square, got {counts.shape}")
        if np.any(counts < 0):
            raise InvalidInputError("Confusion matrix entries must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def n_classes(self) -> int:
        return int(self.counts.shape[0])

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts + other.counts, self.class_names or other.class_names)

    @classmethod
    def zeros(cls, n_classes: int, class_names: Tuple[str, ...] = ()) -> "ConfusionMatrix":
        return cls(np.zeros((n_classes, n_classes), dtype=np.int64), class_names)


@dataclass(frozen=True)
class BinaryCounts:
    """True/false positive/negative tallies"""
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise InvalidInputError("Binary counts must be non-negative")

    def __add__(self, other: "BinaryCounts") -> "BinaryCounts":
        return BinaryCounts(
            tp=self.tp + other.tp,
            fp=self.fp + other.fp,
            tn=self.tn + other.tn,
            fn=self.fn + other.fn,
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def as_dict(self) -> Dict[str, int]:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


@dataclass(frozen=True)
class PRPoint:
    """One operating point of a precision-recall curve"""
    threshold: float
    precision: float
    recall: float
    counts: BinaryCounts = field(default_factory=BinaryCounts)


@dataclass(frozen=True)
class PRCurve:
    """Operating points ordered by strictly increasing threshold"""
    points: List[PRPoint]

    def __post_init__(self):
        thresholds = [p.threshold for p in self.points]
        if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
            raise InvalidInputError("PR curve thresholds must be strictly increasing")
        for point in self.points:
            if not (0.0 <= point.precision <= 1.0 and 0.0 <= point.recall <= 1.0):
                raise InvalidInputError("Precision and recall must lie in [0, 1]")

    @property
    def thresholds(self) -> np.ndarray:
        return np.array([p.threshold for p in self.points], dtype=np.float64)

    @property
    def precisions(self) -> np.ndarray:
        return np.array([p.precision for p in self.points], dtype=np.float64)

    @property
    def recalls(self) -> np.ndarray:
        return np.array([p.recall for p in self.points], dtype=np.float64)


class ScoringConfig(BaseModel):
    """Distances and rules used to score part proposals"""
    distance_thresholds: Dict[str, float] = Field(
        default_factory=lambda: {"left_hand": 0.05, "right_hand": 0.05, "head": 0.10},
        description="Per-part correctness radius Delta_p in meters",
    )
    conventional_scoring: bool = Field(
        default=False,
        description="Score modes proposed for absent parts as FP instead of FN",
    )
    grid_points: int = Field(default=101, ge=2, description="Start-threshold grid size over [0, 1]")
    beta: float = Field(default=0.5, gt=0, description="F-measure weight for part proposals")

    model_config = {"frozen": True}

    def delta_for(self, part: BodyPart) -> float:
        return self.distance_thresholds[part.name.lower()]

    def threshold_grid(self) -> np.ndarray:
        return np.round(np.linspace(0.0, 1.0, self.grid_points), 10)

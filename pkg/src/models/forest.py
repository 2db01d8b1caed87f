"""
Decision forest models - split candidates, tree nodes, training configuration
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from .imaging import BodyPart, NUM_CLASSES


class TrainingConfig(BaseModel):
    """Hyperparameters for training a decision forest"""
    n_trees: int = Field(default=3, ge=1, description="Number of trees T")
    max_depth: int = Field(default=20, ge=0, description="Maximum tree depth D_max")
    min_gain: float = Field(default=0.05, ge=0.0, description="Minimum information gain g_min in bits")
    samples_per_image: int = Field(default=4000, ge=1, description="Pixels N sampled per training image")
    theta_max: float = Field(default=500.0, gt=0, description="Maximum offset component in pixel-meters")
    tau_max: float = Field(default=1.0, gt=0, description="Maximum threshold magnitude in meters")
    count_offsets: int = Field(default=3000, ge=1, description="Offset pairs per candidate pool")
    count_thresholds: int = Field(default=100, ge=1, description="Thresholds per candidate pool")
    image_fraction: float = Field(default=1.0, gt=0, le=1.0, description="Fraction of training images used")
    rng_seed: int = Field(default=0, ge=0, description="Seed for all training randomness")

    model_config = {"frozen": True}

    @classmethod
    def optimal(cls, **overrides: Any) -> "TrainingConfig":
        """Parameters giving the best holdout recall in the one-at-a-time sweep"""
        values: Dict[str, Any] = {
            "max_depth": 12,
            "min_gain": 0.0,
            "theta_max": 250.0,
            "samples_per_image": 3000,
        }
        values.update(overrides)
        return cls(**values)


@dataclass(frozen=True)
class OffsetPair:
    """Feature offsets ``u`` and ``v`` in pixel-meters"""
    u: Tuple[float, float]
    v: Tuple[float, float]

    def swapped(self) -> "OffsetPair":
        return OffsetPair(u=self.v, v=self.u)


@dataclass(frozen=True)
class SplitCandidate:
    """Splitting criterion phi = (theta, tau)"""
    offsets: OffsetPair
    tau: float


@dataclass(frozen=True)
class CandidatePool:
    """Cross product of offset pairs and thresholds stored as arrays

    Candidate ``i`` pairs offset row ``i // n_thresholds`` with threshold
    ``i % n_thresholds``.
    """
    offsets: np.ndarray     # (n_offsets, 4) as u_x, u_y, v_x, v_y
    thresholds: np.ndarray  # (n_thresholds,)

    @property
    def n_offsets(self) -> int:
        return int(self.offsets.shape[0])

    @property
    def n_thresholds(self) -> int:
        return int(self.thresholds.shape[0])

    def __len__(self) -> int:
        return self.n_offsets * self.n_thresholds

    def candidate(self, index: int) -> SplitCandidate:
        offset_index, threshold_index = divmod(index, self.n_thresholds)
        ux, uy, vx, vy = (float(v) for v in self.offsets[offset_index])
        return SplitCandidate(
            offsets=OffsetPair(u=(ux, uy), v=(vx, vy)),
            tau=float(self.thresholds[threshold_index]),
        )

    def __iter__(self) -> Iterator[SplitCandidate]:
        for index in range(len(self)):
            yield self.candidate(index)


@dataclass(frozen=True)
class TrainingSample:
    """A labeled foreground pixel of one training image"""
    image_id: int
    px: Tuple[int, int]
    label: BodyPart


@dataclass(frozen=True)
class SampleSet:
    """Column-wise storage of training samples"""
    image_ids: np.ndarray
    xs: np.ndarray
    ys: np.ndarray
    labels: np.ndarray  # class indices 0..NUM_CLASSES-1

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    def __iter__(self) -> Iterator[TrainingSample]:
        for i in range(len(self)):
            yield TrainingSample(
                image_id=int(self.image_ids[i]),
                px=(int(self.xs[i]), int(self.ys[i])),
                label=BodyPart(int(self.labels[i]) + 1),
            )

    def subset(self, mask_or_index: np.ndarray) -> "SampleSet":
        return SampleSet(
            image_ids=self.image_ids[mask_or_index],
            xs=self.xs[mask_or_index],
            ys=self.ys[mask_or_index],
            labels=self.labels[mask_or_index],
        )

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=NUM_CLASSES).astype(np.int64)

    @classmethod
    def from_samples(cls, samples: List[TrainingSample]) -> "SampleSet":
        return cls(
            image_ids=np.array([s.image_id for s in samples], dtype=np.int64),
            xs=np.array([s.px[0] for s in samples], dtype=np.int64),
            ys=np.array([s.px[1] for s in samples], dtype=np.int64),
            labels=np.array([s.label.class_index for s in samples], dtype=np.int64),
        )

    @classmethod
    def concatenate(cls, parts: List["SampleSet"]) -> "SampleSet":
        if not parts:
            empty = np.zeros(0, dtype=np.int64)
            return cls(empty, empty.copy(), empty.copy(), empty.copy())
        return cls(
            image_ids=np.concatenate([p.image_ids for p in parts]),
            xs=np.concatenate([p.xs for p in parts]),
            ys=np.concatenate([p.ys for p in parts]),
            labels=np.concatenate([p.labels for p in parts]),
        )


@dataclass
class LeafNode:
    """Terminal node storing a class PDF"""
    pdf: np.ndarray
    counts: Optional[np.ndarray] = None


@dataclass
class SplitNode:
    """Interior node routing pixels left when the feature is below tau"""
    candidate: SplitCandidate
    left: "TreeNode"
    right: "TreeNode"
    gain: float = 0.0


TreeNode = Union[LeafNode, SplitNode]


@dataclass
class DecisionForest:
    """Ensemble of trained trees plus the configuration that produced them"""
    trees: List[TreeNode]
    training_config: TrainingConfig
    class_names: List[str] = field(default_factory=list)
    _compiled: Optional[list] = field(default=None, repr=False, compare=False)

    @property
    def n_trees(self) -> int:
        return len(self.trees)

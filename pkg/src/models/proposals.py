"""
Part proposal models - classified pixels, modes and mean-shift configuration
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

import numpy as np
from pydantic import BaseModel, Field, field_validator

from .imaging import BodyPart, NUM_CLASSES, TRACKED_PARTS, WorldPoint


def _per_part(hands: float, head: float) -> Dict[str, float]:
    return {"left_hand": hands, "right_hand": hands, "head": head}


class ProposalConfig(BaseModel):
    """Seed thresholds, bandwidths and stopping rules for mode seeking"""
    start_thresholds: Dict[str, float] = Field(
        default_factory=lambda: {"left_hand": 0.65, "right_hand": 0.6, "head": 0.95},
        description="Seed probability threshold phi_p per part",
    )
    bandwidths: Dict[str, float] = Field(
        default_factory=lambda: _per_part(0.05, 0.10),
        description="Gaussian bandwidth h_p per part in meters",
    )
    merge_radius: float = Field(default=0.01, gt=0, description="Converged points closer than this merge")
    max_iterations: int = Field(default=100, ge=1)
    convergence_epsilon: float = Field(default=1e-4, gt=0, description="Stop when a step is shorter (m)")
    max_seeds: int = Field(default=500, ge=1, description="Seeds beyond this are subsampled")
    samples_per_frame: int = Field(default=3000, ge=1, description="Foreground pixels N classified per frame")
    weighted_denominator: bool = Field(
        default=True,
        description="Weight the kernel sum in the mean-shift denominator",
    )
    rng_seed: int = Field(default=0, ge=0)

    model_config = {"frozen": True}

    @field_validator("start_thresholds")
    @classmethod
    def _check_thresholds(cls, value: Dict[str, float]) -> Dict[str, float]:
        for part, phi in value.items():
            if not 0.0 <= phi <= 1.0:
                raise ValueError(f"start threshold for {part} must lie in [0, 1], got {phi}")
        return value

    @field_validator("bandwidths")
    @classmethod
    def _check_bandwidths(cls, value: Dict[str, float]) -> Dict[str, float]:
        for part, h in value.items():
            if h <= 0:
                raise ValueError(f"bandwidth for {part} must be positive, got {h}")
        return value

    def threshold_for(self, part: BodyPart) -> float:
        return self.start_thresholds[part.name.lower()]

    def bandwidth_for(self, part: BodyPart) -> float:
        return self.bandwidths[part.name.lower()]

    def with_thresholds(self, thresholds: Dict[str, float]) -> "ProposalConfig":
        merged = dict(self.start_thresholds)
        merged.update(thresholds)
        return self.model_copy(update={"start_thresholds": merged})


@dataclass(frozen=True)
class ClassifiedPixel:
    """A foreground pixel lifted to world space with its class PDF"""
    world: WorldPoint
    pdf: np.ndarray
    depth: float


@dataclass(frozen=True)
class ClassifiedPixels:
    """Column-wise storage of classified pixels for one frame"""
    points: np.ndarray  # (n, 3) world positions
    pdfs: np.ndarray    # (n, NUM_CLASSES)
    depths: np.ndarray  # (n,)

    def __len__(self) -> int:
        return int(self.depths.shape[0])

    def __getitem__(self, index: int) -> ClassifiedPixel:
        return ClassifiedPixel(
            world=WorldPoint.from_array(self.points[index]),
            pdf=self.pdfs[index],
            depth=float(self.depths[index]),
        )

    @classmethod
    def from_pixels(cls, pixels) -> "ClassifiedPixels":
        pixels = list(pixels)
        if not pixels:
            return cls.empty()
        return cls(
            points=np.array([p.world.to_list() for p in pixels], dtype=np.float64),
            pdfs=np.array([p.pdf for p in pixels], dtype=np.float64),
            depths=np.array([p.depth for p in pixels], dtype=np.float64),
        )

    @classmethod
    def empty(cls) -> "ClassifiedPixels":
        return cls(
            points=np.zeros((0, 3)),
            pdfs=np.zeros((0, NUM_CLASSES)),
            depths=np.zeros(0),
        )


@dataclass(frozen=True)
class PartMode:
    """A converged density mode for one part"""
    part: BodyPart
    position: WorldPoint
    confidence: float


PartModes = Dict[BodyPart, list]


def empty_part_modes() -> PartModes:
    return {part: [] for part in TRACKED_PARTS}

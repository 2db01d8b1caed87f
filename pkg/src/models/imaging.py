"""
Depth and label raster models, camera intrinsics and world points
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, Field

from ..errors import InvalidInputError

# Largest range a valid pixel may carry, in meters
D_MAX = 10.0

# Depth read by feature offsets that land off-image or on invalid pixels
BG_DEPTH = 100.0

# Sensor resolution
SENSOR_WIDTH = 640
SENSOR_HEIGHT = 480


class BodyPart(IntEnum):
    """Per-pixel label values stored in label rasters"""
    BACKGROUND = 0
    LEFT_HAND = 1
    RIGHT_HAND = 2
    HEAD = 3
    BODY = 4

    @property
    def class_index(self) -> int:
        """Position of this part in a class probability vector"""
        if self is BodyPart.BACKGROUND:
            raise InvalidInputError("background has no class index")
        return int(self) - 1


# Foreground classes in PDF order
CLASSES: List[BodyPart] = [BodyPart.LEFT_HAND, BodyPart.RIGHT_HAND, BodyPart.HEAD, BodyPart.BODY]
CLASS_NAMES: List[str] = [part.name.lower() for part in CLASSES]
NUM_CLASSES = len(CLASSES)

# Parts that receive position proposals
TRACKED_PARTS: List[BodyPart] = [BodyPart.LEFT_HAND, BodyPart.RIGHT_HAND, BodyPart.HEAD]


def part_from_name(name: str) -> BodyPart:
    """Resolve a lower-case class name such as ``left_hand``"""
    try:
        return BodyPart[name.upper()]
    except KeyError:
        raise InvalidInputError(f"Unknown body part: {name}") from None


@dataclass(frozen=True)
class DepthImage:
    """Row-major range raster in meters; 0 marks an invalid pixel"""
    depths: np.ndarray

    def __post_init__(self):
        depths = np.array(self.depths, dtype=np.float64, copy=True)
        if depths.ndim != 2:
            raise InvalidInputError(f"Depth raster must be 2D, got shape {depths.shape}")
        if depths.shape[0] == 0 or depths.shape[1] == 0:
            raise InvalidInputError("Depth raster has a zero dimension")
        if not np.all(np.isfinite(depths)):
            raise InvalidInputError("Depth raster contains non-finite values")
        if np.any(depths < 0) or np.any(depths > D_MAX):
            raise InvalidInputError(f"Depth values must be 0 (invalid) or in (0, {D_MAX}] m")
        depths.setflags(write=False)
        object.__setattr__(self, "depths", depths)

    @property
    def width(self) -> int:
        return int(self.depths.shape[1])

    @property
    def height(self) -> int:
        return int(self.depths.shape[0])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.depths.shape

    def valid_mask(self) -> np.ndarray:
        """Boolean raster of pixels carrying a depth reading"""
        return self.depths > 0

    def depth_at(self, px: Tuple[int, int]) -> float:
        """Depth at pixel ``(x, y)``; 0 when invalid"""
        x, y = px
        return float(self.depths[y, x])

    def contains(self, px: Tuple[int, int]) -> bool:
        x, y = px
        return 0 <= x < self.width and 0 <= y < self.height

    def __eq__(self, other) -> bool:
        if not isinstance(other, DepthImage):
            return NotImplemented
        return bool(np.array_equal(self.depths, other.depths))


@dataclass(frozen=True)
class LabelImage:
    """Per-pixel part labels over :class:`BodyPart` values"""
    labels: np.ndarray

    def __post_init__(self):
        labels = np.array(self.labels, copy=True)
        if labels.ndim != 2:
            raise InvalidInputError(f"Label raster must be 2D, got shape {labels.shape}")
        if labels.shape[0] == 0 or labels.shape[1] == 0:
            raise InvalidInputError("Label raster has a zero dimension")
        if labels.size and (labels.min() < 0 or labels.max() > int(BodyPart.BODY)):
            raise InvalidInputError("Label values must lie in {0,1,2,3,4}")
        labels = labels.astype(np.uint8)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def width(self) -> int:
        return int(self.labels.shape[1])

    @property
    def height(self) -> int:
        return int(self.labels.shape[0])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.labels.shape

    def check_paired(self, img: DepthImage) -> None:
        """Raise unless this raster pairs with ``img``"""
        if self.shape != img.shape:
            raise InvalidInputError(
                f"Label raster {self.shape} does not match depth raster {img.shape}"
            )
        stray = (self.labels != BodyPart.BACKGROUND) & ~img.valid_mask()
        if np.any(stray):
            raise InvalidInputError(
                f"{int(stray.sum())} labeled pixels have no valid depth"
            )

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabelImage):
            return NotImplemented
        return bool(np.array_equal(self.labels, other.labels))


class CameraIntrinsics(BaseModel):
    """Pinhole intrinsics of the depth camera"""
    fx: float = Field(default=571.4, gt=0, description="Horizontal focal length in pixels")
    fy: float = Field(default=571.4, gt=0, description="Vertical focal length in pixels")
    cx: float = Field(default=319.5, description="Principal point column in pixels")
    cy: float = Field(default=239.5, description="Principal point row in pixels")

    model_config = {"frozen": True}

    def check_bounds(self, width: int, height: int) -> None:
        """Raise unless the principal point lies inside a ``width`` x ``height`` image"""
        if not (0 <= self.cx < width and 0 <= self.cy < height):
            raise InvalidInputError(
                f"Principal point ({self.cx}, {self.cy}) outside {width}x{height} image"
            )

    def scaled(self, factor: float) -> "CameraIntrinsics":
        """Intrinsics for the same optics sampled at ``factor`` times the resolution"""
        return CameraIntrinsics(
            fx=self.fx * factor,
            fy=self.fy * factor,
            cx=(self.cx + 0.5) * factor - 0.5,
            cy=(self.cy + 0.5) * factor - 0.5,
        )


@dataclass(frozen=True)
class WorldPoint:
    """Camera-centered world position in meters (z along the optical axis)"""
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    def distance_to(self, other: "WorldPoint") -> float:
        return float(np.linalg.norm(self.as_array() - other.as_array()))

    def to_list(self) -> List[float]:
        return [self.x, self.y, self.z]

    @classmethod
    def from_array(cls, values) -> "WorldPoint":
        x, y, z = (float(v) for v in values)
        return cls(x, y, z)


@dataclass(frozen=True)
class LabeledImage:
    """A segmented depth image paired with its part labels"""
    depth: DepthImage
    labels: LabelImage

    def __post_init__(self):
        self.labels.check_paired(self.depth)

    def labeled_pixels(self) -> Tuple[np.ndarray, np.ndarray]:
        """Column and row indices of every labeled pixel in row-major order"""
        ys, xs = np.nonzero(self.labels.labels != BodyPart.BACKGROUND)
        return xs.astype(np.int64), ys.astype(np.int64)

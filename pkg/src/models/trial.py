"""
Trial models - scripted scenes and on-disk trial manifests
"""

from __future__ import annotations

from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator

from .activity import Action, Activity, Step
from .imaging import CameraIntrinsics, SENSOR_HEIGHT, SENSOR_WIDTH

Vec3 = Tuple[float, float, float]


class PartRadii(BaseModel):
    """Ellipsoid semi-axes of the rigid body parts in meters"""
    head: Vec3 = (0.09, 0.11, 0.10)
    hand: Vec3 = (0.045, 0.06, 0.03)
    torso: Vec3 = (0.22, 0.13, 0.15)
    arm: float = Field(default=0.04, gt=0, description="Arm capsule radius")

    model_config = {"frozen": True}


class FrameScript(BaseModel):
    """Articulated pose and annotations for one frame; absent parts are None"""
    head: Optional[Vec3] = None
    left_hand: Optional[Vec3] = None
    right_hand: Optional[Vec3] = None
    torso: Optional[Vec3] = None
    left_shoulder: Optional[Vec3] = None
    right_shoulder: Optional[Vec3] = None
    radii: PartRadii = Field(default_factory=PartRadii)
    floor_depth: float = Field(default=2.5, gt=0, le=10.0)
    action: Action = Action.WASH
    left_activity: Activity = Activity.AWAY
    right_activity: Activity = Activity.AWAY

    @property
    def activity(self) -> Activity:
        """Activity of the engaged hand, preferring the right hand"""
        if self.right_activity is not Activity.AWAY:
            return self.right_activity
        return self.left_activity


class SceneScript(BaseModel):
    """A scripted trial: per-frame poses plus the steps the script completes"""
    template: List[str] = Field(default_factory=list)
    frames: List[FrameScript] = Field(min_length=1)
    step_flags: Dict[Step, bool] = Field(default_factory=dict)
    intended_activations: List[Activity] = Field(default_factory=list)


class FrameRecord(BaseModel):
    """Manifest entry for one stored frame"""
    index: int
    depth_file: str
    label_file: str
    action: Action
    activity: Activity
    left_activity: Activity = Activity.AWAY
    right_activity: Activity = Activity.AWAY
    part_centers: Dict[str, Optional[Vec3]] = Field(
        default_factory=dict,
        description="Center of mass of each labeled part in world meters",
    )
    hand_positions: Dict[str, Optional[Vec3]] = Field(
        default_factory=dict,
        description="Scripted hand ellipsoid centers in world meters",
    )


class TrialManifest(BaseModel):
    """Contents of a trial directory's manifest.json"""
    trial_id: str
    frame_count: int = Field(ge=0)
    intrinsics: CameraIntrinsics
    width: int = Field(gt=0)
    height: int = Field(gt=0)
    background_threshold: float = Field(gt=0, le=10.0)
    rng_seed: int = 0
    template: List[str] = Field(default_factory=list)
    step_flags: Dict[Step, bool] = Field(default_factory=dict)
    frames: List[FrameRecord] = Field(default_factory=list)


class SynthConfig(BaseModel):
    """Rendering and scripting parameters for synthetic trials"""
    noise_sigma: float = Field(default=0.003, ge=0, description="Gaussian depth noise in meters")
    resolution_scale: float = Field(
        default=1.0, gt=0, le=1.0,
        description="Fraction of the 640 x 480 sensor resolution to render",
    )
    floor_depth: float = Field(default=2.5, gt=0, le=10.0, description="Background plane range in meters")
    background_threshold: float = Field(default=2.4, gt=0, le=10.0)
    dwell_frames: Tuple[int, int] = Field(
        default=(6, 10), description="Inclusive range of frames a hand rests in a region"
    )
    transit_frames: int = Field(default=2, ge=0, description="Intermediate frames between poses")
    walk_frames: int = Field(default=5, ge=1)
    turn_frames: int = Field(default=4, ge=1)

    model_config = {"frozen": True}

    @field_validator("dwell_frames")
    @classmethod
    def _check_dwell(cls, value: Tuple[int, int]) -> Tuple[int, int]:
        low, high = value
        if low < 3 or high < low:
            raise ValueError(f"dwell_frames must satisfy 3 <= low <= high, got {value}")
        return value

    @property
    def width(self) -> int:
        return int(round(SENSOR_WIDTH * self.resolution_scale))

    @property
    def height(self) -> int:
        return int(round(SENSOR_HEIGHT * self.resolution_scale))

    def intrinsics(self, base: Optional[CameraIntrinsics] = None) -> CameraIntrinsics:
        return (base or CameraIntrinsics()).scaled(self.resolution_scale)

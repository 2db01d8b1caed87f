"""
Task activity models - activity regions, hand-washing steps and precedence
"""

from __future__ import annotations

from enum import Enum
from typing import Dict, List, Tuple

from pydantic import BaseModel, Field, field_validator

from .imaging import WorldPoint


class Activity(str, Enum):
    """Task activities a hand can be engaged in"""
    AWAY = "away"
    SOAP = "soap"
    TAP = "tap"
    WATER = "water"
    SINK = "sink"
    TOWEL = "towel"


class Action(str, Enum):
    """Whole-body action category of a frame"""
    WALK = "walk"
    WASH = "wash"
    TOWEL = "towel"
    TURN = "turn"


class Step(str, Enum):
    """Hand-washing task steps"""
    TURN_ON_WATER = "turn_on_water"
    GET_SOAP = "get_soap"
    RINSE_HANDS = "rinse_hands"
    TURN_OFF_WATER = "turn_off_water"
    DRY_HANDS = "dry_hands"


STEPS: List[Step] = list(Step)


class ActivityRegion(BaseModel):
    """Axis-aligned spheroid in world space associated with one activity"""
    activity: Activity
    center: Tuple[float, float, float] = Field(description="Spheroid center in meters")
    radii: Tuple[float, float, float] = Field(description="Semi-axes rx, ry, rz in meters")

    model_config = {"frozen": True}

    @field_validator("activity")
    @classmethod
    def _not_away(cls, value: Activity) -> Activity:
        if value is Activity.AWAY:
            raise ValueError("'away' is the default activity and cannot own a region")
        return value

    @field_validator("radii")
    @classmethod
    def _positive_radii(cls, value: Tuple[float, float, float]) -> Tuple[float, float, float]:
        if min(value) <= 0:
            raise ValueError(f"region radii must be positive, got {value}")
        return value

    def normalized_distance_sq(self, point: WorldPoint) -> float:
        """Squared ellipsoidal distance; the region contains points at 1.0 or less"""
        return sum(
            ((p - c) / r) ** 2
            for p, c, r in zip(point.to_list(), self.center, self.radii)
        )

    def contains(self, point: WorldPoint) -> bool:
        return self.normalized_distance_sq(point) <= 1.0


class StepOrdering(BaseModel):
    """Precedence relation: each step lists the steps that must complete first"""
    requires: Dict[Step, List[Step]] = Field(
        default_factory=lambda: {
            Step.TURN_ON_WATER: [],
            Step.GET_SOAP: [],
            Step.RINSE_HANDS: [Step.TURN_ON_WATER, Step.GET_SOAP],
            Step.TURN_OFF_WATER: [Step.RINSE_HANDS],
            Step.DRY_HANDS: [Step.RINSE_HANDS],
        }
    )

    model_config = {"frozen": True}

    def prerequisites(self, step: Step) -> List[Step]:
        return list(self.requires.get(step, []))

"""
Task activity tracking - spheroid regions, persistence rule and step completion
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union
import json
import logging

import numpy as np
from pydantic import ValidationError

from ..config import resolve_config_path, settings
from ..errors import RegionConfigError
from ..models.activity import Activity, ActivityRegion, Step, StepOrdering, STEPS
from ..models.evaluation import BinaryCounts
from ..models.imaging import WorldPoint

logger = logging.getLogger(__name__)

# Consecutive containing frames before an activity is considered active
PERSISTENCE_FRAMES = 3

HANDS = ("left", "right")

_ACTIVITY_STEPS: Dict[Activity, Step] = {
    Activity.SOAP: Step.GET_SOAP,
    Activity.WATER: Step.RINSE_HANDS,
    Activity.TOWEL: Step.DRY_HANDS,
}


def locate(hand: Optional[WorldPoint], regions: Sequence[ActivityRegion]) -> Activity:
    """
    Activity whose spheroid contains ``hand``; boundary points are inside

    Returns:
        The containing region's activity, or ``away`` when the hand is outside
        every region or has no proposal
    """
    if hand is None:
        return Activity.AWAY
    for region in regions:
        if region.contains(hand):
            return region.activity
    return Activity.AWAY


# Touching spheroids share a point; slack absorbs rounding at tangency
OVERLAP_TOLERANCE = 1e-9


def _min_normalized_distance_sq(a: ActivityRegion, b: ActivityRegion) -> float:
    """
    Smallest squared ellipsoidal distance of ``b`` over the solid spheroid ``a``

    In ``a``'s unit-ball coordinates the objective is a weighted distance to
    ``b``'s center; the constrained minimizer solves the secular equation in
    the Lagrange multiplier, which is monotone and found by bisection.
    """
    ra, rb = np.asarray(a.radii, dtype=np.float64), np.asarray(b.radii, dtype=np.float64)
    s2 = (ra / rb) ** 2
    p = (np.asarray(b.center, dtype=np.float64) - np.asarray(a.center, dtype=np.float64)) / ra
    if float(p @ p) <= 1.0:
        return 0.0
    lo, hi = 0.0, float(np.linalg.norm(s2 * p))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        u = s2 * p / (s2 + mid)
        if float(u @ u) > 1.0:
            lo = mid
        else:
            hi = mid
    u = s2 * p / (s2 + hi)
    u /= np.linalg.norm(u)
    return float((s2 * (u - p) ** 2).sum())


def regions_overlap(a: ActivityRegion, b: ActivityRegion) -> bool:
    """Whether two spheroids share a point, boundaries included"""
    return _min_normalized_distance_sq(a, b) <= 1.0 + OVERLAP_TOLERANCE


def validate_regions(regions: Sequence[ActivityRegion]) -> List[ActivityRegion]:
    """Reject duplicate activities and overlapping spheroids"""
    seen = set()
    for region in regions:
        if region.activity in seen:
            raise RegionConfigError(f"Duplicate region for activity '{region.activity.value}'")
        seen.add(region.activity)
    for i, a in enumerate(regions):
        for b in regions[i + 1:]:
            if regions_overlap(a, b):
                raise RegionConfigError(
                    f"Regions '{a.activity.value}' and '{b.activity.value}' overlap"
                )
    return list(regions)


def load_regions(path: Union[str, Path]) -> List[ActivityRegion]:
    """
    Load activity spheroids from a JSON list of {activity, center, radii}

    Raises:
        RegionConfigError: unreadable file, invalid entry, duplicate or overlap
    """
    try:
        entries = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise RegionConfigError(f"Cannot read region config {path}: {e}") from e
    if not isinstance(entries, list):
        raise RegionConfigError(f"{path}: region config must be a JSON list")
    try:
        regions = [ActivityRegion(**entry) for entry in entries]
    except (TypeError, ValidationError) as e:
        raise RegionConfigError(f"{path}: invalid region entry: {e}") from e
    regions = validate_regions(regions)
    logger.info(f"Loaded {len(regions)} activity regions from {path}")
    return regions


def validate_ordering(ordering: StepOrdering) -> StepOrdering:
    """Reject self-dependencies and cycles in the precedence relation"""
    state: Dict[Step, int] = {}

    def visit(step: Step, trail: Tuple[Step, ...]) -> None:
        if state.get(step) == 2:
            return
        if state.get(step) == 1:
            cycle = " -> ".join(s.value for s in trail + (step,))
            raise RegionConfigError(f"Step ordering has a cycle: {cycle}")
        state[step] = 1
        for required in ordering.prerequisites(step):
            visit(required, trail + (step,))
        state[step] = 2

    for step in STEPS:
        visit(step, ())
    return ordering


def load_step_ordering(path: Union[str, Path]) -> StepOrdering:
    """Load the step precedence relation from ``{"requires": {step: [steps]}}``"""
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
        ordering = StepOrdering(**document)
    except (OSError, json.JSONDecodeError) as e:
        raise RegionConfigError(f"Cannot read step ordering {path}: {e}") from e
    except (TypeError, ValidationError) as e:
        raise RegionConfigError(f"{path}: invalid step ordering: {e}") from e
    return validate_ordering(ordering)


@dataclass
class HandStreak:
    """Region the hand has occupied and for how many consecutive frames"""
    region: Activity = Activity.AWAY
    count: int = 0


class ActivityState:
    """
    Per-hand persistence filter over located activities

    A region's activity becomes active on the third consecutive frame that
    region contains the hand and stays active while the hand remains inside.
    """

    def __init__(self, regions: Sequence[ActivityRegion], persistence: int = PERSISTENCE_FRAMES):
        self.regions = list(regions)
        self.persistence = persistence
        self.streaks: Dict[str, HandStreak] = {hand: HandStreak() for hand in HANDS}
        self.frame = -1
        self._activations: List[Activity] = []

    def _advance(self, hand: str, located: Activity) -> Activity:
        streak = self.streaks[hand]
        if located is Activity.AWAY:
            streak.region, streak.count = Activity.AWAY, 0
        elif located is streak.region:
            streak.count += 1
        else:
            streak.region, streak.count = located, 1
        if streak.region is not Activity.AWAY and streak.count >= self.persistence:
            if streak.count == self.persistence and streak.region not in self._activations:
                self._activations.append(streak.region)
            return streak.region
        return Activity.AWAY

    def update(
        self,
        left: Optional[WorldPoint],
        right: Optional[WorldPoint],
    ) -> Tuple[Activity, Activity]:
        """
        Consume one frame of hand positions; None means no proposal

        Returns:
            (left, right) active activities for this frame
        """
        self.frame += 1
        self._activations = []
        left_active = self._advance("left", locate(left, self.regions))
        right_active = self._advance("right", locate(right, self.regions))
        return left_active, right_active

    @property
    def activations(self) -> List[Activity]:
        """Activities that became active on the latest frame, left hand first"""
        return list(self._activations)

    def reset(self) -> None:
        self.streaks = {hand: HandStreak() for hand in HANDS}
        self.frame = -1
        self._activations = []


class StepTracker:
    """Completion flags for the hand-washing steps of one trial"""

    def __init__(self, ordering: Optional[StepOrdering] = None):
        self.ordering = ordering or StepOrdering()
        self.completed: Dict[Step, bool] = {step: False for step in STEPS}

    def candidate_step(self, activity: Activity) -> Optional[Step]:
        """Step an activation of ``activity`` would complete, if any"""
        if activity is Activity.TAP:
            if self.completed[Step.RINSE_HANDS] and self.completed[Step.TURN_ON_WATER]:
                return Step.TURN_OFF_WATER
            return Step.TURN_ON_WATER
        return _ACTIVITY_STEPS.get(activity)

    def observe(self, activity: Activity) -> Optional[Step]:
        """
        Apply one activation

        Returns:
            The step newly completed by this activation, or None
        """
        step = self.candidate_step(activity)
        if step is None or self.completed[step]:
            return None
        if not all(self.completed[required] for required in self.ordering.prerequisites(step)):
            logger.debug(f"Step {step.value} blocked by precedence")
            return None
        self.completed[step] = True
        return step

    @property
    def completed_count(self) -> int:
        return sum(self.completed.values())

    def flags(self) -> Dict[Step, bool]:
        return dict(self.completed)


def track_steps(
    activations: Iterable[Activity],
    ordering: Optional[StepOrdering] = None,
) -> Dict[Step, bool]:
    """Completion flags after replaying a temporally ordered activation stream"""
    tracker = StepTracker(ordering)
    for activity in activations:
        tracker.observe(activity)
    return tracker.flags()


def trial_confusion(tracked: Dict[Step, bool], truth: Dict[Step, bool]) -> BinaryCounts:
    """Per-step agreement between tracked and ground-truth completion"""
    tp = fp = tn = fn = 0
    for step in STEPS:
        got, want = bool(tracked.get(step, False)), bool(truth.get(step, False))
        if got and want:
            tp += 1
        elif got:
            fp += 1
        elif want:
            fn += 1
        else:
            tn += 1
    return BinaryCounts(tp=tp, fp=fp, tn=tn, fn=fn)


@dataclass(frozen=True)
class TimelineRow:
    """One frame of an activity timeline"""
    frame: int
    left_activity: Activity
    right_activity: Activity
    steps_completed: int
    activations: Tuple[Activity, ...] = field(default_factory=tuple)

    def as_dict(self) -> Dict[str, Union[int, str]]:
        return {
            "frame": self.frame,
            "left_activity": self.left_activity.value,
            "right_activity": self.right_activity.value,
            "steps_completed": self.steps_completed,
        }


def timeline_rows(
    hand_positions: Iterable[Tuple[Optional[WorldPoint], Optional[WorldPoint]]],
    regions: Sequence[ActivityRegion],
    ordering: Optional[StepOrdering] = None,
) -> Tuple[List[TimelineRow], Dict[Step, bool]]:
    """
    Run the persistence filter and step tracker over a trial

    Args:
        hand_positions: Per-frame (left, right) hand positions, None when absent
        regions: Activity spheroids
        ordering: Step precedence, default ordering when omitted

    Returns:
        Timeline rows and the final step completion flags
    """
    state = ActivityState(regions)
    steps = StepTracker(ordering)
    rows: List[TimelineRow] = []
    for left, right in hand_positions:
        left_active, right_active = state.update(left, right)
        for activity in state.activations:
            steps.observe(activity)
        rows.append(
            TimelineRow(
                frame=state.frame,
                left_activity=left_active,
                right_activity=right_active,
                steps_completed=steps.completed_count,
                activations=tuple(state.activations),
            )
        )
    return rows, steps.flags()


def default_regions() -> List[ActivityRegion]:
    """Regions from the configured ``REGIONS_PATH``"""
    return load_regions(resolve_config_path(settings.regions_path))


def default_step_ordering() -> StepOrdering:
    """Ordering from the configured ``STEP_ORDERING_PATH``"""
    return load_step_ordering(resolve_config_path(settings.step_ordering_path))

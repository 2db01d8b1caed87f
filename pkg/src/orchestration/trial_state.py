"""
Trial State Management - Tracks per-trial progress through the tracking pipeline
"""

from typing import Dict, List, Optional, Sequence
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
import logging

from ..models.activity import Action, ActivityRegion, Step, StepOrdering
from ..models.evaluation import BinaryCounts
from ..models.imaging import BodyPart, WorldPoint
from ..tracking.activity import ActivityState, StepTracker, TimelineRow

logger = logging.getLogger(__name__)


class TrialPhase(str, Enum):
    """Phases of a tracked trial"""
    PENDING = "pending"
    TRACKING = "tracking"
    COMPLETED = "completed"
    FAILED = "failed"


@dataclass
class TrialState:
    """Tracks the state of one trial while its frames are processed"""
    trial_id: str
    frame_count: int
    activity_state: ActivityState
    step_tracker: StepTracker

    phase: TrialPhase = TrialPhase.PENDING
    frames_processed: int = 0

    # Per-frame results
    timeline: List[TimelineRow] = field(default_factory=list)
    finals: List[Dict[BodyPart, Optional[WorldPoint]]] = field(default_factory=list)
    truths: List[Dict[BodyPart, Optional[WorldPoint]]] = field(default_factory=list)
    frame_counts: List[Dict[BodyPart, BinaryCounts]] = field(default_factory=list)
    actions: List[Action] = field(default_factory=list)
    completed_at_frame: Dict[Step, int] = field(default_factory=dict)

    # Time management
    started_at: Optional[datetime] = None
    completed_at: Optional[datetime] = None

    error: Optional[str] = None

    def get_progress_percentage(self) -> float:
        """Fraction of frames processed"""
        if self.frame_count == 0:
            return 0.0
        return self.frames_processed / self.frame_count

    def get_elapsed_seconds(self) -> float:
        if not self.started_at:
            return 0.0
        end = self.completed_at or datetime.utcnow()
        return (end - self.started_at).total_seconds()

    @property
    def step_flags(self) -> Dict[Step, bool]:
        return self.step_tracker.flags()


class TrialStateManager:
    """Manages tracking state for multiple trials"""

    def __init__(self, regions: Sequence[ActivityRegion], ordering: Optional[StepOrdering] = None):
        """
        Initialize state manager

        Args:
            regions: Activity spheroids shared by every trial
            ordering: Step precedence, default ordering when omitted
        """
        self.regions = list(regions)
        self.ordering = ordering or StepOrdering()
        self.states: Dict[str, TrialState] = {}
        logger.info("Initialized TrialStateManager")

    def create_state(self, trial_id: str, frame_count: int) -> TrialState:
        """
        Create a fresh state for a trial

        Args:
            trial_id: Trial identifier
            frame_count: Frames the trial holds

        Returns:
            New TrialState in the tracking phase
        """
        state = TrialState(
            trial_id=trial_id,
            frame_count=frame_count,
            activity_state=ActivityState(self.regions),
            step_tracker=StepTracker(self.ordering),
            phase=TrialPhase.TRACKING,
            started_at=datetime.utcnow(),
        )
        self.states[trial_id] = state
        logger.info(f"Created trial state for {trial_id} ({frame_count} frames)")
        return state

    def get_state(self, trial_id: str) -> Optional[TrialState]:
        return self.states.get(trial_id)

    def delete_state(self, trial_id: str):
        if trial_id in self.states:
            del self.states[trial_id]
            logger.debug(f"Deleted state for trial {trial_id}")

    def record_frame(
        self,
        state: TrialState,
        finals: Dict[BodyPart, Optional[WorldPoint]],
        truth: Dict[BodyPart, Optional[WorldPoint]],
        counts: Dict[BodyPart, BinaryCounts],
        action: Action,
    ) -> TimelineRow:
        """
        Advance the activity filter and step tracker by one frame

        Args:
            state: Trial being tracked
            finals: Final proposal per part
            truth: Ground-truth part centers
            counts: Final-proposal scores of the frame
            action: Ground-truth action label

        Returns:
            Timeline row of the frame
        """
        left, right = finals.get(BodyPart.LEFT_HAND), finals.get(BodyPart.RIGHT_HAND)
        left_active, right_active = state.activity_state.update(left, right)
        frame = state.activity_state.frame
        for activity in state.activity_state.activations:
            step = state.step_tracker.observe(activity)
            if step is not None:
                state.completed_at_frame[step] = frame
                logger.debug(f"Trial {state.trial_id}: {step.value} complete at frame {frame}")
        row = TimelineRow(
            frame=frame,
            left_activity=left_active,
            right_activity=right_active,
            steps_completed=state.step_tracker.completed_count,
            activations=tuple(state.activity_state.activations),
        )
        state.timeline.append(row)
        state.finals.append(dict(finals))
        state.truths.append(dict(truth))
        state.frame_counts.append(dict(counts))
        state.actions.append(action)
        state.frames_processed += 1
        return row

    def complete(self, state: TrialState):
        state.phase = TrialPhase.COMPLETED
        state.completed_at = datetime.utcnow()
        logger.info(
            f"Trial {state.trial_id} complete: {state.step_tracker.completed_count} steps "
            f"in {state.frames_processed} frames ({state.get_elapsed_seconds():.1f}s)"
        )

    def fail(self, state: TrialState, reason: str):
        state.phase = TrialPhase.FAILED
        state.completed_at = datetime.utcnow()
        state.error = reason
        logger.error(f"Trial {state.trial_id} failed: {reason}")

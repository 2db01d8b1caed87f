"""
Trial Orchestrator - Runs proposals, activity mapping and step tracking over stored trials
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union
import logging

import numpy as np

from ..errors import DatasetError, TrackerError
from ..evaluation.metrics import score_final_frame
from ..models.activity import Action, ActivityRegion, Step, StepOrdering
from ..models.evaluation import BinaryCounts, ScoringConfig
from ..models.forest import DecisionForest
from ..models.imaging import BodyPart, WorldPoint
from ..models.proposals import ProposalConfig
from ..synth.dataset import iter_frames, load_trial
from ..tracking.activity import TimelineRow, trial_confusion
from ..tracking.proposals import final_proposals, propose_parts
from .trial_state import TrialState, TrialStateManager

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrialResult:
    """Outcome of tracking one trial"""
    trial_id: str
    tracked_flags: Dict[Step, bool]
    truth_flags: Dict[Step, bool]
    step_counts: BinaryCounts
    timeline: List[TimelineRow]
    frame_counts: List[Dict[BodyPart, BinaryCounts]]
    actions: List[Action]

    def part_counts(self, action: Optional[Action] = None) -> Dict[BodyPart, BinaryCounts]:
        """Final-proposal counts summed over frames, optionally of one action"""
        totals: Dict[BodyPart, BinaryCounts] = {}
        for counts, frame_action in zip(self.frame_counts, self.actions):
            if action is not None and frame_action is not action:
                continue
            for part, c in counts.items():
                totals[part] = totals.get(part, BinaryCounts()) + c
        return totals


def frame_seed(rng_seed: int, frame_index: int) -> int:
    """Pixel-sampling seed of one frame"""
    return int(np.random.SeedSequence([rng_seed, frame_index]).generate_state(1)[0])


class TrialOrchestrator:
    """
    Runs the per-frame tracking pipeline over trial directories

    For every frame: propose part positions, score the final proposals against
    ground truth, map hands to activities and advance the step tracker.
    """

    def __init__(
        self,
        forest: DecisionForest,
        regions: Sequence[ActivityRegion],
        proposal_config: Optional[ProposalConfig] = None,
        scoring_config: Optional[ScoringConfig] = None,
        ordering: Optional[StepOrdering] = None,
        state_manager: Optional[TrialStateManager] = None,
    ):
        """
        Initialize trial orchestrator

        Args:
            forest: Trained body part classifier
            regions: Activity spheroids
            proposal_config: Mode seeking parameters and start thresholds
            scoring_config: Distance thresholds for final-proposal scoring
            ordering: Step precedence
            state_manager: Optional state manager (creates new if None)
        """
        self.forest = forest
        self.proposal_config = proposal_config or ProposalConfig()
        self.scoring_config = scoring_config or ScoringConfig()
        self.state_manager = state_manager or TrialStateManager(regions, ordering)
        logger.info("Initialized TrialOrchestrator")

    def run_trial(self, trial_dir: Union[str, Path]) -> TrialResult:
        """
        Track one stored trial

        Args:
            trial_dir: Directory holding manifest.json and rasters

        Returns:
            TrialResult with tracked and ground-truth step flags
        """
        manifest = load_trial(trial_dir)
        if manifest.frame_count == 0:
            raise DatasetError(f"Trial {manifest.trial_id} has no frames")
        state = self.state_manager.create_state(manifest.trial_id, manifest.frame_count)
        try:
            for frame in iter_frames(trial_dir, manifest):
                modes = propose_parts(
                    self.forest,
                    frame.foreground,
                    manifest.intrinsics,
                    self.proposal_config.samples_per_frame,
                    self.proposal_config,
                    rng_seed=frame_seed(self.proposal_config.rng_seed, frame.record.index),
                )
                finals = final_proposals(modes)
                truth = frame.truth
                counts = score_final_frame(finals, truth, self.scoring_config)
                self.state_manager.record_frame(state, finals, truth, counts, frame.record.action)
            self.state_manager.complete(state)
            return self._result(state, manifest.step_flags)
        except TrackerError as e:
            self.state_manager.fail(state, str(e))
            raise
        finally:
            self.state_manager.delete_state(manifest.trial_id)

    def _result(self, state: TrialState, truth_flags: Dict[Step, bool]) -> TrialResult:
        tracked = state.step_flags
        return TrialResult(
            trial_id=state.trial_id,
            tracked_flags=tracked,
            truth_flags=dict(truth_flags),
            step_counts=trial_confusion(tracked, truth_flags),
            timeline=list(state.timeline),
            frame_counts=list(state.frame_counts),
            actions=list(state.actions),
        )

    def run_trials(
        self,
        trial_dirs: Sequence[Union[str, Path]],
        threads: int = 1,
    ) -> Tuple[List[TrialResult], List[str]]:
        """
        Track several trials, skipping those whose data cannot be read

        Args:
            trial_dirs: Trial directories
            threads: Worker threads; trials are independent

        Returns:
            (results in input order, directories that failed)
        """
        def attempt(trial_dir) -> Optional[TrialResult]:
            try:
                return self.run_trial(trial_dir)
            except DatasetError as e:
                logger.error(f"Skipping trial {trial_dir}: {e}", exc_info=True)
                return None

        workers = max(1, min(threads, len(trial_dirs)))
        if workers == 1:
            outcomes = [attempt(d) for d in trial_dirs]
        else:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                outcomes = list(executor.map(attempt, trial_dirs))
        results = [r for r in outcomes if r is not None]
        failed = [str(d) for d, r in zip(trial_dirs, outcomes) if r is None]
        logger.info(f"Tracked {len(results)} trials, {len(failed)} failed")
        return results, failed


def hand_replay(
    trial_dir: Union[str, Path],
    regions: Sequence[ActivityRegion],
    ordering: Optional[StepOrdering] = None,
) -> Dict[Step, bool]:
    """Step flags from replaying the scripted hand centers without the classifier"""
    manifest = load_trial(trial_dir)
    manager = TrialStateManager(regions, ordering)
    state = manager.create_state(manifest.trial_id, manifest.frame_count)
    for record in manifest.frames:
        hands: Dict[BodyPart, Optional[WorldPoint]] = {}
        for part, key in ((BodyPart.LEFT_HAND, "left_hand"), (BodyPart.RIGHT_HAND, "right_hand")):
            position = record.hand_positions.get(key)
            hands[part] = WorldPoint(*position) if position is not None else None
        manager.record_frame(state, hands, {}, {}, record.action)
    manager.complete(state)
    return state.step_flags

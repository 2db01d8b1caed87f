"""
Part proposals and task activity tracking
"""

from .proposals import (
    ModeSeeker,
    select_seeds,
    pixel_weight,
    mean_shift,
    classify_frame,
    modes_for_pixels,
    propose_parts,
    final_proposals,
)
from .activity import (
    ActivityState,
    StepTracker,
    TimelineRow,
    locate,
    load_regions,
    load_step_ordering,
    track_steps,
    trial_confusion,
    timeline_rows,
)

__all__ = [
    "ModeSeeker",
    "select_seeds",
    "pixel_weight",
    "mean_shift",
    "classify_frame",
    "modes_for_pixels",
    "propose_parts",
    "final_proposals",
    "ActivityState",
    "StepTracker",
    "TimelineRow",
    "locate",
    "load_regions",
    "load_step_ordering",
    "track_steps",
    "trial_confusion",
    "timeline_rows",
]

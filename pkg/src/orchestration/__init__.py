"""
Orchestration Layer - Runs trials through the tracking pipeline
"""

from .trial_state import TrialPhase, TrialState, TrialStateManager
from .trial_orchestrator import TrialOrchestrator, TrialResult, frame_seed, hand_replay

__all__ = [
    "TrialPhase",
    "TrialState",
    "TrialStateManager",
    "TrialOrchestrator",
    "TrialResult",
    "frame_seed",
    "hand_replay",
]

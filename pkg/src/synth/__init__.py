"""
Synthetic overhead depth scenes and scripted hand-washing trials
"""

from .renderer import RenderedFrame, render_frame, scene_primitives
from .scripting import TEMPLATES, script_trial, template_names, random_template
from .dataset import (
    TrialFrame,
    write_trial,
    write_trials,
    trial_seed,
    load_trial,
    load_frame,
    iter_frames,
    load_labeled_images,
    part_truth,
)

__all__ = [
    "RenderedFrame",
    "render_frame",
    "scene_primitives",
    "TEMPLATES",
    "script_trial",
    "template_names",
    "random_template",
    "TrialFrame",
    "write_trial",
    "write_trials",
    "trial_seed",
    "load_trial",
    "load_frame",
    "iter_frames",
    "load_labeled_images",
    "part_truth",
]

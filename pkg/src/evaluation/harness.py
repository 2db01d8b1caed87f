"""
Evaluation protocol - per-pixel UAR, proposal PR curves and per-action F-measures
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union
import logging

from ..classifier.forest import pixel_confusion, train_forest
from ..errors import DatasetError, InvalidInputError, UndefinedMetricError
from ..models.activity import Action
from ..models.evaluation import BinaryCounts, ConfusionMatrix, PRCurve, ScoringConfig
from ..models.forest import DecisionForest, TrainingConfig
from ..models.imaging import BodyPart, CLASS_NAMES, LabeledImage, TRACKED_PARTS, WorldPoint
from ..models.proposals import ClassifiedPixels, ProposalConfig
from ..synth.dataset import iter_frames, load_trial
from ..tracking.proposals import ModeSeeker, classify_frame
from .metrics import (
    average_precision, eer_threshold, f_beta, f_beta_per_trial, mean_average_precision,
    pr_curve, score_part_modes, sum_counts, uar,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass
class HoldoutFrame:
    """Classified pixels and ground truth of one holdout frame"""
    trial_id: str
    index: int
    action: Action
    pixels: ClassifiedPixels
    truth: Dict[BodyPart, Optional[WorldPoint]]


@dataclass
class EvaluationSummary:
    """Everything the evaluate command reports"""
    confusion: ConfusionMatrix
    uar: float
    curves: Dict[BodyPart, PRCurve]
    aps: Dict[BodyPart, float]
    eers: Dict[BodyPart, float]
    mean_ap: float
    frames: int


def classify_holdout(
    forest: DecisionForest,
    trial_dirs: Sequence[PathLike],
    proposal_config: ProposalConfig,
    seed_for: Callable[[int], int],
) -> List[HoldoutFrame]:
    """Classify sampled foreground pixels of every holdout frame with foreground"""
    frames: List[HoldoutFrame] = []
    for trial_dir in trial_dirs:
        manifest = load_trial(trial_dir)
        for frame in iter_frames(trial_dir, manifest):
            if not frame.foreground.valid_mask().any():
                continue
            pixels = classify_frame(
                forest, frame.foreground, manifest.intrinsics,
                proposal_config.samples_per_frame, seed_for(frame.record.index),
            )
            frames.append(HoldoutFrame(manifest.trial_id, frame.record.index, frame.record.action, pixels, frame.truth))
    return frames


def proposal_pr_curves(
    frames: Sequence[HoldoutFrame],
    proposal_config: ProposalConfig,
    scoring_config: ScoringConfig,
) -> Dict[BodyPart, PRCurve]:
    """
    PR curve per tracked part over the start-threshold grid

    Mean-shift ascents are cached per frame so each seed converges once across
    the whole grid.
    """
    grid = scoring_config.threshold_grid()
    curves: Dict[BodyPart, PRCurve] = {}
    for part in TRACKED_PARTS:
        seekers = [
            ModeSeeker(frame.pixels, part, proposal_config) if len(frame.pixels) else None
            for frame in frames
        ]
        delta = scoring_config.delta_for(part)

        def score(phi: float) -> BinaryCounts:
            return sum_counts(
                score_part_modes(
                    seeker.modes_at_threshold(phi) if seeker is not None else [],
                    frame.truth.get(part),
                    delta,
                    scoring_config.conventional_scoring,
                )
                for seeker, frame in zip(seekers, frames)
            )

        curves[part] = pr_curve(score, grid)
        logger.info(f"PR curve for {part.name.lower()}: AP {average_precision(curves[part]):.3f}")
    return curves


def evaluate_forest(
    forest: DecisionForest,
    holdout_images: Sequence[LabeledImage],
    holdout_frames: Sequence[HoldoutFrame],
    proposal_config: ProposalConfig,
    scoring_config: ScoringConfig,
    max_pixels_per_image: Optional[int] = None,
    rng_seed: int = 0,
) -> EvaluationSummary:
    """Per-pixel UAR plus proposal AP, mAP and EER thresholds"""
    if not holdout_images:
        raise DatasetError("Holdout set has no frame with foreground")
    cm = pixel_confusion(forest, holdout_images, max_pixels_per_image, rng_seed)
    cm = ConfusionMatrix(cm.counts, tuple(CLASS_NAMES))
    curves = proposal_pr_curves(holdout_frames, proposal_config, scoring_config)
    aps = {part: average_precision(curve) for part, curve in curves.items()}
    eers = {part: eer_threshold(curve) for part, curve in curves.items()}
    return EvaluationSummary(
        confusion=cm,
        uar=uar(cm),
        curves=curves,
        aps=aps,
        eers=eers,
        mean_ap=mean_average_precision(aps),
        frames=len(holdout_frames),
    )


def holdout_uar(
    forest: DecisionForest,
    holdout_images: Sequence[LabeledImage],
    max_pixels_per_image: Optional[int] = None,
    rng_seed: int = 0,
) -> float:
    return uar(pixel_confusion(forest, holdout_images, max_pixels_per_image, rng_seed))


SWEEP_PARAMETERS = (
    "max_depth", "min_gain", "theta_max", "samples_per_image", "tau_max",
    "n_trees", "count_offsets", "count_thresholds", "image_fraction",
)


def sweep_parameter(
    parameter: str,
    values: Sequence[float],
    base: TrainingConfig,
    training_images: Sequence[LabeledImage],
    holdout_images: Sequence[LabeledImage],
    threads: int = 1,
    max_pixels_per_image: Optional[int] = None,
) -> List[Dict[str, float]]:
    """
    Retrain once per value, varying only ``parameter``

    Returns:
        Rows ``{"param_value", "uar"}`` in input order
    """
    if parameter not in SWEEP_PARAMETERS:
        raise InvalidInputError(f"Unknown sweep parameter '{parameter}', expected one of {SWEEP_PARAMETERS}")
    field_type = type(getattr(base, parameter))
    rows = []
    for value in values:
        config = base.model_copy(update={parameter: field_type(value)})
        config = TrainingConfig(**config.model_dump())
        forest = train_forest(training_images, config, threads)
        score = holdout_uar(forest, holdout_images, max_pixels_per_image, config.rng_seed)
        logger.info(f"Sweep {parameter}={value}: UAR {score:.4f}")
        rows.append({"param_value": float(value), "uar": score})
    return rows


def action_part_scores(
    per_trial_counts: Sequence[Dict[Action, Dict[BodyPart, BinaryCounts]]],
    beta: float,
) -> Dict[Action, Dict[BodyPart, float]]:
    """
    Mean per-trial F-measure for each action and part

    Trials where the measure is undefined are left out of the mean; a cell with
    no defined trial is NaN.
    """
    scores: Dict[Action, Dict[BodyPart, float]] = {}
    for action in Action:
        for part in TRACKED_PARTS:
            counts = [trial[action][part] for trial in per_trial_counts if part in trial.get(action, {})]
            try:
                value = f_beta_per_trial(counts, beta).mean
            except UndefinedMetricError:
                value = float("nan")
            scores.setdefault(action, {})[part] = value
    return scores


def overall_part_scores(
    per_trial_counts: Sequence[Dict[BodyPart, BinaryCounts]],
    beta: float,
) -> Dict[BodyPart, float]:
    """F-measure per part over all frames pooled"""
    scores = {}
    for part in TRACKED_PARTS:
        pooled = sum_counts(trial.get(part, BinaryCounts()) for trial in per_trial_counts)
        try:
            scores[part] = f_beta(pooled, beta)
        except UndefinedMetricError:
            scores[part] = float("nan")
    return scores

"""
Evaluation metrics - UAR, proposal scoring, PR curves, AP/mAP, EER and F-measures
"""

from collections import Counter
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Mapping, Optional, Sequence, Union

import logging
import numpy as np

from ..errors import InvalidInputError, UndefinedMetricError
from ..models.activity import Action
from ..models.evaluation import BinaryCounts, ConfusionMatrix, PRCurve, PRPoint, ScoringConfig
from ..models.imaging import BodyPart, TRACKED_PARTS, WorldPoint
from ..models.proposals import PartMode, PartModes
from ..models.trial import TrialManifest

logger = logging.getLogger(__name__)

GroundTruth = Mapping[BodyPart, Optional[WorldPoint]]
FinalProposals = Mapping[BodyPart, Optional[WorldPoint]]


def per_class_recall(cm: ConfusionMatrix) -> np.ndarray:
    """Diagonal over row sums; NaN for classes with no ground-truth pixels"""
    rows = cm.counts.sum(axis=1).astype(np.float64)
    diagonal = np.diag(cm.counts).astype(np.float64)
    recalls = np.full(cm.n_classes, np.nan)
    present = rows > 0
    recalls[present] = diagonal[present] / rows[present]
    return recalls


def uar(cm: ConfusionMatrix) -> float:
    """Unweighted average recall over classes that occur in the ground truth"""
    recalls = per_class_recall(cm)
    if np.all(np.isnan(recalls)):
        raise UndefinedMetricError("UAR is undefined for an empty confusion matrix")
    return float(np.nanmean(recalls))


def precision(counts: BinaryCounts, zero_division: Optional[float] = None) -> float:
    """tp / (tp + fp); ``zero_division`` is returned instead of raising when undefined"""
    denominator = counts.tp + counts.fp
    if denominator == 0:
        if zero_division is None:
            raise UndefinedMetricError("Precision is undefined without positive predictions")
        return zero_division
    return counts.tp / denominator


def recall(counts: BinaryCounts, zero_division: Optional[float] = None) -> float:
    """tp / (tp + fn); ``zero_division`` is returned instead of raising when undefined"""
    denominator = counts.tp + counts.fn
    if denominator == 0:
        if zero_division is None:
            raise UndefinedMetricError("Recall is undefined without positives")
        return zero_division
    return counts.tp / denominator


def sum_counts(counts: Iterable[BinaryCounts]) -> BinaryCounts:
    total = BinaryCounts()
    for c in counts:
        total = total + c
    return total


def _check_deltas(config: ScoringConfig) -> None:
    for part in TRACKED_PARTS:
        if config.delta_for(part) <= 0:
            raise InvalidInputError(f"Distance threshold for {part.name.lower()} must be positive")


def score_part_modes(
    found: Sequence[PartMode],
    center: Optional[WorldPoint],
    delta: float,
    conventional: bool = False,
) -> BinaryCounts:
    """
    Score every mode proposed for one part in one frame

    A present part earns TP for its first mode within ``delta``, FP for every
    other mode, and FN when no mode is in range. An absent part earns TN with
    no modes; otherwise each mode scores FN, or FP when ``conventional``.
    """
    if center is None:
        if not found:
            return BinaryCounts(tn=1)
        return BinaryCounts(fp=len(found)) if conventional else BinaryCounts(fn=len(found))
    hit = next((i for i, mode in enumerate(found) if mode.position.distance_to(center) <= delta), None)
    if hit is None:
        return BinaryCounts(fp=len(found), fn=1)
    return BinaryCounts(tp=1, fp=len(found) - 1)


def score_frame_modes(
    modes: PartModes,
    truth: GroundTruth,
    config: ScoringConfig,
) -> Dict[BodyPart, BinaryCounts]:
    return {
        part: score_part_modes(
            modes.get(part, []), truth.get(part), config.delta_for(part), config.conventional_scoring
        )
        for part in TRACKED_PARTS
    }


def score_proposals_all_modes(
    modes_per_frame: Sequence[PartModes],
    truths: Sequence[GroundTruth],
    config: ScoringConfig,
) -> Dict[BodyPart, BinaryCounts]:
    """
    Sum all-mode scores over frames

    Args:
        modes_per_frame: Per-frame modes by part, highest confidence first
        truths: Per-frame ground-truth part centers, None when absent
        config: Distance thresholds and absent-part rule

    Returns:
        BinaryCounts per tracked part
    """
    if len(modes_per_frame) != len(truths):
        raise InvalidInputError("Modes and ground truth must cover the same frames")
    _check_deltas(config)
    totals = {part: BinaryCounts() for part in TRACKED_PARTS}
    for modes, truth in zip(modes_per_frame, truths):
        for part, counts in score_frame_modes(modes, truth, config).items():
            totals[part] = totals[part] + counts
    return totals


def score_final_frame(
    finals: FinalProposals,
    truth: GroundTruth,
    config: ScoringConfig,
) -> Dict[BodyPart, BinaryCounts]:
    """Score one frame's final proposals"""
    result: Dict[BodyPart, BinaryCounts] = {}
    for part in TRACKED_PARTS:
        proposal = finals.get(part)
        center = truth.get(part)
        if center is None:
            if proposal is None:
                result[part] = BinaryCounts(tn=1)
            elif config.conventional_scoring:
                result[part] = BinaryCounts(fp=1)
            else:
                result[part] = BinaryCounts(fn=1)
        elif proposal is None:
            result[part] = BinaryCounts(fn=1)
        elif proposal.distance_to(center) <= config.delta_for(part):
            result[part] = BinaryCounts(tp=1)
        else:
            result[part] = BinaryCounts(fp=1)
    return result


def score_final_proposals(
    finals_per_frame: Sequence[FinalProposals],
    truths: Sequence[GroundTruth],
    config: ScoringConfig,
) -> Dict[BodyPart, BinaryCounts]:
    """Sum final-proposal scores over frames; see :func:`score_final_frame`"""
    if len(finals_per_frame) != len(truths):
        raise InvalidInputError("Proposals and ground truth must cover the same frames")
    _check_deltas(config)
    totals = {part: BinaryCounts() for part in TRACKED_PARTS}
    for finals, truth in zip(finals_per_frame, truths):
        for part, counts in score_final_frame(finals, truth, config).items():
            totals[part] = totals[part] + counts
    return totals


def pr_curve(score: Callable[[float], BinaryCounts], grid: Sequence[float]) -> PRCurve:
    """
    Precision and recall of a scorer at each start threshold

    Precision with no predictions is 1 and recall with no positives is 0.

    Raises:
        UndefinedMetricError: no true positive at any threshold
    """
    thresholds = [float(t) for t in grid]
    if not thresholds or thresholds[0] > 0.0 or thresholds[-1] < 1.0:
        raise InvalidInputError("Threshold grid must cover [0, 1]")
    points = []
    for phi in thresholds:
        counts = score(phi)
        points.append(
            PRPoint(
                threshold=phi,
                precision=precision(counts, zero_division=1.0),
                recall=recall(counts, zero_division=0.0),
                counts=counts,
            )
        )
    if all(p.counts.tp == 0 for p in points):
        raise UndefinedMetricError("PR curve has no true positives at any threshold")
    return PRCurve(points)


def average_precision(curve: PRCurve) -> float:
    """Trapezoidal area under precision over recall, anchored at recall 0"""
    if not curve.points:
        raise UndefinedMetricError("Average precision of an empty curve")
    recalls = curve.recalls
    precisions = curve.precisions
    order = np.lexsort((-precisions, recalls))
    recalls = np.concatenate([[0.0], recalls[order]])
    precisions = np.concatenate([[precisions[order][0]], precisions[order]])
    return float(np.sum(np.diff(recalls) * (precisions[1:] + precisions[:-1]) / 2.0))


def mean_average_precision(aps: Union[Mapping[object, float], Sequence[float]]) -> float:
    values = list(aps.values()) if isinstance(aps, Mapping) else list(aps)
    if not values:
        raise UndefinedMetricError("mAP of no parts")
    return float(np.mean(values))


def eer_threshold(curve: PRCurve) -> float:
    """Grid threshold where |precision - recall| is smallest, lowest on ties"""
    if not curve.points:
        raise UndefinedMetricError("EER threshold of an empty curve")
    gaps = np.abs(curve.precisions - curve.recalls)
    return float(curve.thresholds[int(np.argmin(gaps))])


def f_beta(counts: BinaryCounts, beta: float) -> float:
    """(1 + b^2) P R / (b^2 P + R)"""
    if beta <= 0:
        raise InvalidInputError(f"beta must be positive, got {beta}")
    p = precision(counts)
    r = recall(counts)
    denominator = beta ** 2 * p + r
    if denominator == 0:
        raise UndefinedMetricError("F-measure is undefined when precision and recall are 0")
    return (1 + beta ** 2) * p * r / denominator


@dataclass(frozen=True)
class TrialAverage:
    """Unweighted mean of a per-trial measure"""
    mean: float
    trials: int
    excluded: int


def f_beta_per_trial(counts_per_trial: Sequence[BinaryCounts], beta: float) -> TrialAverage:
    """
    Mean F-measure over trials, skipping trials where it is undefined

    Raises:
        UndefinedMetricError: every trial is undefined
    """
    scores = []
    excluded = 0
    for counts in counts_per_trial:
        try:
            scores.append(f_beta(counts, beta))
        except UndefinedMetricError:
            excluded += 1
    if not scores:
        raise UndefinedMetricError("F-measure undefined for every trial")
    if excluded:
        logger.debug(f"Excluded {excluded} trials with undefined F-measure")
    return TrialAverage(mean=float(np.mean(scores)), trials=len(scores), excluded=excluded)


def action_frame_shares(manifests: Iterable[TrialManifest]) -> Dict[Action, float]:
    """Fraction of frames carrying each action label"""
    tally = Counter(record.action for manifest in manifests for record in manifest.frames)
    total = sum(tally.values())
    if total == 0:
        return {action: 0.0 for action in Action}
    return {action: tally.get(action, 0) / total for action in Action}

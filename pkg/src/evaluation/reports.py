"""
CSV report writers for evaluation and tracking results
"""

from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Union

import logging
import numpy as np
import pandas as pd

from ..models.activity import Action, STEPS, Step
from ..models.evaluation import BinaryCounts, ConfusionMatrix, PRCurve
from ..models.imaging import BodyPart
from ..tracking.activity import TimelineRow
from ..errors import InvalidInputError, UndefinedMetricError
from .metrics import f_beta, per_class_recall, precision, recall

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# Fixed float formatting keeps reruns byte-identical
FLOAT_FORMAT = "%.6f"


def _write(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def _safe(metric, counts: BinaryCounts) -> float:
    try:
        return metric(counts)
    except UndefinedMetricError:
        return float("nan")


def pr_curve_frame(curves: Mapping[BodyPart, PRCurve]) -> pd.DataFrame:
    """Long table ``part,threshold,precision,recall,tp,fp,tn,fn``"""
    rows = [
        {
            "part": part.name.lower(),
            "threshold": point.threshold,
            "precision": point.precision,
            "recall": point.recall,
            **point.counts.as_dict(),
        }
        for part, curve in curves.items()
        for point in curve.points
    ]
    return pd.DataFrame(rows, columns=["part", "threshold", "precision", "recall", "tp", "fp", "tn", "fn"])


def write_pr_curves(curves: Mapping[BodyPart, PRCurve], out_dir: PathLike) -> List[Path]:
    """One ``pr_<part>.csv`` per part with header ``threshold,precision,recall``"""
    frame = pr_curve_frame(curves)
    paths = []
    for part in curves:
        subset = frame[frame["part"] == part.name.lower()][["threshold", "precision", "recall"]]
        paths.append(_write(subset, Path(out_dir) / f"pr_{part.name.lower()}.csv"))
    return paths


def write_ap_summary(
    aps: Mapping[BodyPart, float],
    eers: Mapping[BodyPart, float],
    path: PathLike,
) -> Path:
    """Header ``part,ap,eer_threshold``; a final ``mAP`` row carries the mean AP"""
    rows = [
        {"part": part.name.lower(), "ap": aps[part], "eer_threshold": eers[part]}
        for part in aps
    ]
    rows.append({"part": "mAP", "ap": float(np.mean(list(aps.values()))), "eer_threshold": np.nan})
    return _write(pd.DataFrame(rows, columns=["part", "ap", "eer_threshold"]), path)


def write_confusion(cm: ConfusionMatrix, path: PathLike) -> Path:
    """Header ``truth,<class>...``; rows are ground truth"""
    names = list(cm.class_names) or [str(i) for i in range(cm.n_classes)]
    frame = pd.DataFrame(cm.counts, columns=names)
    frame.insert(0, "truth", names)
    return _write(frame, path)


def write_uar_report(cm: ConfusionMatrix, uar_value: float, path: PathLike) -> Path:
    """Header ``class,recall``; a final ``uar`` row"""
    names = list(cm.class_names) or [str(i) for i in range(cm.n_classes)]
    recalls = per_class_recall(cm)
    rows = [{"class": name, "recall": r} for name, r in zip(names, recalls)]
    rows.append({"class": "uar", "recall": uar_value})
    return _write(pd.DataFrame(rows, columns=["class", "recall"]), path)


def write_sweep(results: Sequence[Dict[str, float]], path: PathLike) -> Path:
    """Header ``param_value,uar``"""
    return _write(pd.DataFrame(list(results), columns=["param_value", "uar"]), path)


def write_timeline(rows: Sequence[TimelineRow], path: PathLike) -> Path:
    """Header ``frame,left_activity,right_activity,steps_completed``"""
    frame = pd.DataFrame(
        [row.as_dict() for row in rows],
        columns=["frame", "left_activity", "right_activity", "steps_completed"],
    )
    return _write(frame, path)


def _count_row(label_key: str, label: str, counts: BinaryCounts) -> Dict[str, object]:
    return {
        label_key: label,
        **counts.as_dict(),
        "precision": _safe(precision, counts),
        "recall": _safe(recall, counts),
        "f1": _safe(lambda c: f_beta(c, 1.0), counts),
    }


def step_confusion_frame(
    per_trial: Mapping[str, BinaryCounts],
    flags: Optional[Mapping[str, Mapping[Step, bool]]] = None,
) -> pd.DataFrame:
    """
    Per-trial step confusion rows plus an ``all`` aggregate row

    Columns are ``trial,tp,fp,tn,fn,precision,recall,f1`` followed by one
    tracked-flag column per step when ``flags`` is given.
    """
    rows = []
    total = BinaryCounts()
    for trial_id, counts in per_trial.items():
        row = _count_row("trial", trial_id, counts)
        if flags is not None:
            for step in STEPS:
                row[step.value] = int(bool(flags[trial_id].get(step, False)))
        rows.append(row)
        total = total + counts
    aggregate = _count_row("trial", "all", total)
    if flags is not None:
        for step in STEPS:
            aggregate[step.value] = sum(int(bool(f.get(step, False))) for f in flags.values())
    rows.append(aggregate)
    return pd.DataFrame(rows)


def write_step_confusion(
    per_trial: Mapping[str, BinaryCounts],
    path: PathLike,
    flags: Optional[Mapping[str, Mapping[Step, bool]]] = None,
) -> Path:
    return _write(step_confusion_frame(per_trial, flags), path)


def write_action_part_report(
    scores: Mapping[Action, Mapping[BodyPart, float]],
    overall: Mapping[BodyPart, float],
    validation_shares: Mapping[Action, float],
    path: PathLike,
    training_shares: Optional[Mapping[Action, float]] = None,
) -> Path:
    """
    Per action x part mean F0.5 with frame shares

    Header ``action,part,f_half,validation_share,training_share``; the ``all``
    action rows score every validation frame together.
    """
    rows = []
    for action in Action:
        for part, value in scores.get(action, {}).items():
            rows.append({
                "action": action.value,
                "part": part.name.lower(),
                "f_half": value,
                "validation_share": validation_shares.get(action, 0.0),
                "training_share": (training_shares or {}).get(action, np.nan),
            })
    for part, value in overall.items():
        rows.append({
            "action": "all",
            "part": part.name.lower(),
            "f_half": value,
            "validation_share": 1.0,
            "training_share": 1.0 if training_shares else np.nan,
        })
    columns = ["action", "part", "f_half", "validation_share", "training_share"]
    return _write(pd.DataFrame(rows, columns=columns), path)


def write_proposal_counts(
    counts: Mapping[BodyPart, BinaryCounts],
    thresholds: Mapping[BodyPart, float],
    path: PathLike,
) -> Path:
    """Header ``part,threshold,tp,fp,tn,fn``"""
    rows = [
        {"part": part.name.lower(), "threshold": thresholds.get(part, np.nan), **c.as_dict()}
        for part, c in counts.items()
    ]
    return _write(pd.DataFrame(rows, columns=["part", "threshold", "tp", "fp", "tn", "fn"]), path)


def read_eer_thresholds(path: PathLike) -> Dict[str, float]:
    """
    Start thresholds per part from a summary written by ``write_ap_summary``

    Raises:
        InvalidInputError: required columns missing or a threshold outside [0, 1]
    """
    frame = pd.read_csv(path)
    if not {"part", "eer_threshold"} <= set(frame.columns):
        raise InvalidInputError(f"{path}: expected columns part, eer_threshold")
    thresholds = {}
    for part, value in zip(frame["part"], frame["eer_threshold"]):
        if part == "mAP":
            continue
        if not 0.0 <= value <= 1.0:
            raise InvalidInputError(f"{path}: threshold {value} for {part} outside [0, 1]")
        thresholds[str(part)] = float(value)
    return thresholds

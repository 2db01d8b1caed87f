"""
CLI commands - each takes a RunConfig, writes its artifacts and ``run.json``
"""

from pathlib import Path
from typing import Dict, List, Sequence
import logging
import time

from ..classifier.forest import forest_node_counts, train_forest
from ..classifier.serialization import load_forest, save_forest
from ..config import resolve_config_path
from ..errors import DatasetError, UndefinedMetricError
from ..evaluation.harness import (
    action_part_scores, classify_holdout, evaluate_forest, overall_part_scores, sweep_parameter,
)
from ..evaluation.metrics import action_frame_shares, f_beta, precision, recall, sum_counts
from ..evaluation.reports import (
    read_eer_thresholds,
    write_action_part_report,
    write_ap_summary,
    write_confusion,
    write_pr_curves,
    write_proposal_counts,
    write_step_confusion,
    write_sweep,
    write_timeline,
    write_uar_report,
)
from ..models.activity import Action
from ..models.evaluation import BinaryCounts
from ..models.imaging import TRACKED_PARTS
from ..models.run import RunConfig
from ..orchestration.trial_orchestrator import TrialOrchestrator, TrialResult, frame_seed
from ..synth.dataset import load_labeled_images, load_trial, write_trials
from ..tracking.activity import load_regions, load_step_ordering

logger = logging.getLogger(__name__)

MODEL_FILE = "forest.json"

# Hyperparameters echoed by ``train``
ECHOED_TRAINING_FIELDS = (
    "n_trees", "max_depth", "min_gain", "samples_per_image", "theta_max",
    "tau_max", "count_thresholds", "count_offsets", "image_fraction", "rng_seed",
)


def _out_dir(run: RunConfig) -> Path:
    out = Path(run.out_path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_synth(run: RunConfig) -> List[Path]:
    """Generate ``run.count`` scripted trials"""
    out = _out_dir(run)
    regions = load_regions(resolve_config_path(run.regions_path))
    ordering = load_step_ordering(resolve_config_path(run.step_ordering_path))
    trial_dirs = write_trials(
        run.template, run.count, out, regions, run.synth, ordering, run.rng_seed, run.intrinsics,
    )
    run.save(out)
    print(f"Wrote {len(trial_dirs)} trials to {out}")
    return trial_dirs


def format_training_config(run: RunConfig) -> List[str]:
    config = run.training
    return [f"{name}: {getattr(config, name)}" for name in ECHOED_TRAINING_FIELDS]


def cmd_train(run: RunConfig) -> Path:
    """Train a forest on the training trials and serialize it"""
    for line in format_training_config(run):
        print(line)
    images = load_labeled_images(run.train_dirs)
    started = time.perf_counter()
    forest = train_forest(images, run.training, run.threads)
    elapsed = time.perf_counter() - started
    out = _out_dir(run)
    model_path = out / MODEL_FILE
    save_forest(forest, model_path)
    run.save(out)
    for index, nodes in enumerate(forest_node_counts(forest)):
        print(f"tree {index}: {nodes} nodes")
    print(f"wall time: {elapsed:.1f}s")
    print(f"model: {model_path}")
    return model_path


def cmd_evaluate(run: RunConfig) -> float:
    """Per-pixel UAR and proposal PR/AP/EER reports on holdout trials; returns mAP"""
    forest = load_forest(run.model_path)
    images = load_labeled_images(run.holdout_dirs)
    proposal = run.proposal
    frames = classify_holdout(
        forest, run.holdout_dirs, proposal, lambda index: frame_seed(proposal.rng_seed, index),
    )
    summary = evaluate_forest(
        forest, images, frames, proposal, run.scoring, run.max_pixels_per_image, run.rng_seed,
    )
    out = _out_dir(run)
    write_confusion(summary.confusion, out / "confusion.csv")
    write_uar_report(summary.confusion, summary.uar, out / "uar.csv")
    write_pr_curves(summary.curves, out)
    write_ap_summary(summary.aps, summary.eers, out / "summary.csv")
    run.save(out)
    print(f"UAR: {summary.uar:.4f}")
    for part in TRACKED_PARTS:
        print(f"AP {part.name.lower()}: {summary.aps[part]:.4f} (EER threshold {summary.eers[part]:.2f})")
    print(f"mAP: {summary.mean_ap:.4f}")
    return summary.mean_ap


def cmd_sweep(run: RunConfig) -> Path:
    """Retrain once per value of a single parameter and report holdout UAR"""
    training_images = load_labeled_images(run.train_dirs)
    holdout_images = load_labeled_images(run.holdout_dirs)
    rows = sweep_parameter(
        run.parameter, run.values, run.training, training_images, holdout_images,
        run.threads, run.max_pixels_per_image,
    )
    out = _out_dir(run)
    path = write_sweep(rows, out / f"sweep_{run.parameter}.csv")
    run.save(out)
    for row in rows:
        print(f"{run.parameter}={row['param_value']:g}: UAR {row['uar']:.4f}")
    return path


def _unique_ids(results: Sequence[TrialResult]) -> List[str]:
    seen: Dict[str, int] = {}
    ids = []
    for result in results:
        count = seen.get(result.trial_id, 0)
        seen[result.trial_id] = count + 1
        ids.append(result.trial_id if count == 0 else f"{result.trial_id}_{count}")
    return ids


def _print_counts(label: str, counts: BinaryCounts) -> None:
    try:
        f1 = f"{f_beta(counts, 1.0):.3f}"
    except UndefinedMetricError:
        f1 = "undefined"
    p = precision(counts, zero_division=float("nan"))
    r = recall(counts, zero_division=float("nan"))
    print(f"{label}: tp={counts.tp} fp={counts.fp} tn={counts.tn} fn={counts.fn} "
          f"precision={p:.3f} recall={r:.3f} F1={f1}")


def cmd_track(run: RunConfig) -> BinaryCounts:
    """Track hand-washing steps over trials and report step and part scores"""
    forest = load_forest(run.model_path)
    regions = load_regions(resolve_config_path(run.regions_path))
    ordering = load_step_ordering(resolve_config_path(run.step_ordering_path))
    proposal = run.proposal
    if run.summary_path:
        proposal = proposal.with_thresholds(read_eer_thresholds(run.summary_path))
        logger.info(f"Start thresholds from {run.summary_path}: {proposal.start_thresholds}")

    orchestrator = TrialOrchestrator(forest, regions, proposal, run.scoring, ordering)
    results, failed = orchestrator.run_trials(run.holdout_dirs, run.threads)
    if not results:
        raise DatasetError(f"None of {len(run.holdout_dirs)} trial directories could be tracked")

    out = _out_dir(run)
    ids = _unique_ids(results)
    for trial_id, result in zip(ids, results):
        write_timeline(result.timeline, out / f"timeline_{trial_id}.csv")
    write_step_confusion(
        {trial_id: r.step_counts for trial_id, r in zip(ids, results)},
        out / "steps.csv",
        flags={trial_id: r.tracked_flags for trial_id, r in zip(ids, results)},
    )

    beta = run.scoring.beta
    scores = action_part_scores([{a: r.part_counts(a) for a in Action} for r in results], beta)
    overall = overall_part_scores([r.part_counts() for r in results], beta)
    tracked_dirs = [d for d in run.holdout_dirs if str(d) not in failed]
    validation_shares = action_frame_shares(load_trial(d) for d in tracked_dirs)
    training_shares = (
        action_frame_shares(load_trial(d) for d in run.train_dirs) if run.train_dirs else None
    )
    write_action_part_report(scores, overall, validation_shares, out / "actions.csv", training_shares)

    part_totals = {
        part: sum_counts(r.part_counts().get(part, BinaryCounts()) for r in results)
        for part in TRACKED_PARTS
    }
    write_proposal_counts(
        part_totals, {part: proposal.threshold_for(part) for part in TRACKED_PARTS},
        out / "proposal_counts.csv",
    )
    run.save(out)

    total = sum_counts(r.step_counts for r in results)
    for trial_id, result in zip(ids, results):
        _print_counts(trial_id, result.step_counts)
    _print_counts("all", total)
    if failed:
        print(f"failed trials: {', '.join(failed)}")
    return total


COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "track": cmd_track,
}

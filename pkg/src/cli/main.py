"""
Command-line entry point - argparse surface over the tracking pipeline
"""

from typing import Any, Dict, List, Optional, Sequence
import argparse
import logging
import sys

from pydantic import ValidationError
from pythonjsonlogger import jsonlogger

from ..config import settings
from ..errors import TrackerError
from ..evaluation.harness import SWEEP_PARAMETERS
from ..models.evaluation import ScoringConfig
from ..models.forest import TrainingConfig
from ..models.proposals import ProposalConfig
from ..models.run import RunConfig, settings_synth_config
from ..models.trial import SynthConfig
from ..synth.scripting import template_names
from .commands import COMMANDS

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

TEXT_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
JSON_FORMAT = '%(asctime)s %(name)s %(levelname)s %(message)s'

# Inputs each command cannot run without, by RunConfig field
REQUIRED_FIELDS: Dict[str, List[str]] = {
    "synth": ["out_path", "template"],
    "train": ["train_dirs", "out_path"],
    "evaluate": ["model_path", "holdout_dirs", "out_path"],
    "sweep": ["parameter", "values", "train_dirs", "holdout_dirs", "out_path"],
    "track": ["model_path", "holdout_dirs", "out_path"],
}

# CLI flag -> TrainingConfig field
TRAINING_FLAGS = {
    "trees": "n_trees",
    "max_depth": "max_depth",
    "min_gain": "min_gain",
    "samples_per_image": "samples_per_image",
    "theta_max": "theta_max",
    "tau_max": "tau_max",
    "offsets": "count_offsets",
    "thresholds": "count_thresholds",
    "image_fraction": "image_fraction",
}


class UsageError(Exception):
    """Command line is well-formed but incomplete or inconsistent"""


class CommandParser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage code 1"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def configure_logging(level: Optional[str] = None, fmt: Optional[str] = None) -> None:
    """Send all log records to stderr as text or JSON lines"""
    level = (level or settings.log_level).upper()
    fmt = fmt or settings.log_format
    handler = logging.StreamHandler(sys.stderr)
    if fmt == "json":
        handler.setFormatter(jsonlogger.JsonFormatter(JSON_FORMAT))
    else:
        handler.setFormatter(logging.Formatter(TEXT_FORMAT))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(getattr(logging, level, logging.INFO))


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="Seed all randomness derives from")
    common.add_argument("--threads", type=_positive_int, default=None, help="Worker threads")
    common.add_argument("--config", default=None, help="Rerun from a run.json written earlier")
    common.add_argument("--regions", default=None, help="Activity region JSON")
    common.add_argument("--step-ordering", default=None, help="Step precedence JSON")
    common.add_argument("--log-level", default=None)
    common.add_argument("--log-format", choices=["text", "json"], default=None)
    common.add_argument("--out", default=None, help="Output directory")
    return common


def _training_parser() -> argparse.ArgumentParser:
    training = argparse.ArgumentParser(add_help=False)
    group = training.add_argument_group("training")
    group.add_argument("--trees", type=_positive_int, default=None, help="Number of trees T")
    group.add_argument("--max-depth", type=int, default=None, help="Maximum tree depth D_max")
    group.add_argument("--min-gain", type=float, default=None, help="Minimum gain g_min in bits")
    group.add_argument("--samples-per-image", type=_positive_int, default=None, help="Pixels N per image")
    group.add_argument("--theta-max", type=float, default=None, help="Maximum offset in pixel-meters")
    group.add_argument("--tau-max", type=float, default=None, help="Maximum threshold in meters")
    group.add_argument("--offsets", type=_positive_int, default=None, help="Offset pairs per pool")
    group.add_argument("--thresholds", type=_positive_int, default=None, help="Thresholds per pool")
    group.add_argument("--image-fraction", type=float, default=None, help="Fraction of training images")
    group.add_argument(
        "--optimal", action="store_true",
        help="Start from D_max=12, g_min=0, theta_max=250, N=3000",
    )
    return training


def _proposal_parser() -> argparse.ArgumentParser:
    proposal = argparse.ArgumentParser(add_help=False)
    group = proposal.add_argument_group("proposals")
    group.add_argument("--samples-per-frame", type=_positive_int, default=None)
    group.add_argument("--max-seeds", type=_positive_int, default=None)
    group.add_argument(
        "--unweighted-denominator", action="store_true",
        help="Plain kernel sum in the mean-shift denominator",
    )
    group.add_argument(
        "--conventional-scoring", action="store_true",
        help="Score proposals for absent parts as false positives",
    )
    group.add_argument("--grid-points", type=int, default=None, help="Start-threshold grid size")
    group.add_argument("--max-pixels-per-image", type=_positive_int, default=None)
    return proposal


def build_parser() -> argparse.ArgumentParser:
    parser = CommandParser(prog="python -m src", description="Depth-image hand tracking for hand-washing guidance")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()
    training = _training_parser()
    proposal = _proposal_parser()

    synth = sub.add_parser("synth", parents=[common], help="Generate scripted synthetic trials")
    synth.add_argument("--template", default=None, help=f"One of {template_names()} or comma-separated tokens")
    synth.add_argument("--count", type=_positive_int, default=1)
    synth.add_argument("--resolution-scale", type=float, default=None)
    synth.add_argument("--noise-sigma", type=float, default=None)

    train = sub.add_parser("train", parents=[common, training], help="Train a decision forest")
    train.add_argument("--train-dirs", nargs="+", default=[])

    evaluate = sub.add_parser("evaluate", parents=[common, proposal], help="UAR and proposal PR/AP reports")
    evaluate.add_argument("--model", default=None)
    evaluate.add_argument("--holdout-dirs", nargs="+", default=[])

    sweep = sub.add_parser("sweep", parents=[common, training], help="Retrain over one parameter")
    sweep.add_argument("--parameter", choices=SWEEP_PARAMETERS, default=None)
    sweep.add_argument("--values", nargs="+", type=float, default=[])
    sweep.add_argument("--train-dirs", nargs="+", default=[])
    sweep.add_argument("--holdout-dirs", nargs="+", default=[])
    sweep.add_argument("--max-pixels-per-image", type=_positive_int, default=None)

    track = sub.add_parser("track", parents=[common, proposal], help="Track hand-washing steps")
    track.add_argument("--model", default=None)
    track.add_argument("--trial-dirs", nargs="+", default=[])
    track.add_argument("--train-dirs", nargs="+", default=[], help="Training trials for frame shares")
    track.add_argument("--summary", default=None, help="summary.csv with EER start thresholds")
    return parser


def _given(args: argparse.Namespace, names: Sequence[str]) -> Dict[str, Any]:
    return {name: getattr(args, name) for name in names if getattr(args, name, None) is not None}


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """RunConfig from parsed arguments, or from ``--config`` when given"""
    if args.config:
        run = RunConfig.load(args.config)
        if run.command != args.command:
            raise UsageError(f"{args.config} was written by '{run.command}', not '{args.command}'")
        return run

    seed = args.seed
    training_values = {TRAINING_FLAGS[k]: v for k, v in _given(args, TRAINING_FLAGS).items()}
    training_values["rng_seed"] = seed
    if getattr(args, "optimal", False):
        training = TrainingConfig.optimal(**training_values)
    else:
        training = TrainingConfig(**training_values)

    proposal_values = _given(args, ["samples_per_frame", "max_seeds"])
    if getattr(args, "unweighted_denominator", False):
        proposal_values["weighted_denominator"] = False
    proposal = ProposalConfig(rng_seed=seed, **proposal_values)

    scoring_values = _given(args, ["grid_points"])
    if getattr(args, "conventional_scoring", False):
        scoring_values["conventional_scoring"] = True
    scoring = ScoringConfig(**scoring_values)

    synth = settings_synth_config()
    synth_values = _given(args, ["resolution_scale", "noise_sigma"])
    if synth_values:
        synth = SynthConfig(**{**synth.model_dump(), **synth_values})

    values: Dict[str, Any] = {
        "command": args.command,
        "rng_seed": seed,
        "training": training,
        "proposal": proposal,
        "scoring": scoring,
        "synth": synth,
        "out_path": args.out,
        "train_dirs": getattr(args, "train_dirs", []),
        "holdout_dirs": getattr(args, "holdout_dirs", None) or getattr(args, "trial_dirs", []),
        "model_path": getattr(args, "model", None),
        "summary_path": getattr(args, "summary", None),
        "template": getattr(args, "template", None) or ("canonical" if args.command == "synth" else None),
        "count": getattr(args, "count", 1),
        "parameter": getattr(args, "parameter", None),
        "values": getattr(args, "values", []),
        "max_pixels_per_image": getattr(args, "max_pixels_per_image", None),
    }
    values.update(_given(args, ["threads"]))
    if args.regions:
        values["regions_path"] = args.regions
    if args.step_ordering:
        values["step_ordering_path"] = args.step_ordering
    return RunConfig(**values)


def check_required(run: RunConfig) -> None:
    missing = [name for name in REQUIRED_FIELDS[run.command] if not getattr(run, name)]
    if missing:
        raise UsageError(f"'{run.command}' requires {', '.join(missing)}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one command

    Returns:
        0 on success, 1 on usage errors, 2 on data or I/O errors
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level, args.log_format)
    try:
        run = build_run_config(args)
        check_required(run)
        run.check_paths()
        COMMANDS[run.command](run)
    except (UsageError, ValidationError) as e:
        print(f"{parser.prog} {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (TrackerError, OSError) as e:
        logger.error(f"{args.command} failed: {e}", exc_info=logger.isEnabledFor(logging.DEBUG))
        return EXIT_DATA
    return EXIT_OK

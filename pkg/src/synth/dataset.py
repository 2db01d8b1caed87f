"""
Trial directories on disk - manifest.json plus per-frame PGM rasters
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union
import json
import logging

import numpy as np
from pydantic import ValidationError

from ..errors import DatasetError, InvalidInputError
from ..imaging.depth import complete_partial_labels, restrict_labels, segment_foreground
from ..imaging.pgm import read_depth_pgm, read_label_pgm, write_depth_pgm, write_label_pgm
from ..models.imaging import (
    BodyPart, CameraIntrinsics, DepthImage, LabelImage, LabeledImage, TRACKED_PARTS, WorldPoint,
)
from ..models.activity import ActivityRegion, StepOrdering
from ..models.trial import FrameRecord, SceneScript, SynthConfig, TrialManifest
from .renderer import render_frame
from .scripting import script_trial

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class TrialFrame:
    """One stored frame: raw and segmented depth, labels and ground truth"""
    record: FrameRecord
    raw: DepthImage
    foreground: DepthImage
    labels: LabelImage

    @property
    def labeled(self) -> LabeledImage:
        return LabeledImage(self.foreground, self.labels)

    @property
    def truth(self) -> Dict[BodyPart, Optional[WorldPoint]]:
        return part_truth(self.record)

    @property
    def hand_positions(self) -> Tuple[Optional[WorldPoint], Optional[WorldPoint]]:
        """Scripted (left, right) hand centers"""
        left = self.record.hand_positions.get("left_hand")
        right = self.record.hand_positions.get("right_hand")
        return (
            WorldPoint(*left) if left is not None else None,
            WorldPoint(*right) if right is not None else None,
        )


def part_truth(record: FrameRecord) -> Dict[BodyPart, Optional[WorldPoint]]:
    """Ground-truth center per tracked part, None when the part is not visible"""
    truth: Dict[BodyPart, Optional[WorldPoint]] = {}
    for part in TRACKED_PARTS:
        center = record.part_centers.get(part.name.lower())
        truth[part] = WorldPoint(*center) if center is not None else None
    return truth


def _point(p: Optional[WorldPoint]):
    return None if p is None else tuple(p.to_list())


def write_trial(
    script: SceneScript,
    out_dir: PathLike,
    trial_id: str,
    config: Optional[SynthConfig] = None,
    rng_seed: int = 0,
    base_intrinsics: Optional[CameraIntrinsics] = None,
) -> TrialManifest:
    """
    Render every scripted frame and store the trial directory

    Args:
        script: Scripted trial
        out_dir: Directory to create; existing files are overwritten
        trial_id: Identifier recorded in the manifest
        config: Rendering parameters
        rng_seed: Base seed; frame ``i`` uses noise seed derived from (rng_seed, i)
        base_intrinsics: Full-resolution intrinsics, scaled by ``config.resolution_scale``

    Returns:
        The written manifest
    """
    config = config or SynthConfig()
    k = config.intrinsics(base_intrinsics)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    noise_seeds = np.random.SeedSequence([rng_seed, 1]).spawn(len(script.frames))
    records: List[FrameRecord] = []
    for index, (frame, seed) in enumerate(zip(script.frames, noise_seeds)):
        rendered = render_frame(
            frame, k, config.width, config.height,
            noise_sigma=config.noise_sigma,
            rng_seed=int(seed.generate_state(1)[0]),
        )
        depth_file = f"depth_{index:04d}.pgm"
        label_file = f"labels_{index:04d}.pgm"
        write_depth_pgm(out / depth_file, rendered.depth)
        write_label_pgm(out / label_file, rendered.labels)
        records.append(
            FrameRecord(
                index=index,
                depth_file=depth_file,
                label_file=label_file,
                action=frame.action,
                activity=frame.activity,
                left_activity=frame.left_activity,
                right_activity=frame.right_activity,
                part_centers={p.name.lower(): _point(c) for p, c in rendered.centers.items()},
                hand_positions={"left_hand": frame.left_hand, "right_hand": frame.right_hand},
            )
        )
    manifest = TrialManifest(
        trial_id=trial_id,
        frame_count=len(records),
        intrinsics=k,
        width=config.width,
        height=config.height,
        background_threshold=config.background_threshold,
        rng_seed=rng_seed,
        template=script.template,
        step_flags=script.step_flags,
        frames=records,
    )
    (out / MANIFEST_NAME).write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote trial {trial_id} with {len(records)} frames to {out}")
    return manifest


def load_trial(trial_dir: PathLike) -> TrialManifest:
    """
    Read and validate a trial manifest

    Raises:
        DatasetError: missing or malformed manifest, or referenced rasters missing
    """
    path = Path(trial_dir) / MANIFEST_NAME
    try:
        manifest = TrialManifest.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise DatasetError(f"Cannot read {path}: {e}") from e
    except (ValidationError, json.JSONDecodeError) as e:
        raise DatasetError(f"Malformed manifest {path}: {e}") from e
    if manifest.frame_count != len(manifest.frames):
        raise DatasetError(
            f"{path}: frame_count {manifest.frame_count} but {len(manifest.frames)} frame records"
        )
    for record in manifest.frames:
        for name in (record.depth_file, record.label_file):
            if not (Path(trial_dir) / name).is_file():
                raise DatasetError(f"{path}: missing raster {name}")
    return manifest


def load_frame(trial_dir: PathLike, manifest: TrialManifest, record: FrameRecord) -> TrialFrame:
    """Read one frame's rasters, segment the foreground and complete partial labels"""
    raw = read_depth_pgm(Path(trial_dir) / record.depth_file)
    labels = read_label_pgm(Path(trial_dir) / record.label_file)
    if raw.shape != (manifest.height, manifest.width):
        raise DatasetError(
            f"{record.depth_file}: raster {raw.shape} does not match manifest "
            f"{manifest.height}x{manifest.width}"
        )
    foreground = segment_foreground(raw, manifest.background_threshold)
    if not np.any(labels.labels == BodyPart.BODY) and foreground.valid_mask().any():
        labels = complete_partial_labels(foreground, labels)
    else:
        labels = restrict_labels(labels, foreground)
    return TrialFrame(record=record, raw=raw, foreground=foreground, labels=labels)


def iter_frames(trial_dir: PathLike, manifest: Optional[TrialManifest] = None) -> Iterator[TrialFrame]:
    """Yield the frames of a trial in temporal order"""
    manifest = manifest or load_trial(trial_dir)
    for record in manifest.frames:
        yield load_frame(trial_dir, manifest, record)


def load_labeled_images(trial_dirs: Sequence[PathLike]) -> List[LabeledImage]:
    """
    Segmented, labeled images of every frame with foreground

    Raises:
        DatasetError: no directories, or no usable frame in any of them
    """
    if not trial_dirs:
        raise DatasetError("No trial directories given")
    images: List[LabeledImage] = []
    skipped = 0
    for trial_dir in trial_dirs:
        for frame in iter_frames(trial_dir):
            if not frame.foreground.valid_mask().any():
                skipped += 1
                continue
            images.append(frame.labeled)
    if skipped:
        logger.warning(f"Removed {skipped} frames without foreground")
    if not images:
        raise DatasetError(f"No frame with foreground in {len(trial_dirs)} trial directories")
    logger.info(f"Loaded {len(images)} labeled frames from {len(trial_dirs)} trials")
    return images


def trial_seed(rng_seed: int, trial_index: int) -> int:
    """Seed of the ``trial_index``-th trial generated from ``rng_seed``"""
    return int(np.random.SeedSequence([rng_seed, trial_index, 7]).generate_state(1)[0])


def write_trials(
    template: str,
    count: int,
    out_dir: PathLike,
    regions: Sequence[ActivityRegion],
    config: Optional[SynthConfig] = None,
    ordering: Optional[StepOrdering] = None,
    rng_seed: int = 0,
    base_intrinsics: Optional[CameraIntrinsics] = None,
) -> List[Path]:
    """
    Script and render ``count`` trials into ``out_dir/trial_NNN``

    Raises:
        InvalidInputError: count below one
    """
    if count < 1:
        raise InvalidInputError(f"Trial count must be at least 1, got {count}")
    written: List[Path] = []
    for index in range(count):
        seed = trial_seed(rng_seed, index)
        script = script_trial(template, seed, regions, config, ordering, base_intrinsics)
        trial_id = f"trial_{index:03d}"
        trial_dir = Path(out_dir) / trial_id
        write_trial(script, trial_dir, trial_id, config, seed, base_intrinsics)
        written.append(trial_dir)
    return written

"""
End-to-end checks on synthetic datasets

These train real forests and run the full tracking pipeline, so they are
marked slow and excluded from the default run (``pytest -m slow``).
"""

import logging

import pandas as pd
import pytest

from src.classifier.forest import pixel_confusion, train_forest
from src.classifier.serialization import forest_to_json, save_forest
from src.cli.main import EXIT_OK, main
from src.evaluation.harness import sweep_parameter
from src.evaluation.metrics import f_beta, uar
from src.models.evaluation import BinaryCounts
from src.models.forest import TrainingConfig
from src.models.imaging import BodyPart
from src.models.proposals import ProposalConfig
from src.models.trial import SynthConfig
from src.synth.dataset import iter_frames, load_labeled_images, load_trial, write_trials
from src.tracking.proposals import final_proposals, propose_parts

pytestmark = pytest.mark.slow

# Offset pool scaled down from 3000 to keep CPU time bounded; thresholds keep their default
POOL = {"count_offsets": 300, "count_thresholds": 100}

TRACKING_TEMPLATES = ("canonical", "no_soap", "no_towel", "no_rinse", "random")


@pytest.fixture(scope="module")
def half_config():
    """Half-resolution (320 x 240) scenes, where a 250 pixel-meter offset spans a body width"""
    return SynthConfig(resolution_scale=0.5)


@pytest.fixture(scope="module")
def dataset(tmp_path_factory, regions, ordering, half_config):
    root = tmp_path_factory.mktemp("acceptance")
    train_dirs = write_trials("canonical", 3, root / "train", regions, half_config, ordering, rng_seed=21)
    train_dirs += write_trials("random", 1, root / "train_b", regions, half_config, ordering, rng_seed=24)
    holdout_dirs = write_trials("canonical", 1, root / "holdout", regions, half_config, ordering, rng_seed=22)
    holdout_dirs += write_trials("no_soap", 1, root / "holdout_b", regions, half_config, ordering, rng_seed=23)
    return {
        "root": root,
        "train_dirs": train_dirs,
        "holdout_dirs": holdout_dirs,
        "train": load_labeled_images(train_dirs),
        "holdout": load_labeled_images(holdout_dirs),
    }


@pytest.fixture(scope="module")
def optimal_forest(dataset):
    return train_forest(dataset["train"], TrainingConfig.optimal(rng_seed=1, **POOL), threads=3)


@pytest.fixture
def restore_logging():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


def test_training_set_size(dataset):
    assert len(dataset["train"]) >= 200
    assert not set(dataset["train_dirs"]) & set(dataset["holdout_dirs"])


def test_optimal_forest_recall(dataset, optimal_forest):
    assert optimal_forest.training_config.max_depth == 12
    assert optimal_forest.training_config.samples_per_image == 3000
    score = uar(pixel_confusion(optimal_forest, dataset["holdout"], max_pixels_per_image=2000))
    assert score >= 0.85


def test_optimal_config_not_worse_than_default(dataset, optimal_forest):
    default = train_forest(dataset["train"], TrainingConfig(rng_seed=1, **POOL), threads=3)
    default_uar = uar(pixel_confusion(default, dataset["holdout"], max_pixels_per_image=2000))
    optimal_uar = uar(pixel_confusion(optimal_forest, dataset["holdout"], max_pixels_per_image=2000))
    assert optimal_uar >= default_uar - 0.02


def test_training_is_reproducible(dataset):
    images = dataset["train"][:40]
    config = TrainingConfig.optimal(rng_seed=5, **POOL)
    first = train_forest(images, config, threads=1)
    second = train_forest(images, config, threads=3)
    assert forest_to_json(first) == forest_to_json(second)


def test_more_training_images_do_not_hurt(dataset):
    base = TrainingConfig.optimal(rng_seed=2, n_trees=1, **POOL)
    rows = sweep_parameter(
        "image_fraction", [0.25, 0.5, 1.0], base, dataset["train"], dataset["holdout"],
        threads=1, max_pixels_per_image=500,
    )
    scores = [row["uar"] for row in rows]
    assert [row["param_value"] for row in rows] == [0.25, 0.5, 1.0]
    for smaller, larger in zip(scores, scores[1:]):
        assert larger >= smaller - 0.02


def test_head_proposals_land_near_the_head(dataset, optimal_forest):
    config = ProposalConfig(samples_per_frame=600, max_seeds=100)
    trial_dir = dataset["holdout_dirs"][0]
    manifest = load_trial(trial_dir)
    hits = visible = 0
    for frame in iter_frames(trial_dir, manifest):
        truth = frame.truth[BodyPart.HEAD]
        if truth is None:
            continue
        visible += 1
        modes = propose_parts(optimal_forest, frame.foreground, manifest.intrinsics, 600, config, frame.record.index)
        proposal = final_proposals(modes)[BodyPart.HEAD]
        if proposal is not None and proposal.distance_to(truth) <= 0.10:
            hits += 1
    assert visible > 0
    assert hits / visible >= 0.8


def test_scripted_trials_track_through_the_classifier(
    dataset, optimal_forest, regions, ordering, half_config, tmp_path, restore_logging,
):
    trial_dirs = []
    for template in TRACKING_TEMPLATES:
        trial_dirs += write_trials(template, 4, tmp_path / template, regions, half_config, ordering, rng_seed=31)
    assert len(trial_dirs) == 20
    model = tmp_path / "forest.json"
    save_forest(optimal_forest, model)

    out = tmp_path / "track"
    code = main(["track", "--model", str(model), "--trial-dirs", *map(str, trial_dirs),
                 "--threads", "4", "--samples-per-frame", "600", "--max-seeds", "100",
                 "--out", str(out)])
    assert code == EXIT_OK
    steps = pd.read_csv(out / "steps.csv")
    assert len(steps) == 21
    total = steps.iloc[-1]
    assert total["trial"] == "all"
    counts = BinaryCounts(tp=int(total["tp"]), fp=int(total["fp"]), tn=int(total["tn"]), fn=int(total["fn"]))
    assert counts.tp + counts.fp + counts.tn + counts.fn == 100
    assert f_beta(counts, 1.0) >= 0.95

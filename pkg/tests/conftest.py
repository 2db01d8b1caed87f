"""
Shared fixtures: small rasters, default task configuration and synthetic trials
"""

import numpy as np
import pytest

from src.classifier.forest import train_forest
from src.models.forest import TrainingConfig
from src.models.imaging import BodyPart, CameraIntrinsics, DepthImage, LabelImage, LabeledImage
from src.models.proposals import ProposalConfig
from src.models.trial import SynthConfig
from src.synth.dataset import load_labeled_images, write_trial, write_trials
from src.synth.scripting import script_trial
from src.tracking.activity import default_regions, default_step_ordering


@pytest.fixture
def intrinsics():
    return CameraIntrinsics(fx=500.0, fy=500.0, cx=320.0, cy=240.0)


@pytest.fixture(scope="session")
def small_config():
    """Quarter-resolution (160 x 120) synthetic scenes"""
    return SynthConfig(resolution_scale=0.25)


@pytest.fixture(scope="session")
def regions():
    return default_regions()


@pytest.fixture(scope="session")
def ordering():
    return default_step_ordering()


@pytest.fixture(scope="session")
def canonical_script(regions, ordering, small_config):
    return script_trial("canonical", 3, regions, small_config, ordering)


@pytest.fixture(scope="session")
def canonical_trial(tmp_path_factory, canonical_script, small_config):
    out = tmp_path_factory.mktemp("trials") / "canonical"
    write_trial(canonical_script, out, "canonical", small_config, rng_seed=3)
    return out


@pytest.fixture(scope="session")
def training_trials(tmp_path_factory, regions, ordering, small_config):
    out = tmp_path_factory.mktemp("training")
    return write_trials("random", 2, out, regions, small_config, ordering, rng_seed=11)


@pytest.fixture(scope="session")
def tiny_training_config():
    return TrainingConfig(
        n_trees=2,
        max_depth=10,
        min_gain=0.0,
        samples_per_image=150,
        theta_max=60.0,
        count_offsets=40,
        count_thresholds=10,
        rng_seed=5,
    )


@pytest.fixture(scope="session")
def tiny_forest(training_trials, tiny_training_config):
    return train_forest(load_labeled_images(training_trials), tiny_training_config)


@pytest.fixture(scope="session")
def fast_proposals():
    return ProposalConfig(samples_per_frame=400, max_seeds=40)


@pytest.fixture
def two_class_image():
    """
    8 x 8 scene: a raised 1.0 m left-hand block on a 2.0 m body slab

    Columns 0-3 carry the hand, columns 4-7 the body.
    """
    depths = np.full((8, 8), 2.0)
    depths[:, :4] = 1.0
    labels = np.full((8, 8), BodyPart.BODY, dtype=np.uint8)
    labels[:, :4] = BodyPart.LEFT_HAND
    return LabeledImage(DepthImage(depths), LabelImage(labels))

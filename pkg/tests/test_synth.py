"""
Tests for synthetic rendering, trial scripting and trial directories
"""

import json

import numpy as np
import pytest
from pydantic import ValidationError

from src.errors import DatasetError, InvalidInputError, ScriptError
from src.models.activity import Action, Activity, ActivityRegion, STEPS, Step
from src.models.imaging import BodyPart, CameraIntrinsics, TRACKED_PARTS, WorldPoint
from src.models.trial import FrameScript, SynthConfig
from src.synth.dataset import (
    MANIFEST_NAME,
    iter_frames,
    load_labeled_images,
    load_trial,
    trial_seed,
    write_trial,
    write_trials,
)
from src.synth.renderer import render_frame
from src.synth.scripting import random_template, resolve_template, script_trial


def render(frame, config, **kwargs):
    return render_frame(frame, config.intrinsics(), config.width, config.height, **kwargs)


class TestRenderer:

    def test_empty_scene_is_background(self, small_config):
        rendered = render(FrameScript(), small_config)
        assert rendered.depth.shape == (120, 160)
        assert np.all(rendered.depth.depths == 2.5)
        assert not rendered.labels.labels.any()
        assert rendered.centers == {part: None for part in TRACKED_PARTS}

    def test_head_is_labeled_and_nearer_than_floor(self, small_config):
        rendered = render(FrameScript(head=(0.0, 0.0, 1.6)), small_config)
        head = rendered.labels.labels == BodyPart.HEAD
        assert head.any()
        assert rendered.depth.depths[head].max() < 2.5
        assert rendered.depth.depths[head].min() >= 1.5 - 1e-9
        assert rendered.analytic_centers[BodyPart.HEAD].z == pytest.approx(1.6 - 2.0 / 3.0 * 0.10)

    def test_nearer_part_occludes(self, small_config):
        frame = FrameScript(torso=(0.0, 0.0, 2.0), right_hand=(0.0, 0.0, 1.5))
        rendered = render(frame, small_config)
        cx, cy = int(small_config.intrinsics().cx), int(small_config.intrinsics().cy)
        assert rendered.labels.labels[cy, cx] == BodyPart.RIGHT_HAND

    def test_without_noise_rendering_is_deterministic(self, small_config):
        frame = FrameScript(head=(0.05, 0.0, 1.6), left_hand=(-0.2, 0.1, 2.0))
        first = render(frame, small_config, rng_seed=1)
        second = render(frame, small_config, rng_seed=2)
        assert first.depth == second.depth

    def test_noise_follows_the_seed(self, small_config):
        frame = FrameScript(head=(0.05, 0.0, 1.6))
        a = render(frame, small_config, noise_sigma=0.01, rng_seed=4)
        b = render(frame, small_config, noise_sigma=0.01, rng_seed=4)
        c = render(frame, small_config, noise_sigma=0.01, rng_seed=5)
        assert a.depth == b.depth
        assert a.depth != c.depth
        assert a.labels == c.labels

    def test_depth_is_millimeter_quantized(self, small_config):
        rendered = render(FrameScript(head=(0.0, 0.0, 1.6)), small_config, noise_sigma=0.01)
        millimeters = rendered.depth.depths * 1000.0
        np.testing.assert_allclose(millimeters, np.rint(millimeters), atol=1e-6)

    def test_part_behind_camera(self, small_config):
        with pytest.raises(ScriptError):
            render(FrameScript(head=(0.0, 0.0, 0.05)), small_config)

    def test_part_below_floor(self, small_config):
        with pytest.raises(ScriptError):
            render(FrameScript(head=(0.0, 0.0, 2.45)), small_config)


class TestScripting:

    def test_canonical_flags(self, canonical_script):
        assert canonical_script.step_flags == {step: True for step in STEPS}
        assert canonical_script.intended_activations == [
            Activity.TAP, Activity.SOAP, Activity.WATER, Activity.TAP, Activity.TOWEL,
        ]

    def test_no_towel(self, regions, ordering, small_config):
        flags = script_trial("no_towel", 1, regions, small_config, ordering).step_flags
        assert not flags[Step.DRY_HANDS]
        assert all(flags[step] for step in STEPS if step is not Step.DRY_HANDS)

    def test_no_soap_blocks_rinse(self, regions, ordering, small_config):
        flags = script_trial("no_soap", 1, regions, small_config, ordering).step_flags
        assert [step for step in STEPS if flags[step]] == [Step.TURN_ON_WATER]

    def test_seeds_change_trajectories_not_flags(self, regions, ordering, small_config):
        a = script_trial("canonical", 1, regions, small_config, ordering)
        b = script_trial("canonical", 2, regions, small_config, ordering)
        assert a.step_flags == b.step_flags
        assert a.frames != b.frames

    def test_same_seed_same_script(self, regions, ordering, small_config):
        assert script_trial("canonical", 9, regions, small_config, ordering) == \
            script_trial("canonical", 9, regions, small_config, ordering)

    def test_engaged_hand_lies_inside_its_region(self, canonical_script, regions):
        by_activity = {region.activity: region for region in regions}
        engaged = 0
        for frame in canonical_script.frames:
            for hand, activity in ((frame.left_hand, frame.left_activity), (frame.right_hand, frame.right_activity)):
                if activity is not Activity.AWAY:
                    engaged += 1
                    assert by_activity[activity].contains(WorldPoint(*hand))
        assert engaged >= 5 * 6

    def test_actions_cover_the_template(self, canonical_script):
        actions = {frame.action for frame in canonical_script.frames}
        assert actions == {Action.WALK, Action.WASH, Action.TOWEL, Action.TURN}

    def test_unknown_template(self, regions, small_config):
        with pytest.raises(ScriptError):
            script_trial("backflip", 0, regions, small_config)

    def test_unknown_token(self, regions, small_config):
        with pytest.raises(ScriptError):
            script_trial(["walk", "juggle"], 0, regions, small_config)

    def test_comma_separated_tokens(self):
        assert resolve_template("walk, tap,towel", 0) == ["walk", "tap", "towel"]

    def test_missing_region(self, small_config):
        only_soap = [ActivityRegion(activity="soap", center=(-0.3, -0.25, 2.1), radii=(0.08, 0.08, 0.1))]
        with pytest.raises(ScriptError):
            script_trial(["tap"], 0, only_soap, small_config)

    def test_region_outside_frustum(self, small_config):
        far = [ActivityRegion(activity="soap", center=(5.0, 0.0, 2.0), radii=(0.1, 0.1, 0.1))]
        with pytest.raises(ScriptError):
            script_trial(["soap"], 0, far, small_config)

    def test_region_edge_outside_frustum(self, small_config):
        # center projects to column ~151 of 160, the near edge beyond it
        edge = [ActivityRegion(activity="soap", center=(1.0, 0.0, 2.0), radii=(0.2, 0.2, 0.2))]
        with pytest.raises(ScriptError):
            script_trial(["soap"], 0, edge, small_config)

    def test_reachability_uses_render_intrinsics(self, tmp_path, regions, ordering, small_config):
        telephoto = CameraIntrinsics(fx=2000.0, fy=2000.0, cx=319.5, cy=239.5)
        script_trial("canonical", 0, regions, small_config, ordering)
        with pytest.raises(ScriptError):
            script_trial("canonical", 0, regions, small_config, ordering, telephoto)
        with pytest.raises(ScriptError):
            write_trials("canonical", 1, tmp_path, regions, small_config, ordering, base_intrinsics=telephoto)

    def test_random_template(self):
        tokens = random_template(3)
        assert tokens == random_template(3)
        assert tokens[:2] == ["walk", "tap"]
        assert tokens[-2:] == ["turn", "walk"]

    def test_dwell_range_admits_persistence(self):
        with pytest.raises(ValidationError):
            SynthConfig(dwell_frames=(2, 5))


class TestTrialDirectories:

    def test_manifest(self, canonical_trial, canonical_script):
        manifest = load_trial(canonical_trial)
        assert manifest.trial_id == "canonical"
        assert manifest.frame_count == len(canonical_script.frames)
        assert (manifest.width, manifest.height) == (160, 120)
        assert manifest.step_flags == canonical_script.step_flags
        assert manifest.template == canonical_script.template

    def test_frames_round_trip(self, canonical_trial, canonical_script):
        frames = list(iter_frames(canonical_trial))
        assert [f.record.index for f in frames] == list(range(len(canonical_script.frames)))
        for frame, script in zip(frames, canonical_script.frames):
            assert frame.record.action is script.action
            assert frame.raw.shape == (120, 160)
            assert np.array_equal(frame.labels.labels != 0, frame.foreground.valid_mask())
            left, right = frame.hand_positions
            assert left.to_list() == pytest.approx(list(script.left_hand))
            assert right.to_list() == pytest.approx(list(script.right_hand))

    def test_truth_has_visible_head(self, canonical_trial):
        frame = next(iter_frames(canonical_trial))
        assert frame.truth[BodyPart.HEAD] is not None

    def test_rewrite_is_byte_identical(self, tmp_path, canonical_script, small_config):
        write_trial(canonical_script, tmp_path / "a", "t", small_config, rng_seed=4)
        write_trial(canonical_script, tmp_path / "b", "t", small_config, rng_seed=4)
        for name in ("manifest.json", "depth_0000.pgm", "labels_0010.pgm"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    @pytest.fixture
    def walk_trial(self, tmp_path, regions, small_config):
        script = script_trial(["walk"], 0, regions, small_config)
        write_trial(script, tmp_path / "walk", "walk", small_config)
        return tmp_path / "walk"

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(DatasetError):
            load_trial(tmp_path)

    def test_missing_raster(self, walk_trial):
        (walk_trial / "depth_0002.pgm").unlink()
        with pytest.raises(DatasetError):
            load_trial(walk_trial)

    def test_frame_count_mismatch(self, walk_trial):
        path = walk_trial / MANIFEST_NAME
        document = json.loads(path.read_text())
        document["frame_count"] += 1
        path.write_text(json.dumps(document))
        with pytest.raises(DatasetError):
            load_trial(walk_trial)

    def test_malformed_manifest(self, walk_trial):
        (walk_trial / MANIFEST_NAME).write_text('{"trial_id": "walk"}')
        with pytest.raises(DatasetError):
            load_trial(walk_trial)

    def test_write_trials(self, tmp_path, regions, ordering, small_config):
        dirs = write_trials("no_rinse", 2, tmp_path, regions, small_config, ordering, rng_seed=1)
        assert [d.name for d in dirs] == ["trial_000", "trial_001"]
        seeds = [load_trial(d).rng_seed for d in dirs]
        assert seeds == [trial_seed(1, 0), trial_seed(1, 1)]

    def test_write_trials_count(self, tmp_path, regions, small_config):
        with pytest.raises(InvalidInputError):
            write_trials("canonical", 0, tmp_path, regions, small_config)

    def test_labeled_images(self, training_trials):
        images = load_labeled_images(training_trials)
        assert images
        assert all(image.depth.valid_mask().any() for image in images)

    def test_labeled_images_need_directories(self):
        with pytest.raises(DatasetError):
            load_labeled_images([])

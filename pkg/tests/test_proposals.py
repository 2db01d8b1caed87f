"""
Tests for seed selection, weighted mean shift and per-frame part proposals
"""

import numpy as np
import pytest

from src.errors import PreconditionError
from src.imaging.depth import segment_foreground
from src.models.forest import DecisionForest, LeafNode, TrainingConfig
from src.models.imaging import BodyPart, DepthImage, TRACKED_PARTS, WorldPoint
from src.models.proposals import ClassifiedPixel, ClassifiedPixels, ProposalConfig
from src.models.trial import FrameScript
from src.synth.renderer import render_frame
from src.tracking.proposals import (
    ModeSeeker,
    final_proposals,
    mean_shift,
    modes_for_pixels,
    pixel_weight,
    propose_parts,
    select_seeds,
)

LEFT = BodyPart.LEFT_HAND


def pdf_for(part, p=1.0):
    pdf = np.zeros(4)
    pdf[part.class_index] = p
    pdf[BodyPart.BODY.class_index] += 1.0 - p
    return pdf


def pixels_at(points, part=LEFT, p=1.0):
    points = np.asarray(points, dtype=np.float64)
    return ClassifiedPixels(
        points=points,
        pdfs=np.tile(pdf_for(part, p), (points.shape[0], 1)),
        depths=points[:, 2].copy(),
    )


def gaussian_mixture(seed=0, n=600):
    rng = np.random.default_rng(seed)
    centers = np.array([[0.0, 0.0, 2.0], [0.25, 0.0, 2.0], [0.0, 0.25, 2.0]])
    component = rng.choice(3, size=n, p=[0.6, 0.25, 0.15])
    return centers[component] + rng.normal(0.0, 0.03, size=(n, 3))


def kde_grid_argmax(pixels, part, bandwidth):
    """Brute-force weighted KDE maximum over a 1 cm lattice covering the pixels"""
    weights = pixels.pdfs[:, part.class_index] * pixels.depths ** 2
    low = np.floor(pixels.points.min(axis=0) * 100) / 100
    high = np.ceil(pixels.points.max(axis=0) * 100) / 100
    axes = [np.arange(lo, hi + 1e-9, 0.01) for lo, hi in zip(low, high)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    best_value, best_point = -np.inf, None
    for start in range(0, grid.shape[0], 2000):
        chunk = grid[start:start + 2000]
        d2 = ((chunk[:, None, :] - pixels.points[None, :, :]) ** 2).sum(axis=-1)
        density = np.exp(-d2 / bandwidth ** 2) @ weights
        i = int(np.argmax(density))
        if density[i] > best_value:
            best_value, best_point = density[i], chunk[i]
    return best_point


class TestSelectSeeds:

    def test_threshold_one_never_seeds(self):
        pixels = pixels_at([[0, 0, 2.0], [0.1, 0, 2.0]], p=1.0)
        assert select_seeds(pixels, LEFT, 1.0).shape == (0, 3)

    def test_strict_comparison(self):
        points = [[i * 0.1, 0.0, 2.0] for i in range(5)]
        probabilities = [0.2, 0.5, 0.7, 0.9, 0.61]
        pixels = [
            ClassifiedPixel(world=WorldPoint(*p), pdf=pdf_for(LEFT, q), depth=2.0)
            for p, q in zip(points, probabilities)
        ]
        seeds = select_seeds(pixels, LEFT, 0.6)
        assert seeds.shape == (3, 3)
        np.testing.assert_allclose(seeds[:, 0], [0.2, 0.3, 0.4])

    def test_seeds_follow_the_requested_part(self):
        pixels = pixels_at([[0, 0, 2.0]], part=BodyPart.HEAD, p=0.99)
        assert select_seeds(pixels, BodyPart.HEAD, 0.95).shape == (1, 3)
        assert select_seeds(pixels, LEFT, 0.0).shape == (0, 3)

    def test_no_pixels(self):
        assert select_seeds(ClassifiedPixels.empty(), LEFT, 0.5).shape == (0, 3)


class TestPixelWeight:

    def test_zero_probability(self):
        px = ClassifiedPixel(world=WorldPoint(0, 0, 3.0), pdf=pdf_for(BodyPart.HEAD), depth=3.0)
        assert pixel_weight(px, LEFT) == 0.0

    def test_depth_squared_scaling(self):
        px = ClassifiedPixel(world=WorldPoint(0, 0, 2.0), pdf=pdf_for(LEFT, 0.5), depth=2.0)
        assert pixel_weight(px, LEFT) == pytest.approx(2.0)


class TestMeanShift:

    def test_single_pixel_is_a_fixed_point(self):
        pixels = pixels_at([[0.1, -0.2, 2.0]])
        modes = mean_shift(pixels.points, pixels, LEFT, ProposalConfig())
        assert len(modes) == 1
        assert modes[0].position == WorldPoint(0.1, -0.2, 2.0)
        assert modes[0].confidence == pytest.approx(4.0)
        assert modes[0].part is LEFT

    def test_symmetric_pair_merges_at_midpoint(self):
        pixels = pixels_at([[-0.05, 0.0, 2.0], [0.05, 0.0, 2.0]])
        config = ProposalConfig(bandwidths={"left_hand": 1.0, "right_hand": 1.0, "head": 1.0})
        modes = mean_shift(pixels.points, pixels, LEFT, config)
        assert len(modes) == 1
        np.testing.assert_allclose(modes[0].position.as_array(), [0.0, 0.0, 2.0], atol=1e-3)

    def test_no_seeds(self):
        pixels = pixels_at([[0, 0, 2.0]])
        assert mean_shift(np.zeros((0, 3)), pixels, LEFT, ProposalConfig()) == []

    def test_non_positive_bandwidth(self):
        pixels = pixels_at([[0, 0, 2.0]])
        config = ProposalConfig.model_construct(
            bandwidths={"left_hand": 0.0, "right_hand": 0.05, "head": 0.1},
        )
        with pytest.raises(PreconditionError):
            mean_shift(pixels.points, pixels, LEFT, config)

    def test_top_mode_matches_kde_grid_search(self):
        pixels = pixels_at(gaussian_mixture())
        config = ProposalConfig(max_seeds=600)
        modes = mean_shift(pixels.points, pixels, LEFT, config)
        expected = kde_grid_argmax(pixels, LEFT, config.bandwidth_for(LEFT))
        assert np.linalg.norm(modes[0].position.as_array() - expected) <= config.bandwidth_for(LEFT) / 2

    def test_modes_sorted_by_confidence(self):
        pixels = pixels_at(gaussian_mixture(seed=1))
        modes = mean_shift(pixels.points, pixels, LEFT, ProposalConfig(max_seeds=600))
        assert len(modes) >= 2
        confidences = [mode.confidence for mode in modes]
        assert confidences == sorted(confidences, reverse=True)

    def test_ascent_never_decreases_density(self):
        pixels = pixels_at(gaussian_mixture(seed=2))
        seeker = ModeSeeker(pixels, LEFT, ProposalConfig())
        for start in pixels.points[:10]:
            path = np.stack(seeker.ascent_path(start))
            density = seeker.density(path)
            assert np.all(np.diff(density) >= -1e-9)

    def test_seed_cap(self):
        pixels = pixels_at(gaussian_mixture(seed=3, n=200))
        seeker = ModeSeeker(pixels, LEFT, ProposalConfig(max_seeds=25))
        indices = seeker.seed_indices(0.5)
        assert indices.size == 25
        np.testing.assert_array_equal(indices, seeker.seed_indices(0.5))

    def test_unweighted_denominator_changes_the_step(self):
        pixels = pixels_at([[0.0, 0.0, 2.0]])
        weighted = ModeSeeker(pixels, LEFT, ProposalConfig())
        unweighted = ModeSeeker(pixels, LEFT, ProposalConfig(weighted_denominator=False))
        np.testing.assert_allclose(weighted.ascent_path(pixels.points[0])[1], [0.0, 0.0, 2.0])
        # the kernel sum is 1 while the weighted sum is pdf * d^2 = 4
        np.testing.assert_allclose(unweighted.ascent_path(pixels.points[0])[1], [0.0, 0.0, 8.0])

    def test_threshold_sweep_reuses_ascents(self):
        pixels = pixels_at(gaussian_mixture(seed=4, n=150))
        pdfs = pixels.pdfs.copy()
        pdfs[:, LEFT.class_index] = np.linspace(0.0, 1.0, 150)
        pixels = ClassifiedPixels(pixels.points, pdfs, pixels.depths)
        seeker = ModeSeeker(pixels, LEFT, ProposalConfig())
        low = seeker.modes_at_threshold(0.2)
        cached = len(seeker._cache)
        seeker.modes_at_threshold(0.6)
        assert len(seeker._cache) == cached
        assert seeker.modes_at_threshold(0.2) == low


def constant_forest(part):
    pdf = np.zeros(4)
    pdf[part.class_index] = 1.0
    return DecisionForest(trees=[LeafNode(pdf=pdf)], training_config=TrainingConfig())


class TestProposeParts:

    def test_empty_foreground_marks_every_part_absent(self, intrinsics):
        img = DepthImage(np.zeros((480, 640)))
        modes = propose_parts(constant_forest(BodyPart.HEAD), img, intrinsics, 100, ProposalConfig())
        assert modes == {part: [] for part in TRACKED_PARTS}
        assert final_proposals(modes) == {part: None for part in TRACKED_PARTS}

    def test_head_proposal_near_rendered_center(self, small_config):
        k = small_config.intrinsics()
        frame = FrameScript(head=(0.05, -0.05, 1.5), floor_depth=2.5)
        rendered = render_frame(frame, k, small_config.width, small_config.height)
        img = segment_foreground(rendered.depth, 2.4)
        config = ProposalConfig(samples_per_frame=400, max_seeds=60)
        modes = propose_parts(constant_forest(BodyPart.HEAD), img, k, config.samples_per_frame, config)
        proposal = final_proposals(modes)[BodyPart.HEAD]
        assert proposal is not None
        assert proposal.distance_to(rendered.centers[BodyPart.HEAD]) <= 0.10
        assert modes[LEFT] == []
        assert modes[BodyPart.RIGHT_HAND] == []

    def test_modes_for_no_pixels(self):
        assert modes_for_pixels(ClassifiedPixels.empty(), ProposalConfig()) == {
            part: [] for part in TRACKED_PARTS
        }

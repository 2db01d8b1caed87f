"""
Tests for the depth-difference feature and candidate pools
"""

import numpy as np
import pytest

from src.classifier.features import as_volume, depth_feature, depth_features, generate_candidates
from src.errors import PreconditionError
from src.models.forest import OffsetPair
from src.models.imaging import BG_DEPTH, DepthImage

# Hand-written raster; (1, 1) sits at 2.0 m so offsets halve
GRID = np.array([
    [1.0, 1.1, 1.2, 1.3],
    [1.4, 2.0, 1.6, 1.7],
    [1.8, 1.9, 2.1, 2.2],
    [2.3, 2.4, 2.5, 2.6],
])


class TestDepthFeature:

    def test_identical_offsets(self):
        img = DepthImage(GRID)
        zero = OffsetPair(u=(0.0, 0.0), v=(0.0, 0.0))
        for px in [(0, 0), (1, 1), (3, 2)]:
            assert depth_feature(img, px, zero) == 0.0

    def test_flat_plane(self):
        img = DepthImage(np.full((20, 20), 2.0))
        offsets = OffsetPair(u=(6.0, -4.0), v=(-8.0, 2.0))
        assert depth_feature(img, (10, 10), offsets) == 0.0

    def test_hand_evaluated_grid(self):
        # offsets land on (2, 1) and (1, 2)
        value = depth_feature(DepthImage(GRID), (1, 1), OffsetPair(u=(2.0, 0.0), v=(0.0, 2.0)))
        assert value == pytest.approx(1.6 - 1.9)

    def test_offset_off_image_reads_background(self):
        depths = np.full((4, 4), 3.0)
        depths[1, 1] = 2.0
        depths[1, 2] = 1.5
        value = depth_feature(DepthImage(depths), (1, 1), OffsetPair(u=(-20.0, 0.0), v=(2.0, 0.0)))
        assert value == pytest.approx(BG_DEPTH - 1.5)

    def test_offset_on_invalid_pixel_reads_background(self):
        depths = np.full((4, 4), 2.0)
        depths[1, 2] = 0.0
        value = depth_feature(DepthImage(depths), (1, 1), OffsetPair(u=(2.0, 0.0), v=(0.0, 0.0)))
        assert value == pytest.approx(BG_DEPTH - 2.0)

    def test_offsets_scale_with_inverse_depth(self):
        near = np.full((1, 16), 1.0)
        near[0, 4] = 0.5
        far = np.full((1, 12), 2.0)
        far[0, 2] = 1.0
        # u = (4, 0): 8 px at 0.5 m lands on column 12, 4 px at 1.0 m lands on column 6
        near[0, 12] = 0.7
        far[0, 6] = 1.7
        offsets = OffsetPair(u=(4.0, 0.0), v=(0.0, 0.0))
        assert depth_feature(DepthImage(near), (4, 0), offsets) == pytest.approx(0.2)
        assert depth_feature(DepthImage(far), (2, 0), offsets) == pytest.approx(0.7)

    def test_invalid_center_pixel(self):
        depths = GRID.copy()
        depths[0, 0] = 0.0
        with pytest.raises(PreconditionError):
            depth_feature(DepthImage(depths), (0, 0), OffsetPair(u=(0.0, 0.0), v=(0.0, 0.0)))

    def test_center_outside_image(self):
        with pytest.raises(PreconditionError):
            depth_feature(DepthImage(GRID), (4, 0), OffsetPair(u=(0.0, 0.0), v=(0.0, 0.0)))

    def test_batch_matches_single_evaluations(self):
        rng = np.random.default_rng(4)
        img = DepthImage(rng.uniform(0.8, 2.5, size=(12, 16)))
        offsets = rng.uniform(-10, 10, size=(5, 4))
        xs = rng.integers(0, 16, size=30)
        ys = rng.integers(0, 12, size=30)
        batch = depth_features(as_volume(img), np.zeros(30, dtype=np.int64), xs, ys, offsets)
        assert batch.shape == (5, 30)
        for j, row in enumerate(offsets):
            pair = OffsetPair(u=(row[0], row[1]), v=(row[2], row[3]))
            for i in range(30):
                assert batch[j, i] == depth_feature(img, (int(xs[i]), int(ys[i])), pair)

    def test_swapped_offsets_negate(self):
        pair = OffsetPair(u=(2.0, 0.0), v=(0.0, 2.0))
        img = DepthImage(GRID)
        assert depth_feature(img, (1, 1), pair.swapped()) == -depth_feature(img, (1, 1), pair)


class TestGenerateCandidates:

    def test_default_pool_size(self):
        pool = generate_candidates(3000, 100, 500.0, 1.0, 0)
        assert len(pool) == 300_000

    def test_minimal_pool(self):
        pool = generate_candidates(1, 1, 500.0, 1.0, 7)
        assert len(pool) == 1
        assert len(list(pool)) == 1

    def test_deterministic(self):
        a = generate_candidates(50, 20, 250.0, 1.0, 9)
        b = generate_candidates(50, 20, 250.0, 1.0, 9)
        np.testing.assert_array_equal(a.offsets, b.offsets)
        np.testing.assert_array_equal(a.thresholds, b.thresholds)

    def test_different_seeds_differ(self):
        a = generate_candidates(50, 20, 250.0, 1.0, 1)
        b = generate_candidates(50, 20, 250.0, 1.0, 2)
        assert not np.array_equal(a.offsets, b.offsets)

    def test_ranges(self):
        pool = generate_candidates(200, 50, 60.0, 0.5, 3)
        assert np.all(np.abs(pool.offsets) <= 60.0)
        assert np.all(np.abs(pool.thresholds) <= 0.5)

    def test_candidate_indexing(self):
        pool = generate_candidates(4, 3, 100.0, 1.0, 0)
        candidate = pool.candidate(7)
        ux, uy, vx, vy = pool.offsets[2]
        assert candidate.offsets == OffsetPair(u=(ux, uy), v=(vx, vy))
        assert candidate.tau == pool.thresholds[1]

    @pytest.mark.parametrize("counts", [(0, 10), (10, 0)])
    def test_empty_pool_rejected(self, counts):
        with pytest.raises(PreconditionError):
            generate_candidates(counts[0], counts[1], 100.0, 1.0, 0)

"""
Part proposals - weighted mean-shift mode seeking over classified pixels
"""

from typing import Dict, List, Optional, Sequence, Tuple, Union

import logging
import numpy as np

from ..errors import PreconditionError
from ..imaging.depth import foreground_pixels, pixels_to_world
from ..classifier.forest import classify_image
from ..models.forest import DecisionForest
from ..models.imaging import BodyPart, CameraIntrinsics, DepthImage, TRACKED_PARTS, WorldPoint
from ..models.proposals import (
    ClassifiedPixel, ClassifiedPixels, PartMode, PartModes, ProposalConfig,
)

logger = logging.getLogger(__name__)


def _as_pixels(pixels: Union[ClassifiedPixels, Sequence[ClassifiedPixel]]) -> ClassifiedPixels:
    if isinstance(pixels, ClassifiedPixels):
        return pixels
    return ClassifiedPixels.from_pixels(pixels)


def select_seeds(
    pixels: Union[ClassifiedPixels, Sequence[ClassifiedPixel]],
    part: BodyPart,
    phi: float,
) -> np.ndarray:
    """
    World positions of pixels whose ``part`` probability exceeds ``phi``

    Returns:
        (k, 3) array; empty when the part is absent
    """
    pixels = _as_pixels(pixels)
    if len(pixels) == 0:
        return np.zeros((0, 3))
    return pixels.points[pixels.pdfs[:, part.class_index] > phi]


def pixel_weight(px: ClassifiedPixel, part: BodyPart) -> float:
    """Kernel weight pdf[part] * depth^2 of one pixel"""
    return float(px.pdf[part.class_index] * px.depth ** 2)


def pixel_weights(pixels: ClassifiedPixels, part: BodyPart) -> np.ndarray:
    return pixels.pdfs[:, part.class_index] * pixels.depths ** 2


class ModeSeeker:
    """
    Mean-shift ascent for one part over a fixed pixel population

    Converged end points are cached per seed pixel so that repeated calls with
    overlapping seed sets (a start-threshold sweep) reuse earlier ascents.
    """

    def __init__(self, pixels: ClassifiedPixels, part: BodyPart, config: ProposalConfig):
        self.pixels = pixels
        self.part = part
        self.config = config
        self.bandwidth = config.bandwidth_for(part)
        self.weights = pixel_weights(pixels, part)
        self._cache: Dict[int, Tuple[np.ndarray, float]] = {}
        self._priority = np.argsort(
            np.random.default_rng(config.rng_seed).permutation(len(pixels)), kind="stable"
        )

    def density(self, points: np.ndarray) -> np.ndarray:
        """Weighted kernel sum sum_i w_i exp(-|x - x_i|^2 / h^2) at each row of ``points``"""
        points = np.atleast_2d(points)
        d2 = ((points[:, None, :] - self.pixels.points[None, :, :]) ** 2).sum(axis=-1)
        return np.exp(-d2 / self.bandwidth ** 2) @ self.weights

    def _step(self, x: np.ndarray) -> np.ndarray:
        d2 = ((x[:, None, :] - self.pixels.points[None, :, :]) ** 2).sum(axis=-1)
        kernel = np.exp(-d2 / self.bandwidth ** 2)
        weighted = kernel * self.weights
        numerator = weighted @ self.pixels.points
        if self.config.weighted_denominator:
            denominator = weighted.sum(axis=1)
        else:
            denominator = kernel.sum(axis=1)
        moved = x.copy()
        ok = denominator > 0
        moved[ok] = numerator[ok] / denominator[ok, None]
        return moved

    def ascend(self, starts: np.ndarray) -> np.ndarray:
        """Run every start point to convergence or the iteration cap"""
        x = np.array(starts, dtype=np.float64).reshape(-1, 3)
        active = np.arange(x.shape[0])
        for _ in range(self.config.max_iterations):
            if active.size == 0:
                break
            moved = self._step(x[active])
            steps = np.linalg.norm(moved - x[active], axis=1)
            x[active] = moved
            active = active[steps >= self.config.convergence_epsilon]
        return x

    def ascent_path(self, start: np.ndarray) -> List[np.ndarray]:
        """Every iterate of a single ascent, for diagnostics"""
        path = [np.asarray(start, dtype=np.float64).reshape(1, 3)]
        for _ in range(self.config.max_iterations):
            moved = self._step(path[-1])
            path.append(moved)
            if np.linalg.norm(moved - path[-2]) < self.config.convergence_epsilon:
                break
        return [p[0] for p in path]

    def seed_indices(self, phi: float) -> np.ndarray:
        """Seed pixels above ``phi``, subsampled to ``max_seeds`` by a fixed random priority"""
        eligible = np.nonzero(self.pixels.pdfs[:, self.part.class_index] > phi)[0]
        if eligible.size > self.config.max_seeds:
            ranked = eligible[np.argsort(self._priority[eligible], kind="stable")]
            eligible = np.sort(ranked[:self.config.max_seeds])
        return eligible

    def endpoints(self, indices: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Converged points and their densities for seed pixels ``indices``"""
        missing = [int(i) for i in indices if int(i) not in self._cache]
        if missing:
            ends = self.ascend(self.pixels.points[missing])
            for i, end, weight in zip(missing, ends, self.density(ends)):
                self._cache[i] = (end, float(weight))
        if len(indices) == 0:
            return np.zeros((0, 3)), np.zeros(0)
        cached = [self._cache[int(i)] for i in indices]
        return np.stack([c[0] for c in cached]), np.array([c[1] for c in cached])

    def modes_at_threshold(self, phi: float) -> List[PartMode]:
        """Merged, scored modes seeded from pixels above ``phi``"""
        indices = self.seed_indices(phi)
        if indices.size == 0:
            return []
        return self.merge(*self.endpoints(indices))

    def merge(self, endpoints: np.ndarray, member_weights: Optional[np.ndarray] = None) -> List[PartMode]:
        """
        Merge converged points within ``merge_radius`` and score each mode

        Members are merged greedily in seed order; a cluster's position is the
        density-weighted mean of its members.
        """
        if member_weights is None:
            member_weights = self.density(endpoints)
        sums: List[np.ndarray] = []
        totals: List[float] = []
        for point, weight in zip(endpoints, member_weights):
            for c in range(len(sums)):
                center = sums[c] / totals[c] if totals[c] > 0 else sums[c]
                if np.linalg.norm(point - center) <= self.config.merge_radius:
                    if totals[c] > 0:
                        sums[c] = sums[c] + weight * point
                        totals[c] += weight
                    elif weight > 0:
                        sums[c], totals[c] = weight * point, float(weight)
                    break
            else:
                if weight > 0:
                    sums.append(weight * point)
                    totals.append(float(weight))
                else:
                    sums.append(point.copy())
                    totals.append(0.0)
        if not sums:
            return []
        centers = np.stack([s / t if t > 0 else s for s, t in zip(sums, totals)])
        confidences = self.density(centers)
        order = np.argsort(-confidences, kind="stable")
        return [
            PartMode(
                part=self.part,
                position=WorldPoint.from_array(centers[i]),
                confidence=float(confidences[i]),
            )
            for i in order
        ]


def mean_shift(
    seeds: np.ndarray,
    pixels: Union[ClassifiedPixels, Sequence[ClassifiedPixel]],
    part: BodyPart,
    config: ProposalConfig,
) -> List[PartMode]:
    """
    Weighted mean-shift from each seed over all classified pixels

    Args:
        seeds: (k, 3) world start points
        pixels: Classified pixels weighted by pdf[part] * depth^2
        part: Part whose density is climbed
        config: Bandwidth, stopping rule, merge radius, seed cap

    Returns:
        Modes sorted by descending confidence; empty when there are no seeds
    """
    bandwidth = config.bandwidth_for(part)
    if bandwidth <= 0:
        raise PreconditionError("Mean-shift bandwidth must be positive")
    seeds = np.asarray(seeds, dtype=np.float64).reshape(-1, 3)
    if seeds.shape[0] == 0:
        return []
    if seeds.shape[0] > config.max_seeds:
        rng = np.random.default_rng(config.rng_seed)
        keep = np.sort(rng.choice(seeds.shape[0], size=config.max_seeds, replace=False))
        seeds = seeds[keep]
    seeker = ModeSeeker(_as_pixels(pixels), part, config)
    return seeker.merge(seeker.ascend(seeds))


def classify_frame(
    forest: DecisionForest,
    img: DepthImage,
    k: CameraIntrinsics,
    n: int,
    rng_seed: int,
) -> ClassifiedPixels:
    """
    Classify ``n`` uniformly drawn foreground pixels and lift them to world space

    Returns:
        ClassifiedPixels; empty when the image has no foreground
    """
    xs, ys = foreground_pixels(img)
    if xs.size == 0:
        return ClassifiedPixels.empty()
    if xs.size > n:
        rng = np.random.default_rng(rng_seed)
        keep = np.sort(rng.choice(xs.size, size=n, replace=False))
        xs, ys = xs[keep], ys[keep]
    depths = img.depths[ys, xs]
    return ClassifiedPixels(
        points=pixels_to_world(xs, ys, depths, k),
        pdfs=classify_image(forest, img, xs, ys),
        depths=depths,
    )


def modes_for_pixels(pixels: ClassifiedPixels, config: ProposalConfig) -> PartModes:
    """Modes per tracked part at the configured start thresholds"""
    modes: PartModes = {}
    for part in TRACKED_PARTS:
        if len(pixels) == 0:
            modes[part] = []
            continue
        seeker = ModeSeeker(pixels, part, config)
        modes[part] = seeker.modes_at_threshold(config.threshold_for(part))
    return modes


def propose_parts(
    forest: DecisionForest,
    img: DepthImage,
    k: CameraIntrinsics,
    n: int,
    config: ProposalConfig,
    rng_seed: Optional[int] = None,
) -> PartModes:
    """
    All modes per tracked part for one segmented frame

    Args:
        forest: Trained forest
        img: Segmented depth image
        k: Camera intrinsics
        n: Foreground pixels N to classify
        config: Proposal configuration
        rng_seed: Overrides ``config.rng_seed`` for pixel sampling

    Returns:
        Mapping part -> modes by descending confidence; the first mode is the
        final proposal and an empty list means the part is absent
    """
    seed = config.rng_seed if rng_seed is None else rng_seed
    pixels = classify_frame(forest, img, k, n, seed)
    if len(pixels) == 0:
        logger.debug("Frame has no foreground; all parts absent")
    return modes_for_pixels(pixels, config)


def final_proposals(modes: PartModes) -> Dict[BodyPart, Optional[WorldPoint]]:
    """Highest-confidence mode position per part, or None"""
    return {part: (found[0].position if found else None) for part, found in modes.items()}

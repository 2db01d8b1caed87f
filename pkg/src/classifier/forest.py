"""
Random decision forest training and per-pixel classification

Trees grow by exhaustively scoring a fixed candidate pool at every node and
keeping the split with the largest information gain; leaves hold the
normalized class histogram of the samples that reach them.
"""

from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union
from dataclasses import dataclass
from concurrent.futures import ThreadPoolExecutor
import logging
import time

import numpy as np

from ..errors import DatasetError, PreconditionError
from ..models.evaluation import ConfusionMatrix
from ..models.forest import (
    CandidatePool, DecisionForest, LeafNode, SampleSet, SplitCandidate,
    SplitNode, TrainingConfig, TreeNode,
)
from ..models.imaging import (
    BodyPart, CLASS_NAMES, DepthImage, LabeledImage, NUM_CLASSES,
)
from .features import as_volume, depth_features, routed_features, generate_candidates

logger = logging.getLogger(__name__)

# Upper bound on feature-matrix cells evaluated per chunk during split search
_CHUNK_CELLS = 2_000_000


class TrainingSet:
    """Stacked depth and label rasters of equally sized training images"""

    def __init__(self, images: Sequence[LabeledImage]):
        """
        Build the stacked volumes, dropping images without foreground

        Args:
            images: Segmented, fully labeled images of one resolution
        """
        kept = [img for img in images if np.any(img.labels.labels != BodyPart.BACKGROUND)]
        self.skipped = len(images) - len(kept)
        if self.skipped:
            logger.warning(f"Skipped {self.skipped} training images with empty foreground")
        if not kept:
            raise DatasetError("Training set has no image with labeled foreground")
        shapes = {img.depth.shape for img in kept}
        if len(shapes) != 1:
            raise DatasetError(f"Training images differ in resolution: {sorted(shapes)}")
        self.images: List[LabeledImage] = kept
        self.volume = np.stack([img.depth.depths for img in kept])
        self.labels = np.stack([img.labels.labels for img in kept])
        logger.info(f"Initialized TrainingSet with {len(kept)} images of shape {kept[0].depth.shape}")

    def __len__(self) -> int:
        return len(self.images)

    def subset(self, fraction: float, rng_seed: int) -> "TrainingSet":
        """Random subset holding ``fraction`` of the images (at least one)"""
        if fraction >= 1.0:
            return self
        count = max(1, int(round(fraction * len(self.images))))
        rng = np.random.default_rng(rng_seed)
        chosen = np.sort(rng.choice(len(self.images), size=count, replace=False))
        return TrainingSet([self.images[i] for i in chosen])


class SplitChoice(NamedTuple):
    """Best candidate for a node and its information gain in bits"""
    candidate: SplitCandidate
    gain: float
    index: int


def _as_training_set(images: Union[TrainingSet, Sequence[LabeledImage]]) -> TrainingSet:
    return images if isinstance(images, TrainingSet) else TrainingSet(images)


def sample_pixels(
    images: Union[TrainingSet, Sequence[LabeledImage]],
    n: int,
    rng_seed: int,
) -> SampleSet:
    """
    Draw up to ``n`` labeled foreground pixels per image without replacement

    Args:
        images: Training images
        n: Samples per image N; clamped to each image's foreground size
        rng_seed: Seed; equal seeds give equal sample sets

    Returns:
        SampleSet with labels taken from the label rasters
    """
    if n < 1:
        raise PreconditionError("samples per image must be at least 1")
    training_set = _as_training_set(images)
    rng = np.random.default_rng(rng_seed)
    parts = []
    for image_id in range(len(training_set)):
        labels = training_set.labels[image_id]
        ys, xs = np.nonzero(labels != BodyPart.BACKGROUND)
        count = min(n, xs.size)
        chosen = np.sort(rng.choice(xs.size, size=count, replace=False))
        parts.append(SampleSet(
            image_ids=np.full(count, image_id, dtype=np.int64),
            xs=xs[chosen].astype(np.int64),
            ys=ys[chosen].astype(np.int64),
            labels=labels[ys[chosen], xs[chosen]].astype(np.int64) - 1,
        ))
    samples = SampleSet.concatenate(parts)
    logger.debug(f"Sampled {len(samples)} pixels from {len(training_set)} images")
    return samples


def _entropy_of_counts(counts: np.ndarray) -> np.ndarray:
    """Shannon entropy in bits along the last axis; empty histograms give 0"""
    counts = np.asarray(counts, dtype=np.float64)
    totals = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(totals > 0, counts / np.where(totals > 0, totals, 1.0), 0.0)
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -terms.sum(axis=-1)


def entropy(labels: Iterable) -> float:
    """
    Entropy in bits of the empirical class distribution of ``labels``

    Args:
        labels: BodyPart values or class indices; an empty collection gives 0
    """
    indices = [
        label.class_index if isinstance(label, BodyPart) else int(label)
        for label in labels
    ]
    counts = np.bincount(np.array(indices, dtype=np.int64), minlength=NUM_CLASSES)
    return float(_entropy_of_counts(counts)) + 0.0


def _information_gain(parent: np.ndarray, left: np.ndarray) -> np.ndarray:
    """Gain of splitting histogram ``parent`` into ``left`` and the remainder"""
    right = parent - left
    n = parent.sum()
    n_left = left.sum(axis=-1)
    n_right = right.sum(axis=-1)
    return (
        _entropy_of_counts(parent)
        - (n_left / n) * _entropy_of_counts(left)
        - (n_right / n) * _entropy_of_counts(right)
    )


def partition(
    samples: SampleSet,
    candidate: SplitCandidate,
    images: Union[TrainingSet, Sequence[LabeledImage]],
) -> Tuple[SampleSet, SampleSet]:
    """
    Split samples by ``feature < tau``

    Returns:
        (left, right) disjoint sample sets whose union is ``samples``
    """
    training_set = _as_training_set(images)
    if len(samples) == 0:
        return samples, samples
    row = np.array([[*candidate.offsets.u, *candidate.offsets.v]], dtype=np.float64)
    features = depth_features(training_set.volume, samples.image_ids, samples.xs, samples.ys, row)[0]
    goes_left = features < candidate.tau
    return samples.subset(goes_left), samples.subset(~goes_left)


def _best_split_arrays(
    volume: np.ndarray,
    samples: SampleSet,
    pool: CandidatePool,
) -> Tuple[int, float, np.ndarray]:
    """Index, gain and left-mask of the best candidate (lowest index on ties)"""
    n = len(samples)
    parent = samples.class_counts()
    one_hot = np.eye(NUM_CLASSES, dtype=np.int64)[samples.labels]
    chunk = max(1, _CHUNK_CELLS // max(n, 1))
    best_index, best_gain = -1, -np.inf
    for start in range(0, pool.n_offsets, chunk):
        stop = min(start + chunk, pool.n_offsets)
        features = depth_features(volume, samples.image_ids, samples.xs, samples.ys, pool.offsets[start:stop])
        order = np.argsort(features, axis=1, kind="stable")
        sorted_features = np.take_along_axis(features, order, axis=1)
        cumulative = np.zeros((stop - start, n + 1, NUM_CLASSES), dtype=np.int64)
        cumulative[:, 1:, :] = np.cumsum(one_hot[order], axis=1)
        below = np.stack([
            np.searchsorted(sorted_features[i], pool.thresholds, side="left")
            for i in range(stop - start)
        ])
        left_counts = cumulative[np.arange(stop - start)[:, None], below]
        gains = _information_gain(parent, left_counts)
        local = int(np.argmax(gains))
        local_gain = float(gains.flat[local])
        if local_gain > best_gain:
            best_gain = local_gain
            best_index = start * pool.n_thresholds + local
    offset_index, threshold_index = divmod(best_index, pool.n_thresholds)
    row = pool.offsets[offset_index:offset_index + 1]
    features = depth_features(volume, samples.image_ids, samples.xs, samples.ys, row)[0]
    left_mask = features < pool.thresholds[threshold_index]
    return best_index, best_gain, left_mask


def best_split(
    samples: SampleSet,
    candidates: CandidatePool,
    images: Union[TrainingSet, Sequence[LabeledImage]],
) -> SplitChoice:
    """
    Candidate maximizing H(S) - |S_L|/|S| H(S_L) - |S_R|/|S| H(S_R)

    Args:
        samples: Node samples (at least one)
        candidates: Candidate pool (at least one)
        images: Images the samples reference

    Returns:
        SplitChoice; ties resolve to the lowest candidate index
    """
    if len(samples) == 0 or len(candidates) == 0:
        raise PreconditionError("best_split needs at least one sample and one candidate")
    training_set = _as_training_set(images)
    index, gain, _ = _best_split_arrays(training_set.volume, samples, candidates)
    return SplitChoice(candidate=candidates.candidate(index), gain=gain, index=index)


def _leaf(counts: np.ndarray) -> LeafNode:
    return LeafNode(pdf=counts / counts.sum(), counts=counts.copy())


def train_tree(
    samples: SampleSet,
    candidates: CandidatePool,
    config: TrainingConfig,
    images: Union[TrainingSet, Sequence[LabeledImage]],
) -> TreeNode:
    """
    Grow one tree by recursive gain maximization

    Args:
        samples: Training samples for this tree (at least one)
        candidates: Candidate pool scored at every node
        config: Supplies max_depth and min_gain
        images: Images the samples reference

    Returns:
        Root TreeNode
    """
    if len(samples) == 0:
        raise PreconditionError("train_tree needs at least one sample")
    training_set = _as_training_set(images)

    def grow(node_samples: SampleSet, depth: int) -> TreeNode:
        counts = node_samples.class_counts()
        if depth >= config.max_depth or np.count_nonzero(counts) < 2:
            return _leaf(counts)
        index, gain, left_mask = _best_split_arrays(training_set.volume, node_samples, candidates)
        n_left = int(left_mask.sum())
        if gain <= config.min_gain or n_left == 0 or n_left == len(node_samples):
            return _leaf(counts)
        logger.debug(f"Split at depth {depth}: {len(node_samples)} samples, gain {gain:.4f}")
        return SplitNode(
            candidate=candidates.candidate(index),
            left=grow(node_samples.subset(left_mask), depth + 1),
            right=grow(node_samples.subset(~left_mask), depth + 1),
            gain=gain,
        )

    return grow(samples, 0)


def tree_seeds(rng_seed: int, n_trees: int) -> List[Tuple[int, int]]:
    """Independent (sampling, candidate) seeds for each tree"""
    children = np.random.SeedSequence(rng_seed).spawn(n_trees)
    return [tuple(int(s) for s in child.generate_state(2)) for child in children]


def train_forest(
    images: Union[TrainingSet, Sequence[LabeledImage]],
    config: TrainingConfig,
    threads: int = 1,
) -> DecisionForest:
    """
    Train ``config.n_trees`` trees on independently drawn samples and candidates

    Args:
        images: Labeled training images
        config: Training hyperparameters and seed
        threads: Worker threads; results do not depend on this value

    Returns:
        Trained DecisionForest
    """
    training_set = _as_training_set(images).subset(config.image_fraction, config.rng_seed)
    seeds = tree_seeds(config.rng_seed, config.n_trees)

    def build(tree_index: int) -> TreeNode:
        started = time.perf_counter()
        sample_seed, candidate_seed = seeds[tree_index]
        samples = sample_pixels(training_set, config.samples_per_image, sample_seed)
        pool = generate_candidates(
            config.count_offsets, config.count_thresholds,
            config.theta_max, config.tau_max, candidate_seed,
        )
        tree = train_tree(samples, pool, config, training_set)
        nodes = count_nodes(tree)
        logger.info(
            f"Trained tree {tree_index + 1}/{config.n_trees}: {nodes} nodes, "
            f"{len(samples)} samples, {time.perf_counter() - started:.1f}s"
        )
        return tree

    workers = max(1, min(threads, config.n_trees))
    if workers == 1:
        trees = [build(i) for i in range(config.n_trees)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            trees = list(executor.map(build, range(config.n_trees)))
    return DecisionForest(trees=trees, training_config=config, class_names=list(CLASS_NAMES))


def count_nodes(node: TreeNode) -> int:
    if isinstance(node, LeafNode):
        return 1
    return 1 + count_nodes(node.left) + count_nodes(node.right)


def tree_depth(node: TreeNode) -> int:
    if isinstance(node, LeafNode):
        return 0
    return 1 + max(tree_depth(node.left), tree_depth(node.right))


def forest_node_counts(forest: DecisionForest) -> List[int]:
    return [count_nodes(tree) for tree in forest.trees]


@dataclass(frozen=True)
class CompiledTree:
    """Flat array form of a tree for vectorized traversal"""
    offsets: np.ndarray
    taus: np.ndarray
    left: np.ndarray
    right: np.ndarray
    is_leaf: np.ndarray
    pdfs: np.ndarray


def compile_tree(root: TreeNode) -> CompiledTree:
    """Flatten a tree into node arrays; node 0 is the root"""
    nodes: List[TreeNode] = []
    children: List[Tuple[int, int]] = []
    stack = [root]
    index_of = {id(root): 0}
    nodes.append(root)
    children.append((-1, -1))
    while stack:
        node = stack.pop()
        if isinstance(node, SplitNode):
            ids = []
            for child in (node.left, node.right):
                index_of[id(child)] = len(nodes)
                ids.append(len(nodes))
                nodes.append(child)
                children.append((-1, -1))
                stack.append(child)
            children[index_of[id(node)]] = (ids[0], ids[1])
    count = len(nodes)
    offsets = np.zeros((count, 4))
    taus = np.zeros(count)
    pdfs = np.zeros((count, NUM_CLASSES))
    is_leaf = np.zeros(count, dtype=bool)
    for i, node in enumerate(nodes):
        if isinstance(node, LeafNode):
            is_leaf[i] = True
            pdfs[i] = node.pdf
        else:
            offsets[i] = [*node.candidate.offsets.u, *node.candidate.offsets.v]
            taus[i] = node.candidate.tau
    left = np.array([c[0] for c in children], dtype=np.int64)
    right = np.array([c[1] for c in children], dtype=np.int64)
    return CompiledTree(offsets, taus, left, right, is_leaf, pdfs)


def _compiled(forest: DecisionForest) -> List[CompiledTree]:
    if forest._compiled is None:
        forest._compiled = [compile_tree(tree) for tree in forest.trees]
    return forest._compiled


def _traverse(tree: CompiledTree, volume: np.ndarray, ids, xs, ys) -> np.ndarray:
    node = np.zeros(xs.shape[0], dtype=np.int64)
    active = np.nonzero(~tree.is_leaf[node])[0]
    while active.size:
        current = node[active]
        features = routed_features(volume, ids[active], xs[active], ys[active], tree.offsets[current])
        node[active] = np.where(features < tree.taus[current], tree.left[current], tree.right[current])
        active = active[~tree.is_leaf[node[active]]]
    return tree.pdfs[node]


def classify_volume(
    forest: DecisionForest,
    volume: np.ndarray,
    image_ids: np.ndarray,
    xs: np.ndarray,
    ys: np.ndarray,
) -> np.ndarray:
    """Mean leaf PDF over the forest for many pixels; returns (n, NUM_CLASSES)"""
    ids = np.asarray(image_ids, dtype=np.int64)
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    if xs.size and np.any(volume[ids, ys, xs] <= 0):
        raise PreconditionError("Only valid foreground pixels can be classified")
    total = np.zeros((xs.size, NUM_CLASSES))
    for tree in _compiled(forest):
        total += _traverse(tree, volume, ids, xs, ys)
    return total / forest.n_trees


def classify_image(forest: DecisionForest, img: DepthImage, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Class PDFs for pixels ``(xs[i], ys[i])`` of one image"""
    xs = np.asarray(xs, dtype=np.int64)
    return classify_volume(forest, as_volume(img), np.zeros(xs.size, dtype=np.int64), xs, ys)


def classify_pixel(forest: DecisionForest, img: DepthImage, px: Tuple[int, int]) -> np.ndarray:
    """
    Class PDF of one foreground pixel averaged over all trees

    Args:
        forest: Trained forest
        img: Segmented depth image
        px: Valid foreground pixel (x, y)

    Returns:
        Probability vector over left_hand, right_hand, head, body
    """
    if not img.contains(px) or img.depth_at(px) <= 0:
        raise PreconditionError(f"Pixel {px} is not a valid foreground pixel")
    return classify_image(forest, img, np.array([px[0]]), np.array([px[1]]))[0]


def pixel_confusion(
    forest: DecisionForest,
    images: Iterable[LabeledImage],
    max_pixels_per_image: Optional[int] = None,
    rng_seed: int = 0,
) -> ConfusionMatrix:
    """
    Confusion matrix of arg-max predictions over labeled pixels

    Args:
        forest: Trained forest
        images: Holdout images with ground-truth labels
        max_pixels_per_image: Optional uniform subsample per image; all labeled pixels by default
        rng_seed: Seed for the optional subsample

    Returns:
        ConfusionMatrix with rows = ground truth
    """
    rng = np.random.default_rng(rng_seed)
    counts = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64)
    for image in images:
        xs, ys = image.labeled_pixels()
        if xs.size == 0:
            continue
        if max_pixels_per_image is not None and xs.size > max_pixels_per_image:
            keep = np.sort(rng.choice(xs.size, size=max_pixels_per_image, replace=False))
            xs, ys = xs[keep], ys[keep]
        truth = image.labels.labels[ys, xs].astype(np.int64) - 1
        predicted = np.argmax(classify_image(forest, image.depth, xs, ys), axis=1)
        np.add.at(counts, (truth, predicted), 1)
    return ConfusionMatrix(counts, tuple(CLASS_NAMES))

"""
Depth-difference split features and random split candidate generation
"""

from typing import Tuple

import logging
import numpy as np

from ..errors import PreconditionError
from ..models.forest import CandidatePool, OffsetPair
from ..models.imaging import BG_DEPTH, DepthImage

logger = logging.getLogger(__name__)


def _round_half_up(values: np.ndarray) -> np.ndarray:
    return np.floor(values + 0.5).astype(np.int64)


def offset_depths(
    volume: np.ndarray,
    image_ids: np.ndarray,
    xs: np.ndarray,
    ys: np.ndarray,
    center_depths: np.ndarray,
    offset_x: np.ndarray,
    offset_y: np.ndarray,
) -> np.ndarray:
    """
    Read depth at ``(x, y) + offset / d(x, y)`` with broadcasting

    Positions off the image or on invalid pixels read BG_DEPTH.
    """
    read_x = xs + _round_half_up(offset_x / center_depths)
    read_y = ys + _round_half_up(offset_y / center_depths)
    read_x, read_y, ids = np.broadcast_arrays(read_x, read_y, image_ids)
    _, height, width = volume.shape
    inside = (read_x >= 0) & (read_x < width) & (read_y >= 0) & (read_y < height)
    values = np.full(read_x.shape, BG_DEPTH, dtype=np.float64)
    values[inside] = volume[ids[inside], read_y[inside], read_x[inside]]
    values[values <= 0] = BG_DEPTH
    return values


def depth_features(
    volume: np.ndarray,
    image_ids: np.ndarray,
    xs: np.ndarray,
    ys: np.ndarray,
    offsets: np.ndarray,
) -> np.ndarray:
    """
    Evaluate the depth feature for many pixels and offset pairs at once

    Args:
        volume: (n_images, height, width) depth rasters in meters
        image_ids, xs, ys: (n,) pixel references; every pixel must be valid
        offsets: (n_offsets, 4) rows of u_x, u_y, v_x, v_y in pixel-meters

    Returns:
        (n_offsets, n) feature matrix in meters
    """
    image_ids = np.asarray(image_ids, dtype=np.int64)
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    offsets = np.atleast_2d(np.asarray(offsets, dtype=np.float64))
    center = volume[image_ids, ys, xs]
    if np.any(center <= 0):
        raise PreconditionError("Depth features require valid foreground pixels")
    ux, uy, vx, vy = (offsets[:, i:i + 1] for i in range(4))
    first = offset_depths(volume, image_ids, xs, ys, center, ux, uy)
    second = offset_depths(volume, image_ids, xs, ys, center, vx, vy)
    return first - second


def routed_features(
    volume: np.ndarray,
    image_ids: np.ndarray,
    xs: np.ndarray,
    ys: np.ndarray,
    offsets: np.ndarray,
) -> np.ndarray:
    """Feature of pixel ``i`` under its own offset row ``offsets[i]``; returns (n,)"""
    center = volume[image_ids, ys, xs]
    if np.any(center <= 0):
        raise PreconditionError("Depth features require valid foreground pixels")
    first = offset_depths(volume, image_ids, xs, ys, center, offsets[:, 0], offsets[:, 1])
    second = offset_depths(volume, image_ids, xs, ys, center, offsets[:, 2], offsets[:, 3])
    return first - second


def as_volume(img: DepthImage) -> np.ndarray:
    """Single-image volume view for the batch feature functions"""
    return img.depths[np.newaxis, :, :]


def depth_feature(img: DepthImage, px: Tuple[int, int], offsets: OffsetPair) -> float:
    """
    Depth-invariant difference of two depth reads around ``px``

    Args:
        img: Foreground depth image
        px: Valid foreground pixel (x, y)
        offsets: Offsets u, v in pixel-meters, scaled by 1 / d(px)

    Returns:
        d(px + u/d(px)) - d(px + v/d(px)) in meters
    """
    if not img.contains(px) or img.depth_at(px) <= 0:
        raise PreconditionError(f"Pixel {px} is not a valid foreground pixel")
    row = np.array([[offsets.u[0], offsets.u[1], offsets.v[0], offsets.v[1]]])
    value = depth_features(
        as_volume(img),
        np.zeros(1, dtype=np.int64),
        np.array([px[0]]),
        np.array([px[1]]),
        row,
    )
    return float(value[0, 0])


def generate_candidates(
    count_offsets: int,
    count_thresholds: int,
    theta_max: float,
    tau_max: float,
    rng_seed: int,
) -> CandidatePool:
    """
    Draw a pool of split candidates phi = (theta, tau)

    Args:
        count_offsets: Number of offset pairs, components uniform on [-theta_max, theta_max]
        count_thresholds: Number of thresholds, uniform on [-tau_max, tau_max]
        theta_max: Maximum offset component in pixel-meters
        tau_max: Maximum threshold magnitude in meters
        rng_seed: Seed; equal seeds give equal pools

    Returns:
        CandidatePool holding the cross product of offsets and thresholds
    """
    if count_offsets < 1 or count_thresholds < 1:
        raise PreconditionError("Candidate counts must be at least 1")
    rng = np.random.default_rng(rng_seed)
    offsets = rng.uniform(-theta_max, theta_max, size=(count_offsets, 4))
    thresholds = rng.uniform(-tau_max, tau_max, size=count_thresholds)
    logger.debug(
        f"Generated {count_offsets} offsets x {count_thresholds} thresholds (seed {rng_seed})"
    )
    return CandidatePool(offsets=offsets, thresholds=thresholds)

"""
Depth raster operations - foreground segmentation, pinhole projection, part centers
"""

from typing import Optional, Tuple

import logging
import numpy as np

from ..errors import InvalidInputError, NoDepthError
from ..models.imaging import (
    BodyPart, CameraIntrinsics, DepthImage, LabelImage, WorldPoint, D_MAX,
)

logger = logging.getLogger(__name__)


def segment_foreground(raw: DepthImage, background_threshold: float) -> DepthImage:
    """
    Remove the background by scalar depth thresholding

    Args:
        raw: Sensor depth image
        background_threshold: Pixels at or beyond this range (meters) are background

    Returns:
        DepthImage where background pixels are invalid (0); sensor-invalid pixels stay invalid
    """
    if not 0.0 < background_threshold <= D_MAX:
        raise InvalidInputError(
            f"background_threshold must lie in (0, {D_MAX}] m, got {background_threshold}"
        )
    depths = np.where(raw.depths >= background_threshold, 0.0, raw.depths)
    return DepthImage(depths)


def foreground_pixels(img: DepthImage) -> Tuple[np.ndarray, np.ndarray]:
    """Column and row indices of every valid pixel in row-major order"""
    ys, xs = np.nonzero(img.valid_mask())
    return xs.astype(np.int64), ys.astype(np.int64)


def pixels_to_world(
    xs: np.ndarray,
    ys: np.ndarray,
    depths: np.ndarray,
    k: CameraIntrinsics,
) -> np.ndarray:
    """Vectorized pinhole back-projection returning an (n, 3) array"""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    z = np.asarray(depths, dtype=np.float64)
    return np.stack([(xs - k.cx) * z / k.fx, (ys - k.cy) * z / k.fy, z], axis=-1)


def project_to_world(img: DepthImage, px: Tuple[int, int], k: CameraIntrinsics) -> WorldPoint:
    """
    Lift a pixel into camera-centered world coordinates

    Args:
        img: Depth image supplying z
        px: Pixel as (x, y) = (column, row)
        k: Camera intrinsics

    Returns:
        WorldPoint in meters
    """
    if not img.contains(px):
        raise InvalidInputError(f"Pixel {px} outside {img.width}x{img.height} image")
    z = img.depth_at(px)
    if z <= 0:
        raise NoDepthError(f"Pixel {px} has no valid depth")
    point = pixels_to_world(np.array([px[0]]), np.array([px[1]]), np.array([z]), k)[0]
    return WorldPoint.from_array(point)


def back_project(point: WorldPoint, k: CameraIntrinsics) -> Tuple[float, float]:
    """Image position (x, y) of a world point; inverse of :func:`project_to_world`"""
    if point.z <= 0:
        raise InvalidInputError(f"Point {point} is not in front of the camera")
    return (point.x * k.fx / point.z + k.cx, point.y * k.fy / point.z + k.cy)


def part_center_of_mass(
    labels: LabelImage,
    img: DepthImage,
    part: BodyPart,
    k: CameraIntrinsics,
) -> Optional[WorldPoint]:
    """
    Unweighted world-space mean of all pixels carrying ``part``

    Args:
        labels: Label raster paired with ``img``
        img: Depth raster
        part: Part whose center is wanted
        k: Camera intrinsics

    Returns:
        WorldPoint, or None when no pixel carries the label
    """
    labels.check_paired(img)
    ys, xs = np.nonzero(labels.labels == part)
    if xs.size == 0:
        return None
    points = pixels_to_world(xs, ys, img.depths[ys, xs], k)
    return WorldPoint.from_array(points.mean(axis=0))


def complete_partial_labels(foreground: DepthImage, annotations: LabelImage) -> LabelImage:
    """
    Assign ``body`` to every foreground pixel without a hand or head annotation

    Annotations outside the foreground are dropped.
    """
    if annotations.shape != foreground.shape:
        raise InvalidInputError(
            f"Annotation raster {annotations.shape} does not match depth raster {foreground.shape}"
        )
    valid = foreground.valid_mask()
    annotated = np.isin(
        annotations.labels,
        [BodyPart.LEFT_HAND, BodyPart.RIGHT_HAND, BodyPart.HEAD],
    )
    labels = np.full(foreground.shape, BodyPart.BACKGROUND, dtype=np.uint8)
    labels[valid] = BodyPart.BODY
    keep = valid & annotated
    labels[keep] = annotations.labels[keep]
    dropped = int(np.count_nonzero(annotated & ~valid))
    if dropped:
        logger.debug(f"Dropped {dropped} annotated pixels outside the foreground")
    return LabelImage(labels)


def restrict_labels(labels: LabelImage, foreground: DepthImage) -> LabelImage:
    """Clear labels on pixels that segmentation removed"""
    cleared = np.where(foreground.valid_mask(), labels.labels, BodyPart.BACKGROUND)
    return LabelImage(cleared)


def foreground_mask(img: DepthImage) -> np.ndarray:
    """Boolean raster of pixels that survived segmentation"""
    return img.valid_mask()

"""
Synthetic overhead depth rendering - ray-cast ellipsoids over a floor plane
"""

from dataclasses import dataclass
from typing import Dict, List, Optional

import logging
import numpy as np

from ..errors import ScriptError
from ..imaging.depth import part_center_of_mass
from ..models.imaging import BodyPart, CameraIntrinsics, DepthImage, LabelImage, WorldPoint, TRACKED_PARTS
from ..models.trial import FrameScript, Vec3

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Primitive:
    """Axis-aligned ellipsoid carrying one label"""
    center: np.ndarray
    radii: np.ndarray
    label: BodyPart


@dataclass(frozen=True)
class RenderedFrame:
    """Rasters plus ground truth for one scripted frame"""
    depth: DepthImage
    labels: LabelImage
    centers: Dict[BodyPart, Optional[WorldPoint]]
    analytic_centers: Dict[BodyPart, Optional[WorldPoint]]


def _arm_chain(shoulder: Vec3, hand: Vec3, radius: float, stop: float) -> List[Primitive]:
    # Spheres every radius/2 from the shoulder to ``stop`` short of the hand
    start = np.asarray(shoulder, dtype=np.float64)
    end = np.asarray(hand, dtype=np.float64)
    length = float(np.linalg.norm(end - start)) - stop
    if length <= 0:
        return []
    direction = (end - start) / np.linalg.norm(end - start)
    count = int(np.ceil(length / (radius / 2.0))) + 1
    return [
        Primitive(start + direction * s, np.full(3, radius), BodyPart.BODY)
        for s in np.linspace(0.0, length, count)
    ]


def scene_primitives(frame: FrameScript) -> List[Primitive]:
    """Ellipsoids making up the body in ``frame``"""
    r = frame.radii
    prims: List[Primitive] = []
    parts = [
        (frame.head, r.head, BodyPart.HEAD),
        (frame.left_hand, r.hand, BodyPart.LEFT_HAND),
        (frame.right_hand, r.hand, BodyPart.RIGHT_HAND),
        (frame.torso, r.torso, BodyPart.BODY),
    ]
    for center, radii, label in parts:
        if center is not None:
            prims.append(Primitive(np.asarray(center, dtype=np.float64), np.asarray(radii, dtype=np.float64), label))
    hand_extent = max(r.hand)
    for shoulder, hand in ((frame.left_shoulder, frame.left_hand), (frame.right_shoulder, frame.right_hand)):
        if shoulder is not None and hand is not None:
            prims.extend(_arm_chain(shoulder, hand, r.arm, hand_extent))
        elif shoulder is not None:
            prims.append(Primitive(np.asarray(shoulder, dtype=np.float64), np.full(3, r.arm), BodyPart.BODY))
    for prim in prims:
        if prim.center[2] - prim.radii[2] <= 0:
            raise ScriptError(f"{prim.label.name.lower()} at {prim.center.tolist()} is behind the camera")
        if prim.center[2] + prim.radii[2] >= frame.floor_depth:
            raise ScriptError(f"{prim.label.name.lower()} at {prim.center.tolist()} is below the floor")
    return prims


def _ray_hits(rays: np.ndarray, prim: Primitive) -> np.ndarray:
    """Nearest hit depth of each ray on ``prim``; inf on a miss"""
    scaled_rays = rays / prim.radii
    scaled_center = prim.center / prim.radii
    a = (scaled_rays ** 2).sum(axis=-1)
    b = scaled_rays @ scaled_center
    c = float(scaled_center @ scaled_center) - 1.0
    disc = b ** 2 - a * c
    t = np.full(a.shape, np.inf)
    hit = disc >= 0
    t[hit] = (b[hit] - np.sqrt(disc[hit])) / a[hit]
    # rays have unit z so t is the depth
    t[t <= 0] = np.inf
    return t


def analytic_center(prim: Primitive) -> WorldPoint:
    """Mean of the camera-facing half surface, area-weighted in projection"""
    cx, cy, cz = prim.center
    return WorldPoint(float(cx), float(cy), float(cz - 2.0 / 3.0 * prim.radii[2]))


def render_frame(
    frame: FrameScript,
    k: CameraIntrinsics,
    width: int,
    height: int,
    noise_sigma: float = 0.0,
    rng_seed: int = 0,
) -> RenderedFrame:
    """
    Z-buffer the frame's ellipsoids over a flat background plane

    Args:
        frame: Scripted pose
        k: Camera intrinsics for a ``width`` x ``height`` raster
        width, height: Raster size in pixels
        noise_sigma: Gaussian depth noise on body pixels in meters
        rng_seed: Noise seed

    Returns:
        RenderedFrame with millimeter-quantized depth, labels and the
        center of mass of each labeled part
    """
    k.check_bounds(width, height)
    xs, ys = np.meshgrid(np.arange(width, dtype=np.float64), np.arange(height, dtype=np.float64))
    rays = np.stack([(xs - k.cx) / k.fx, (ys - k.cy) / k.fy, np.ones_like(xs)], axis=-1)

    depth = np.full((height, width), frame.floor_depth)
    labels = np.zeros((height, width), dtype=np.uint8)
    prims = scene_primitives(frame)
    for prim in prims:
        t = _ray_hits(rays, prim)
        nearer = t < depth
        depth[nearer] = t[nearer]
        labels[nearer] = prim.label

    body = labels != BodyPart.BACKGROUND
    if noise_sigma > 0 and body.any():
        rng = np.random.default_rng(rng_seed)
        depth[body] += rng.normal(0.0, noise_sigma, size=int(body.sum()))
    depth = np.clip(np.rint(depth * 1000.0) / 1000.0, 0.001, None)

    img = DepthImage(depth)
    label_img = LabelImage(labels)
    centers = {part: part_center_of_mass(label_img, img, part, k) for part in TRACKED_PARTS}
    analytic: Dict[BodyPart, Optional[WorldPoint]] = {part: None for part in TRACKED_PARTS}
    for prim in prims:
        if prim.label in analytic:
            analytic[prim.label] = analytic_center(prim)
    logger.debug(f"Rendered {len(prims)} primitives at {width}x{height}")
    return RenderedFrame(depth=img, labels=label_img, centers=centers, analytic_centers=analytic)

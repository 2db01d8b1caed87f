"""
Binary PGM (P5) codec for depth (16-bit millimeters) and label (8-bit) rasters
"""

from pathlib import Path
from typing import Tuple, Union

import logging
import numpy as np

from ..errors import DatasetError
from ..models.imaging import BodyPart, DepthImage, LabelImage, D_MAX

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

DEPTH_MAXVAL = 65535
LABEL_MAXVAL = 255


def _parse_header(data: bytes) -> Tuple[int, int, int, int]:
    """Return (width, height, maxval, offset of the first sample byte)"""
    tokens = []
    pos = 0
    while len(tokens) < 4:
        if pos >= len(data):
            raise DatasetError("Truncated PGM header")
        ch = data[pos:pos + 1]
        if ch == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
            continue
        if ch.isspace():
            pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates maxval from the raster
    pos += 1
    if tokens[0] != b"P5":
        raise DatasetError(f"Unsupported PGM magic {tokens[0]!r}, expected P5")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise DatasetError("Malformed PGM header") from None
    if width <= 0 or height <= 0 or not 0 < maxval <= DEPTH_MAXVAL:
        raise DatasetError(f"Invalid PGM header values {width}x{height} maxval {maxval}")
    return width, height, maxval, pos


def _read_raster(path: PathLike) -> Tuple[np.ndarray, int]:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise DatasetError(f"Cannot read raster {path}: {e}") from e
    width, height, maxval, offset = _parse_header(data)
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    expected = width * height * dtype.itemsize
    body = data[offset:offset + expected]
    if len(body) != expected:
        raise DatasetError(f"{path}: expected {expected} raster bytes, found {len(body)}")
    raster = np.frombuffer(body, dtype=dtype).reshape(height, width)
    return raster, maxval


def _write_raster(path: PathLike, raster: np.ndarray, maxval: int) -> None:
    height, width = raster.shape
    header = f"P5\n{width} {height}\n{maxval}\n".encode("ascii")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    Path(path).write_bytes(header + raster.astype(dtype).tobytes())


def depth_to_millimeters(img: DepthImage) -> np.ndarray:
    """Round a meter raster to the integer millimeters stored on disk"""
    return np.rint(img.depths * 1000.0).astype(np.uint16)


def write_depth_pgm(path: PathLike, img: DepthImage) -> None:
    """Store a depth raster as 16-bit millimeters, 0 = invalid"""
    _write_raster(path, depth_to_millimeters(img), DEPTH_MAXVAL)


def read_depth_pgm(path: PathLike) -> DepthImage:
    """Load a 16-bit millimeter PGM as a meter raster"""
    raster, maxval = _read_raster(path)
    if maxval <= 255:
        raise DatasetError(f"{path}: depth rasters must be 16-bit, maxval is {maxval}")
    depths = raster.astype(np.float64) / 1000.0
    if np.any(depths > D_MAX):
        raise DatasetError(f"{path}: depth beyond {D_MAX} m")
    return DepthImage(depths)


def write_label_pgm(path: PathLike, labels: LabelImage) -> None:
    """Store a label raster as 8-bit PGM"""
    _write_raster(path, labels.labels, LABEL_MAXVAL)


def read_label_pgm(path: PathLike) -> LabelImage:
    """Load an 8-bit label PGM, rejecting values outside the class set"""
    raster, maxval = _read_raster(path)
    if maxval > 255:
        raise DatasetError(f"{path}: label rasters must be 8-bit, maxval is {maxval}")
    if raster.size and raster.max() > int(BodyPart.BODY):
        raise DatasetError(f"{path}: label value {int(raster.max())} outside {{0..4}}")
    return LabelImage(raster)

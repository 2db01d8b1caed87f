"""
Depth imaging: segmentation, projection and raster file I/O
"""

from .depth import (
    segment_foreground,
    foreground_mask,
    foreground_pixels,
    pixels_to_world,
    project_to_world,
    back_project,
    part_center_of_mass,
    complete_partial_labels,
    restrict_labels,
)
from .pgm import read_depth_pgm, write_depth_pgm, read_label_pgm, write_label_pgm

__all__ = [
    "segment_foreground",
    "foreground_mask",
    "foreground_pixels",
    "pixels_to_world",
    "project_to_world",
    "back_project",
    "part_center_of_mass",
    "complete_partial_labels",
    "restrict_labels",
    "read_depth_pgm",
    "write_depth_pgm",
    "read_label_pgm",
    "write_label_pgm",
]

"""Partition-of-unity RBF interpolation with a block-based neighbour search."""

from .geometry import (BoundingBox, ConvexHull, Point2, Rect, bounding_box, bounding_rect,
                       convex_hull, point_in_hull)
from .pum import PumConfig, PumModel, ScatteredData, build_pum
from .rbf import Kernel, kernel_eval
from .spatial import BlockGrid, block_count, build_block_grid, range_query

__all__ = [
    "BlockGrid", "BoundingBox", "ConvexHull", "Kernel", "Point2", "PumConfig", "PumModel",
    "Rect", "ScatteredData", "block_count", "bounding_box", "bounding_rect", "build_block_grid",
    "build_pum", "convex_hull", "kernel_eval", "point_in_hull", "range_query",
]

__version__ = "0.1.0"

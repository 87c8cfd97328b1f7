"""Pixel protocols between stages.

Segmentation pixels are blended into a tile as pure blue ``(0, 0, code)``
with one code per dataset split. Corner keypoints are ``q x q`` squares whose
red channel carries ``200 + z`` for an integer height-to-ground ``z``.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from scipy import ndimage

from .errors import BoundsError, ClassRangeError, LabelError
from .raster import Raster

CLASS_COUNT = 19
RED_BASE = 200
FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)


class DatasetSplit(IntEnum):
    TRAINING = 0
    VALIDATION = 1
    TESTING = 2

    @property
    def blue_code(self) -> int:
        return 200 + 10 * int(self)

    @classmethod
    def from_blue(cls, blue: int) -> "DatasetSplit":
        if blue not in BLUE_CODES:
            raise ValueError(f"{blue} is not a segmentation blue code")
        return cls((blue - 200) // 10)


BLUE_CODES = (200, 210, 220)


@dataclass(frozen=True)
class CornerSquare:
    center: tuple[int, int]
    z: int
    q: int = 15
    malformed: bool = False

    def __post_init__(self):
        if self.q < 1 or self.q % 2 == 0:
            raise ValueError(f"corner square side must be odd, got {self.q}")

    def footprint(self, height: int, width: int) -> tuple[int, int, int, int]:
        """Clipped ``(r0, r1, c0, c1)`` half-open bounds; may be empty."""
        h = self.q // 2
        r, c = self.center
        return max(r - h, 0), min(r + h + 1, height), max(c - h, 0), min(c + h + 1, width)


def check_class(z: int, class_count: int = CLASS_COUNT) -> int:
    if int(z) != z or not 1 <= z <= class_count:
        raise ClassRangeError(f"height class {z} outside [1, {class_count}]")
    return int(z)


def class_label_of_height(z: int, class_count: int = CLASS_COUNT) -> str:
    z = check_class(z, class_count)
    return "h" + string.ascii_lowercase[z - 1] + "h"


def height_of_class_label(label: str, class_count: int = CLASS_COUNT) -> int:
    if len(label) != 3 or label[0] != "h" or label[2] != "h" or label[1] not in string.ascii_lowercase:
        raise LabelError(label)
    z = string.ascii_lowercase.index(label[1]) + 1
    if z > class_count:
        raise LabelError(label)
    return z


def class_labels(class_count: int = CLASS_COUNT) -> list[str]:
    return [class_label_of_height(z, class_count) for z in range(1, class_count + 1)]


def is_segmentation(data: np.ndarray) -> np.ndarray:
    r, g, b = data[..., 0], data[..., 1], data[..., 2]
    return (r == 0) & (g == 0) & np.isin(b, BLUE_CODES)


def prescreen(raster: Raster) -> Raster:
    """Nudge natural pixels that would read as segmentation codes (blue - 1)."""
    hits = is_segmentation(raster.data)
    if not hits.any():
        return raster
    data = raster.data.copy()
    data[hits, 2] -= 1
    return raster.with_data(data)


def _mask_array(mask, shape: tuple[int, int]) -> np.ndarray:
    mask = np.asarray(mask)
    if mask.dtype == bool and mask.ndim == 2:
        if mask.shape != shape:
            raise BoundsError(f"mask shape {mask.shape} does not match tile {shape}")
        return mask
    coords = mask.reshape(-1, 2).astype(np.int64)
    out = np.zeros(shape, dtype=bool)
    if len(coords):
        rows, cols = coords[:, 0], coords[:, 1]
        if rows.min() < 0 or cols.min() < 0 or rows.max() >= shape[0] or cols.max() >= shape[1]:
            raise BoundsError("mask coordinate outside the tile")
        out[rows, cols] = True
    return out


def encode_split_blend(tile: Raster, mask, split: DatasetSplit) -> Raster:
    """``mask`` is an H x W boolean array or a (K, 2) array of (row, col)."""
    mask = _mask_array(mask, tile.shape)
    if not mask.any():
        return tile
    data = tile.data.copy()
    data[mask] = (0, 0, DatasetSplit(split).blue_code)
    return tile.with_data(data)


def split_map(tile: Raster) -> np.ndarray:
    """int8 map: split id per segmentation pixel, -1 elsewhere."""
    out = np.full(tile.shape, -1, dtype=np.int8)
    seg = is_segmentation(tile.data)
    out[seg] = (tile.data[..., 2][seg].astype(np.int16) - 200) // 10
    return out


def decode_split_blend(tile: Raster) -> tuple[np.ndarray, np.ndarray]:
    """Row-major (K, 2) coordinates of segmentation pixels and their split ids."""
    smap = split_map(tile)
    coords = np.argwhere(smap >= 0)
    return coords, smap[smap >= 0]


def encode_corner_square(tile: Raster, sq: CornerSquare, class_count: int = CLASS_COUNT) -> Raster:
    z = check_class(sq.z, class_count)
    r0, r1, c0, c1 = sq.footprint(*tile.shape)
    if r0 >= r1 or c0 >= c1:
        return tile
    data = tile.data.copy()
    data[r0:r1, c0:c1, 0] = RED_BASE + z
    return tile.with_data(data)


def encode_corner_squares(tile: Raster, squares, class_count: int = CLASS_COUNT) -> Raster:
    data = tile.data.copy()
    for sq in squares:
        z = check_class(sq.z, class_count)
        r0, r1, c0, c1 = sq.footprint(*tile.shape)
        data[r0:r1, c0:c1, 0] = RED_BASE + z
    return tile.with_data(data)


def _axis_center(lo: int, hi: int, dim: int, q: int):
    """Nominal centre along one axis of a block spanning [lo, hi]; None if malformed."""
    extent = hi - lo + 1
    half = q // 2
    if extent == q:
        return lo + half
    if extent > q:
        return None
    at_start, at_end = lo == 0, hi == dim - 1
    if at_start and not at_end:
        return hi - half
    if at_end and not at_start:
        return lo + half
    return None


def decode_corner_squares(tile: Raster, q: int = 15, class_count: int = CLASS_COUNT) -> list[CornerSquare]:
    """Recover squares from red blocks; irregular blocks come back flagged ``malformed``."""
    red = tile.data[..., 0]
    height, width = tile.shape
    found = []
    for value in np.unique(red):
        z = int(value) - RED_BASE
        if not 1 <= z <= class_count:
            continue
        labels, n = ndimage.label(red == value, structure=FOUR_CONNECTED)
        for k, sl in enumerate(ndimage.find_objects(labels), start=1):
            block = labels[sl] == k
            r0, r1 = sl[0].start, sl[0].stop - 1
            c0, c1 = sl[1].start, sl[1].stop - 1
            cr = _axis_center(r0, r1, height, q)
            cc = _axis_center(c0, c1, width, q)
            if block.all() and cr is not None and cc is not None:
                found.append(CornerSquare((cr, cc), z, q))
            else:
                rr, cc_ = np.nonzero(block)
                center = (int(round(rr.mean())) + r0, int(round(cc_.mean())) + c0)
                found.append(CornerSquare(center, z, q, malformed=True))
    found.sort(key=lambda s: (s.center, s.z))
    return found

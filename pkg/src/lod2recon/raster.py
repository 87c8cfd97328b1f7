"""RGB raster container, overlapping tile grids and PNG/sidecar I/O."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from PIL import Image

from .errors import CoverageError, InvalidTiling


@dataclass(frozen=True)
class Georef:
    """World position of the top-left corner of pixel (0, 0) and pixel size.

    Rows grow southwards, so the world y of a pixel centre is
    ``origin_y - (row + 0.5) * gsd``.
    """

    origin_x: float
    origin_y: float
    gsd: float

    def __post_init__(self):
        if not self.gsd > 0:
            raise ValueError(f"gsd must be positive, got {self.gsd}")

    def pixel_to_world(self, row, col):
        row = np.asarray(row, dtype=float)
        col = np.asarray(col, dtype=float)
        return self.origin_x + (col + 0.5) * self.gsd, self.origin_y - (row + 0.5) * self.gsd

    def world_to_pixel(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return (self.origin_y - y) / self.gsd - 0.5, (x - self.origin_x) / self.gsd - 0.5

    def shifted(self, row: int, col: int) -> "Georef":
        return Georef(self.origin_x + col * self.gsd, self.origin_y - row * self.gsd, self.gsd)

    def to_dict(self) -> dict:
        return {"origin_x": self.origin_x, "origin_y": self.origin_y, "gsd": self.gsd}

    @classmethod
    def from_dict(cls, d: dict) -> "Georef":
        return cls(float(d["origin_x"]), float(d["origin_y"]), float(d["gsd"]))


@dataclass(eq=False)
class Raster:
    """H x W x 3 uint8 image. The pixel array is made read-only on construction."""

    data: np.ndarray
    georef: Optional[Georef] = None

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 3 or data.shape[2] != 3:
            raise ValueError(f"expected an H x W x 3 array, got shape {data.shape}")
        if data.dtype != np.uint8:
            data = data.astype(np.uint8)
        if data.flags.writeable:
            data.setflags(write=False)
        self.data = data

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[:2]

    @classmethod
    def blank(cls, height: int, width: int, georef: Optional[Georef] = None) -> "Raster":
        return cls(np.zeros((height, width, 3), dtype=np.uint8), georef)

    def with_data(self, data: np.ndarray) -> "Raster":
        return Raster(data, self.georef)

    def crop(self, row: int, col: int, height: int, width: int) -> "Raster":
        georef = self.georef.shifted(row, col) if self.georef else None
        return Raster(self.data[row:row + height, col:col + width], georef)

    def same_as(self, other: "Raster") -> bool:
        return self.shape == other.shape and np.array_equal(self.data, other.data)


@dataclass(frozen=True)
class Tile:
    row: int
    col: int
    raster: Raster

    @property
    def name(self) -> str:
        return f"tile_r{self.row:05d}_c{self.col:05d}"


@dataclass
class TileGrid:
    tile_size: int
    overlap: int
    tiles: list[Tile] = field(default_factory=list)

    def origins(self) -> list[tuple[int, int]]:
        return [(t.row, t.col) for t in self.tiles]

    def with_rasters(self, rasters: Iterable[Raster]) -> "TileGrid":
        """Same layout, new pixel content (e.g. blended or corner tiles)."""
        rasters = list(rasters)
        if len(rasters) != len(self.tiles):
            raise ValueError("raster count does not match tile count")
        tiles = [replace(t, raster=r) for t, r in zip(self.tiles, rasters)]
        return TileGrid(self.tile_size, self.overlap, tiles)


def tile_origins(dim: int, s: int, p: int) -> list[int]:
    """Origins along one axis: stride ``s - p``, plus a clamped final origin."""
    if s <= 2 * p:
        raise InvalidTiling(f"tile size {s} must exceed twice the overlap {p}")
    if dim < s:
        raise InvalidTiling(f"dimension {dim} is smaller than the tile size {s}")
    origins = list(range(0, dim - s + 1, s - p))
    if origins[-1] + s < dim:
        origins.append(dim - s)
    return origins


def split_tiles(src: Raster, s: int, p: int) -> TileGrid:
    rows = tile_origins(src.height, s, p)
    cols = tile_origins(src.width, s, p)
    tiles = [Tile(r, c, src.crop(r, c, s, s)) for r in rows for c in cols]
    return TileGrid(s, p, tiles)


def reassemble(grid: TileGrid, width: int, height: int, georef: Optional[Georef] = None) -> Raster:
    """Paste tiles back; where tiles overlap the last one in row-major order wins."""
    out = np.zeros((height, width, 3), dtype=np.uint8)
    covered = np.zeros((height, width), dtype=bool)
    for tile in sorted(grid.tiles, key=lambda t: (t.row, t.col)):
        h, w = tile.raster.shape
        if tile.row < 0 or tile.col < 0 or tile.row + h > height or tile.col + w > width:
            raise CoverageError(f"{tile.name} extends outside the {height}x{width} frame")
        out[tile.row:tile.row + h, tile.col:tile.col + w] = tile.raster.data
        covered[tile.row:tile.row + h, tile.col:tile.col + w] = True
    if not covered.all():
        r, c = np.argwhere(~covered)[0]
        raise CoverageError(f"pixel ({r}, {c}) is not covered by any tile")
    if georef is None and grid.tiles:
        first = min(grid.tiles, key=lambda t: (t.row, t.col))
        g = first.raster.georef
        georef = g.shifted(-first.row, -first.col) if g else None
    return Raster(out, georef)


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def read_png(path) -> Raster:
    path = Path(path)
    with Image.open(path) as im:
        data = np.array(im.convert("RGB"))
    georef = None
    side = sidecar_path(path)
    if side.exists():
        georef = Georef.from_dict(json.loads(side.read_text()))
    return Raster(data, georef)


def write_png(raster: Raster, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.ascontiguousarray(raster.data)).save(path, optimize=False)
    if raster.georef is not None:
        sidecar_path(path).write_text(json.dumps(raster.georef.to_dict(), indent=2))


def write_label_png(labels: np.ndarray, path) -> None:
    """Integer label image as a 16-bit greyscale PNG."""
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() > 65535):
        raise ValueError("labels must fit in 16 bits")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.ascontiguousarray(labels.astype(np.uint16))).save(path)


def read_label_png(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.array(im).astype(np.int32)

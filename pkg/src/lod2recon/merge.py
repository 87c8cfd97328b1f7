"""City-wide merging: split-code unification across tile seams and DTM correction."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .codec import is_segmentation
from .errors import FootprintError
from .raster import Raster
from .sections import label_sections


def unify_sections(full: Raster) -> Raster:
    """Give every 4-connected section the blue code of its first row-major pixel.

    Equivalent to a row-major scan that flood-fills each not-yet-visited
    segmentation pixel's component with that pixel's code. Only pixels already
    carrying one of the three codes are fill-eligible.
    """
    seg = is_segmentation(full.data)
    labels, n = label_sections(seg)
    if n == 0:
        return full
    ids, first = np.unique(labels.ravel(), return_index=True)
    blue = full.data[..., 2]
    codes = np.zeros(n + 1, dtype=np.uint8)
    codes[ids] = blue.ravel()[first]
    target = codes[labels]
    if np.array_equal(blue[seg], target[seg]):
        return full
    data = full.data.copy()
    data[..., 2][seg] = target[seg]
    return full.with_data(data)


@dataclass(eq=False)
class DtmGrid:
    """Elevation grid in metres. ``origin`` is the top-left corner of cell (0, 0)."""

    width: int
    height: int
    origin_x: float
    origin_y: float
    cell_size: float
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(self.height, self.width)
        if not np.isfinite(self.values).all():
            raise ValueError("grid values must be finite")
        if not self.cell_size > 0:
            raise ValueError("cell_size must be positive")

    def contains(self, x, y) -> np.ndarray:
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        return (
            (x >= self.origin_x) & (x <= self.origin_x + self.width * self.cell_size)
            & (y <= self.origin_y) & (y >= self.origin_y - self.height * self.cell_size)
        )

    def sample(self, x, y):
        """Bilinear interpolation between cell centres, clamped at the outer half cell."""
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        if not np.all(self.contains(x, y)):
            raise FootprintError("query point outside the grid footprint")
        fc = np.clip((x - self.origin_x) / self.cell_size - 0.5, 0, self.width - 1)
        fr = np.clip((self.origin_y - y) / self.cell_size - 0.5, 0, self.height - 1)
        c0 = np.minimum(np.floor(fc).astype(int), max(self.width - 2, 0))
        r0 = np.minimum(np.floor(fr).astype(int), max(self.height - 2, 0))
        c1 = np.minimum(c0 + 1, self.width - 1)
        r1 = np.minimum(r0 + 1, self.height - 1)
        tc, tr = fc - c0, fr - r0
        v = self.values
        top = v[r0, c0] * (1 - tc) + v[r0, c1] * tc
        bottom = v[r1, c0] * (1 - tc) + v[r1, c1] * tc
        out = top * (1 - tr) + bottom * tr
        return float(out) if out.ndim == 0 else out


def apply_dtm(x, y, z_ground, dtm: DtmGrid):
    """Height-to-ground to altitude above sea level."""
    return dtm.sample(x, y) + np.asarray(z_ground, dtype=float)


def remove_dtm(x, y, altitude, dtm: DtmGrid):
    """Altitude to height-to-ground (ingesting absolute ground truth)."""
    return np.asarray(altitude, dtype=float) - dtm.sample(x, y)


def write_grid(grid: DtmGrid, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        fh.write(f"width {grid.width}\nheight {grid.height}\n")
        fh.write(f"origin_x {grid.origin_x!r}\norigin_y {grid.origin_y!r}\ncell_size {grid.cell_size!r}\n")
        for row in grid.values:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def read_grid(path) -> DtmGrid:
    lines = Path(path).read_text().split("\n")
    header = {}
    for line in lines[:5]:
        key, value = line.split()
        header[key] = value
    values = np.array(" ".join(lines[5:]).split(), dtype=float)
    return DtmGrid(
        int(header["width"]), int(header["height"]),
        float(header["origin_x"]), float(header["origin_y"]), float(header["cell_size"]),
        values,
    )

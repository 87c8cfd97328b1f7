"""Roof sections as 4-connected components of segmentation pixels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .codec import FOUR_CONNECTED, DatasetSplit, split_map
from .raster import Raster


@dataclass(eq=False)
class RoofSection:
    """One pixel-separated roof section.

    ``pixels`` and ``rim`` are row-major sorted (K, 2) int arrays of (row, col).
    """

    id: int
    pixels: np.ndarray
    split: DatasetSplit
    rim: np.ndarray

    @property
    def size(self) -> int:
        return len(self.pixels)

    def bbox(self) -> tuple[int, int, int, int]:
        """Inclusive (r0, r1, c0, c1)."""
        r, c = self.pixels[:, 0], self.pixels[:, 1]
        return int(r.min()), int(r.max()), int(c.min()), int(c.max())

    def local_mask(self, pad: int = 0) -> tuple[np.ndarray, int, int]:
        """Boolean mask over the (padded) bounding box plus its top-left offset."""
        r0, r1, c0, c1 = self.bbox()
        r0, c0 = r0 - pad, c0 - pad
        mask = np.zeros((r1 - r0 + 1 + pad, c1 - c0 + 1 + pad), dtype=bool)
        # r0/c0 already include the leading pad, so only the trailing pad is added
        mask[self.pixels[:, 0] - r0, self.pixels[:, 1] - c0] = True
        return mask, r0, c0


def rim_of_mask(mask: np.ndarray) -> np.ndarray:
    """Pixels of ``mask`` with a 4-neighbour outside it (the frame border counts as outside)."""
    eroded = ndimage.binary_erosion(mask, structure=FOUR_CONNECTED, border_value=0)
    return mask & ~eroded


def section_rim(sec: RoofSection) -> np.ndarray:
    mask, r0, c0 = sec.local_mask(pad=1)
    return np.argwhere(rim_of_mask(mask)) + (r0, c0)


def label_sections(seg: np.ndarray) -> tuple[np.ndarray, int]:
    """Label 4-connected components, numbered 1.. in row-major order of first pixel."""
    labels, n = ndimage.label(seg, structure=FOUR_CONNECTED)
    if n == 0:
        return labels, 0
    flat = labels.ravel()
    ids, first = np.unique(flat, return_index=True)
    keep = ids > 0
    order = ids[keep][np.argsort(first[keep], kind="stable")]
    remap = np.zeros(n + 1, dtype=labels.dtype)
    remap[order] = np.arange(1, n + 1, dtype=labels.dtype)
    return remap[labels], n


def sections_from_labels(labels: np.ndarray, splits: np.ndarray) -> list[RoofSection]:
    """Build sections from a label image (0 = background, k = section k-1)."""
    out = []
    for k, sl in enumerate(ndimage.find_objects(labels), start=1):
        if sl is None:
            continue
        local = labels[sl] == k
        pixels = np.argwhere(local) + (sl[0].start, sl[1].start)
        r, c = pixels[0]
        padded = np.pad(local, 1)
        rim = np.argwhere(rim_of_mask(padded)) + (sl[0].start - 1, sl[1].start - 1)
        out.append(RoofSection(k - 1, pixels, DatasetSplit(int(splits[r, c])), rim))
    return out


def extract_sections(blended: Raster) -> list[RoofSection]:
    smap = split_map(blended)
    labels, _ = label_sections(smap >= 0)
    return sections_from_labels(labels, smap)


def section_label_image(sections: list[RoofSection], shape: tuple[int, int]) -> np.ndarray:
    """int32 image: section id + 1 at each section pixel, 0 elsewhere."""
    out = np.zeros(shape, dtype=np.int32)
    for sec in sections:
        out[sec.pixels[:, 0], sec.pixels[:, 1]] = sec.id + 1
    return out

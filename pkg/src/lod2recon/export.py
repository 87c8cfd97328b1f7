"""File outputs: xyz+ID point lists, OBJ meshes, COCO annotations, dataset splits."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import ndimage

from .codec import FOUR_CONNECTED, CornerSquare, class_labels
from .errors import ExportError
from .plane import RoofPlane, height_at

# pixel side -> (start corner offset, end corner offset), walking clockwise on screen
_SIDES = {
    (-1, 0): ((0, 0), (0, 1)),
    (0, 1): ((0, 1), (1, 1)),
    (1, 0): ((1, 1), (1, 0)),
    (0, -1): ((1, 0), (0, 0)),
}


def _loops(mask: np.ndarray) -> list[list[tuple[int, int]]]:
    padded = np.pad(mask, 1)
    out_edges: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for (dr, dc), ((sr, sc), (er, ec)) in _SIDES.items():
        exposed = mask & ~padded[1 + dr:1 + dr + mask.shape[0], 1 + dc:1 + dc + mask.shape[1]]
        for r, c in np.argwhere(exposed):
            out_edges.setdefault((int(r + sr), int(c + sc)), []).append((int(r + er), int(c + ec)))
    loops = []
    used = set()
    for start, ends in out_edges.items():
        for first in ends:
            if (start, first) in used:
                continue
            used.add((start, first))
            loop = [start]
            prev, cur = start, first
            while True:
                targets = out_edges[cur]
                if len(targets) == 1:
                    nxt = targets[0]
                else:
                    # diagonal pinch: turn right to hug the current pixel (4-connectivity)
                    d_in = (cur[0] - prev[0], cur[1] - prev[1])
                    right = (cur[0] + d_in[1], cur[1] - d_in[0])
                    nxt = right if right in targets else targets[0]
                if (cur, nxt) == (start, first):
                    break
                loop.append(cur)
                used.add((cur, nxt))
                prev, cur = cur, nxt
            loops.append(loop)
    return loops


def _drop_collinear(loop: list[tuple[int, int]]) -> list[tuple[int, int]]:
    n = len(loop)
    keep = []
    for i in range(n):
        a, b, c = loop[i - 1], loop[i], loop[(i + 1) % n]
        if (b[0] - a[0]) * (c[1] - b[1]) != (b[1] - a[1]) * (c[0] - b[0]):
            keep.append(b)
    return keep


def _shoelace(loop) -> float:
    pts = np.asarray(loop, dtype=float)
    r, c = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(c * np.roll(r, -1) - np.roll(c, -1) * r))


def outer_boundary(mask: np.ndarray) -> list[tuple[int, int]]:
    """Outer outline of a pixel mask as pixel-corner (row, col) vertices.

    Corner (i, j) is the top-left corner of pixel (i, j). Vertices run
    clockwise on screen; only exactly collinear vertices are dropped.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return []
    loops = _loops(mask)
    best = max(loops, key=lambda lp: abs(_shoelace(lp)))
    return _drop_collinear(best)


@dataclass(frozen=True)
class PointRecord:
    x: float
    y: float
    z: float
    id: int


def write_xyz(records, path) -> None:
    """One ``x y z id`` line per record, reals at 6 decimals."""
    try:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w") as fh:
            for rec in records:
                if rec.id not in (0, 1, 2):
                    raise ValueError(f"split id must be 0, 1 or 2, got {rec.id}")
                fh.write(f"{rec.x:.6f} {rec.y:.6f} {rec.z:.6f} {int(rec.id)}\n")
    except OSError as exc:
        raise ExportError(str(exc)) from exc


def read_xyz(path) -> list[PointRecord]:
    out = []
    with Path(path).open() as fh:
        for line in fh:
            if line.strip():
                x, y, z, i = line.split()
                out.append(PointRecord(float(x), float(y), float(z), int(i)))
    return out


def section_mask(pixels: np.ndarray) -> tuple[np.ndarray, int, int]:
    r0, c0 = pixels.min(axis=0)
    r1, c1 = pixels.max(axis=0)
    mask = np.zeros((r1 - r0 + 1, c1 - c0 + 1), dtype=bool)
    mask[pixels[:, 0] - r0, pixels[:, 1] - c0] = True
    return mask, int(r0), int(c0)


def section_outline(pixels: np.ndarray) -> list[tuple[int, int]]:
    """Outer outline of a section in frame pixel-corner coordinates."""
    mask, r0, c0 = section_mask(pixels)
    return [(r + r0, c + c0) for r, c in outer_boundary(mask)]


def write_obj(sections, path, extrude_to_ground: bool = False, scale: float = 1.0,
              ground: float = 0.0, header: Optional[str] = None) -> dict:
    """Roof polygons lifted onto their planes, optionally with walls down to ``ground``.

    ``sections`` is a list of ``(RoofSection, RoofPlane)``. Mesh axes: X east
    and Y north in metres of the raster frame, Z height. Returns diagnostics.
    """
    lines = ["# roof sections" if header is None else f"# {header}"]
    n_vertices = 0
    skipped = []
    for sec, plane in sections:
        outline = section_outline(sec.pixels)
        if len(outline) < 3:
            skipped.append(sec.id)
            continue
        rows = np.array([p[0] for p in outline], dtype=float) - 0.5
        cols = np.array([p[1] for p in outline], dtype=float) - 0.5
        z = height_at(plane, cols * scale, rows * scale)
        xs, ys = cols * scale, -rows * scale
        lines.append(f"o section_{sec.id}")
        lines.extend(f"v {x:.6f} {y:.6f} {h:.6f}" for x, y, h in zip(xs, ys, z))
        n = len(outline)
        roof = [n_vertices + i + 1 for i in range(n)]
        lines.append("f " + " ".join(map(str, roof)))
        if extrude_to_ground:
            lines.extend(f"v {x:.6f} {y:.6f} {ground:.6f}" for x, y in zip(xs, ys))
            base = n_vertices + n
            for i in range(n):
                j = (i + 1) % n
                lines.append(f"f {roof[i]} {base + i + 1} {base + j + 1} {roof[j]}")
            n_vertices += n
        n_vertices += n
    try:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise ExportError(str(exc)) from exc
    return {"vertices": n_vertices, "skipped_sections": skipped}


def _polygon(mask: np.ndarray, r0: int = 0, c0: int = 0) -> list[float]:
    flat = []
    for r, c in outer_boundary(mask):
        flat.extend([float(c + c0), float(r + r0)])
    return flat


def _mask_annotation(mask: np.ndarray) -> Optional[dict]:
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return None
    labels, n = ndimage.label(mask, structure=FOUR_CONNECTED)
    polys = []
    for k, sl in enumerate(ndimage.find_objects(labels), start=1):
        polys.append(_polygon(labels[sl] == k, sl[0].start, sl[1].start))
    rows, cols = np.nonzero(mask)
    bbox = [int(cols.min()), int(rows.min()), int(cols.max() - cols.min() + 1), int(rows.max() - rows.min() + 1)]
    return {"segmentation": polys, "area": int(mask.sum()), "bbox": bbox}


def write_coco(tiles, mode: str, path, class_count: int = 19) -> dict:
    """COCO instance annotations for ``(raster, items[, file_name])`` tiles.

    ``mode="sections"``: items are boolean masks, one dummy category.
    ``mode="corners"``: items are :class:`CornerSquare`, one category per height class.
    """
    if mode == "sections":
        categories = [{"id": 1, "name": "roof_section", "supercategory": "roof"}]
    elif mode == "corners":
        categories = [{"id": z, "name": name, "supercategory": "corner"}
                      for z, name in enumerate(class_labels(class_count), start=1)]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    images, annotations = [], []
    for image_id, entry in enumerate(tiles, start=1):
        raster, items = entry[0], entry[1]
        name = entry[2] if len(entry) > 2 else f"tile_{image_id:05d}.png"
        h, w = raster.shape
        images.append({"id": image_id, "file_name": name, "width": w, "height": h})
        for item in items:
            if mode == "sections":
                ann = _mask_annotation(item)
                category = 1
            else:
                sq: CornerSquare = item
                mask = np.zeros((h, w), dtype=bool)
                r0, r1, c0, c1 = sq.footprint(h, w)
                mask[r0:r1, c0:c1] = True
                ann = _mask_annotation(mask)
                category = sq.z
            if ann is None:
                continue
            ann.update({"id": len(annotations) + 1, "image_id": image_id,
                        "category_id": category, "iscrowd": 0})
            annotations.append(ann)
    doc = {
        "info": {"description": f"roof {mode}", "version": "1.0"},
        "licenses": [],
        "images": images,
        "annotations": annotations,
        "categories": categories,
    }
    try:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(doc, indent=1))
    except OSError as exc:
        raise ExportError(str(exc)) from exc
    return doc


def split_dataset(tile_ids, seed: int = 0) -> tuple[list, list, list]:
    """Shuffle and cut 60/20/20 (floors for train/val, remainder to test)."""
    ids = list(tile_ids)
    if not ids:
        raise ValueError("cannot split an empty list")
    n = len(ids)
    perm = np.random.default_rng(seed).permutation(n)
    shuffled = [ids[i] for i in perm]
    n_train, n_val = n * 3 // 5, n // 5
    return shuffled[:n_train], shuffled[n_train:n_train + n_val], shuffled[n_train + n_val:]

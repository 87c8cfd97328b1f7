"""Synthetic cities seen by an oblique satellite, with oracle segmentation and corner outputs.

Roof geometry is built on the pixel lattice: every roof vertex projects
exactly onto a pixel centre and carries an integer height (when
``integer_heights`` is set), so noiseless oracle outputs can be inverted
exactly. Facets of one building are separated by a gap of
``section_gap_px`` pixels so that sections stay pixel-separated and corner
squares of neighbouring facets never touch.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import ndimage

from .codec import CLASS_COUNT, FOUR_CONNECTED, CornerSquare, prescreen
from .errors import PlacementError
from .merge import DtmGrid
from .raster import Georef, Raster

ROOF_KINDS = ("flat", "shed", "gable", "hip")


@dataclass(frozen=True)
class View:
    azimuth: float = 181.10
    elevation: float = 59.30
    gsd: float = 0.38

    def __post_init__(self):
        if not 0 < self.elevation <= 90:
            raise ValueError(f"elevation must lie in (0, 90], got {self.elevation}")

    def shift_per_metre(self) -> tuple[float, float]:
        """Pixel (row, col) displacement of a point raised by one metre."""
        d = 1.0 / math.tan(math.radians(self.elevation))
        away = math.radians(self.azimuth + 180.0)
        return -d * math.cos(away) / self.gsd, d * math.sin(away) / self.gsd


@dataclass(frozen=True)
class Sun:
    zenith: float = 35.0
    azimuth: float = 150.0


@dataclass
class SynthParams:
    width: int = 2000
    height: int = 2000
    n_buildings: int = 50
    azimuth: float = 181.10
    elevation: float = 59.30
    gsd: float = 0.38
    origin_x: float = 500000.0
    origin_y: float = 5450000.0
    roof_kinds: tuple = ROOF_KINDS
    integer_heights: bool = True
    eave_range: tuple = (3, 9)
    rise_range: tuple = (1, 4)
    eave_skew_max: int = 0
    corner_size: int = 15
    section_gap_px: Optional[int] = None
    width_px: tuple = (34, 64)
    length_px: tuple = (40, 110)
    sun_zenith: float = 35.0
    sun_azimuth: float = 150.0
    shadows: bool = True
    dtm_base: float = 120.0
    dtm_relief: float = 6.0
    dtm_cell: float = 2.0
    class_count: int = CLASS_COUNT
    max_tries: int = 200

    @property
    def gap(self) -> int:
        return self.corner_size + 1 if self.section_gap_px is None else self.section_gap_px

    def view(self) -> View:
        return View(self.azimuth, self.elevation, self.gsd)

    def georef(self) -> Georef:
        return Georef(self.origin_x, self.origin_y, self.gsd)

    @classmethod
    def from_dict(cls, d: dict) -> "SynthParams":
        d = dict(d)
        for key in ("roof_kinds", "eave_range", "rise_range", "width_px", "length_px"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


@dataclass
class Building:
    id: int
    footprint: tuple  # (x_min, y_min, x_max, y_max) world metres
    roof_kind: str
    eave_height: float
    ridge_height: float
    back_eave_height: float
    ridge_axis: str = "x"


@dataclass
class SectionTruth:
    id: int
    building_id: int
    vertices: list  # [(x, y, h)] world metres, h = height-to-ground


@dataclass
class SceneTruth:
    buildings: list
    sections: list
    dtm: DtmGrid
    view: View
    sun: Sun
    width: int
    height: int
    georef: Georef
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "width": self.width,
            "height": self.height,
            "georef": self.georef.to_dict(),
            "view": asdict(self.view),
            "sun": asdict(self.sun),
            "buildings": [asdict(b) for b in self.buildings],
            "sections": [asdict(s) for s in self.sections],
            "dtm": {
                "width": self.dtm.width, "height": self.dtm.height,
                "origin_x": self.dtm.origin_x, "origin_y": self.dtm.origin_y,
                "cell_size": self.dtm.cell_size, "values": self.dtm.values.tolist(),
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SceneTruth":
        buildings = [Building(**{**b, "footprint": tuple(b["footprint"])}) for b in d["buildings"]]
        sections = [SectionTruth(s["id"], s["building_id"], [tuple(v) for v in s["vertices"]])
                    for s in d["sections"]]
        return cls(buildings, sections, DtmGrid(**d["dtm"]), View(**d["view"]), Sun(**d["sun"]),
                   d["width"], d["height"], Georef.from_dict(d["georef"]), d.get("seed", 0))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "SceneTruth":
        return cls.from_dict(json.loads(Path(path).read_text()))


def project_oblique(x, y, h, view: View, georef: Georef):
    """World point at height ``h`` above ground to fractional (row, col).

    Orthographic oblique model: the point is pushed by ``h / tan(elevation)``
    metres away from the satellite azimuth.
    """
    row, col = georef.world_to_pixel(x, y)
    dr, dc = view.shift_per_metre()
    h = np.asarray(h, dtype=float)
    return row + h * dr, col + h * dc


def unproject_oblique(row, col, h, view: View, georef: Georef):
    dr, dc = view.shift_per_metre()
    h = np.asarray(h, dtype=float)
    return georef.pixel_to_world(np.asarray(row, dtype=float) - h * dr, np.asarray(col, dtype=float) - h * dc)


# ---------------------------------------------------------------- geometry


def _facets_local(kind: str, L: int, W: int, e: int, G: int, ha: float, hb: float, hr: float):
    """Facet vertices as (u, v, h) in pixels along/across the ridge."""
    vm = W // 2
    g = G // 2
    if kind == "flat":
        return [[(0, 0, ha), (L, 0, ha), (L, W, ha), (0, W, ha)]]
    if kind == "shed":
        return [[(0, 0, ha), (L, 0, ha), (L, W, hr), (0, W, hr)]]
    if kind == "gable":
        return [
            [(0, 0, ha), (L, 0, ha), (L, vm - g, hr), (0, vm - g, hr)],
            [(0, vm + g, hr), (L, vm + g, hr), (L, W, hb), (0, W, hb)],
        ]
    if kind == "hip":
        return [
            [(0, 0, ha), (L, 0, ha), (L - e, vm - g, hr), (e, vm - g, hr)],
            [(e, vm + g, hr), (L - e, vm + g, hr), (L, W, hb), (0, W, hb)],
            [(0, G, ha), (e - G, vm, hr), (0, W - G, hb)],
            [(L, G, ha), (L, W - G, hb), (L - e + G, vm, hr)],
        ]
    raise ValueError(f"unknown roof kind {kind!r}")


def fill_convex(verts: np.ndarray, shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Pixel centres inside or on a convex polygon with (row, col) vertices."""
    verts = np.asarray(verts, dtype=np.int64)
    r0 = max(int(verts[:, 0].min()), 0)
    r1 = min(int(verts[:, 0].max()), shape[0] - 1)
    c0 = max(int(verts[:, 1].min()), 0)
    c1 = min(int(verts[:, 1].max()), shape[1] - 1)
    if r0 > r1 or c0 > c1:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    rr, cc = np.mgrid[r0:r1 + 1, c0:c1 + 1]
    nxt = np.roll(verts, -1, axis=0)
    area2 = int(np.sum(verts[:, 1] * nxt[:, 0] - nxt[:, 1] * verts[:, 0]))
    sign = 1 if area2 >= 0 else -1
    inside = np.ones(rr.shape, dtype=bool)
    for (ar, ac), (br, bc) in zip(verts, nxt):
        cross = (bc - ac) * (rr - ar) - (br - ar) * (cc - ac)
        inside &= sign * cross >= 0
    return rr[inside], cc[inside]


def _square_box(center, q: int):
    h = q // 2
    return center[0] - h, center[0] + h, center[1] - h, center[1] + h


def _building_ok(facets_px: list[np.ndarray], q: int) -> bool:
    """Facets non-degenerate, pixel-separated, and corner squares isolated."""
    allv = np.concatenate(facets_px)
    off = allv.min(axis=0) - q
    shape = tuple(int(s) for s in allv.max(axis=0) - off + q + 1)
    labels = np.zeros(shape, dtype=np.int32)
    for k, fv in enumerate(facets_px, start=1):
        nxt = np.roll(fv, -1, axis=0)
        if np.sum(fv[:, 1] * nxt[:, 0] - nxt[:, 1] * fv[:, 0]) == 0:
            return False
        rr, cc = fill_convex(fv - off, shape)
        if np.any(labels[rr, cc]):
            return False
        labels[rr, cc] = k
        if ndimage.label(labels == k, structure=FOUR_CONNECTED)[1] != 1:
            return False
    for k in range(1, len(facets_px) + 1):
        grown = ndimage.binary_dilation(labels == k, structure=FOUR_CONNECTED)
        if np.any(grown & (labels > 0) & (labels != k)):
            return False
    centers = [(tuple(v - off), k) for k, fv in enumerate(facets_px, start=1) for v in fv]
    for i, (ci, ki) in enumerate(centers):
        r0, r1, c0, c1 = _square_box(ci, q)
        window = labels[r0:r1 + 1, c0:c1 + 1]
        if np.any((window > 0) & (window != ki)):
            return False
        for cj, _ in centers[i + 1:]:
            if max(abs(ci[0] - cj[0]), abs(ci[1] - cj[1])) < q:
                return False
    return True


def _snap_facets(local, anchor_rc, axis: str, view: View, georef: Georef):
    """Map local (u, v, h) facets to world vertices whose projections hit pixel centres."""
    out_world, out_px = [], []
    dr, dc = view.shift_per_metre()
    for facet in local:
        world, px = [], []
        for u, v, h in facet:
            if axis == "x":
                r, c = anchor_rc[0] - v, anchor_rc[1] + u
            else:
                r, c = anchor_rc[0] - u, anchor_rc[1] + v
            pr, pc = round(r + h * dr), round(c + h * dc)
            x, y = unproject_oblique(pr, pc, h, view, georef)
            world.append((float(x), float(y), float(h)))
            px.append((pr, pc))
        out_world.append(world)
        out_px.append(np.array(px, dtype=np.int64))
    return out_world, out_px


def _sample_heights(rng, kind: str, p: SynthParams):
    lo, hi = p.eave_range
    rlo, rhi = p.rise_range
    top = p.class_count
    if p.integer_heights:
        eave = int(rng.integers(lo, hi + 1))
        skew = int(rng.integers(-p.eave_skew_max, p.eave_skew_max + 1)) if p.eave_skew_max else 0
        rise = int(rng.integers(rlo, rhi + 1))
    else:
        eave = float(rng.uniform(lo, hi))
        skew = float(rng.uniform(-p.eave_skew_max, p.eave_skew_max)) if p.eave_skew_max else 0.0
        rise = float(rng.uniform(rlo, rhi))
    back = eave + skew if kind in ("gable", "hip") else eave
    eave, back = min(max(eave, 1), top - 1), min(max(back, 1), top - 1)
    ridge = min(max(eave, back) + rise, top)
    if kind == "flat":
        ridge = eave
    return eave, back, ridge


def generate_scene(seed: int, n_buildings: Optional[int] = None, params: Optional[SynthParams] = None) -> SceneTruth:
    """Buildings on a jittered grid, one per randomly chosen cell."""
    p = params or SynthParams()
    n = p.n_buildings if n_buildings is None else n_buildings
    rng = np.random.default_rng(seed)
    view, georef = p.view(), p.georef()
    q, G = p.corner_size, p.gap
    dtm = make_dtm(rng, p)
    buildings, sections = [], []
    if n > 0:
        cols = max(1, math.ceil(math.sqrt(n * p.width / p.height)))
        rows = math.ceil(n / cols)
        cell_h, cell_w = p.height // rows, p.width // cols
        top = min(p.class_count, p.eave_range[1] + p.eave_skew_max + p.rise_range[1])
        max_shift = math.ceil(top * math.hypot(*view.shift_per_metre())) + 1
        margin = max_shift + q + 2
        cells = rng.permutation(rows * cols)[:n]
        for bid, cell in enumerate(sorted(int(c) for c in cells)):
            crow, ccol = divmod(cell, cols)
            for _ in range(p.max_tries):
                kind = str(rng.choice(list(p.roof_kinds)))
                axis = "x" if rng.random() < 0.5 else "y"
                room_r, room_c = cell_h - 2 * margin - 1, cell_w - 2 * margin - 1
                across, along = (room_r, room_c) if axis == "x" else (room_c, room_r)
                w_hi = min(p.width_px[1], across) // 2
                if w_hi < p.width_px[0] // 2:
                    continue
                W = 2 * int(rng.integers(p.width_px[0] // 2, w_hi + 1))
                e = W // 2 + int(rng.integers(0, W // 4 + 1))
                l_lo = max(p.length_px[0], 2 * e + q + 1) if kind == "hip" else p.length_px[0]
                l_hi = min(max(p.length_px[1], l_lo), along)
                if l_hi < l_lo:
                    continue
                L = int(rng.integers(l_lo, l_hi + 1))
                ext_r, ext_c = (W, L) if axis == "x" else (L, W)
                free_r, free_c = room_r - ext_r, room_c - ext_c
                # anchor = local (u, v) = (0, 0) pixel at ground level
                anchor = (
                    crow * cell_h + margin + ext_r + int(rng.integers(0, free_r + 1)),
                    ccol * cell_w + margin + int(rng.integers(0, free_c + 1)),
                )
                ha, hb, hr = _sample_heights(rng, kind, p)
                local = _facets_local(kind, L, W, e, G, ha, hb, hr)
                world, px = _snap_facets(local, anchor, axis, view, georef)
                if not _building_ok(px, q):
                    continue
                break
            else:
                raise PlacementError(f"could not place building {bid} in a {cell_h}x{cell_w} px cell")
            ground = [_ground_corner(anchor, u, v, axis, georef) for u, v in ((0, 0), (L, W))]
            xs, ys = [g[0] for g in ground], [g[1] for g in ground]
            buildings.append(Building(bid, (min(xs), min(ys), max(xs), max(ys)), kind,
                                      float(ha), float(hr), float(hb), axis))
            for facet in world:
                sections.append(SectionTruth(len(sections), bid, facet))
    return SceneTruth(buildings, sections, dtm, view, Sun(p.sun_zenith, p.sun_azimuth),
                      p.width, p.height, georef, seed)


def _ground_corner(anchor, u, v, axis, georef):
    r, c = (anchor[0] - v, anchor[1] + u) if axis == "x" else (anchor[0] - u, anchor[1] + v)
    x, y = georef.pixel_to_world(r, c)
    return float(x), float(y)


def make_dtm(rng, p: SynthParams) -> DtmGrid:
    """Smooth terrain covering the frame footprint."""
    span_x, span_y = p.width * p.gsd, p.height * p.gsd
    w = int(math.ceil(span_x / p.dtm_cell)) + 1
    h = int(math.ceil(span_y / p.dtm_cell)) + 1
    yy, xx = np.mgrid[0:h, 0:w] * p.dtm_cell
    values = np.full((h, w), p.dtm_base, dtype=float)
    for _ in range(3):
        kx, ky = rng.uniform(0.5, 2.0, 2) * 2 * math.pi / max(span_x, span_y)
        phase = rng.uniform(0, 2 * math.pi)
        values += p.dtm_relief / 3 * np.sin(kx * xx + ky * yy + phase)
    return DtmGrid(w, h, p.origin_x, p.origin_y, p.dtm_cell, values)


# ---------------------------------------------------------------- rendering


@dataclass
class OracleRender:
    """Truth rasters for one scene frame."""

    labels: np.ndarray  # int32, section id + 1, 0 = background
    squares: list
    heights: np.ndarray  # float, NaN outside sections
    planes: dict  # section id -> (a, b, c) in pixel-frame metres
    occluded: list = field(default_factory=list)

    def mask(self, section_id: int) -> np.ndarray:
        return self.labels == section_id + 1


def section_pixels_rc(sec: SectionTruth, view: View, georef: Georef) -> tuple[np.ndarray, np.ndarray]:
    """Projected vertices, rounded to pixel centres, and their heights."""
    v = np.asarray(sec.vertices, dtype=float)
    r, c = project_oblique(v[:, 0], v[:, 1], v[:, 2], view, georef)
    return np.stack([np.rint(r), np.rint(c)], axis=1).astype(np.int64), v[:, 2]


def _plane_through(rc: np.ndarray, h: np.ndarray, gsd: float):
    A = np.column_stack([rc[:, 1] * gsd, rc[:, 0] * gsd, np.ones(len(rc))])
    coef, *_ = np.linalg.lstsq(A, h, rcond=None)
    return tuple(float(x) for x in coef)


def render_oracle(scene: SceneTruth, class_count: int = CLASS_COUNT, q: int = 15) -> OracleRender:
    shape = (scene.height, scene.width)
    view, georef = scene.view, scene.georef
    gsd = georef.gsd
    labels = np.zeros(shape, dtype=np.int32)
    projected = {}
    for sec in scene.sections:
        projected[sec.id] = section_pixels_rc(sec, view, georef)
    # painter's order: higher mean height drawn later
    order = sorted(scene.sections, key=lambda s: (float(np.mean([v[2] for v in s.vertices])), s.id))
    priority = np.zeros(len(scene.sections) + 1, dtype=np.int64)
    for rank, sec in enumerate(order, start=1):
        rc, _ = projected[sec.id]
        rr, cc = fill_convex(rc, shape)
        labels[rr, cc] = sec.id + 1
        priority[sec.id + 1] = rank
    labels = _separate(labels, priority)
    heights = np.full(shape, np.nan)
    planes, occluded, squares = {}, [], []
    for sec in scene.sections:
        rc, h = projected[sec.id]
        a, b, c = _plane_through(rc, h, gsd)
        planes[sec.id] = (a, b, c)
        rr, cc = _pixels_of(labels, sec.id + 1, rc)
        if len(rr) == 0:
            occluded.append(sec.id)
        heights[rr, cc] = a * cc * gsd + b * rr * gsd + c
        for (r, cpx), z in zip(rc, h):
            zc = int(min(max(round(z), 1), class_count))
            squares.append(CornerSquare((int(r), int(cpx)), zc, q))
    return OracleRender(labels, squares, heights, planes, occluded)


def _pixels_of(labels: np.ndarray, value: int, rc: np.ndarray):
    r0 = max(int(rc[:, 0].min()), 0)
    r1 = min(int(rc[:, 0].max()) + 1, labels.shape[0])
    c0 = max(int(rc[:, 1].min()), 0)
    c1 = min(int(rc[:, 1].max()) + 1, labels.shape[1])
    rr, cc = np.nonzero(labels[r0:r1, c0:c1] == value)
    return rr + r0, cc + c0


def _separate(labels: np.ndarray, priority: np.ndarray) -> np.ndarray:
    """Clear pixels 4-adjacent to a section drawn later, keeping sections pixel-separated."""
    pr = priority[labels]
    pad = np.pad(labels, 1)
    ppad = np.pad(pr, 1)
    h, w = labels.shape
    lose = np.zeros(labels.shape, dtype=bool)
    for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        nl = pad[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]
        npr = ppad[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]
        lose |= (labels > 0) & (nl > 0) & (nl != labels) & (npr > pr)
    if not lose.any():
        return labels
    out = labels.copy()
    out[lose] = 0
    return out


def render_image(scene: SceneTruth, render: OracleRender, seed: int = 0, shadows: bool = True) -> Raster:
    """Plausible RGB raster: textured ground, cast shadows, tilted walls, shaded roofs."""
    rng = np.random.default_rng(seed + 7919)
    shape = (scene.height, scene.width)
    view, georef = scene.view, scene.georef
    img = np.empty(shape + (3,), dtype=float)
    base = np.array([96.0, 112.0, 84.0])
    img[:] = base + rng.normal(0, 6, shape + (1,))
    by_building: dict[int, list] = {}
    for sec in scene.sections:
        by_building.setdefault(sec.building_id, []).append(sec)
    if shadows:
        z = math.radians(scene.sun.zenith)
        away = math.radians(scene.sun.azimuth + 180.0)
        for b in scene.buildings:
            pts = []
            for sec in by_building.get(b.id, []):
                for x, y, h in sec.vertices:
                    d = h * math.tan(z)
                    pts.append((x, y, 0.0))
                    pts.append((x + d * math.sin(away), y + d * math.cos(away), 0.0))
            if pts:
                rr, cc = _hull_fill(pts, view, georef, shape)
                img[rr, cc] *= 0.55
    for b in scene.buildings:
        secs = by_building.get(b.id, [])
        pts = [(x, y, 0.0) for s in secs for x, y, _ in s.vertices] + [v for s in secs for v in s.vertices]
        if pts:
            rr, cc = _hull_fill(pts, view, georef, shape)
            img[rr, cc] = (150, 140, 130)
    roof_base = {b.id: np.array(rng.choice([(170, 80, 60), (120, 120, 125), (150, 95, 70)]), dtype=float)
                 for b in scene.buildings}
    sun_dir = _sun_vector(scene.sun)
    for sec in scene.sections:
        a, bcoef, _ = render.planes[sec.id]
        normal = np.array([-a, bcoef, 1.0])
        shade = 0.6 + 0.4 * max(float(normal @ sun_dir / np.linalg.norm(normal)), 0.0)
        mask = render.labels == sec.id + 1
        img[mask] = roof_base[sec.building_id] * shade
    raster = Raster(np.clip(np.rint(img), 0, 255).astype(np.uint8), georef)
    return prescreen(raster)


def _sun_vector(sun: Sun) -> np.ndarray:
    z, az = math.radians(sun.zenith), math.radians(sun.azimuth)
    return np.array([math.sin(z) * math.sin(az), math.sin(z) * math.cos(az), math.cos(z)])


def _hull_fill(pts, view, georef, shape):
    from .plane import convex_hull

    p = np.asarray(pts, dtype=float)
    r, c = project_oblique(p[:, 0], p[:, 1], p[:, 2], view, georef)
    rc = np.stack([np.rint(r), np.rint(c)], axis=1)
    hull = convex_hull(rc)
    if len(hull) < 3:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    return fill_convex(rc[hull].astype(np.int64), shape)


def make_lod1_dsm(scene: SceneTruth, render: OracleRender) -> DtmGrid:
    """Image-registered DSM where each building is flattened to its mean roof height."""
    georef = scene.georef
    rows, cols = np.mgrid[0:scene.height, 0:scene.width]
    x, y = georef.pixel_to_world(rows, cols)
    values = scene.dtm.sample(x, y)
    building_of = np.zeros(len(scene.sections) + 1, dtype=np.int64) - 1
    for sec in scene.sections:
        building_of[sec.id + 1] = sec.building_id
    bid = building_of[render.labels]
    for b in scene.buildings:
        roof = bid == b.id
        if not roof.any():
            continue
        level = float(np.mean(render.heights[roof]))
        secs = [s for s in scene.sections if s.building_id == b.id]
        rr, cc = _hull_fill([v for s in secs for v in s.vertices], scene.view, georef, values.shape)
        values[rr, cc] += level
    return DtmGrid(scene.width, scene.height, georef.origin_x, georef.origin_y, georef.gsd, values)


# ---------------------------------------------------------------- noise


@dataclass
class NoiseParams:
    p_drop: float = 0.0
    jitter_sigma: float = 0.0
    p_class_err: float = 0.0
    p_boundary: float = 0.0

    def __post_init__(self):
        for name in ("p_drop", "p_class_err", "p_boundary"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.jitter_sigma < 0:
            raise ValueError("jitter_sigma must be non-negative")

    def is_zero(self) -> bool:
        return not (self.p_drop or self.jitter_sigma or self.p_class_err or self.p_boundary)


def inject_noise(labels: np.ndarray, squares: list, noise: NoiseParams, seed: int = 0,
                 class_count: int = CLASS_COUNT) -> tuple[np.ndarray, list]:
    """Degrade oracle outputs the way an imperfect network would.

    Corner and mask noise draw from independent streams, and every square
    consumes the same draws whatever the probabilities, so drop sets are
    nested as ``p_drop`` grows under a fixed seed.
    """
    corner_ss, mask_ss = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.default_rng(corner_ss)
    n = len(squares)
    u_drop = rng.random(n)
    jitter = np.rint(rng.normal(0.0, 1.0, (n, 2)) * noise.jitter_sigma).astype(int)
    u_class = rng.random(n)
    step = np.where(rng.random(n) < 0.5, -1, 1)
    out = []
    for i, sq in enumerate(squares):
        if u_drop[i] < noise.p_drop:
            continue
        z = sq.z
        if u_class[i] < noise.p_class_err:
            z = z + step[i]
            if z < 1 or z > class_count:
                z = sq.z - step[i]
        center = (sq.center[0] + int(jitter[i, 0]), sq.center[1] + int(jitter[i, 1]))
        out.append(replace(sq, center=center, z=int(z)))
    if noise.p_boundary > 0:
        labels = _boundary_noise(labels, noise.p_boundary, np.random.default_rng(mask_ss))
    return labels, out


def _boundary_noise(labels: np.ndarray, p: float, rng) -> np.ndarray:
    out = labels.copy()
    seg = labels > 0
    rim = seg & ~ndimage.binary_erosion(seg, structure=FOUR_CONNECTED, border_value=0)
    u = rng.random(labels.shape)
    out[rim & (u < p / 2)] = 0
    big = np.iinfo(np.int32).max
    hi = ndimage.maximum_filter(labels, size=5, mode="constant", cval=0)
    lo = ndimage.minimum_filter(np.where(seg, labels, big), size=5, mode="constant", cval=big)
    touching = ndimage.binary_dilation(seg, structure=FOUR_CONNECTED) & ~seg
    grow = touching & (hi == lo) & (u < p / 2)
    out[grow] = hi[grow]
    return out

"""End-to-end stages: synthesise, tile and blend, reconstruct, evaluate, compare."""

from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .baseline import baseline_planes
from .codec import CLASS_COUNT, DatasetSplit, decode_corner_squares, encode_corner_squares, encode_split_blend, split_map
from .corners import AssignmentResult, assign_squares
from .export import PointRecord, section_outline, split_dataset, write_obj, write_xyz
from .merge import DtmGrid, apply_dtm, unify_sections
from .metrics import EvalReport, evaluate
from .plane import DEFAULT_HEIGHT, Provenance, RoofPlane, height_at, reconstruct_section
from .raster import Georef, Raster, TileGrid, reassemble, split_tiles
from .sections import extract_sections, section_label_image
from .synth import (NoiseParams, OracleRender, SceneTruth, SynthParams, generate_scene, inject_noise,
                    make_lod1_dsm, render_image, render_oracle)


@dataclass
class PipelineConfig:
    tile_size: int = 230
    overlap: int = 10
    corner_size: int = 15
    default_height: float = DEFAULT_HEIGHT
    default_from_training: bool = False
    class_count: int = CLASS_COUNT
    seed: int = 0
    workers: int = 1
    dense_xyz: bool = False
    extrude: bool = True
    synth: SynthParams = field(default_factory=SynthParams)
    noise: NoiseParams = field(default_factory=NoiseParams)

    def to_dict(self) -> dict:
        return asdict(self)


def _map(fn, items, workers: int) -> list:
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- synthesis


@dataclass
class SynthOutput:
    scene: SceneTruth
    render: OracleRender
    image: Raster
    labels: np.ndarray  # segmentation handed to the pipeline (after noise)
    squares: list  # corner squares handed to the pipeline (after noise)
    dsm: DtmGrid


def synthesize(cfg: PipelineConfig) -> SynthOutput:
    params = replace(cfg.synth, corner_size=cfg.corner_size, class_count=cfg.class_count)
    scene = generate_scene(cfg.seed, params=params)
    render = render_oracle(scene, cfg.class_count, cfg.corner_size)
    image = render_image(scene, render, cfg.seed, params.shadows)
    labels, squares = inject_noise(render.labels, render.squares, cfg.noise, cfg.seed, cfg.class_count)
    return SynthOutput(scene, render, image, labels, squares, make_lod1_dsm(scene, render))


def corner_raster(squares, shape, georef: Optional[Georef] = None, class_count: int = CLASS_COUNT) -> Raster:
    """Red corner squares over black, as a detector would emit them for the whole frame."""
    return encode_corner_squares(Raster.blank(shape[0], shape[1], georef), squares, class_count)


# ---------------------------------------------------------------- tiling


@dataclass
class TileSet:
    blended: TileGrid
    corners: TileGrid
    splits: list  # DatasetSplit per tile, same order as the grids
    width: int
    height: int
    georef: Optional[Georef] = None

    def manifest(self) -> dict:
        return {
            "tile_size": self.blended.tile_size,
            "overlap": self.blended.overlap,
            "width": self.width,
            "height": self.height,
            "georef": self.georef.to_dict() if self.georef else None,
            "tiles": [{"name": t.name, "row": t.row, "col": t.col, "split": int(s)}
                      for t, s in zip(self.blended.tiles, self.splits)],
        }

    def region_splits(self) -> np.ndarray:
        """Split of the tile that owns each pixel after last-writer-wins reassembly."""
        out = np.full((self.height, self.width), -1, dtype=np.int8)
        s = self.blended.tile_size
        order = sorted(range(len(self.splits)), key=lambda i: (self.blended.tiles[i].row, self.blended.tiles[i].col))
        for i in order:
            t = self.blended.tiles[i]
            out[t.row:t.row + s, t.col:t.col + s] = int(self.splits[i])
        return out


def make_tiles(image: Raster, seg: np.ndarray, corners: Raster, cfg: PipelineConfig) -> TileSet:
    """Cut image, segmentation and corner rasters into the same overlapping grid.

    Each tile draws a split, and its segmentation pixels are painted with that
    split's blue code.
    """
    grid = split_tiles(image, cfg.tile_size, cfg.overlap)
    cgrid = split_tiles(corners, cfg.tile_size, cfg.overlap)
    train, val, test = split_dataset(range(len(grid.tiles)), cfg.seed)
    splits = [DatasetSplit.TRAINING] * len(grid.tiles)
    for ids, split in ((val, DatasetSplit.VALIDATION), (test, DatasetSplit.TESTING)):
        for i in ids:
            splits[i] = split
    s = cfg.tile_size

    def blend(i):
        t = grid.tiles[i]
        return encode_split_blend(t.raster, seg[t.row:t.row + s, t.col:t.col + s] > 0, splits[i])

    blended = grid.with_rasters(_map(blend, range(len(grid.tiles)), cfg.workers))
    return TileSet(blended, cgrid, splits, image.width, image.height, image.georef)


# ---------------------------------------------------------------- reconstruction


@dataclass
class Reconstruction:
    sections: list
    planes: dict  # section id -> RoofPlane
    labels: np.ndarray  # section id + 1
    heights: np.ndarray  # NaN off-roof
    splits: np.ndarray  # int8 split id per roof pixel, -1 elsewhere
    assignment: AssignmentResult
    diagnostics: dict
    scale: float
    georef: Optional[Georef] = None

    @property
    def mask(self) -> np.ndarray:
        return self.labels > 0


def height_map(sections, planes: dict, shape, scale: float) -> np.ndarray:
    out = np.full(shape, np.nan)
    for sec in sections:
        r, c = sec.pixels[:, 0], sec.pixels[:, 1]
        out[r, c] = height_at(planes[sec.id], c * scale, r * scale)
    return out


def training_default(assignment: AssignmentResult, sections, fallback: float) -> float:
    """Mean corner height over sections of the training split."""
    split_of = {s.id: s.split for s in sections}
    zs = [a.z for a in assignment.assigned if split_of[a.section_id] == DatasetSplit.TRAINING]
    return float(np.mean(zs)) if zs else fallback


def reconstruct(blended: TileGrid, corners: TileGrid, width: int, height: int, cfg: PipelineConfig,
                georef: Optional[Georef] = None) -> Reconstruction:
    full = reassemble(blended, width, height, georef)
    georef = georef or full.georef
    unified = unify_sections(full)
    recoded = int(np.count_nonzero(unified.data[..., 2] != full.data[..., 2]))
    sections = extract_sections(unified)
    labels = section_label_image(sections, full.shape)
    squares = decode_corner_squares(reassemble(corners, width, height), cfg.corner_size, cfg.class_count)
    assignment = assign_squares(squares, sections, labels)
    default = cfg.default_height
    if cfg.default_from_training:
        default = training_default(assignment, sections, default)
    scale = georef.gsd if georef else 1.0
    per = assignment.by_section()
    planes = {sec.id: reconstruct_section(sec, per.get(sec.id, []), default, scale) for sec in sections}
    prov = Counter(p.provenance.value for p in planes.values())
    diagnostics = {
        "sections": len(sections),
        "squares_decoded": len(squares),
        "squares_malformed": sum(sq.malformed for sq in squares),
        "squares_unassigned": len(assignment.unassigned),
        "squares_assigned": len(assignment.assigned),
        "pixels_recoded": recoded,
        "default_height": default,
        "provenance": {p.value: prov.get(p.value, 0) for p in Provenance if p is not Provenance.BASELINE},
        "sections_filed": sum(p.filing_delta > 0 for p in planes.values()),
    }
    heights = height_map(sections, planes, full.shape, scale)
    return Reconstruction(sections, planes, labels, heights, split_map(unified), assignment,
                          diagnostics, scale, georef)


# ---------------------------------------------------------------- evaluation


def evaluation_splits(recon_splits: np.ndarray, region: np.ndarray) -> np.ndarray:
    """Split per pixel: the unified code on predicted roofs, the tile's split elsewhere."""
    return np.where(recon_splits >= 0, recon_splits, region).astype(np.int8)


def evaluate_heights(pred_labels, pred_heights, truth_labels, truth_heights, splits=None) -> EvalReport:
    return evaluate(pred_labels > 0, truth_labels > 0, pred_heights, truth_heights, splits)


def baseline_heights(recon: Reconstruction, dsm: DtmGrid, dtm: DtmGrid) -> tuple[dict, np.ndarray]:
    planes = baseline_planes(recon.sections, dsm, dtm, recon.georef, recon.scale)
    return planes, height_map(recon.sections, planes, recon.labels.shape, recon.scale)


@dataclass
class PipelineRun:
    synth: SynthOutput
    tiles: TileSet
    recon: Reconstruction
    report: EvalReport


def run_pipeline(cfg: PipelineConfig) -> PipelineRun:
    """Synthetic scene through every stage, all in memory."""
    syn = synthesize(cfg)
    corners = corner_raster(syn.squares, syn.image.shape, syn.image.georef, cfg.class_count)
    tiles = make_tiles(syn.image, syn.labels, corners, cfg)
    recon = reconstruct(tiles.blended, tiles.corners, tiles.width, tiles.height, cfg, tiles.georef)
    splits = evaluation_splits(recon.splits, tiles.region_splits())
    report = evaluate_heights(recon.labels, recon.heights, syn.render.labels, syn.render.heights, splits)
    return PipelineRun(syn, tiles, recon, report)


# ---------------------------------------------------------------- exports


def point_records(recon: Reconstruction, dtm: Optional[DtmGrid] = None, dense: bool = False) -> list[PointRecord]:
    """Roof outline vertices (or every pixel centre) as world points tagged with the split id."""
    georef = recon.georef or Georef(0.0, 0.0, 1.0)
    out = []
    for sec in recon.sections:
        plane = recon.planes[sec.id]
        if dense:
            rows, cols = sec.pixels[:, 0].astype(float), sec.pixels[:, 1].astype(float)
        else:
            outline = np.array(section_outline(sec.pixels), dtype=float)
            rows, cols = outline[:, 0] - 0.5, outline[:, 1] - 0.5
        z = height_at(plane, cols * recon.scale, rows * recon.scale)
        x, y = georef.pixel_to_world(rows, cols)
        if dtm is not None:
            z = apply_dtm(x, y, z, dtm)
        sid = int(sec.split)
        out.extend(PointRecord(float(a), float(b), float(h), sid) for a, b, h in zip(x, y, z))
    return out


def planes_document(recon: Reconstruction) -> dict:
    return {
        "scale": recon.scale,
        "georef": recon.georef.to_dict() if recon.georef else None,
        "sections": [
            {"id": s.id, "split": int(s.split), "pixels": s.size, "bbox": list(s.bbox()),
             "plane": recon.planes[s.id].to_dict()}
            for s in recon.sections
        ],
    }


def write_reconstruction(recon: Reconstruction, out_dir, cfg: PipelineConfig, dtm: Optional[DtmGrid] = None) -> dict:
    from .raster import write_label_png

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_label_png(recon.labels, out / "pred_labels.png")
    np.save(out / "pred_heights.npy", recon.heights)
    np.save(out / "pred_splits.npy", recon.splits)
    (out / "planes.json").write_text(json.dumps(planes_document(recon), indent=1))
    write_xyz(point_records(recon, dtm, cfg.dense_xyz), out / "points.xyz")
    obj = write_obj([(s, recon.planes[s.id]) for s in recon.sections], out / "model.obj",
                    extrude_to_ground=cfg.extrude, scale=recon.scale)
    report = {**recon.diagnostics, "obj": obj}
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True))
    return report


def load_planes(path) -> dict:
    doc = json.loads(Path(path).read_text())
    return {s["id"]: RoofPlane.from_dict(s["plane"]) for s in doc["sections"]}

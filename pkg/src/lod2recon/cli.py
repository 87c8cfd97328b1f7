"""Command line entry point: synth, tile, reconstruct, evaluate, coco-export, baseline."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .codec import decode_corner_squares
from .errors import Lod2Error
from .export import write_coco
from .merge import read_grid, write_grid
from .metrics import render_table, split_columns
from .pipeline import (PipelineConfig, Reconstruction, _map, baseline_heights, corner_raster, evaluate_heights,
                       evaluation_splits, make_tiles, reconstruct, synthesize, write_reconstruction)
from .plane import DEFAULT_HEIGHT
from .raster import Georef, Raster, Tile, TileGrid, read_label_png, read_png, write_label_png, write_png
from .sections import extract_sections, sections_from_labels
from .synth import NoiseParams, SynthParams

log = logging.getLogger("lod2recon")


class StageError(Exception):
    def __init__(self, stage: str, msg: str):
        super().__init__(msg)
        self.stage = stage


def _config(args) -> PipelineConfig:
    cfg = PipelineConfig()
    for name in ("tile_size", "overlap", "corner_size", "seed", "workers"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    dh = getattr(args, "default_height", None)
    if dh == "train-mean":
        cfg.default_from_training = True
    elif dh is not None:
        try:
            cfg.default_height = float(dh)
        except ValueError:
            raise StageError("config", f"--default-height expects a number or 'train-mean', got {dh!r}")
    if hasattr(args, "noise_drop"):
        cfg.noise = NoiseParams(args.noise_drop, args.noise_jitter, args.noise_class_err, args.noise_boundary)
    return cfg


def _write_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True))


def _load_tiles(tiles_dir: Path, sub: str, manifest: dict) -> TileGrid:
    georef = Georef.from_dict(manifest["georef"]) if manifest.get("georef") else None
    tiles = []
    for t in manifest["tiles"]:
        raster = read_png(tiles_dir / sub / f"{t['name']}.png")
        if georef is not None:
            raster = Raster(raster.data, georef.shifted(t["row"], t["col"]))
        tiles.append(Tile(t["row"], t["col"], raster))
    return TileGrid(manifest["tile_size"], manifest["overlap"], tiles)


# ---------------------------------------------------------------- commands


def cmd_synth(args) -> int:
    cfg = _config(args)
    cfg.synth = SynthParams(
        width=args.width, height=args.height, n_buildings=args.n_buildings,
        roof_kinds=tuple(args.roof_kinds.split(",")), eave_skew_max=args.eave_skew,
    )
    out = Path(args.out_dir)
    syn = synthesize(cfg)
    out.mkdir(parents=True, exist_ok=True)
    syn.scene.save(out / "scene.json")
    write_png(syn.image, out / "image.png")
    write_label_png(syn.labels, out / "segmentation.png")
    write_png(corner_raster(syn.squares, syn.image.shape, syn.image.georef, cfg.class_count), out / "corners.png")
    write_label_png(syn.render.labels, out / "truth_labels.png")
    np.save(out / "truth_heights.npy", syn.render.heights)
    write_grid(syn.scene.dtm, out / "dtm.asc")
    write_grid(syn.dsm, out / "dsm.asc")
    _write_json(out / "synth_report.json", {
        "buildings": len(syn.scene.buildings),
        "sections": len(syn.scene.sections),
        "squares": len(syn.squares),
        "occluded_sections": syn.render.occluded,
        "noise": asdict(cfg.noise),
        "seed": cfg.seed,
    })
    log.info("wrote %d buildings / %d sections to %s", len(syn.scene.buildings), len(syn.scene.sections), out)
    return 0


def cmd_tile(args) -> int:
    cfg = _config(args)
    src, out = Path(args.in_dir), Path(args.out_dir)
    image = read_png(src / "image.png")
    seg = read_label_png(src / "segmentation.png")
    corners = read_png(src / "corners.png")
    if seg.shape != image.shape or corners.shape != image.shape:
        raise StageError("tile", "image, segmentation and corner rasters differ in size")
    tiles = make_tiles(image, seg, corners, cfg)
    work = [(t, "blended") for t in tiles.blended.tiles] + [(t, "corners") for t in tiles.corners.tiles]
    _map(lambda tw: write_png(Raster(tw[0].raster.data), out / tw[1] / f"{tw[0].name}.png"), work, cfg.workers)
    _write_json(out / "tiles.json", tiles.manifest())
    log.info("wrote %d tiles to %s", len(tiles.blended.tiles), out)
    return 0


def _region(manifest: dict) -> np.ndarray:
    out = np.full((manifest["height"], manifest["width"]), -1, dtype=np.int8)
    s = manifest["tile_size"]
    for t in sorted(manifest["tiles"], key=lambda t: (t["row"], t["col"])):
        out[t["row"]:t["row"] + s, t["col"]:t["col"] + s] = t["split"]
    return out


def cmd_reconstruct(args) -> int:
    cfg = _config(args)
    cfg.dense_xyz = args.dense_xyz
    tiles_dir, out = Path(args.tiles_dir), Path(args.out_dir)
    manifest = json.loads((tiles_dir / "tiles.json").read_text())
    georef = Georef.from_dict(manifest["georef"]) if manifest.get("georef") else None
    blended = _load_tiles(tiles_dir, "blended", manifest)
    corners = _load_tiles(tiles_dir, "corners", manifest)
    recon = reconstruct(blended, corners, manifest["width"], manifest["height"], cfg, georef)
    dtm = read_grid(args.dtm) if args.dtm else None
    report = write_reconstruction(recon, out, cfg, dtm)
    np.save(out / "eval_splits.npy", evaluation_splits(recon.splits, _region(manifest)))
    log.info("reconstructed %d sections: %s", report["sections"], report["provenance"])
    return 0


def _eval_inputs(recon_dir: Path, truth_dir: Path):
    pred_labels = read_label_png(recon_dir / "pred_labels.png")
    pred_heights = np.load(recon_dir / "pred_heights.npy")
    splits = np.load(recon_dir / "eval_splits.npy")
    truth_labels = read_label_png(truth_dir / "truth_labels.png")
    truth_heights = np.load(truth_dir / "truth_heights.npy")
    return pred_labels, pred_heights, splits, truth_labels, truth_heights


def cmd_evaluate(args) -> int:
    recon_dir, truth_dir = Path(args.recon_dir), Path(args.truth_dir)
    out = Path(args.out_dir) if args.out_dir else recon_dir
    pl, ph, splits, tl, th = _eval_inputs(recon_dir, truth_dir)
    report = evaluate_heights(pl, ph, tl, th, splits)
    out.mkdir(parents=True, exist_ok=True)
    (out / "eval.json").write_text(report.to_json())
    table = render_table(split_columns(report))
    (out / "eval.txt").write_text(table + "\n")
    print(table)
    return 0


def cmd_coco(args) -> int:
    tiles_dir = Path(args.tiles_dir)
    manifest = json.loads((tiles_dir / "tiles.json").read_text())
    sub = "blended" if args.mode == "sections" else "corners"
    grid = _load_tiles(tiles_dir, sub, manifest)
    entries = []
    for t in grid.tiles:
        if args.mode == "sections":
            secs = extract_sections(t.raster)
            items = []
            for sec in secs:
                mask = np.zeros(t.raster.shape, dtype=bool)
                mask[sec.pixels[:, 0], sec.pixels[:, 1]] = True
                items.append(mask)
        else:
            items = decode_corner_squares(t.raster, args.corner_size)
        entries.append((t.raster, items, f"{t.name}.png"))
    doc = write_coco(entries, args.mode, args.out)
    log.info("wrote %d annotations on %d images to %s", len(doc["annotations"]), len(doc["images"]), args.out)
    return 0


def cmd_baseline(args) -> int:
    recon_dir, truth_dir = Path(args.recon_dir), Path(args.truth_dir)
    pl, ph, splits, tl, th = _eval_inputs(recon_dir, truth_dir)
    dsm, dtm = read_grid(truth_dir / "dsm.asc"), read_grid(truth_dir / "dtm.asc")
    georef = Georef.from_dict(json.loads((truth_dir / "image.json").read_text()))
    sections = sections_from_labels(pl, np.maximum(splits, 0))
    recon = Reconstruction(sections, {}, pl, ph, splits, None, {}, georef.gsd, georef)
    _, bh = baseline_heights(recon, dsm, dtm)
    ours = evaluate_heights(pl, ph, tl, th, splits)
    base = evaluate_heights(pl, bh, tl, th, splits)
    out = Path(args.out_dir) if args.out_dir else recon_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "baseline_eval.json").write_text(base.to_json())
    table = render_table({"Corners": ours, "DSM baseline": base})
    (out / "baseline.txt").write_text(table + "\n")
    print(table)
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lod2recon", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, tiling=False, corners=False):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out-dir", required=True)
        if tiling:
            p.add_argument("--tile-size", type=int, default=230)
            p.add_argument("--overlap", type=int, default=10)
        if corners:
            p.add_argument("--corner-size", type=int, default=15)

    p = sub.add_parser("synth", help="generate a synthetic scene with oracle network outputs")
    common(p, corners=True)
    p.add_argument("--width", type=int, default=2000)
    p.add_argument("--height", type=int, default=2000)
    p.add_argument("--n-buildings", type=int, default=50)
    p.add_argument("--roof-kinds", default="flat,shed,gable,hip")
    p.add_argument("--eave-skew", type=int, default=0, help="max back-eave offset in metres")
    p.add_argument("--noise-drop", type=float, default=0.0)
    p.add_argument("--noise-jitter", type=float, default=0.0)
    p.add_argument("--noise-class-err", type=float, default=0.0)
    p.add_argument("--noise-boundary", type=float, default=0.0)
    p.set_defaults(func=cmd_synth, stage="synth")

    p = sub.add_parser("tile", help="cut a scene into split-coded tiles")
    common(p, tiling=True)
    p.add_argument("--in-dir", required=True)
    p.set_defaults(func=cmd_tile, stage="tile")

    p = sub.add_parser("reconstruct", help="rebuild roof planes from tiles")
    common(p, corners=True)
    p.add_argument("--tiles-dir", required=True)
    p.add_argument("--default-height", default=str(DEFAULT_HEIGHT),
                   help="height for sections without corners, or 'train-mean'")
    p.add_argument("--dtm", help="ASCII grid; when given, xyz heights become altitudes")
    p.add_argument("--dense-xyz", action="store_true", help="one point per roof pixel")
    p.set_defaults(func=cmd_reconstruct, stage="reconstruct")

    p = sub.add_parser("evaluate", help="score a reconstruction against truth")
    p.add_argument("--recon-dir", required=True)
    p.add_argument("--truth-dir", required=True)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_evaluate, stage="evaluate")

    p = sub.add_parser("coco-export", help="COCO annotations for the tiles")
    p.add_argument("--tiles-dir", required=True)
    p.add_argument("--mode", choices=("sections", "corners"), default="sections")
    p.add_argument("--corner-size", type=int, default=15)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_coco, stage="export")

    p = sub.add_parser("baseline", help="compare against a plane fit on the DSM")
    p.add_argument("--recon-dir", required=True)
    p.add_argument("--truth-dir", required=True)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_baseline, stage="baseline")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except Lod2Error as exc:
        print(f"error [{exc.stage}]: {exc}", file=sys.stderr)
    except StageError as exc:
        print(f"error [{exc.stage}]: {exc}", file=sys.stderr)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error [{args.stage}]: {exc}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())

import json

import numpy as np
import pytest
import trimesh
from hypothesis import given, strategies as st
from scipy import ndimage

from lod2recon.codec import CornerSquare, DatasetSplit
from lod2recon.export import (PointRecord, _shoelace, outer_boundary, read_xyz, split_dataset, write_coco,
                              write_obj, write_xyz)
from lod2recon.plane import Provenance, RoofPlane
from lod2recon.raster import Raster
from lod2recon.sections import sections_from_labels

COCO_SCHEMA = {
    "type": "object",
    "required": ["images", "annotations", "categories"],
    "properties": {
        "images": {"type": "array", "items": {
            "type": "object", "required": ["id", "file_name", "width", "height"],
            "properties": {"id": {"type": "integer"}, "file_name": {"type": "string"},
                           "width": {"type": "integer", "minimum": 1}, "height": {"type": "integer", "minimum": 1}}}},
        "annotations": {"type": "array", "items": {
            "type": "object",
            "required": ["id", "image_id", "category_id", "segmentation", "area", "bbox", "iscrowd"],
            "properties": {
                "id": {"type": "integer"}, "image_id": {"type": "integer"}, "category_id": {"type": "integer"},
                "segmentation": {"type": "array", "minItems": 1,
                                 "items": {"type": "array", "minItems": 6, "items": {"type": "number"}}},
                "area": {"type": "number", "minimum": 0},
                "bbox": {"type": "array", "minItems": 4, "maxItems": 4, "items": {"type": "number"}},
                "iscrowd": {"enum": [0, 1]}}}},
        "categories": {"type": "array", "items": {
            "type": "object", "required": ["id", "name"],
            "properties": {"id": {"type": "integer"}, "name": {"type": "string"}}}},
    },
}


def block_section(h=20, w=20, r0=5, c0=5, size=10):
    labels = np.zeros((h, w), dtype=np.int32)
    labels[r0:r0 + size, c0:c0 + size] = 1
    return sections_from_labels(labels, np.zeros((h, w), dtype=np.int8))[0]


def test_xyz_format(tmp_path):
    write_xyz([PointRecord(1.5, 2.0, 6.11, 0)], tmp_path / "a.xyz")
    assert (tmp_path / "a.xyz").read_text() == "1.500000 2.000000 6.110000 0\n"
    write_xyz([], tmp_path / "b.xyz")
    assert (tmp_path / "b.xyz").read_text() == ""
    with pytest.raises(ValueError):
        write_xyz([PointRecord(0, 0, 0, 3)], tmp_path / "c.xyz")


def test_xyz_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    recs = [PointRecord(float(x), float(y), float(z), int(i))
            for x, y, z, i in zip(rng.uniform(-1e5, 1e6, 10_000), rng.uniform(-1e5, 1e6, 10_000),
                                  rng.uniform(-10, 400, 10_000), rng.integers(0, 3, 10_000))]
    write_xyz(recs, tmp_path / "r.xyz")
    back = read_xyz(tmp_path / "r.xyz")
    assert len(back) == len(recs)
    for a, b in zip(recs, back):
        assert (round(a.x, 6), round(a.y, 6), round(a.z, 6), a.id) == (b.x, b.y, b.z, b.id)


def test_outer_boundary_shapes():
    m = np.zeros((12, 12), dtype=bool)
    m[1:11, 1:11] = True
    assert outer_boundary(m) == [(1, 1), (1, 11), (11, 11), (11, 1)]
    L = np.zeros((4, 4), dtype=bool)
    L[0:3, 0] = True
    L[2, 0:3] = True
    assert abs(_shoelace(outer_boundary(L))) == 5


@given(st.integers(0, 2**32 - 1), st.integers(2, 16), st.integers(2, 16))
def test_outline_area_equals_filled_pixel_count(seed, h, w):
    mask = np.random.default_rng(seed).random((h, w)) < 0.6
    labels, n = ndimage.label(mask, structure=ndimage.generate_binary_structure(2, 1))
    if n == 0:
        return
    comp = labels == 1
    # background is 8-connected when the foreground is 4-connected
    filled = ndimage.binary_fill_holes(comp, structure=np.ones((3, 3)))
    assert abs(_shoelace(outer_boundary(comp))) == filled.sum()


def obj_counts(path):
    lines = path.read_text().splitlines()
    return sum(l.startswith("v ") for l in lines), [l for l in lines if l.startswith("f ")]


def test_obj_flat_block(tmp_path):
    sec = block_section()
    plane = RoofPlane.horizontal(3.0, Provenance.ONE_CORNER)
    write_obj([(sec, plane)], tmp_path / "a.obj")
    nv, faces = obj_counts(tmp_path / "a.obj")
    assert nv == 4 and len(faces) == 1
    zs = [float(l.split()[3]) for l in (tmp_path / "a.obj").read_text().splitlines() if l.startswith("v ")]
    assert zs == [3.0] * 4
    write_obj([(sec, plane)], tmp_path / "b.obj", extrude_to_ground=True)
    nv, faces = obj_counts(tmp_path / "b.obj")
    assert nv == 8 and len(faces) == 5
    mesh = trimesh.load(tmp_path / "b.obj", process=False, force="mesh")
    assert len(mesh.vertices) == 8 and mesh.faces.max() < 8
    write_obj([], tmp_path / "c.obj")
    assert obj_counts(tmp_path / "c.obj") == (0, [])


def test_obj_indices_reference_vertices(tmp_path):
    rng = np.random.default_rng(5)
    labels = np.zeros((60, 60), dtype=np.int32)
    for k in range(1, 6):
        r, c = rng.integers(0, 50, 2)
        labels[r:r + rng.integers(2, 10), c:c + rng.integers(2, 10)] = k
    secs = sections_from_labels(labels, np.zeros(labels.shape, dtype=np.int8))
    pairs = [(s, RoofPlane(0.01 * s.id, 0.02, 4.0, Provenance.TRIANGLE)) for s in secs]
    write_obj(pairs, tmp_path / "m.obj", extrude_to_ground=True, scale=0.38)
    nv, faces = obj_counts(tmp_path / "m.obj")
    for f in faces:
        assert all(1 <= int(i) <= nv for i in f.split()[1:])
    first = (tmp_path / "m.obj").read_text()
    write_obj(pairs, tmp_path / "m2.obj", extrude_to_ground=True, scale=0.38)
    assert (tmp_path / "m2.obj").read_text() == first


def test_coco_sections_and_corners(tmp_path):
    import jsonschema

    tile = Raster.blank(30, 30)
    mask = np.zeros((30, 30), dtype=bool)
    mask[3:9, 4:14] = True
    doc = write_coco([(tile, [mask])], "sections", tmp_path / "s.json")
    assert (len(doc["images"]), len(doc["annotations"]), len(doc["categories"])) == (1, 1, 1)
    assert doc["annotations"][0]["area"] == 60
    assert doc["annotations"][0]["bbox"] == [4, 3, 10, 6]
    jsonschema.validate(json.loads((tmp_path / "s.json").read_text()), COCO_SCHEMA)
    doc = write_coco([(tile, [CornerSquare((0, 0), 2)])], "corners", tmp_path / "c.json")
    assert len(doc["categories"]) == 19
    names = {c["id"]: c["name"] for c in doc["categories"]}
    ann = doc["annotations"][0]
    assert names[ann["category_id"]] == "hbh"
    assert ann["area"] == 64  # clipped 8 x 8 corner
    jsonschema.validate(doc, COCO_SCHEMA)


def test_split_dataset_counts():
    tr, va, te = split_dataset(range(10), seed=1)
    assert (len(tr), len(va), len(te)) == (6, 2, 2)
    assert split_dataset(range(10), seed=1) == (tr, va, te)
    assert split_dataset(["only"], seed=0) == ([], [], ["only"])
    with pytest.raises(ValueError):
        split_dataset([])


@given(st.integers(1, 300), st.integers(0, 1000))
def test_split_dataset_partition(n, seed):
    tr, va, te = split_dataset(range(n), seed)
    assert sorted(tr + va + te) == list(range(n))
    assert (len(tr), len(va)) == (n * 3 // 5, n // 5)

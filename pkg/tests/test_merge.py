import numpy as np
import pytest
from hypothesis import given, strategies as st

from lod2recon.codec import DatasetSplit, encode_split_blend, prescreen, split_map
from lod2recon.errors import FootprintError
from lod2recon.merge import DtmGrid, apply_dtm, read_grid, remove_dtm, unify_sections, write_grid
from lod2recon.raster import Raster
from lod2recon.sections import label_sections
from oracles import bilinear_oracle, label_union_find


def test_half_and_half_section_takes_first_code():
    t = Raster.blank(4, 6)
    left = np.zeros((4, 6), dtype=bool)
    left[1:3, 0:3] = True
    right = np.zeros((4, 6), dtype=bool)
    right[1:3, 3:6] = True
    t = encode_split_blend(t, left, DatasetSplit.TRAINING)
    t = encode_split_blend(t, right, DatasetSplit.TESTING)
    out = unify_sections(t)
    assert set(split_map(out)[left | right].tolist()) == {0}


def test_uniform_and_disjoint_sections_unchanged():
    t = encode_split_blend(Raster.blank(5, 5), np.array([[0, 0], [0, 1]]), DatasetSplit.VALIDATION)
    assert unify_sections(t) is t
    t = encode_split_blend(t, np.array([[4, 4]]), DatasetSplit.TESTING)
    assert unify_sections(t) is t


def scan_fill_oracle(smap):
    """Row-major scan; flood each unvisited component with its first pixel's code."""
    mask = (smap >= 0).tolist()
    labels, _ = label_union_find(mask)
    code = {}
    out = smap.copy()
    for r in range(smap.shape[0]):
        for c in range(smap.shape[1]):
            k = labels[r][c]
            if k:
                code.setdefault(k, smap[r, c])
                out[r, c] = code[k]
    return out


@given(st.integers(0, 2**32 - 1), st.integers(2, 20), st.integers(2, 20))
def test_unify_matches_scan_oracle_and_is_idempotent(seed, h, w):
    rng = np.random.default_rng(seed)
    t = prescreen(Raster(rng.integers(0, 256, (h, w, 3), dtype=np.uint8)))
    for split in DatasetSplit:
        t = encode_split_blend(t, rng.random((h, w)) < 0.25, split)
    out = unify_sections(t)
    assert np.array_equal(split_map(out), scan_fill_oracle(split_map(t)))
    assert unify_sections(out).same_as(out)
    labels, n = label_sections(split_map(out) >= 0)
    smap = split_map(out)
    for k in range(1, n + 1):
        assert len(np.unique(smap[labels == k])) == 1
    # non-segmentation pixels are untouched
    seg = split_map(t) >= 0
    assert np.array_equal(out.data[~seg], t.data[~seg])


def grid(values, cell=2.0):
    v = np.asarray(values, dtype=float)
    return DtmGrid(v.shape[1], v.shape[0], 100.0, 200.0, cell, v)


def test_dtm_examples():
    g = grid(np.full((3, 3), 120.0))
    assert apply_dtm(103.0, 197.0, 5.0, g) == 125.0
    g = grid([[100.0, 102.0]])
    # cell centres at x = 101 and 103
    assert apply_dtm(101.0, 199.0, 0.0, g) == 100.0
    assert apply_dtm(102.0, 199.0, 3.0, g) == 104.0
    assert remove_dtm(102.0, 199.0, 104.0, g) == 3.0
    with pytest.raises(FootprintError):
        apply_dtm(99.0, 199.0, 0.0, g)


@given(st.integers(0, 2**32 - 1), st.floats(0, 1), st.floats(0, 1))
def test_bilinear_matches_oracle(seed, fx, fy):
    rng = np.random.default_rng(seed)
    v = rng.uniform(0, 50, (4, 5))
    g = grid(v, 1.5)
    x, y = 100.0 + fx * 5 * 1.5, 200.0 - fy * 4 * 1.5
    assert abs(g.sample(x, y) - bilinear_oracle(v.tolist(), 100.0, 200.0, 1.5, x, y)) < 1e-12


def test_grid_file_roundtrip(tmp_path):
    g = grid(np.random.default_rng(0).uniform(0, 300, (6, 7)), 0.38)
    write_grid(g, tmp_path / "g.asc")
    back = read_grid(tmp_path / "g.asc")
    assert (back.width, back.height, back.origin_x, back.origin_y, back.cell_size) == (7, 6, 100.0, 200.0, 0.38)
    assert np.array_equal(back.values, g.values)

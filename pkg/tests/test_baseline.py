import numpy as np
import pytest
from hypothesis import given, strategies as st

from lod2recon.baseline import baseline_dsm_reconstruct, fit_plane_lsq
from lod2recon.errors import DegenerateError
from lod2recon.merge import DtmGrid
from lod2recon.plane import Provenance
from lod2recon.raster import Georef
from lod2recon.sections import sections_from_labels
from oracles import lsq_plane_oracle

GEO = Georef(0.0, 100.0, 0.5)


def scene(plane, noise=0.0, size=20, seed=0):
    """Section covering a size x size block, DSM = DTM + plane (+ noise)."""
    n = 40
    labels = np.zeros((n, n), dtype=np.int32)
    labels[5:5 + size, 8:8 + size] = 1
    (sec,) = sections_from_labels(labels, np.zeros((n, n), dtype=np.int8))
    rows, cols = np.mgrid[0:n, 0:n]
    dtm_vals = 50.0 + 0.1 * rows
    a, b, c = plane
    h = a * cols * GEO.gsd + b * rows * GEO.gsd + c
    h = h + np.random.default_rng(seed).normal(0, noise, h.shape) if noise else h
    dtm = DtmGrid(n, n, 0.0, 100.0, 0.5, dtm_vals)
    dsm = DtmGrid(n, n, 0.0, 100.0, 0.5, dtm_vals + h)
    return sec, dsm, dtm


def test_exact_plane_recovered():
    sec, dsm, dtm = scene((0.3, -0.2, 7.0))
    p = baseline_dsm_reconstruct(sec, dsm, dtm, GEO, GEO.gsd)
    assert p.provenance is Provenance.BASELINE
    assert np.allclose((p.a, p.b, p.c), (0.3, -0.2, 7.0), atol=1e-9)


def test_noisy_plane_matches_normal_equations():
    sec, dsm, dtm = scene((0.3, -0.2, 7.0), noise=0.5, size=20, seed=3)
    p = baseline_dsm_reconstruct(sec, dsm, dtm, GEO, GEO.gsd)
    x = sec.pixels[:, 1] * GEO.gsd
    y = sec.pixels[:, 0] * GEO.gsd
    xw, yw = GEO.pixel_to_world(sec.pixels[:, 0], sec.pixels[:, 1])
    h = dsm.sample(xw, yw) - dtm.sample(xw, yw)
    ref = lsq_plane_oracle(x.tolist(), y.tolist(), h.tolist())
    assert np.allclose((p.a, p.b, p.c), ref, atol=1e-9)
    # slope standard error is about sigma / (sqrt(n) * spread); allow a generous 3-sigma band
    se = 0.5 / (np.sqrt(400) * np.std(x))
    assert abs(p.a - 0.3) < 3 * se and abs(p.b + 0.2) < 3 * se


def test_single_pixel_is_degenerate():
    labels = np.zeros((5, 5), dtype=np.int32)
    labels[2, 2] = 1
    (sec,) = sections_from_labels(labels, np.zeros((5, 5), dtype=np.int8))
    g = DtmGrid(5, 5, 0.0, 100.0, 0.5, np.zeros((5, 5)))
    with pytest.raises(DegenerateError):
        baseline_dsm_reconstruct(sec, g, g, GEO)
    with pytest.raises(DegenerateError):
        fit_plane_lsq([0, 1, 2], [0, 1, 2], [1, 2, 3])


@given(st.integers(0, 2**32 - 1))
def test_fit_beats_random_probes(seed):
    rng = np.random.default_rng(seed)
    x, y = rng.uniform(0, 10, 30), rng.uniform(0, 10, 30)
    h = rng.uniform(0, 10, 30)
    p = fit_plane_lsq(x, y, h)
    best = np.sum((p.a * x + p.b * y + p.c - h) ** 2)
    for a, b, c in rng.normal(0, 1, (50, 3)) + (p.a, p.b, p.c):
        assert best <= np.sum((a * x + b * y + c - h) ** 2) + 1e-9

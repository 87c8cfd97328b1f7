"""Comparison method: a least-squares plane per section over the normalised DSM."""

from __future__ import annotations

import numpy as np

from .errors import DegenerateError
from .merge import DtmGrid
from .plane import Provenance, RoofPlane, pixel_xy
from .raster import Georef


def fit_plane_lsq(x, y, h) -> RoofPlane:
    """Least-squares ``h = a*x + b*y + c`` via centred normal equations."""
    x, y, h = (np.asarray(v, dtype=float).ravel() for v in (x, y, h))
    if len(x) < 3:
        raise DegenerateError(f"need at least 3 samples, got {len(x)}")
    xm, ym, hm = x.mean(), y.mean(), h.mean()
    dx, dy, dh = x - xm, y - ym, h - hm
    sxx, syy, sxy = dx @ dx, dy @ dy, dx @ dy
    det = sxx * syy - sxy * sxy
    if det <= 1e-12 * max(sxx * syy, 1e-300):
        raise DegenerateError("samples are collinear in x/y")
    sxh, syh = dx @ dh, dy @ dh
    a = (sxh * syy - syh * sxy) / det
    b = (syh * sxx - sxh * sxy) / det
    return RoofPlane(float(a), float(b), float(hm - a * xm - b * ym), Provenance.BASELINE, len(x))


def normalised_heights(sec, dsm: DtmGrid, dtm: DtmGrid, georef: Georef) -> np.ndarray:
    x, y = georef.pixel_to_world(sec.pixels[:, 0], sec.pixels[:, 1])
    return dsm.sample(x, y) - dtm.sample(x, y)


def baseline_dsm_reconstruct(sec, dsm: DtmGrid, dtm: DtmGrid, georef: Georef, scale: float = 1.0) -> RoofPlane:
    """Fit a plane to DSM minus DTM over the section's pixels.

    Plane coordinates follow the pipeline convention (``x = col * scale``,
    ``y = row * scale``) so heights can be compared pixel for pixel.
    """
    h = normalised_heights(sec, dsm, dtm, georef)
    x, y = pixel_xy(sec.pixels[:, 0], sec.pixels[:, 1], scale)
    return fit_plane_lsq(x, y, h)


def baseline_planes(sections, dsm: DtmGrid, dtm: DtmGrid, georef: Georef, scale: float = 1.0) -> dict:
    """Planes for every section; sections too thin to fit fall back to their mean height."""
    out = {}
    for sec in sections:
        try:
            out[sec.id] = baseline_dsm_reconstruct(sec, dsm, dtm, georef, scale)
        except DegenerateError:
            h = normalised_heights(sec, dsm, dtm, georef)
            out[sec.id] = RoofPlane.horizontal(float(np.mean(h)), Provenance.BASELINE, len(h))
    return out

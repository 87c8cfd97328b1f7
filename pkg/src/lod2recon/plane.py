"""Roof plane estimation from the corners filed onto a section.

Planes are ``z = a*x + b*y + c`` with ``x = col * scale`` and
``y = row * scale`` (scale = GSD in metres when georeferenced, else 1).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateError, OrderError

DEFAULT_HEIGHT = 6.11
EXHAUSTIVE_MAX = 12


class Provenance(str, Enum):
    TRIANGLE = "triangle"
    TWO_CORNER = "two_corner"
    ONE_CORNER = "one_corner"
    NO_CORNER = "no_corner"
    DEGENERATE = "degenerate"
    BASELINE = "baseline"


@dataclass(frozen=True)
class RoofPlane:
    a: float
    b: float
    c: float
    provenance: Provenance
    n_corners: int = 0
    filing_delta: float = 0.0

    @classmethod
    def horizontal(cls, height: float, provenance: Provenance, n_corners: int = 0) -> "RoofPlane":
        return cls(0.0, 0.0, float(height), provenance, n_corners)

    def to_dict(self) -> dict:
        return {
            "a": self.a, "b": self.b, "c": self.c,
            "provenance": self.provenance.value,
            "n_corners": self.n_corners,
            "filing_delta": self.filing_delta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RoofPlane":
        return cls(d["a"], d["b"], d["c"], Provenance(d["provenance"]),
                   d.get("n_corners", 0), d.get("filing_delta", 0.0))


def height_at(plane: RoofPlane, x, y):
    return plane.a * np.asarray(x, dtype=float) + plane.b * np.asarray(y, dtype=float) + plane.c


def pixel_xy(rows, cols, scale: float = 1.0):
    return np.asarray(cols, dtype=float) * scale, np.asarray(rows, dtype=float) * scale


def file_heights(z1: float, z2: float, z3: float) -> tuple[float, float, float]:
    """Collapse three distinct ascending heights onto two values."""
    if not z1 <= z2 <= z3:
        raise OrderError(f"heights must be ascending, got {(z1, z2, z3)}")
    if z1 == z2 or z2 == z3:
        return z1, z2, z3
    if z2 < (z1 + z3) / 2:
        m = (z1 + z2) / 2
        return m, m, z3
    m = (z2 + z3) / 2
    return z1, m, m


def _twice_areas(pts: np.ndarray, triples: np.ndarray) -> np.ndarray:
    a, b, c = pts[triples[:, 0]], pts[triples[:, 1]], pts[triples[:, 2]]
    return np.abs((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(pts: np.ndarray) -> np.ndarray:
    """Strict hull vertices (collinear points dropped), counter-clockwise."""
    order = sorted(range(len(pts)), key=lambda i: (pts[i, 0], pts[i, 1]))
    uniq = []
    for i in order:
        if not uniq or tuple(pts[i]) != tuple(pts[uniq[-1]]):
            uniq.append(i)
    if len(uniq) < 3:
        return np.array(uniq, dtype=int)
    lower, upper = [], []
    for i in uniq:
        while len(lower) >= 2 and _cross(pts[lower[-2]], pts[lower[-1]], pts[i]) <= 0:
            lower.pop()
        lower.append(i)
    for i in reversed(uniq):
        while len(upper) >= 2 and _cross(pts[upper[-2]], pts[upper[-1]], pts[i]) <= 0:
            upper.pop()
        upper.append(i)
    return np.array(lower[:-1] + upper[:-1], dtype=int)


def _boundary_indices(pts: np.ndarray) -> np.ndarray:
    """Indices of points not strictly inside the hull (edges and duplicates included)."""
    hull = convex_hull(pts)
    if len(hull) < 3:
        return np.arange(len(pts))
    v = pts[hull]
    e = np.roll(v, -1, axis=0) - v
    rel = pts[:, None, :] - v[None, :, :]
    cross = e[None, :, 0] * rel[:, :, 1] - e[None, :, 1] * rel[:, :, 0]
    interior = (cross > 0).all(axis=1)
    return np.flatnonzero(~interior)


def largest_triangle(points) -> tuple[int, int, int]:
    """Indices ``i < j < k`` of the max-area triangle; ties go to the smallest index triple.

    Only hull-boundary points can carry a maximal triangle, so large inputs
    are restricted to those before enumerating.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n < 3:
        raise ValueError(f"need at least 3 points, got {n}")
    cand = np.arange(n) if n <= EXHAUSTIVE_MAX else _boundary_indices(pts)
    triples = np.array(list(itertools.combinations(cand, 3)), dtype=int).reshape(-1, 3)
    areas = _twice_areas(pts, triples)
    best = int(np.argmax(areas))
    if areas[best] == 0:
        raise DegenerateError("all points are collinear")
    return tuple(int(i) for i in triples[best])


def plane_from_points(p1, p2, p3, provenance: Provenance = Provenance.TRIANGLE) -> RoofPlane:
    (x1, y1, z1), (x2, y2, z2), (x3, y3, z3) = (tuple(map(float, p)) for p in (p1, p2, p3))
    u1, v1, w1 = x2 - x1, y2 - y1, z2 - z1
    u2, v2, w2 = x3 - x1, y3 - y1, z3 - z1
    det = u1 * v2 - v1 * u2
    scale = max(u1 * u1 + v1 * v1, u2 * u2 + v2 * v2, 1e-300)
    if abs(det) <= 1e-12 * scale:
        raise DegenerateError("plane support points are collinear in x/y")
    a = (w1 * v2 - v1 * w2) / det
    b = (u1 * w2 - w1 * u2) / det
    c = z1 - a * x1 - b * y1
    return RoofPlane(a, b, c, provenance, 3)


def _extreme_pair(pts: np.ndarray) -> tuple[int, int]:
    best, pair = -1.0, (0, 1)
    for i, j in itertools.combinations(range(len(pts)), 2):
        d = float(np.sum((pts[i] - pts[j]) ** 2))
        if d > best:
            best, pair = d, (i, j)
    return pair


def plane_from_corners(corners, default_height: float = DEFAULT_HEIGHT, scale: float = 1.0) -> RoofPlane:
    """Plane for one section from ``(row, col, z)`` corner samples.

    N >= 3: largest triangle, heights filed, exact interpolation.
    N = 2 / 1 / 0: horizontal at the mean / the height / ``default_height``.
    """
    corners = sorted((int(r), int(c), float(z)) for r, c, z in corners)
    n = len(corners)
    if n == 0:
        return RoofPlane.horizontal(default_height, Provenance.NO_CORNER)
    if n == 1:
        return RoofPlane.horizontal(corners[0][2], Provenance.ONE_CORNER, 1)
    if n == 2:
        return RoofPlane.horizontal((corners[0][2] + corners[1][2]) / 2, Provenance.TWO_CORNER, 2)
    rc = np.array([(r, c) for r, c, _ in corners], dtype=float)
    try:
        tri = largest_triangle(rc)
        chosen = sorted((corners[i] for i in tri), key=lambda p: p[2])
        filed = file_heights(*(p[2] for p in chosen))
        xs, ys = pixel_xy([p[0] for p in chosen], [p[1] for p in chosen], scale)
        plane = plane_from_points(*zip(xs, ys, filed))
    except DegenerateError:
        i, j = _extreme_pair(rc)
        return RoofPlane.horizontal((corners[i][2] + corners[j][2]) / 2, Provenance.DEGENERATE, n)
    delta = max(abs(f - p[2]) for f, p in zip(filed, chosen))
    return RoofPlane(plane.a, plane.b, plane.c, Provenance.TRIANGLE, n, delta)


def reconstruct_section(sec, assigned, default_height: float = DEFAULT_HEIGHT, scale: float = 1.0) -> RoofPlane:
    """``assigned``: the :class:`CornerAssignment` list filed onto ``sec``."""
    for a in assigned:
        if a.section_id != sec.id:
            raise ValueError(f"corner filed to section {a.section_id}, not {sec.id}")
    return plane_from_corners(
        [(a.rep_pixel[0], a.rep_pixel[1], a.z) for a in assigned], default_height, scale
    )

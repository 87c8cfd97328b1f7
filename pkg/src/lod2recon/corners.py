"""Filing decoded corner squares onto roof sections and picking one rim pixel per square."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .codec import CornerSquare
from .errors import AssignmentError
from .sections import RoofSection, section_label_image


@dataclass(frozen=True)
class CornerAssignment:
    square: CornerSquare
    section_id: int
    rep_pixel: tuple[int, int]

    @property
    def z(self) -> int:
        return self.square.z


@dataclass
class AssignmentResult:
    assigned: list[CornerAssignment] = field(default_factory=list)
    unassigned: list[CornerSquare] = field(default_factory=list)

    def by_section(self) -> dict[int, list[CornerAssignment]]:
        out: dict[int, list[CornerAssignment]] = {}
        for a in self.assigned:
            out.setdefault(a.section_id, []).append(a)
        return out


def _in_footprint(coords: np.ndarray, square: CornerSquare) -> np.ndarray:
    h = square.q // 2
    r, c = square.center
    return (np.abs(coords[:, 0] - r) <= h) & (np.abs(coords[:, 1] - c) <= h)


def _nearest(coords: np.ndarray, center) -> tuple[int, int]:
    d2 = (coords[:, 0] - center[0]) ** 2 + (coords[:, 1] - center[1]) ** 2
    i = int(np.argmin(d2))  # coords are row-major sorted, so ties go to the first
    return int(coords[i, 0]), int(coords[i, 1])


def select_rim_pixel(square: CornerSquare, section: RoofSection) -> tuple[int, int]:
    """Rim pixel inside the square nearest its centre; falls back to any section pixel."""
    rim = section.rim[_in_footprint(section.rim, square)]
    if len(rim):
        return _nearest(rim, square.center)
    inside = section.pixels[_in_footprint(section.pixels, square)]
    if len(inside):
        return _nearest(inside, square.center)
    raise AssignmentError(f"square at {square.center} does not touch section {section.id}")


def assign_squares(
    squares: list[CornerSquare],
    sections: list[RoofSection],
    labels: Optional[np.ndarray] = None,
) -> AssignmentResult:
    """Give each square to the section it overlaps most (ties: smaller id).

    ``labels`` is the section label image (id + 1, 0 = background); it is
    rebuilt from ``sections`` when omitted.
    """
    if labels is None:
        extent = [(0, 0)]
        extent += [(int(s.pixels[:, 0].max()) + 1, int(s.pixels[:, 1].max()) + 1) for s in sections]
        shape = (max(e[0] for e in extent), max(e[1] for e in extent))
        labels = section_label_image(sections, shape)
    by_id = {s.id: s for s in sections}
    result = AssignmentResult()
    for sq in sorted(squares, key=lambda s: (s.center, s.z)):
        r0, r1, c0, c1 = sq.footprint(*labels.shape)
        window = labels[r0:r1, c0:c1] if r0 < r1 and c0 < c1 else labels[:0, :0]
        counts = np.bincount(window.ravel(), minlength=1)
        counts[0] = 0
        if counts.max() == 0:
            result.unassigned.append(sq)
            continue
        sid = int(np.argmax(counts)) - 1
        result.assigned.append(CornerAssignment(sq, sid, select_rim_pixel(sq, by_id[sid])))
    result.assigned.sort(key=lambda a: (a.section_id, a.rep_pixel, a.z, a.square.center))
    return result

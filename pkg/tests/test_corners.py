import numpy as np
import pytest
from hypothesis import given, strategies as st

from lod2recon.codec import CornerSquare, DatasetSplit
from lod2recon.corners import assign_squares, select_rim_pixel
from lod2recon.errors import AssignmentError
from lod2recon.sections import RoofSection, rim_of_mask, sections_from_labels


def sections_of(labels):
    return sections_from_labels(labels, np.zeros(labels.shape, dtype=np.int8))


def test_majority_overlap_wins():
    labels = np.zeros((40, 40), dtype=np.int32)
    labels[0:40, 0:17] = 1
    labels[0:40, 21:40] = 2
    sq = CornerSquare((20, 17), 4)  # footprint rows 13..27, cols 10..24
    secs = sections_of(labels)
    win = labels[13:28, 10:25]
    assert (win == 1).sum() == 105 and (win == 2).sum() == 60
    res = assign_squares([sq], secs, labels)
    assert [a.section_id for a in res.assigned] == [0]


def test_counts_30_vs_5():
    labels = np.zeros((30, 30), dtype=np.int32)
    labels[5:7, 0:15] = 1  # 2 rows x 15 = 30 px inside the footprint
    labels[19, 10:15] = 2  # 5 px
    sq = CornerSquare((12, 7), 2)
    res = assign_squares([sq], sections_of(labels), labels)
    assert [a.section_id for a in res.assigned] == [0]


def test_tie_goes_to_smaller_id():
    labels = np.zeros((30, 30), dtype=np.int32)
    labels[0, 0] = 1
    labels[0, 2] = 2
    labels[0, 4] = 3
    labels[8, 0:10] = 3  # section 2: 10 px
    labels[12, 0:10] = 8  # section 7: 10 px
    sq = CornerSquare((10, 5), 6)
    secs = sections_of(labels)
    res = assign_squares([sq], secs, labels)
    assert [a.section_id for a in res.assigned] == [2]


def test_far_square_unassigned():
    labels = np.zeros((50, 50), dtype=np.int32)
    labels[0:5, 0:5] = 1
    res = assign_squares([CornerSquare((40, 40), 3)], sections_of(labels), labels)
    assert res.assigned == [] and len(res.unassigned) == 1


def test_rim_pixel_selection():
    labels = np.zeros((40, 40), dtype=np.int32)
    labels[10:30, 10:30] = 1
    (sec,) = sections_of(labels)
    assert select_rim_pixel(CornerSquare((10, 10), 3), sec) == (10, 10)
    # straddling the top edge: nearest rim pixel is straight down
    assert select_rim_pixel(CornerSquare((7, 20), 3), sec) == (10, 20)
    # deep inside, no rim in reach: falls back to the centre pixel itself
    assert select_rim_pixel(CornerSquare((20, 20), 3, q=5), sec) == (20, 20)
    with pytest.raises(AssignmentError):
        select_rim_pixel(CornerSquare((0, 0), 3, q=3), sec)


def test_rim_ties_break_row_major():
    labels = np.zeros((20, 20), dtype=np.int32)
    labels[5:15, 5:15] = 1
    (sec,) = sections_of(labels)
    # equidistant rim pixels: the first in row-major order wins
    assert select_rim_pixel(CornerSquare((4, 4), 1), sec) == (5, 5)
    sec2 = RoofSection(0, np.array([[5, 5], [5, 7]]), DatasetSplit.TRAINING, np.array([[5, 5], [5, 7]]))
    assert select_rim_pixel(CornerSquare((5, 6), 1), sec2) == (5, 5)


@given(st.integers(0, 2**32 - 1))
def test_assignment_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    labels = np.zeros((40, 40), dtype=np.int32)
    for k in range(1, 5):
        r, c = rng.integers(0, 35, 2)
        labels[r:r + rng.integers(2, 12), c:c + rng.integers(2, 12)] = k
    secs = sections_of(labels)
    relabel = np.zeros(labels.shape, dtype=np.int32)
    for s in secs:
        relabel[s.pixels[:, 0], s.pixels[:, 1]] = s.id + 1
    squares = [CornerSquare(tuple(int(v) for v in rng.integers(-3, 43, 2)), int(rng.integers(1, 20)), 7)
               for _ in range(6)]
    res = assign_squares(squares, secs)
    got = {(a.square.center, a.z): a.section_id for a in res.assigned}
    for sq in squares:
        counts = {}
        for r in range(sq.center[0] - 3, sq.center[0] + 4):
            for c in range(sq.center[1] - 3, sq.center[1] + 4):
                if 0 <= r < 40 and 0 <= c < 40 and relabel[r, c]:
                    counts[relabel[r, c] - 1] = counts.get(relabel[r, c] - 1, 0) + 1
        if not counts:
            assert (sq.center, sq.z) not in got
            continue
        best = min(counts, key=lambda k: (-counts[k], k))
        assert got[(sq.center, sq.z)] == best
    for a in res.assigned:
        rim = rim_of_mask(relabel == a.section_id + 1)
        r, c = a.rep_pixel
        assert relabel[r, c] == a.section_id + 1
        # a rim pixel is chosen whenever the footprint touches the rim
        sec = {s.id: s for s in secs}[a.section_id]
        if any(abs(p[0] - a.square.center[0]) <= 3 and abs(p[1] - a.square.center[1]) <= 3 for p in sec.rim):
            assert rim[r, c]

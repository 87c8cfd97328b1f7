"""Independent slow reference implementations used to check the package.

Nothing here imports from ``lod2recon``; each oracle is a direct, loop-based
restatement of the rule it checks.
"""

from __future__ import annotations

import itertools
import math


def tile_origins_oracle(dim, s, p):
    out, o = [], 0
    while o + s <= dim:
        out.append(o)
        o += s - p
    if out[-1] + s != dim:
        out.append(dim - s)
    return out


def label_union_find(mask):
    """4-connected labelling numbered in row-major order of each component's first pixel."""
    h, w = len(mask), len(mask[0]) if len(mask) else 0
    parent = {}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for r in range(h):
        for c in range(w):
            if mask[r][c]:
                parent[(r, c)] = (r, c)
                for nr, nc in ((r - 1, c), (r, c - 1)):
                    if nr >= 0 and nc >= 0 and mask[nr][nc]:
                        ra, rb = find((r, c)), find((nr, nc))
                        if ra != rb:
                            parent[max(ra, rb)] = min(ra, rb)
    labels = [[0] * w for _ in range(h)]
    ids = {}
    for r in range(h):
        for c in range(w):
            if mask[r][c]:
                root = find((r, c))
                if root not in ids:
                    ids[root] = len(ids) + 1
                labels[r][c] = ids[root]
    return labels, len(ids)


def rim_oracle(pixels):
    pix = set(map(tuple, pixels))
    return sorted(p for p in pix if any((p[0] + dr, p[1] + dc) not in pix
                                        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1))))


def largest_triangle_oracle(points):
    """Triple loop over i < j < k; strict improvement keeps the first triple on ties."""
    best, arg = -1.0, None
    n = len(points)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                (x1, y1), (x2, y2), (x3, y3) = points[i], points[j], points[k]
                a2 = abs((x2 - x1) * (y3 - y1) - (y2 - y1) * (x3 - x1))
                if a2 > best:
                    best, arg = a2, (i, j, k)
    return arg, best / 2


def file_heights_oracle(z1, z2, z3):
    if len({z1, z2, z3}) < 3:
        return z1, z2, z3
    if 2 * z2 < z1 + z3:
        return (z1 + z2) / 2, (z1 + z2) / 2, z3
    return z1, (z2 + z3) / 2, (z2 + z3) / 2


def plane_solve_oracle(p1, p2, p3):
    """Solve the 3x3 system by Gaussian elimination with partial pivoting."""
    rows = [[p[0], p[1], 1.0, p[2]] for p in (p1, p2, p3)]
    for col in range(3):
        piv = max(range(col, 3), key=lambda r: abs(rows[r][col]))
        rows[col], rows[piv] = rows[piv], rows[col]
        for r in range(3):
            if r != col:
                f = rows[r][col] / rows[col][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    return tuple(rows[i][3] / rows[i][i] for i in range(3))


def metrics_oracle(pairs):
    """Loop over (z_hat, z) pairs with exactly rounded sums.

    Returns (pct, accuracy, mean diff, mse, skipped).
    """
    m = len(pairs)
    pct_terms, abs_terms, sq_terms = [], [], []
    for zh, z in pairs:
        d = zh - z
        abs_terms.append(abs(d))
        sq_terms.append(d * d)
        if z > 0:
            pct_terms.append(100.0 * abs(d) / z)
    pct = math.fsum(pct_terms) / len(pct_terms) if pct_terms else float("nan")
    return pct, 100.0 - pct, math.fsum(abs_terms) / m, math.fsum(sq_terms) / m, m - len(pct_terms)


def iou_oracle(pred, truth):
    inter = union = 0
    for row_p, row_t in zip(pred, truth):
        for a, b in zip(row_p, row_t):
            inter += bool(a and b)
            union += bool(a or b)
    return 1.0 if union == 0 else inter / union


def bilinear_oracle(values, x0, y0, cell, x, y):
    """Bilinear sample between cell centres of a north-up grid."""
    h, w = len(values), len(values[0])
    fc = min(max((x - x0) / cell - 0.5, 0.0), w - 1)
    fr = min(max((y0 - y) / cell - 0.5, 0.0), h - 1)
    c0, r0 = min(int(math.floor(fc)), max(w - 2, 0)), min(int(math.floor(fr)), max(h - 2, 0))
    c1, r1 = min(c0 + 1, w - 1), min(r0 + 1, h - 1)
    tc, tr = fc - c0, fr - r0
    top = values[r0][c0] * (1 - tc) + values[r0][c1] * tc
    bot = values[r1][c0] * (1 - tc) + values[r1][c1] * tc
    return top * (1 - tr) + bot * tr


def lsq_plane_oracle(xs, ys, hs):
    """Normal equations of the raw (uncentred) design matrix, solved by elimination."""
    sx = sum(xs); sy = sum(ys); n = len(xs)
    sxx = sum(x * x for x in xs); syy = sum(y * y for y in ys); sxy = sum(x * y for x, y in zip(xs, ys))
    sxh = sum(x * h for x, h in zip(xs, hs)); syh = sum(y * h for y, h in zip(ys, hs)); sh = sum(hs)
    rows = [[sxx, sxy, sx, sxh], [sxy, syy, sy, syh], [sx, sy, n, sh]]
    for col in range(3):
        piv = max(range(col, 3), key=lambda r: abs(rows[r][col]))
        rows[col], rows[piv] = rows[piv], rows[col]
        for r in range(3):
            if r != col:
                f = rows[r][col] / rows[col][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    return tuple(rows[i][3] / rows[i][i] for i in range(3))


def corner_plane_oracle(corners, scale):
    """Largest triangle, filing and exact interpolation for one section's (row, col, z) corners."""
    corners = sorted(corners)
    (i, j, k), area = largest_triangle_oracle([(r, c) for r, c, _ in corners])
    chosen = sorted((corners[t] for t in (i, j, k)), key=lambda p: p[2])
    filed = file_heights_oracle(*(p[2] for p in chosen))
    pts = [(p[1] * scale, p[0] * scale, f) for p, f in zip(chosen, filed)]
    delta = max(abs(f - p[2]) for f, p in zip(filed, chosen))
    return plane_solve_oracle(*pts), delta


def all_triples(n):
    return list(itertools.combinations(range(n), 3))

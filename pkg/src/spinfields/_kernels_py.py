"""Pure numpy/scipy versions of the grid kernels (fallback for the compiled module)."""
from __future__ import annotations

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components


def label_components(n_vertices, edges, active):
    """Connected components of the active vertices under the active edges.

    Returns (labels, count); labels are -1 on inactive vertices and
    0..count-1 (in order of first appearance) elsewhere.
    """
    active = np.asarray(active, bool)
    edges = np.asarray(edges, np.int64).reshape(-1, 2)
    keep = active[edges[:, 0]] & active[edges[:, 1]]
    e = edges[keep]
    g = coo_matrix((np.ones(len(e), np.int8), (e[:, 0], e[:, 1])), shape=(n_vertices, n_vertices))
    _, lab = connected_components(g, directed=False)
    labels = np.full(n_vertices, -1, np.int64)
    act = np.flatnonzero(active)
    if act.size == 0:
        return labels, 0
    _, first, inv = np.unique(lab[act], return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    labels[act] = order[inv]
    return labels, int(first.size)


def _cells(arr, wrap):
    a00 = arr[:-1]
    a10 = arr[1:]
    if wrap:
        a01 = np.roll(a00, -1, axis=1)
        a11 = np.roll(a10, -1, axis=1)
    else:
        a00, a10 = a00[:, :-1], a10[:, :-1]
        a01, a11 = arr[:-1, 1:], arr[1:, 1:]
    return a00, a10, a01, a11


def _changes_sign(c):
    lo = np.minimum(np.minimum(c[0], c[1]), np.minimum(c[2], c[3]))
    hi = np.maximum(np.maximum(c[0], c[1]), np.maximum(c[2], c[3]))
    return (lo <= 0) & (hi >= 0)


def bilinear_roots(p, q, wrap=False, cell_mask=None):
    """Common zeros of the bilinear interpolants of p and q, cell by cell.

    Cell (i, j) spans nodes i..i+1 (local x) and j..j+1 (local y); with
    ``wrap`` the last column pairs with the first. Roots are kept on the
    half-open square [0,1)^2 so shared edges count once.
    Returns (i, j, x, y, det) with det the Jacobian determinant of (P, Q)
    with respect to (x, y) at the root.
    """
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    P = _cells(p, wrap)
    Q = _cells(q, wrap)
    cand = _changes_sign(P) & _changes_sign(Q)
    if cell_mask is not None:
        cand &= cell_mask
    ci, cj = np.nonzero(cand)
    p00, p10, p01, p11 = (c[ci, cj] for c in P)
    q00, q10, q01, q11 = (c[ci, cj] for c in Q)
    a, b, c, d = p00, p10 - p00, p01 - p00, p00 - p10 - p01 + p11
    A, B, C, D = q00, q10 - q00, q01 - q00, q00 - q10 - q01 + q11
    a2 = C * d - D * c
    a1 = A * d + C * b - B * c - D * a
    a0 = A * b - B * a
    scale = np.maximum(np.maximum(np.abs(a2), np.abs(a1)), np.abs(a0))
    lin = np.abs(a2) <= 1e-12 * scale
    disc = a1 * a1 - 4 * a2 * a0
    sq = np.sqrt(np.where(disc >= 0, disc, 0.0))
    qq = -0.5 * (a1 + np.where(a1 >= 0, sq, -sq))
    with np.errstate(divide="ignore", invalid="ignore"):
        y1 = np.where(lin, -a0 / a1, qq / a2)
        y2 = np.where(lin, np.nan, a0 / qq)
    y1 = np.where(disc >= 0, y1, np.nan)
    y2 = np.where(disc >= 0, y2, np.nan)
    # a double root would be found twice
    y2 = np.where(y2 == y1, np.nan, y2)
    out = []
    for y in (y1, y2):
        with np.errstate(divide="ignore", invalid="ignore"):
            den1 = b + d * y
            den2 = B + D * y
            x = np.where(np.abs(den1) >= np.abs(den2), -(a + c * y) / den1, -(A + C * y) / den2)
            ok = (y >= 0) & (y < 1) & (x >= 0) & (x < 1)
        det = (b + d * y) * (C + D * x) - (c + d * x) * (B + D * y)
        out.append((ci[ok], cj[ok], x[ok], y[ok], det[ok]))
    cat = [np.concatenate([o[k] for o in out]) for k in range(5)]
    order = np.lexsort((cat[3], cat[2], cat[1], cat[0]))
    return tuple(c[order] for c in cat)


# marching squares: corners c0=(0,0) c1=(1,0) c2=(1,1) c3=(0,1); edges
# e0: c0-c1, e1: c1-c2, e2: c2-c3, e3: c3-c0
def _edge_point(ga, gb, pa, pb):
    with np.errstate(divide="ignore", invalid="ignore"):
        t = ga / (ga - gb)
    return pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])


def contour_length(g, h0, h1, row0=0.0, spherical=False, wrap=False, cell_mask=None):
    """Length of the zero level of g by marching squares.

    Axis 0 has spacing h0 and starts at ``row0``; axis 1 has spacing h1.
    With ``spherical`` the axis-1 length is scaled by sin of the axis-0
    coordinate (latitude-longitude metric). Saddle cells are split by the
    sign of the corner average.
    """
    g = np.asarray(g, float)
    a00, a10, a01, a11 = _cells(g, wrap)
    G = (a00, a10, a11, a01)  # cyclic corner order
    pos = [gi >= 0 for gi in G]
    n_in = pos[0].astype(int) + pos[1] + pos[2] + pos[3]
    cand = (n_in > 0) & (n_in < 4)
    if cell_mask is not None:
        cand &= cell_mask
    ci, cj = np.nonzero(cand)
    gv = [gi[ci, cj] for gi in G]
    sv = [pi[ci, cj] for pi in pos]
    corners = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    pts = []
    cross = []
    for k in range(4):
        k2 = (k + 1) % 4
        pts.append(_edge_point(gv[k], gv[k2], corners[k], corners[k2]))
        cross.append(sv[k] != sv[k2])
    total = 0.0

    def seglen(mask, ea, eb):
        if not mask.any():
            return 0.0
        xa, ya = pts[ea][0][mask], pts[ea][1][mask]
        xb, yb = pts[eb][0][mask], pts[eb][1][mask]
        dx = (xb - xa) * h0
        dy = (yb - ya) * h1
        if spherical:
            dy = dy * np.sin(row0 + (ci[mask] + 0.5 * (xa + xb)) * h0)
        return float(np.sum(np.hypot(dx, dy)))

    saddle = cross[0] & cross[1] & cross[2] & cross[3]
    two = ~saddle
    # non-saddle cells: exactly two crossed edges
    for ea in range(4):
        for eb in range(ea + 1, 4):
            m = two & cross[ea] & cross[eb]
            total += seglen(m, ea, eb)
    if saddle.any():
        avg_pos = (gv[0] + gv[1] + gv[2] + gv[3]) >= 0
        join02 = saddle & (avg_pos == sv[0])  # c0 and c2 connected through the centre
        total += seglen(join02, 0, 1) + seglen(join02, 2, 3)
        other = saddle & ~join02
        total += seglen(other, 3, 0) + seglen(other, 1, 2)
    return total

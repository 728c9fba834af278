# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled grid kernels: union-find labelling, bilinear root solve, marching squares."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, sin, hypot, NAN, isnan

cnp.import_array()


cdef inline Py_ssize_t _find(Py_ssize_t[::1] parent, Py_ssize_t x) noexcept nogil:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def label_components(Py_ssize_t n_vertices, edges, active):
    """Connected components of the active vertices under the active edges."""
    cdef cnp.int64_t[:, ::1] e = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
    cdef cnp.uint8_t[::1] act = np.ascontiguousarray(active, dtype=np.uint8)
    parent_arr = np.arange(n_vertices, dtype=np.intp)
    size_arr = np.ones(n_vertices, dtype=np.intp)
    cdef Py_ssize_t[::1] parent = parent_arr
    cdef Py_ssize_t[::1] size = size_arr
    labels_arr = np.full(n_vertices, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] labels = labels_arr
    cdef Py_ssize_t k, u, v, ru, rv, count = 0
    with nogil:
        for k in range(e.shape[0]):
            u = e[k, 0]
            v = e[k, 1]
            if not (act[u] and act[v]):
                continue
            ru = _find(parent, u)
            rv = _find(parent, v)
            if ru == rv:
                continue
            if size[ru] < size[rv]:
                ru, rv = rv, ru
            parent[rv] = ru
            size[ru] += size[rv]
        for k in range(n_vertices):
            if not act[k]:
                continue
            ru = _find(parent, k)
            if labels[ru] < 0:
                labels[ru] = count
                count += 1
            labels[k] = labels[ru]
    return labels_arr, int(count)


cdef inline int _sign_change(double a, double b, double c, double d) noexcept nogil:
    cdef double lo = a, hi = a
    if b < lo: lo = b
    if c < lo: lo = c
    if d < lo: lo = d
    if b > hi: hi = b
    if c > hi: hi = c
    if d > hi: hi = d
    return lo <= 0 and hi >= 0


cdef int _solve_cell(double p00, double p10, double p01, double p11,
                     double q00, double q10, double q01, double q11,
                     double* xs, double* ys, double* dets) noexcept nogil:
    cdef double a = p00, b = p10 - p00, c = p01 - p00, d = p00 - p10 - p01 + p11
    cdef double A = q00, B = q10 - q00, C = q01 - q00, D = q00 - q10 - q01 + q11
    cdef double a2 = C * d - D * c
    cdef double a1 = A * d + C * b - B * c - D * a
    cdef double a0 = A * b - B * a
    cdef double scale = fabs(a2), disc, sq, qq, y, x, den1, den2
    cdef double roots[2]
    cdef int nr = 0, k, n = 0
    if fabs(a1) > scale: scale = fabs(a1)
    if fabs(a0) > scale: scale = fabs(a0)
    if fabs(a2) <= 1e-12 * scale:
        if a1 != 0:
            roots[0] = -a0 / a1
            nr = 1
    else:
        disc = a1 * a1 - 4 * a2 * a0
        if disc >= 0:
            sq = sqrt(disc)
            qq = -0.5 * (a1 + (sq if a1 >= 0 else -sq))
            roots[0] = qq / a2
            nr = 1
            if qq != 0:
                roots[1] = a0 / qq
                if roots[1] != roots[0]:
                    nr = 2
    for k in range(nr):
        y = roots[k]
        if not (y >= 0 and y < 1):
            continue
        den1 = b + d * y
        den2 = B + D * y
        if fabs(den1) >= fabs(den2):
            x = -(a + c * y) / den1
        else:
            x = -(A + C * y) / den2
        if not (x >= 0 and x < 1):
            continue
        xs[n] = x
        ys[n] = y
        dets[n] = (b + d * y) * (C + D * x) - (c + d * x) * (B + D * y)
        n += 1
    return n


def bilinear_roots(p, q, wrap=False, cell_mask=None):
    """Common zeros of the bilinear interpolants of p and q; see the numpy version."""
    cdef double[:, ::1] P = np.ascontiguousarray(p, dtype=np.float64)
    cdef double[:, ::1] Q = np.ascontiguousarray(q, dtype=np.float64)
    cdef Py_ssize_t n0 = P.shape[0], n1 = P.shape[1]
    cdef Py_ssize_t nc1 = n1 if wrap else n1 - 1
    cdef bint has_mask = cell_mask is not None
    cdef cnp.uint8_t[:, ::1] M
    if has_mask:
        M = np.ascontiguousarray(cell_mask, dtype=np.uint8)
    else:
        M = np.ones((1, 1), dtype=np.uint8)
    ci_l, cj_l, x_l, y_l, d_l = [], [], [], [], []
    cdef Py_ssize_t i, j, j1, cap = 1024, n = 0, k
    cdef int nr
    cdef double xs[2]
    cdef double ys[2]
    cdef double ds[2]
    out_i = np.empty(cap, np.int64)
    out_j = np.empty(cap, np.int64)
    out_x = np.empty(cap)
    out_y = np.empty(cap)
    out_d = np.empty(cap)
    cdef cnp.int64_t[::1] oi = out_i
    cdef cnp.int64_t[::1] oj = out_j
    cdef double[::1] ox = out_x
    cdef double[::1] oy = out_y
    cdef double[::1] od = out_d
    for i in range(n0 - 1):
        for j in range(nc1):
            j1 = j + 1
            if j1 == n1:
                j1 = 0
            if has_mask and not M[i, j]:
                continue
            if not _sign_change(P[i, j], P[i + 1, j], P[i, j1], P[i + 1, j1]):
                continue
            if not _sign_change(Q[i, j], Q[i + 1, j], Q[i, j1], Q[i + 1, j1]):
                continue
            nr = _solve_cell(P[i, j], P[i + 1, j], P[i, j1], P[i + 1, j1],
                             Q[i, j], Q[i + 1, j], Q[i, j1], Q[i + 1, j1], xs, ys, ds)
            if nr == 0:
                continue
            if n + nr > cap:
                cap *= 2
                out_i = np.resize(out_i, cap); oi = out_i
                out_j = np.resize(out_j, cap); oj = out_j
                out_x = np.resize(out_x, cap); ox = out_x
                out_y = np.resize(out_y, cap); oy = out_y
                out_d = np.resize(out_d, cap); od = out_d
            if nr == 2 and (xs[1] < xs[0] or (xs[1] == xs[0] and ys[1] < ys[0])):
                xs[0], xs[1] = xs[1], xs[0]
                ys[0], ys[1] = ys[1], ys[0]
                ds[0], ds[1] = ds[1], ds[0]
            for k in range(nr):
                oi[n] = i
                oj[n] = j
                ox[n] = xs[k]
                oy[n] = ys[k]
                od[n] = ds[k]
                n += 1
    return out_i[:n].copy(), out_j[:n].copy(), out_x[:n].copy(), out_y[:n].copy(), out_d[:n].copy()


cdef inline double _seg(double xa, double ya, double xb, double yb, Py_ssize_t i,
                        double h0, double h1, double row0, bint spherical) noexcept nogil:
    cdef double dx = (xb - xa) * h0
    cdef double dy = (yb - ya) * h1
    if spherical:
        dy *= sin(row0 + (i + 0.5 * (xa + xb)) * h0)
    return hypot(dx, dy)


def contour_length(g, double h0, double h1, double row0=0.0, bint spherical=False,
                   bint wrap=False, cell_mask=None):
    """Marching-squares length of the zero level of g; see the numpy version."""
    cdef double[:, ::1] G = np.ascontiguousarray(g, dtype=np.float64)
    cdef Py_ssize_t n0 = G.shape[0], n1 = G.shape[1]
    cdef Py_ssize_t nc1 = n1 if wrap else n1 - 1
    cdef bint has_mask = cell_mask is not None
    cdef cnp.uint8_t[:, ::1] M
    if has_mask:
        M = np.ascontiguousarray(cell_mask, dtype=np.uint8)
    else:
        M = np.ones((1, 1), dtype=np.uint8)
    cdef Py_ssize_t i, j, j1, k, k2
    cdef double gv[4]
    cdef double px[4]
    cdef double py[4]
    cdef int sv[4]
    cdef int cross[4]
    cdef double cx[4]
    cdef double cy[4]
    cdef double t, total = 0.0
    cdef int npos, first, second
    cx[0] = 0; cy[0] = 0; cx[1] = 1; cy[1] = 0; cx[2] = 1; cy[2] = 1; cx[3] = 0; cy[3] = 1
    with nogil:
        for i in range(n0 - 1):
            for j in range(nc1):
                j1 = j + 1
                if j1 == n1:
                    j1 = 0
                if has_mask and not M[i, j]:
                    continue
                gv[0] = G[i, j]; gv[1] = G[i + 1, j]; gv[2] = G[i + 1, j1]; gv[3] = G[i, j1]
                npos = 0
                for k in range(4):
                    sv[k] = gv[k] >= 0
                    npos += sv[k]
                if npos == 0 or npos == 4:
                    continue
                for k in range(4):
                    k2 = (k + 1) % 4
                    cross[k] = sv[k] != sv[k2]
                    if cross[k]:
                        t = gv[k] / (gv[k] - gv[k2])
                        px[k] = cx[k] + t * (cx[k2] - cx[k])
                        py[k] = cy[k] + t * (cy[k2] - cy[k])
                if cross[0] and cross[1] and cross[2] and cross[3]:
                    if ((gv[0] + gv[1] + gv[2] + gv[3]) >= 0) == sv[0]:
                        total += _seg(px[0], py[0], px[1], py[1], i, h0, h1, row0, spherical)
                        total += _seg(px[2], py[2], px[3], py[3], i, h0, h1, row0, spherical)
                    else:
                        total += _seg(px[3], py[3], px[0], py[0], i, h0, h1, row0, spherical)
                        total += _seg(px[1], py[1], px[2], py[2], i, h0, h1, row0, spherical)
                else:
                    first = -1
                    second = -1
                    for k in range(4):
                        if cross[k]:
                            if first < 0:
                                first = k
                            else:
                                second = k
                    total += _seg(px[first], py[first], px[second], py[second], i, h0, h1, row0, spherical)
    return total

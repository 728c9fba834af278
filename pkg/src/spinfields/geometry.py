"""Excursion sets, zeros and critical points of complex fields sampled on grids.

Topology is computed on the cell complex of the grid: a vertex per node
(plus the two poles on the sphere), edges between neighbouring nodes,
squares between four nodes and pole triangle fans. The excursion complex is
the full subcomplex spanned by the masked vertices.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .grids import DiskGrid, SphereGrid


@dataclass(frozen=True)
class ExcursionMask:
    grid: object
    nodes: np.ndarray
    poles: tuple | None = None
    level: np.ndarray | None = field(default=None, repr=False)  # |f| - u at nodes

    def vertices(self):
        """Boolean mask in the vertex order of ``grid.complex``."""
        flat = self.nodes.ravel()
        if isinstance(self.grid, SphereGrid):
            poles = self.poles if self.poles is not None else (bool(self.nodes[0].all()), bool(self.nodes[-1].all()))
            return np.concatenate([flat, np.asarray(poles, bool)])
        return flat & self.grid.complex.domain

    def is_full(self):
        return bool(np.all(self.vertices()[self.grid.complex.domain]))


@dataclass
class GeometrySummary:
    replicate_id: int
    u: float
    L0: int
    L1: float
    L2: float
    b0: int
    b1: int
    b2: int
    zeros: int
    crit_signed_sum: int
    flags: dict = field(default_factory=dict)

    CSV_HEADER = ("replicate_id", "u", "L0", "L1", "L2", "b0", "b1", "b2", "zeros", "crit_signed_sum", "flags")

    def csv_row(self):
        flags = ";".join(f"{k}={v}" for k, v in sorted(self.flags.items()))
        return [str(self.replicate_id), repr(float(self.u)), str(self.L0), repr(float(self.L1)),
                repr(float(self.L2)), str(self.b0), str(self.b1), str(self.b2), str(self.zeros),
                str(self.crit_signed_sum), flags]


# ------------------------------------------------------------------ masks

def _pole_abs(field):
    if field.poles is not None:
        return np.abs(np.asarray(field.poles))
    v = np.abs(field.values)
    return np.array([v[0].mean(), v[-1].mean()])


def excursion_mask(field, u):
    """Node-wise indicator of |f| >= u."""
    if u < 0:
        raise ValueError("level must be nonnegative")
    a = np.abs(field.values)
    poles = None
    if isinstance(field.grid, SphereGrid):
        pa = _pole_abs(field)
        poles = (bool(pa[0] >= u), bool(pa[1] >= u))
    return ExcursionMask(field.grid, a >= u, poles, a - u)


def indicator_mask(grid, level, poles=None):
    """Mask from a signed level function (>= 0 inside), e.g. an analytic cap."""
    level = np.asarray(level, float)
    return ExcursionMask(grid, level >= 0, poles, level)


# --------------------------------------------------------------- topology

def euler_characteristic(mask):
    cx = mask.grid.complex
    v = mask.vertices()
    V = int(v.sum())
    E = int(np.count_nonzero(v[cx.edges[:, 0]] & v[cx.edges[:, 1]]))
    F = 0
    for faces in cx.faces:
        F += int(np.count_nonzero(np.all(v[faces], axis=1)))
    return V - E + F


def component_count(mask):
    cx = mask.grid.complex
    return kernels.label_components(cx.n_vertices, cx.edges, mask.vertices())[1]


def complement_component_count(mask):
    """Components of the grid minus the excursion complex (8-connectivity on squares)."""
    cx = mask.grid.complex
    comp = ~mask.vertices() & cx.domain
    edges = np.concatenate([cx.edges, cx.diagonals])
    return kernels.label_components(cx.n_vertices, edges, comp)[1]


def betti_numbers(mask):
    """(b0, b1, b2): b0 by labelling, b2 = 1 only for the full sphere, b1 from chi."""
    b0 = component_count(mask)
    b2 = int(isinstance(mask.grid, SphereGrid) and mask.is_full())
    b1 = b0 + b2 - euler_characteristic(mask)
    return b0, b1, b2


def lk_curvatures(mask):
    """(L0, L1, L2): Euler characteristic, half boundary length, area."""
    L0 = euler_characteristic(mask)
    L2 = float(np.sum(mask.grid.weights[mask.nodes]))
    return L0, 0.5 * boundary_length(mask), L2


def boundary_length(mask):
    """Raw length of the level curve, interpolating |f| - u (or the mask itself)."""
    g = mask.level if mask.level is not None else mask.nodes.astype(float) - 0.5
    grid = mask.grid
    if isinstance(grid, SphereGrid):
        return kernels.contour_length(g, grid.dtheta, grid.dphi, float(grid.theta[0]), True, True, None)
    return kernels.contour_length(g, grid.h, grid.h, 0.0, False, False, grid.cell_inside)


def alexander_check(field_or_mask, u=None):
    """b1(mask) == b0(complement) - 1 on the sphere (the full mask is a special case)."""
    mask = field_or_mask if isinstance(field_or_mask, ExcursionMask) else excursion_mask(field_or_mask, u)
    if not isinstance(mask.grid, SphereGrid):
        raise ValueError("Alexander duality check needs a sphere grid")
    b0, b1, b2 = betti_numbers(mask)
    if b2:
        return b1 == 0
    return b1 == complement_component_count(mask) - 1


# ------------------------------------------------------------------ zeros

def _winding(v):
    d = np.angle(np.roll(v, -1) / v)
    return int(np.rint(d.sum() / (2 * np.pi)))


def _nonzero(a):
    return np.where(a == 0.0, 1e-300, a)


@dataclass(frozen=True)
class ZeroSet:
    count: int
    flagged_cells: int
    cells: int
    positions: tuple = field(default=(), repr=False)


def zero_set(field):
    """Zeros of f from the bilinear interpolants of Re f and Im f, cell by cell.

    On the sphere the two polar caps inside the first/last latitude ring are
    covered by the winding number of the continuous frame f e^{+-i s phi}.
    """
    grid = field.grid
    f = field.values
    p, q = _nonzero(f.real), _nonzero(f.imag)
    if isinstance(grid, SphereGrid):
        ci, cj, x, y, _ = kernels.bilinear_roots(p, q, True, None)
        s = getattr(field, "spin", 0)
        e = np.exp(1j * s * grid.phi)
        caps = abs(_winding(f[0] * e)) + abs(_winding(f[-1] * np.conj(e)))
        cells = (grid.n_theta - 1) * grid.n_phi
    else:
        mask = grid.cell_inside if isinstance(grid, DiskGrid) else None
        ci, cj, x, y, _ = kernels.bilinear_roots(p, q, False, mask)
        caps = 0
        cells = int(mask.sum()) if mask is not None else (f.shape[0] - 1) * (f.shape[1] - 1)
    flat = ci * f.shape[1] + cj
    _, counts = np.unique(flat, return_counts=True)
    return ZeroSet(int(len(ci) + caps), int(np.count_nonzero(counts > 1)), cells, (ci, cj, x, y))


def zero_count(field):
    return zero_set(field).count


# ------------------------------------------------------- critical points

@dataclass(frozen=True)
class CriticalPoints:
    signed_sum: int
    n_max: int
    n_min: int
    n_saddle: int
    degenerate: int


def _bilinear_at(a, ci, cj, x, y, wrap):
    n1 = a.shape[1]
    cj1 = (cj + 1) % n1 if wrap else cj + 1
    return ((1 - x) * (1 - y) * a[ci, cj] + x * (1 - y) * a[ci + 1, cj]
            + (1 - x) * y * a[ci, cj1] + x * y * a[ci + 1, cj1])


def _taylor_at(ext, ci, cj, x, y, wrap):
    """Second-order Taylor value of a grid function at cell-local points.

    ``ext`` is the array padded by one row above and below; the expansion
    uses centred differences at the node nearest to each point.
    """
    n1 = ext.shape[1]
    di = np.rint(x).astype(np.int64)
    dj = np.rint(y).astype(np.int64)
    i = ci + di + 1
    j = cj + dj
    if wrap:
        j %= n1
        jm, jp = (j - 1) % n1, (j + 1) % n1
    else:
        jm, jp = np.maximum(j - 1, 0), np.minimum(j + 1, n1 - 1)
    dx, dy = x - di, y - dj
    c = ext[i, j]
    gx = 0.5 * (ext[i + 1, j] - ext[i - 1, j])
    gy = 0.5 * (ext[i, jp] - ext[i, jm])
    hxx = ext[i + 1, j] - 2 * c + ext[i - 1, j]
    hyy = ext[i, jp] - 2 * c + ext[i, jm]
    hxy = 0.25 * (ext[i + 1, jp] - ext[i + 1, jm] - ext[i - 1, jp] + ext[i - 1, jm])
    return c + gx * dx + gy * dy + 0.5 * (hxx * dx * dx + 2 * hxy * dx * dy + hyy * dy * dy)


def _classify(ci, cj, x, y, det, tr_h, keep, scale):
    det, tr_h = det[keep], tr_h[keep]
    degenerate = int(np.count_nonzero(np.abs(det) <= 1e-12 * scale))
    saddle = det < 0
    n_saddle = int(np.count_nonzero(saddle))
    n_max = int(np.count_nonzero(~saddle & (tr_h < 0)))
    n_min = int(np.count_nonzero(~saddle & (tr_h >= 0)))
    return n_max, n_min, n_saddle, degenerate


def critical_points_modulus(field, u=0.0):
    """Critical points of |f|^2 with |f| >= u; signed sum of (-1)^index.

    The gradient of |f|^2 comes from central differences; its zeros are the
    common zeros of the bilinear interpolants of the two components, and the
    index follows from the sign of the Jacobian (the discrete Hessian).
    """
    grid = field.grid
    h = np.abs(field.values) ** 2
    u2 = u * u
    if isinstance(grid, SphereGrid):
        half = grid.n_phi // 2
        ext = np.vstack([np.roll(h[0], half), h, np.roll(h[-1], half)])
        gt = (ext[2:] - ext[:-2]) / (2 * grid.dtheta)
        gp = (np.roll(h, -1, axis=1) - np.roll(h, 1, axis=1)) / (2 * grid.dphi)
        ci, cj, x, y, det = kernels.bilinear_roots(_nonzero(gt), _nonzero(gp), True, None)
        # bilinear values of h are too coarse to place near-level critical points
        hv = np.maximum(_taylor_at(ext, ci, cj, x, y, True), 0.0)
        # trace of the gradient Jacobian for max/min
        cj1 = (cj + 1) % grid.n_phi
        dgt = (1 - y) * (gt[ci + 1, cj] - gt[ci, cj]) + y * (gt[ci + 1, cj1] - gt[ci, cj1])
        dgp = (1 - x) * (gp[ci, cj1] - gp[ci, cj]) + x * (gp[ci + 1, cj1] - gp[ci + 1, cj])
        keep = hv >= u2
        scale = float(np.abs(gt).max() * np.abs(gp).max()) or 1.0
        n_max, n_min, n_saddle, degenerate = _classify(ci, cj, x, y, det, dgt + dgp, keep, scale)
        total = int(np.sum(np.sign(det[keep])))
        # polar caps: index sum from the winding of the gradient in a Cartesian frame
        hp = _pole_abs(field) ** 2
        c, s = np.cos(grid.phi), np.sin(grid.phi)
        st = np.sin(grid.theta[0])
        for ring, sgn, hpole in ((0, 1.0, hp[0]), (-1, -1.0, hp[1])):
            gr, gph = sgn * gt[ring], gp[ring] / st
            ind = _winding((c * gr - s * gph) + 1j * (s * gr + c * gph))
            if hpole >= u2 and ind:
                total += ind
                if ind > 0:
                    # a cap extremum: maximum if the pole exceeds its ring
                    if hpole >= h[ring].mean():
                        n_max += 1
                    else:
                        n_min += 1
                else:
                    n_saddle += -ind
        return CriticalPoints(total, n_max, n_min, n_saddle, degenerate)

    hx = np.gradient(h, grid.h if isinstance(grid, DiskGrid) else 1.0)
    gx, gy = hx[0], hx[1]
    mask = None
    if isinstance(grid, DiskGrid):
        ins = grid.inside.copy()
        # gradients at the rim use nodes outside the disk
        core = ins[1:-1, 1:-1] & ins[:-2, 1:-1] & ins[2:, 1:-1] & ins[1:-1, :-2] & ins[1:-1, 2:]
        ins[:] = False
        ins[1:-1, 1:-1] = core
        mask = ins[:-1, :-1] & ins[1:, :-1] & ins[1:, 1:] & ins[:-1, 1:]
    ci, cj, x, y, det = kernels.bilinear_roots(_nonzero(gx), _nonzero(gy), False, mask)
    hv = np.maximum(_taylor_at(np.pad(h, ((1, 1), (0, 0)), mode="edge"), ci, cj, x, y, False), 0.0)
    dgx = (1 - y) * (gx[ci + 1, cj] - gx[ci, cj]) + y * (gx[ci + 1, cj + 1] - gx[ci, cj + 1])
    dgy = (1 - x) * (gy[ci, cj + 1] - gy[ci, cj]) + x * (gy[ci + 1, cj + 1] - gy[ci + 1, cj])
    keep = hv >= u2
    scale = float(np.abs(gx).max() * np.abs(gy).max()) or 1.0
    n_max, n_min, n_saddle, degenerate = _classify(ci, cj, x, y, det, dgx + dgy, keep, scale)
    return CriticalPoints(int(np.sum(np.sign(det[keep]))), n_max, n_min, n_saddle, degenerate)


# ---------------------------------------------------------------- summary

def analyze(field, u, replicate_id=0, zeros=None):
    """GeometrySummary of {|f| >= u} plus the zero count and Morse tally.

    Flags record under-resolved zero cells, degenerate Hessians, and
    whether the Morse and Alexander cross-checks agree.
    """
    mask = excursion_mask(field, u)
    L0, L1, L2 = lk_curvatures(mask)
    b0, b1, b2 = betti_numbers(mask)
    zs = zero_set(field) if zeros is None else zeros
    crit = critical_points_modulus(field, u)
    flags = {
        "zero_multi_cells": zs.flagged_cells,
        "crit_degenerate": crit.degenerate,
        "morse_ok": int(crit.signed_sum == L0),
    }
    if isinstance(field.grid, SphereGrid):
        flags["alexander_ok"] = int(alexander_check(mask))
    return GeometrySummary(int(replicate_id), float(u), L0, L1, L2, b0, b1, b2, zs.count, crit.signed_sum, flags)

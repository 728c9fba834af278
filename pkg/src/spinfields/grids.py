"""Sample grids on the sphere and on a planar disk, and complex-valued fields on them."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class CellComplex:
    """Cubical/simplicial complex on grid vertices.

    ``faces`` holds vertex index arrays of shape (F, 4) for squares and
    (F, 3) for triangles. ``diagonals`` connect opposite square corners and
    are only used for complement connectivity.
    """
    n_vertices: int
    edges: np.ndarray
    faces: tuple
    diagonals: np.ndarray
    domain: np.ndarray  # vertices that belong to the complex


@dataclass(frozen=True)
class SphereGrid:
    """Latitude-longitude nodes theta_i = (i+1/2) pi/n_theta, phi_j = 2 pi j/n_phi.

    Each node owns the exact area of its latitude band cell, so the weights
    sum to 4 pi. The two poles are extra topological vertices.
    """
    n_theta: int = 512
    n_phi: int = 1024

    def __post_init__(self):
        if self.n_theta < 3 or self.n_phi < 4 or self.n_phi % 2:
            raise DomainError("need n_theta >= 3 and an even n_phi >= 4")

    @property
    def dtheta(self):
        return np.pi / self.n_theta

    @property
    def dphi(self):
        return 2.0 * np.pi / self.n_phi

    @cached_property
    def theta(self):
        return (np.arange(self.n_theta) + 0.5) * self.dtheta

    @cached_property
    def phi(self):
        return np.arange(self.n_phi) * self.dphi

    @property
    def shape(self):
        return (self.n_theta, self.n_phi)

    @cached_property
    def weights(self):
        h = self.dtheta
        band = np.cos(self.theta - h / 2) - np.cos(self.theta + h / 2)
        return np.repeat((band * self.dphi)[:, None], self.n_phi, axis=1)

    @cached_property
    def complex(self):
        nt, nphi = self.shape
        idx = np.arange(nt * nphi).reshape(nt, nphi)
        right = np.roll(idx, -1, axis=1)
        north, south = nt * nphi, nt * nphi + 1
        edges = np.concatenate([
            np.stack([idx.ravel(), right.ravel()], 1),
            np.stack([idx[:-1].ravel(), idx[1:].ravel()], 1),
            np.stack([np.full(nphi, north), idx[0]], 1),
            np.stack([np.full(nphi, south), idx[-1]], 1),
        ])
        squares = np.stack([idx[:-1].ravel(), idx[1:].ravel(), right[1:].ravel(), right[:-1].ravel()], 1)
        tris = np.concatenate([
            np.stack([np.full(nphi, north), idx[0], right[0]], 1),
            np.stack([np.full(nphi, south), idx[-1], right[-1]], 1),
        ])
        diags = np.concatenate([squares[:, [0, 2]], squares[:, [1, 3]]])
        return CellComplex(nt * nphi + 2, edges, (squares, tris), diags, np.ones(nt * nphi + 2, bool))


@dataclass(frozen=True)
class DiskGrid:
    """Cartesian cell-centre nodes on [-R, R]^2; node (i, j) sits at x_i + i y_j."""
    radius: float = 5.0
    n: int = 256

    def __post_init__(self):
        if self.radius <= 0 or self.n < 2:
            raise DomainError("need radius > 0 and n >= 2")

    @property
    def h(self):
        return 2.0 * self.radius / self.n

    @cached_property
    def x(self):
        return -self.radius + (np.arange(self.n) + 0.5) * self.h

    @property
    def shape(self):
        return (self.n, self.n)

    @cached_property
    def points(self):
        return self.x[:, None] + 1j * self.x[None, :]

    @cached_property
    def inside(self):
        return np.abs(self.points) <= self.radius

    @cached_property
    def weights(self):
        return np.where(self.inside, self.h * self.h, 0.0)

    @cached_property
    def complex(self):
        n = self.n
        idx = np.arange(n * n).reshape(n, n)
        ins = self.inside
        ex = np.stack([idx[:-1].ravel(), idx[1:].ravel()], 1)[(ins[:-1] & ins[1:]).ravel()]
        ey = np.stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()], 1)[(ins[:, :-1] & ins[:, 1:]).ravel()]
        sq_ok = (ins[:-1, :-1] & ins[1:, :-1] & ins[1:, 1:] & ins[:-1, 1:]).ravel()
        squares = np.stack([idx[:-1, :-1].ravel(), idx[1:, :-1].ravel(),
                            idx[1:, 1:].ravel(), idx[:-1, 1:].ravel()], 1)[sq_ok]
        diags = np.concatenate([squares[:, [0, 2]], squares[:, [1, 3]]])
        return CellComplex(n * n, np.concatenate([ex, ey]), (squares,), diags, ins.ravel())

    @cached_property
    def cell_inside(self):
        ins = self.inside
        return ins[:-1, :-1] & ins[1:, :-1] & ins[1:, 1:] & ins[:-1, 1:]


@dataclass
class ComplexGridField:
    """Complex samples on a grid.

    For a sphere grid ``poles`` holds the values at the north and south pole
    in the phi = 0 frame. ``spectral`` optionally keeps the object the
    samples came from (e.g. a Berry series with its coefficients).
    """
    grid: Any
    values: np.ndarray
    poles: tuple | None = None
    spectral: Any = field(default=None, repr=False)
    spin: int = 0

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise DomainError("field values must be finite")

    def vertex_values(self):
        """Values in the vertex order of ``grid.complex``."""
        flat = self.values.ravel()
        if isinstance(self.grid, SphereGrid):
            north, south = self.poles if self.poles is not None else (flat[: self.grid.n_phi].mean(), flat[-self.grid.n_phi:].mean())
            return np.concatenate([flat, [north, south]])
        return flat

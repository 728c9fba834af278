"""Isotropic spin-s Gaussian fields on the sphere, viewed as functions on SO(3).

A field is X(g) = sum_ell sum_m a^ell_m conj(D^ell_{m,-s}(g)). It obeys
X(g R3(psi)) = X(g) exp(-i s psi) and has covariance
E X(g1) conj(X(g2)) = Gamma(g1^-1 g2), Gamma(R(phi, theta, psi)) = k(theta) exp(i s (phi + psi)).
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ModelError
from .grids import ComplexGridField, SphereGrid
from .rotations import EulerRotation, compose_half_angle
from .special_fn import wigner_d, wigner_d_k2_at_zero, wigner_d_rows


@dataclass(frozen=True)
class SpinSpectrum:
    spin: int
    bands: tuple  # ((ell, weight), ...)

    def __post_init__(self):
        bands = tuple((int(ell), float(w)) for ell, w in self.bands)
        object.__setattr__(self, "bands", bands)
        if not bands:
            raise DomainError("empty spectrum")
        for ell, w in bands:
            if ell < abs(self.spin):
                raise DomainError(f"band ell={ell} below |spin|={abs(self.spin)}")
            if not w >= 0.0:
                raise DomainError(f"negative weight for ell={ell}")
        if len({ell for ell, _ in bands}) != len(bands):
            raise DomainError("duplicate band")
        if abs(sum(w for _, w in bands) - 1.0) > 1e-9:
            raise DomainError("weights must sum to 1")

    @classmethod
    def monochromatic(cls, ell, spin):
        return cls(int(spin), ((int(ell), 1.0),))

    @property
    def ells(self):
        return tuple(ell for ell, _ in self.bands)

    def to_dict(self):
        return {"spin": self.spin, "bands": [{"ell": ell, "weight": w} for ell, w in self.bands]}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, obj):
        try:
            return cls(int(obj["spin"]), tuple((b["ell"], b["weight"]) for b in obj["bands"]))
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed spectrum: {exc}") from exc

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class HarmonicCoefficients:
    """Per-band coefficient vectors, index m + ell for m = -ell..ell."""
    spin: int
    bands: dict

    def __getitem__(self, ell):
        return self.bands[ell]


# ------------------------------------------------------------------ sampling

def replicate_seed(base_seed, replicate):
    """Counter-derived seed for one replicate of a run."""
    return np.random.SeedSequence(int(base_seed), spawn_key=(int(replicate),))


def _band_rng(stream, ell):
    if isinstance(stream, np.random.SeedSequence):
        ss = np.random.SeedSequence(stream.entropy, spawn_key=tuple(stream.spawn_key) + (int(ell),))
    else:
        ss = np.random.SeedSequence(int(stream), spawn_key=(int(ell),))
    return np.random.Generator(np.random.PCG64(ss))


def complex_normal(rng, size, var=1.0):
    """Circular complex Gaussians with E|a|^2 = var."""
    shape = (size,) if np.isscalar(size) else tuple(size)
    z = rng.standard_normal((2,) + shape)
    return np.sqrt(var / 2.0) * (z[0] + 1j * z[1])


def sample_coefficients(spec, stream):
    """Independent circular Gaussians a^ell_m with E|a|^2 = w_ell.

    ``stream`` is a SeedSequence or integer (one derived stream per band) or
    a numpy Generator (bands drawn in order from it).
    """
    if not spec.bands:
        raise DomainError("empty spectrum")
    out = {}
    for ell, w in spec.bands:
        rng = stream if isinstance(stream, np.random.Generator) else _band_rng(stream, ell)
        out[ell] = complex_normal(rng, 2 * ell + 1, w)
    return HarmonicCoefficients(spec.spin, out)


# --------------------------------------------------------------- evaluation

def _angles(g):
    if isinstance(g, EulerRotation):
        return np.asarray(g.phi), np.asarray(g.theta), np.asarray(g.psi)
    phi, theta, psi = g
    return np.asarray(phi, float), np.asarray(theta, float), np.asarray(psi, float)


def pullback_basis(ell, s, phi, theta, psi):
    """conj(D^ell_{m,-s}) at the given angles; shape (..., 2 ell + 1)."""
    d = wigner_d_rows(ell, s, theta)
    m = np.arange(-ell, ell + 1)
    return d * np.exp(1j * (np.asarray(phi)[..., None] * m - (s * np.asarray(psi))[..., None]))


def evaluate_pullback(coeffs, g):
    """X(g) for a rotation (or arrays of Euler angles)."""
    phi, theta, psi = np.broadcast_arrays(*_angles(g))
    out = np.zeros(phi.shape, complex)
    for ell, a in coeffs.bands.items():
        out = out + pullback_basis(ell, coeffs.spin, phi, theta, psi) @ a
    return complex(out) if out.ndim == 0 else out


# --------------------------------------------------------------- covariance

@dataclass(frozen=True)
class CircularCovariance:
    spin: int
    bands: tuple
    k0: float
    k2: float

    def k(self, theta):
        """k(theta) = sum_ell w_ell d^ell_{-s,-s}(theta); even and 2 pi periodic."""
        th = np.mod(np.abs(np.asarray(theta, float)), 2 * np.pi)
        th = np.minimum(th, 2 * np.pi - th)
        out = np.zeros(th.shape)
        for ell, w in self.bands:
            if w:
                out = out + w * wigner_d_rows(ell, self.spin, th, [-self.spin])[..., 0]
        return float(out) if out.ndim == 0 else out

    __call__ = k


def circular_covariance(spec):
    k0 = sum(w * wigner_d(ell, -spec.spin, spec.spin, 0.0) for ell, w in spec.bands)
    k2 = sum(w * wigner_d_k2_at_zero(ell, spec.spin) for ell, w in spec.bands)
    return CircularCovariance(spec.spin, spec.bands, float(k0), float(k2))


def gamma(k, phi, theta, psi):
    """Gamma(R(phi, theta, psi)) = k(theta) exp(i s (phi + psi))."""
    return k.k(theta) * np.exp(1j * k.spin * (np.asarray(phi) + np.asarray(psi)))


def pair_covariance(k, g1, g2):
    """E X(g1) conj(X(g2)) = Gamma(g1^-1 g2).

    g1^-1 g2 = R3(-psi1) [R2(-theta1) R3(phi2 - phi1) R2(theta2)] R3(psi2); the
    bracket is reduced with the half-angle composition.
    """
    p1, t1, s1 = _angles(g1)
    p2, t2, s2 = _angles(g2)
    pt, tt, st = compose_half_angle(t1, p2 - p1, t2)
    out = k.k(tt) * np.exp(1j * k.spin * (pt + st - s1 + s2))
    return complex(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class JetCovariance:
    matrix: np.ndarray


def jet_covariance(k):
    """Covariance of (xi, d_x xi, d_y xi) at the chart origin."""
    if not k.k0 > 0:
        raise ModelError("k(0) must be positive")
    s = k.spin
    if -k.k2 < abs(s) * k.k0 / 2 - 1e-12 * max(1.0, abs(k.k2)):
        raise ModelError(f"jet covariance not PSD: -k2={-k.k2} < |s| k0/2={abs(s) * k.k0 / 2}")
    c = np.array([
        [k.k0, 0, 0],
        [0, -k.k2, -0.5j * s * k.k0],
        [0, 0.5j * s * k.k0, -k.k2],
    ], dtype=complex)
    return JetCovariance(c)


# ------------------------------------------------------------- local charts

def chart_angles(center, rho, z):
    """Euler angles of center . R(phi, rho t, -phi) for z = t exp(i phi)."""
    z = np.asarray(z, complex)
    t = np.abs(z)
    if np.any(rho * t > np.pi + 1e-12):
        raise DomainError("chart overflow: rho * |z| > pi")
    ph = np.angle(z)
    th = np.minimum(rho * t, np.pi)
    if center is None or (center.phi == 0 and center.theta == 0 and center.psi == 0):
        return np.mod(ph, 2 * np.pi), th, np.mod(-ph, 2 * np.pi)
    # R3(pc) R2(tc) R3(sc + ph) R2(th) R3(-ph)
    pt, tt, st = compose_half_angle(-center.theta, center.psi + ph, th)
    return np.mod(center.phi + pt, 2 * np.pi), tt, np.mod(st - ph, 2 * np.pi)


class LocalBasis:
    """Linear map from harmonic coefficients to xi(z) = X(center R(phi, rho t, -phi)).

    Columns whose entries are below 1e-16 everywhere are dropped.
    """

    def __init__(self, spec, center, rho, points):
        self.points = np.asarray(points, complex)
        self.spin = spec.spin
        phi, theta, psi = chart_angles(center, rho, self.points.ravel())
        self.parts = []
        for ell, _ in spec.bands:
            B = pullback_basis(ell, spec.spin, phi, theta, psi)
            keep = np.nonzero(np.abs(B).max(axis=0) > 1e-16)[0]
            self.parts.append((ell, keep, np.ascontiguousarray(B[:, keep])))

    def evaluate(self, coeffs):
        out = np.zeros(self.points.size, complex)
        for ell, keep, B in self.parts:
            out += B @ coeffs[ell][keep]
        return out.reshape(self.points.shape)


def evaluate_local(coeffs, center, rho, points, spec=None):
    """Rescaled local field on a disk grid (or an array of complex points)."""
    grid = points if hasattr(points, "points") else None
    z = grid.points if grid is not None else np.asarray(points, complex)
    if spec is None:
        spec = SpinSpectrum(coeffs.spin, tuple((ell, 1.0 / len(coeffs.bands)) for ell in coeffs.bands))
    vals = LocalBasis(spec, center, rho, z).evaluate(coeffs)
    return ComplexGridField(grid, vals, spectral=coeffs, spin=coeffs.spin)


# ------------------------------------------------------------- sphere grids

class SphereSynthesizer:
    """Evaluates f(theta, phi) = X(R(phi, theta, 0)) on a latitude-longitude grid.

    The per-band d tables are computed once; each replicate is then a small
    matrix product. Pole values are returned in the phi = 0 frame.
    """

    def __init__(self, spec, grid=None):
        self.spec = spec
        self.grid = grid or SphereGrid()
        s = spec.spin
        self.tables = []
        for ell, _ in spec.bands:
            d = wigner_d_rows(ell, s, self.grid.theta)
            m = np.arange(-ell, ell + 1)
            E = np.exp(1j * m[:, None] * self.grid.phi[None, :])
            north = wigner_d(ell, -s, s, 0.0)
            south = wigner_d(ell, s, s, np.pi)
            self.tables.append((ell, d, E, north, south))

    def synthesize(self, coeffs):
        g = self.grid
        vals = np.zeros(g.shape, complex)
        north = south = 0j
        s = self.spec.spin
        for ell, d, E, dn, ds in self.tables:
            a = coeffs[ell]
            vals += (d * a[None, :]) @ E
            north += a[ell - s] * dn
            south += a[ell + s] * ds
        return ComplexGridField(g, vals, poles=(north, south), spectral=coeffs, spin=s)

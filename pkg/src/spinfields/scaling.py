"""Scaling regimes of monochromatic spin fields and their limit fields on the plane."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError
from .field_model import (EulerRotation, LocalBasis, _band_rng, circular_covariance,
                          complex_normal, pair_covariance)
from .grids import ComplexGridField
from .special_fn import bessel_j, bessel_j_orders, m_r_kernel

KINDS = ("berry", "middle", "bargmann_fock")


@dataclass(frozen=True)
class RegimeSpec:
    kind: str
    r: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown regime {self.kind!r}")
        if self.kind == "middle":
            if self.r is None or int(self.r) < 0:
                raise DomainError("middle regime needs r >= 0")
            object.__setattr__(self, "r", int(self.r))
        elif self.kind == "bargmann_fock":
            object.__setattr__(self, "r", 0)
        else:
            object.__setattr__(self, "r", None)

    @property
    def beta(self):
        if self.kind == "berry":
            return 0.0
        if self.kind == "bargmann_fock":
            return 0.5
        return 1.0 / (2 * (self.r + 1))

    def k_inf(self, x):
        x = np.asarray(x, float)
        if self.kind == "berry":
            return bessel_j(0, x)
        if self.kind == "bargmann_fock":
            return np.exp(-x * x / 4.0)
        return m_r_kernel(self.r, x)

    def spin_for(self, ell, berry_spin=2):
        """Spin of the monochromatic degree-ell model used for this regime."""
        if self.kind == "berry":
            return berry_spin
        if self.kind == "bargmann_fock":
            return ell
        return ell - self.r

    def to_dict(self):
        out = {"kind": self.kind}
        if self.kind == "middle":
            out["r"] = self.r
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, obj):
        if "kind" not in obj:
            raise DomainError("regime needs a kind")
        return cls(obj["kind"], obj.get("r"))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def shrink_rate(ell, s):
    """1/sqrt((r+1)(2 ell - r)) with r = ell - |s|."""
    if ell < 0 or abs(s) > ell:
        raise DomainError(f"need |s| <= ell, got ell={ell}, s={s}")
    r = ell - abs(s)
    if ell == 0:
        raise DomainError("ell must be positive")
    return 1.0 / math.sqrt((r + 1) * (2 * ell - r))


def chart_rate(regime, ell, s):
    """Chart radius under which the rescaled covariance approaches ``limit_covariance``.

    Equal to ``shrink_rate`` except for Bargmann-Fock, whose e^{-x^2/4}
    kernel with twist 1/2 needs 1/sqrt(ell) (shrink_rate gives the same field
    viewed at z/sqrt(2)).
    """
    if regime.kind == "bargmann_fock":
        return 1.0 / math.sqrt(ell)
    return shrink_rate(ell, s)


def limit_covariance(regime, z1, z2):
    z1 = np.asarray(z1, complex)
    z2 = np.asarray(z2, complex)
    out = regime.k_inf(np.abs(z1 - z2)) * np.exp(1j * regime.beta * np.imag(z1 * np.conj(z2)))
    return complex(out) if out.ndim == 0 else out


def _chart(rho, z):
    z = np.asarray(z, complex)
    if np.any(rho * np.abs(z) > np.pi + 1e-12):
        raise DomainError("chart overflow: rho * |z| > pi")
    ph = np.angle(z)
    return ph, rho * np.abs(z), -ph


def rescaled_covariance(spec, rho, z1, z2):
    """Exact E xi(z1) conj(xi(z2)) of the rescaled field in the chart at the identity."""
    k = spec if hasattr(spec, "k0") else circular_covariance(spec)
    return pair_covariance(k, _chart(rho, z1), _chart(rho, z2))


# ------------------------------------------------------------ limit samplers

def _disk_points(points):
    """(grid or None, flat complex points, index of evaluated nodes)."""
    if hasattr(points, "points"):
        grid = points
        z = grid.points
        idx = np.flatnonzero(grid.inside) if hasattr(grid, "inside") else np.arange(z.size)
        return grid, z, idx
    z = np.asarray(points, complex)
    return None, z, np.arange(z.size)


def _rng(stream):
    if isinstance(stream, np.random.Generator):
        return stream
    return _band_rng(stream, 0)


def berry_truncation(radius):
    return int(math.ceil(radius)) + 30


@dataclass
class BerryField:
    """xi(z) = sum_{|n| <= N} a_n J_|n|(r) e^{i n theta} (+ an optional constant)."""
    coeffs: np.ndarray
    offset: complex = 0.0

    @property
    def N(self):
        return (len(self.coeffs) - 1) // 2

    def __call__(self, z):
        z = np.asarray(z, complex)
        out = _berry_basis(z.ravel(), self.N) @ self.coeffs + self.offset
        return complex(out[0]) if z.ndim == 0 else out.reshape(z.shape)

    def shifted(self, c):
        return BerryField(self.coeffs, self.offset + c)


def _berry_basis(z, N):
    r = np.abs(z)
    J = bessel_j_orders(N, r)
    n = np.arange(-N, N + 1)
    return J[np.abs(n)].T * np.exp(1j * np.angle(z)[:, None] * n)


class BerrySampler:
    """Precomputed J_|n|(r) e^{i n theta} basis for repeated sampling on fixed points."""

    def __init__(self, points, truncation=None):
        self.grid, z, self.idx = _disk_points(points)
        self.z = z
        radius = float(np.abs(z.ravel()[self.idx]).max()) if self.idx.size else 0.0
        if self.grid is not None and hasattr(self.grid, "radius"):
            radius = self.grid.radius
        N = berry_truncation(radius) if truncation is None else int(truncation)
        if N < 1 or N < radius + 30:
            raise ConfigError(f"truncation N={N} too small for radius {radius} (need N >= R + 30)")
        self.N = N
        self.basis = _berry_basis(z.ravel()[self.idx], N)

    def sample(self, stream):
        a = complex_normal(_rng(stream), 2 * self.N + 1)
        vals = np.zeros(self.z.size, complex)
        vals[self.idx] = self.basis @ a
        return ComplexGridField(self.grid, vals.reshape(self.z.shape), spectral=BerryField(a))


def sample_berry(points, truncation, stream):
    return BerrySampler(points, truncation).sample(stream)


def circle_average(fn, r, n=256):
    """(1/2 pi) times the contour integral of fn over |z| = r, by the trapezoid rule."""
    th = 2 * np.pi * np.arange(n) / n
    return complex(np.mean(fn(r * np.exp(1j * th))))


def _helmholtz_terms(z, N):
    """(Delta + 1)(J_|n|(r) e^{i n theta}) for |n| <= N from Bessel identities."""
    r = np.abs(z)
    J = bessel_j_orders(N + 2, r)
    m = np.arange(N + 1)

    def Jm(k):
        k = np.asarray(k)
        sgn = np.where((k < 0) & (np.abs(k) % 2 == 1), -1.0, 1.0)
        return J[np.abs(k)] * sgn[:, None]

    d1 = 0.5 * (Jm(m - 1) - Jm(m + 1))
    d2 = 0.25 * (Jm(m - 2) - 2 * Jm(m) + Jm(m + 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        op = d2 + d1 / r + (1.0 - (m * m)[:, None] / (r * r)) * J[: N + 1]
    op[:, r == 0] = 0.0  # each term solves the equation; the polar form is singular at 0
    n = np.arange(-N, N + 1)
    return op[np.abs(n)].T * np.exp(1j * np.angle(z)[:, None] * n)


def helmholtz_operator(points, N):
    """Matrix mapping Berry coefficients (|n| <= N) to (Delta + 1) xi at the points."""
    return _helmholtz_terms(np.asarray(points, complex).ravel(), N)


def helmholtz_residual(field, points=None, operator=None):
    """max |Delta xi + xi| over the grid, from the retained Berry series.

    ``points`` is needed only when the field has no grid; ``operator`` from
    helmholtz_operator skips rebuilding the Bessel terms.
    """
    berry = field.spectral
    if not isinstance(berry, BerryField):
        raise DomainError("field carries no Berry coefficients")
    if operator is None:
        if field.grid is not None:
            z = field.grid.points.ravel()[field.grid.inside.ravel()]
        elif points is not None:
            z = np.asarray(points, complex).ravel()
        else:
            raise DomainError("need grid or points")
        operator = _helmholtz_terms(z, berry.N)
    res = operator @ berry.coeffs + berry.offset
    return float(np.abs(res).max())


def bf_truncation(radius, tol=1e-14):
    """Smallest N with (R^2/2)^N / N! < tol."""
    q = radius * radius / 2.0
    if q <= 0:
        return 1
    N = 1
    while N * math.log(q) - math.lgamma(N + 1) >= math.log(tol):
        N += 1
    return N


def _bf_basis(z, N, damped=True):
    t = np.abs(z)
    n = np.arange(N)
    with np.errstate(divide="ignore", invalid="ignore"):
        logmag = n[None, :] * np.log(t / math.sqrt(2.0))[:, None]
    logmag[:, 0] = 0.0
    logmag -= 0.5 * np.array([math.lgamma(k + 1) for k in n])[None, :]
    if damped:
        logmag -= (t * t / 4.0)[:, None]
    return np.exp(logmag + 1j * np.angle(z)[:, None] * n)


@dataclass
class BargmannFockField:
    """xi(z) = sum_{n < N} g_n (z/sqrt 2)^n / sqrt(n!) e^{-|z|^2/4}."""
    coeffs: np.ndarray

    def __call__(self, z, damped=True):
        z = np.asarray(z, complex)
        out = _bf_basis(z.ravel(), len(self.coeffs), damped) @ self.coeffs
        return out.reshape(z.shape)


class BargmannFockSampler:
    def __init__(self, points, truncation=None):
        self.grid, z, self.idx = _disk_points(points)
        self.z = z
        radius = float(np.abs(z.ravel()[self.idx]).max()) if self.idx.size else 0.0
        if self.grid is not None and hasattr(self.grid, "radius"):
            radius = max(radius, self.grid.radius)
        N = bf_truncation(radius) if truncation is None else int(truncation)
        q = radius * radius / 2.0
        if N < 1 or (q > 0 and N * math.log(q) - math.lgamma(N + 1) >= math.log(1e-14)):
            raise ConfigError(f"truncation N={N} too small for radius {radius}")
        self.N = N
        self.basis = _bf_basis(z.ravel()[self.idx], N)

    def sample(self, stream):
        g = complex_normal(_rng(stream), self.N)
        vals = np.zeros(self.z.size, complex)
        vals[self.idx] = self.basis @ g
        return ComplexGridField(self.grid, vals.reshape(self.z.shape), spectral=BargmannFockField(g))


def sample_bargmann_fock(points, truncation, stream):
    return BargmannFockSampler(points, truncation).sample(stream)


class RescaledSampler:
    """Rescaled monochromatic field xi(z) = X(center R(phi, rho t, -phi)) on fixed points."""

    def __init__(self, spec, rho, points, center=None):
        from .field_model import sample_coefficients
        self._sample = sample_coefficients
        self.spec = spec
        self.grid, z, self.idx = _disk_points(points)
        self.z = z
        self.basis = LocalBasis(spec, center or EulerRotation(), rho, z.ravel()[self.idx])

    def sample(self, stream):
        c = self._sample(self.spec, stream)
        vals = np.zeros(self.z.size, complex)
        vals[self.idx] = self.basis.evaluate(c)
        return ComplexGridField(self.grid, vals.reshape(self.z.shape), spectral=c)

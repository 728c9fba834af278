"""Closed-form expectations for zeros and excursion sets of spin fields.

Excursion formulas are stated for a complex field whose real and imaginary
parts are independent with unit variance, so |f|^2 / 2 is standard
exponential and P(|f| >= u) = exp(-u^2 / 2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ModelError, SingularModelError


@dataclass(frozen=True)
class ExpectationReport:
    name: str
    analytic: float
    empirical: float
    std_error: float
    z_score: float

    CSV_HEADER = ("name", "analytic", "empirical", "std_error", "z_score")

    @classmethod
    def from_values(cls, name, analytic, empirical, std_error):
        diff = empirical - analytic
        if std_error > 0:
            z = diff / std_error
        elif diff == 0:
            z = 0.0
        else:
            z = math.copysign(math.inf, diff) if not math.isnan(diff) else math.nan
        return cls(name, float(analytic), float(empirical), float(std_error), float(z))

    @classmethod
    def from_samples(cls, name, analytic, samples):
        x = np.asarray(samples, float)
        if x.size == 0:
            raise DomainError("no samples")
        se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
        return cls.from_values(name, analytic, float(x.mean()), se)

    def within(self, k=3.0):
        return abs(self.z_score) <= k

    def csv_row(self):
        return [self.name, repr(self.analytic), repr(self.empirical), repr(self.std_error), repr(self.z_score)]


# ------------------------------------------------------------------ zeros

def expected_zeros(k0, k2, s):
    """Mean number of zeros of an isotropic spin-s field with k(0) = k0, k''(0) = k2."""
    if k2 == 0:
        raise SingularModelError("k''(0) = 0: the field is locally constant")
    if not k0 > 0 or k2 > 0:
        raise DomainError("need k0 > 0 and k2 < 0")
    a = abs(k2)
    return 2.0 * a / k0 + 0.5 * s * s * k0 / a


def monochromatic_zeros(ell, s):
    """expected_zeros for k = d^ell_{-s,-s}, written out: n + s^2 / n with n = ell(ell+1) - s^2."""
    if abs(s) > ell:
        raise DomainError("need |s| <= ell")
    n = ell * (ell + 1) - s * s
    if n == 0:
        raise SingularModelError("ell = s = 0 is constant")
    return n + s * s / n


def det_integral(a, b):
    """E| |g1|^2 - |g2|^2 | for independent circular complex normals with variances a, b."""
    if a < 0 or b < 0:
        raise DomainError("variances must be nonnegative")
    if a + b == 0:
        raise DomainError("a = b = 0")
    return (a * a + b * b) / (a + b)


def kac_rice_zeros(k0, k2, s):
    """Zero count rebuilt from the jet variances of d/dz and d/dzbar and det_integral."""
    a = -k2 / 2 + abs(s) * k0 / 4
    b = -k2 / 2 - abs(s) * k0 / 4
    if b < 0:
        raise ModelError("jet covariance not positive semidefinite")
    return 4.0 / k0 * det_integral(a, b)


# ------------------------------------------------------ excursion sets

def _ball_volume(k):
    return math.pi ** (k / 2) / math.gamma(k / 2 + 1)


def gkf_rho(j, u):
    """Universal level functions for the modulus of a unit complex Gaussian."""
    e = math.exp(-u * u / 2)
    if j == 0:
        return e
    if j == 1:
        return e * u / math.sqrt(2 * math.pi)
    if j == 2:
        return e * (u * u - 1) / (2 * math.pi)
    raise DomainError("j must be 0, 1 or 2")


def flag_coefficient(i, j):
    return math.comb(i + j, j) * _ball_volume(i + j) / (_ball_volume(i) * _ball_volume(j))


def gkf_spin0(lam, u):
    """(E area, E boundary length, E chi, E zeros) of {|f| >= u} on the unit sphere.

    ``lam`` is twice |k''(0)|; at u = 0 the chi entry is the limit from
    above, 2 - lam, not the value 2 of the full sphere.
    """
    if not lam > 0:
        raise DomainError("lambda must be positive")
    if u < 0:
        raise DomainError("level must be nonnegative")
    e = math.exp(-u * u / 2)
    return (4 * math.pi * e,
            math.sqrt(lam) * 2 * math.pi ** 1.5 * u * e,
            (lam * (u * u - 1) + 2) * e,
            float(lam))


def gkf_sphere_from_rho(lam, u):
    """The same four numbers assembled from gkf_rho and flag coefficients.

    LK curvatures of the sphere in the field metric (lam/2) g are (2, 0, 2 pi lam);
    lengths and areas are mapped back to the round metric.
    """
    L = (2.0, 0.0, 2 * math.pi * lam)
    out = []
    for i in range(3):
        out.append(sum(flag_coefficient(i, j) * gkf_rho(j, u) * L[i + j] for j in range(3 - i)))
    area = out[2] / (lam / 2)
    length = 2 * out[1] / math.sqrt(lam / 2)
    chi0 = sum(flag_coefficient(0, j) * gkf_rho(j, 0.0) * L[j] for j in range(3))
    return area, length, out[0], 2.0 - chi0


def berry_rate(ell, s):
    s = abs(s)
    if s > ell or ell - s < 1:
        raise DomainError("need ell > |s|")
    return 1.0 / math.sqrt((ell - s) * (ell + s + 1))


def berry_expectations(ell, s, u):
    """Leading-order (area, boundary length, chi, zeros) for a degree-ell spin-s field."""
    if u < 0:
        raise DomainError("level must be nonnegative")
    rho = berry_rate(ell, s)
    e = math.exp(-u * u / 2)
    return (4 * math.pi * e,
            2 * math.pi ** 1.5 * u * e / rho,
            (u * u - 1) * e / rho ** 2,
            1.0 / rho ** 2)


def sphere_measure(d):
    """Surface measure of the unit d-sphere."""
    return 2 * math.pi ** ((d + 1) / 2) / math.gamma((d + 1) / 2)


def vol_identity_check(d, lam, volume):
    """Expected common zeros of d independent unit fields with metric (lam/2) g on a d-manifold."""
    if d < 1:
        raise DomainError("dimension must be positive")
    if not lam > 0 or volume < 0:
        raise DomainError("need lam > 0 and volume >= 0")
    return volume * (lam / 2) ** (d / 2) * 2 / sphere_measure(d)

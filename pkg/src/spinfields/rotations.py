"""Z-Y-Z Euler angles on SO(3): R(phi, theta, psi) = R3(phi) R2(theta) R3(psi)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi
_POLE_EPS = 1e-12


def rot3(a):
    a = np.asarray(a, dtype=float)
    c, s = np.cos(a), np.sin(a)
    z, o = np.zeros_like(a), np.ones_like(a)
    return np.stack([np.stack([c, -s, z], -1), np.stack([s, c, z], -1), np.stack([z, z, o], -1)], -2)


def rot2(a):
    a = np.asarray(a, dtype=float)
    c, s = np.cos(a), np.sin(a)
    z, o = np.zeros_like(a), np.ones_like(a)
    return np.stack([np.stack([c, z, s], -1), np.stack([z, o, z], -1), np.stack([-s, z, c], -1)], -2)


def euler_matrix(phi, theta, psi):
    return rot3(phi) @ rot2(theta) @ rot3(psi)


def euler_from_matrix(R):
    """Euler angles of rotation matrices (..., 3, 3).

    At theta in {0, pi} the gauge psi = 0 is used.
    """
    R = np.asarray(R, dtype=float)
    theta = np.arctan2(np.hypot(R[..., 0, 2], R[..., 1, 2]), R[..., 2, 2])
    phi = np.arctan2(R[..., 1, 2], R[..., 0, 2])
    psi = np.arctan2(R[..., 2, 1], -R[..., 2, 0])
    north = np.sin(theta) < _POLE_EPS
    south = north & (R[..., 2, 2] < 0)
    north = north & ~south
    phi = np.where(north, np.arctan2(R[..., 1, 0], R[..., 0, 0]), phi)
    phi = np.where(south, np.arctan2(-R[..., 1, 0], R[..., 1, 1]), phi)
    psi = np.where(north | south, 0.0, psi)
    return np.mod(phi, TWO_PI), theta, np.mod(psi, TWO_PI)


def compose_half_angle(theta1, phi, theta2):
    """Euler angles of R2(-theta1) R3(phi) R2(theta2) via the SU(2) lift.

    Returns (phi~, theta~, psi~) with psi~ in [0, 2 pi). Only phi~ + psi~ and
    phi~ - psi~ are determined by the lift; the sign ambiguity of the lift
    is fixed by reducing psi~ modulo 2 pi.
    """
    c1, s1 = np.cos(np.asarray(theta1) / 2), np.sin(np.asarray(theta1) / 2)
    c2, s2 = np.cos(np.asarray(theta2) / 2), np.sin(np.asarray(theta2) / 2)
    e = np.exp(0.5j * np.asarray(phi))
    alpha = c1 * c2 * e + s1 * s2 * np.conj(e)
    beta = -s1 * c2 * e + c1 * s2 * np.conj(e)
    aa, ab = np.abs(alpha), np.abs(beta)
    theta = 2.0 * np.arctan2(ab, aa)
    arg_a, arg_b = np.angle(alpha), np.angle(beta)
    psi = arg_a + arg_b
    phi_t = arg_a - arg_b
    zero_b = ab < _POLE_EPS * np.maximum(aa, 1.0)
    zero_a = aa < _POLE_EPS * np.maximum(ab, 1.0)
    psi = np.where(zero_b | zero_a, 0.0, psi)
    phi_t = np.where(zero_b, 2 * arg_a, np.where(zero_a, -2 * arg_b, phi_t))
    return np.mod(phi_t, TWO_PI), theta, np.mod(psi, TWO_PI)


@dataclass(frozen=True)
class EulerRotation:
    phi: float = 0.0
    theta: float = 0.0
    psi: float = 0.0

    def matrix(self):
        return euler_matrix(self.phi, self.theta, self.psi)

    @classmethod
    def from_matrix(cls, R):
        phi, theta, psi = euler_from_matrix(R)
        return cls(float(phi), float(theta), float(psi))

    def inverse(self):
        return EulerRotation.from_matrix(self.matrix().T)

    def __matmul__(self, other):
        return EulerRotation.from_matrix(self.matrix() @ other.matrix())

    @classmethod
    def random(cls, rng):
        """Haar-distributed rotation."""
        return cls(rng.uniform(0, TWO_PI), float(np.arccos(rng.uniform(-1, 1))), rng.uniform(0, TWO_PI))

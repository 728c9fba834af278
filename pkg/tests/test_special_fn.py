import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from conftest import wigner_expm
from spinfields.errors import DomainError
from spinfields.special_fn import (bessel_j, bessel_j_orders, m_r_kernel, middle_limit_kernel, wigner_D,
                                   wigner_d, wigner_d_k2_at_zero, wigner_d_rows)
from spinfields.rotations import EulerRotation


@pytest.mark.parametrize("ell", [0, 1, 2, 5, 12, 20])
def test_wigner_matches_expm(ell):
    for beta in (0.0, 0.3, 1.1, np.pi / 2, 2.4, np.pi):
        ref = wigner_expm(ell, beta)
        got = wigner_d_rows(ell, 0, beta)  # column n = 0
        for s in range(-ell, ell + 1):
            got = wigner_d_rows(ell, s, beta)
            assert np.allclose(got, ref[:, ell - s], atol=1e-13, rtol=0)


def test_wigner_scalar_agrees_with_rows():
    th = np.linspace(0, np.pi, 13)
    for ell, s in ((7, 2), (10, -3), (16, 16)):
        rows = wigner_d_rows(ell, s, th)
        for m in (-ell, -1, 0, 3, ell):
            assert np.allclose(wigner_d(ell, m, s, th), rows[:, m + ell], atol=1e-13)


def test_wigner_theta_zero_is_diagonal():
    for ell in range(6):
        for s in range(-ell, ell + 1):
            for m in range(-ell, ell + 1):
                assert wigner_d(ell, m, s, 0.0) == (1.0 if m == -s else 0.0)


def test_wigner_high_degree_against_mpmath():
    # exact Jacobi-polynomial form evaluated at 50 digits
    ell, m, n, th = 40, 3, -5, 1.3
    mpmath.mp.dps = 50
    k = ell - max(abs(m), abs(n))
    a, b = abs(m - n), abs(m + n)
    lam = 0 if n >= m else n - m
    val = ((-1) ** lam * mpmath.sqrt(mpmath.binomial(2 * ell - k, k + a) / mpmath.binomial(k + b, b))
           * mpmath.sin(th / 2) ** a * mpmath.cos(th / 2) ** b * mpmath.jacobi(k, a, b, mpmath.cos(th)))
    assert abs(wigner_d(ell, m, -n, th) - float(val)) < 1e-12


def test_wigner_domain_errors():
    with pytest.raises(DomainError):
        wigner_d(2, 3, 0, 0.1)
    with pytest.raises(DomainError):
        wigner_d(2, 0, 0, -0.1)
    with pytest.raises(DomainError):
        wigner_d(2, 0, 0, 3.5)


@given(st.integers(0, 32), st.data(), st.floats(0, np.pi))
def test_row_normalization(ell, data, theta):
    s = data.draw(st.integers(-ell, ell))
    row = wigner_d_rows(ell, s, theta)
    assert abs(np.sum(row ** 2) - 1.0) < 1e-9


@given(st.integers(0, 24), st.data(), st.floats(0, np.pi))
def test_reflection_symmetry(ell, data, theta):
    s = data.draw(st.integers(-ell, ell))
    m = data.draw(st.integers(-ell, ell))
    lhs = wigner_d(ell, m, s, np.pi - theta)
    rhs = (-1) ** (ell + m) * wigner_d(ell, m, -s, theta)
    assert abs(lhs - rhs) < 1e-12


def test_wigner_D_representation(rng):
    ell = 6
    g1, g2 = EulerRotation.random(rng), EulerRotation.random(rng)
    g = g1 @ g2

    def mat(h):
        return np.array([[wigner_D(ell, m, n, h) for n in range(-ell, ell + 1)] for m in range(-ell, ell + 1)])

    assert np.allclose(mat(g), mat(g1) @ mat(g2), atol=1e-13)


def test_k2_at_zero_matches_finite_difference():
    for ell, s in ((10, 2), (5, 5), (8, 0)):
        h = 1e-4
        fd = (wigner_d(ell, -s, s, h) - 2 * wigner_d(ell, -s, s, 0.0) + wigner_d(ell, -s, s, h)) / h ** 2
        assert abs(fd - wigner_d_k2_at_zero(ell, s)) < 1e-5 * (1 + abs(fd))


def test_bessel_examples():
    assert bessel_j(0, 0.0) == 1.0
    x = np.linspace(-20, 20, 81)
    assert np.allclose(bessel_j(-1, x), -bessel_j(1, x), atol=1e-15)
    # bisection for the first zero of J0 on the series
    lo, hi = 2.0, 3.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if bessel_j(0, mid) > 0 else (lo, mid)
    assert abs(lo - 2.404826) < 1e-6


def test_bessel_against_scipy():
    x = np.linspace(-50, 50, 2001)
    for n in range(0, 30):
        assert np.max(np.abs(bessel_j(n, x) - special.jv(n, x))) < 1e-12
    J = bessel_j_orders(30, x)
    assert np.max(np.abs(J - special.jv(np.arange(31)[:, None], x[None, :]))) < 1e-12


@given(st.integers(0, 20), st.floats(0.01, 40))
def test_bessel_ode_residual(n, x):
    J = lambda k, t: bessel_j(k, t)
    d1 = 0.5 * (J(n - 1, x) - J(n + 1, x))
    d2 = 0.25 * (J(n - 2, x) - 2 * J(n, x) + J(n + 2, x))
    assert abs(x * x * d2 + x * d1 + (x * x - n * n) * J(n, x)) < 1e-9 * max(1.0, x * x)


@given(st.integers(1, 20), st.floats(0.05, 40))
def test_bessel_three_term_recurrence(n, x):
    assert abs(bessel_j(n - 1, x) + bessel_j(n + 1, x) - 2 * n / x * bessel_j(n, x)) < 1e-11 * max(1.0, n / x)


def test_m_r_examples():
    x = np.linspace(0, 5, 51)
    assert np.allclose(m_r_kernel(0, x), np.exp(-x * x / 4))
    assert all(m_r_kernel(r, 0.0) == 1.0 for r in range(6))
    assert abs(m_r_kernel(50, 1.0) - bessel_j(0, 1.0)) < 0.01


def test_m_r_series_against_direct_sum():
    x = np.linspace(0, 6, 25)
    for r in range(5):
        direct = sum(math.factorial(r) / ((r + 1) ** j * math.factorial(r - j)) * (-1) ** j
                     / math.factorial(j) ** 2 * (x / 2) ** (2 * j) for j in range(r + 1))
        assert np.allclose(m_r_kernel(r, x), direct * np.exp(-x * x / (4 * (r + 1))), atol=1e-14)


@given(st.integers(0, 10), st.floats(1e-3, 5))
def test_m_r_bounded_by_one(r, x):
    assert m_r_kernel(r, x) <= 1.0


def test_middle_limit_kernel_is_the_degree_ell_limit():
    # the d-function at the shrink rate approaches L_r(y) e^{-y/2}
    x = np.linspace(0, 6, 61)
    for r in (0, 1, 2):
        ell = 400
        rho = 1 / math.sqrt((r + 1) * (2 * ell - r))
        k = wigner_d_rows(ell, ell - r, x * rho, [-(ell - r)])[:, 0]
        assert np.max(np.abs(k - middle_limit_kernel(r, x))) < 3e-3

"""Wigner d/D functions, Bessel functions of the first kind and the M_r kernels.

Convention: ``wigner_d(ell, m, s, theta)`` is d^ell_{m,-s}(theta), so the
circular covariance of a monochromatic spin-s field is
``wigner_d(ell, -s, s, theta)`` and equals 1 at theta = 0.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from .errors import DomainError

# Bessel: power series below this |x|, Miller backward recurrence above.
BESSEL_SERIES_MAX = 12.0

# Float evaluation of the d-series is trusted while sum|terms| / |sum| stays
# below this ratio; beyond it the sum is redone with mpmath.
_CANCEL_RATIO = 1e2
# Absolute error target for the vectorised row tables.
_TABLE_ATOL = 1e-12


def _check_index(ell, m, s):
    if ell < 0 or abs(m) > ell or abs(s) > ell:
        raise DomainError(f"invalid Wigner index ell={ell}, m={m}, s={s}")


def _check_theta(theta):
    th = np.asarray(theta, dtype=float)
    if np.any(~np.isfinite(th)) or np.any(th < 0.0) or np.any(th > np.pi):
        raise DomainError("theta must lie in [0, pi]")
    return th


@lru_cache(maxsize=8192)
def _series(ell, m, s):
    """Coefficients of the d^ell_{m,-s} series in Horner form.

    d(theta) = sign * exp(log_ref) * cos^a0 sin^b0 * sum_k r[k] t^k,
    with t = tan(theta/2)^2 and |r[k]| <= 1.
    """
    n = m + s
    j0 = max(0, -n)
    j1 = min(ell - s, ell - m)
    f = math.factorial
    dens = [f(ell - s - j) * f(ell - m - j) * f(j) * f(n + j) for j in range(j0, j1 + 1)]
    dref = min(dens)
    num = f(ell + s) * f(ell - s) * f(ell + m) * f(ell - m)
    log_ref = 0.5 * math.log(num) - math.log(dref)
    r = np.array([float(Fraction(dref, d)) for d in dens])
    r[1::2] *= -1.0
    sign = -1.0 if (n + j0) % 2 else 1.0
    a0 = 2 * (ell - j0) - n
    b0 = 2 * j0 + n
    return j0, r, log_ref, sign, a0, b0, num, tuple(dens)


def _xlogy(p, y):
    # p*log(y) with 0*log(0) = 0
    if p == 0:
        return np.zeros_like(y)
    with np.errstate(divide="ignore"):
        return p * np.log(y)


def _d_float(ell, m, s, theta):
    j0, r, log_ref, sign, a0, b0, _, _ = _series(ell, m, s)
    c = math.cos(theta / 2.0)
    sn = math.sin(theta / 2.0)
    k = np.arange(len(r))
    pc = a0 - 2 * k
    ps = b0 + 2 * k
    with np.errstate(divide="ignore", invalid="ignore"):
        lc = np.where(pc == 0, 0.0, pc * (math.log(c) if c > 0 else -np.inf))
        ls = np.where(ps == 0, 0.0, ps * (math.log(sn) if sn > 0 else -np.inf))
        mag = np.exp(log_ref + np.log(np.abs(r)) + lc + ls)
    terms = sign * np.sign(r) * mag
    return math.fsum(terms), float(np.sum(mag))


def _d_mp(ell, m, s, theta, dps):
    j0, r, _, _, a0, b0, num, dens = _series(ell, m, s)
    with mpmath.workdps(dps):
        half = mpmath.mpf(theta) / 2
        c = mpmath.cos(half)
        sn = mpmath.sin(half)
        root = mpmath.sqrt(mpmath.mpf(num))
        total = mpmath.mpf(0)
        for k, den in enumerate(dens):
            term = root / den * c ** (a0 - 2 * k) * sn ** (b0 + 2 * k)
            total += -term if (m + s + j0 + k) % 2 else term
        return float(total)


def _d_scalar(ell, m, s, theta):
    if theta == 0.0:
        return 1.0 if m == -s else 0.0
    val, abssum = _d_float(ell, m, s, theta)
    if abssum > _CANCEL_RATIO * abs(val):
        ratio = abssum / abs(val) if val != 0.0 else 1e20
        digits = math.log10(max(ratio, 1.0))
        return _d_mp(ell, m, s, theta, 30 + int(math.ceil(max(digits, 0.0))))
    return val


def wigner_d(ell, m, s, theta):
    """d^ell_{m,-s}(theta) from the finite alternating series.

    Factorial ratios are kept exact (rational) and the sum is redone in
    extended precision when cancellation would cost more than two digits.
    """
    _check_index(ell, m, s)
    th = _check_theta(theta)
    if th.ndim == 0:
        return _d_scalar(ell, m, s, float(th))
    out = np.array([_d_scalar(ell, m, s, float(t)) for t in th.ravel()])
    return out.reshape(th.shape)


def wigner_d_k2_at_zero(ell, s):
    """Second derivative at 0 of d^ell_{-s,-s}: -(ell(ell+1) - s^2)/2."""
    if ell < 0 or abs(s) > ell:
        raise DomainError(f"need |s| <= ell, got ell={ell}, s={s}")
    return -(ell * (ell + 1) - s * s) / 2


def wigner_D(ell, m, s, g):
    """Wigner D^ell_{m,s}(g) = exp(-i m phi) d^ell_{m,s}(theta) exp(-i s psi).

    ``g`` is anything with ``phi``, ``theta``, ``psi`` attributes.
    """
    _check_index(ell, m, s)
    d = wigner_d(ell, m, -s, g.theta)
    return np.exp(-1j * m * np.asarray(g.phi)) * d * np.exp(-1j * s * np.asarray(g.psi))


def _rows_half(ell, s, th, ms):
    """Table d^ell_{m,-s}(th) for th in [0, pi/2]; one column per m in ms."""
    P = th.size
    out = np.empty((P, len(ms)))
    err = np.empty((P, len(ms)))
    c = np.cos(th / 2.0)
    sn = np.sin(th / 2.0)
    t = (sn / c) ** 2
    tmax = float(t.max()) if P else 0.0
    lc = np.log(c)
    for col, m in enumerate(ms):
        _, r, log_ref, sign, a0, b0, _, _ = _series(ell, m, s)
        # drop tail terms that are below 1e-18 of the largest at every point
        K = len(r) - 1
        if tmax == 0.0:
            K = 0
        elif tmax < 1.0 and K > 0:
            with np.errstate(divide="ignore"):
                bnd = np.log(np.abs(r)) + np.arange(len(r)) * np.log(tmax)
            keep = np.nonzero(bnd >= bnd.max() - 41.5)[0]
            K = int(keep[-1])
        with np.errstate(over="ignore", under="ignore"):
            pre = np.exp(log_ref + a0 * lc + _xlogy(b0, sn))
        acc = np.full(P, r[K])
        aacc = np.full(P, abs(r[K]))
        for k in range(K - 1, -1, -1):
            acc = acc * t + r[k]
            aacc = aacc * t + abs(r[k])
        out[:, col] = sign * pre * acc
        err[:, col] = pre * aacc * (K + 2) * 1.2e-16
    return out, err


def wigner_d_rows(ell, s, theta, ms=None):
    """Vectorised d^ell_{m,-s}(theta) for m in ``ms`` (default -ell..ell).

    Returns an array of shape theta.shape + (len(ms),). Entries whose float
    Horner evaluation could exceed an absolute error of 1e-12 are recomputed
    through the scalar path.
    """
    if ell < 0 or abs(s) > ell:
        raise DomainError(f"need |s| <= ell, got ell={ell}, s={s}")
    ms = list(range(-ell, ell + 1)) if ms is None else [int(m) for m in ms]
    for m in ms:
        _check_index(ell, m, s)
    th = _check_theta(theta)
    flat = th.ravel()
    out = np.empty((flat.size, len(ms)))
    err = np.empty_like(out)
    lo = flat <= np.pi / 2
    if lo.any():
        out[lo], err[lo] = _rows_half(ell, s, flat[lo], ms)
    hi = ~lo
    if hi.any():
        # d^l_{m,-s}(pi - b) = (-1)^(l+m) d^l_{m,s}(b)
        vals, e = _rows_half(ell, -s, np.pi - flat[hi], ms)
        par = np.where((ell + np.array(ms)) % 2, -1.0, 1.0)
        out[hi] = vals * par
        err[hi] = e
    for p, col in zip(*np.nonzero(err > _TABLE_ATOL)):
        out[p, col] = _d_scalar(ell, ms[col], s, float(flat[p]))
    return out.reshape(th.shape + (len(ms),))


# ---------------------------------------------------------------- Bessel J_n

def _bessel_series(n, x):
    """J_n(x) for n >= 0 by the power series (moderate |x| only)."""
    h = 0.5 * x
    with np.errstate(divide="ignore", under="ignore"):
        term = np.where(h == 0.0, 1.0 if n == 0 else 0.0,
                        np.exp(n * np.log(np.abs(h) + (h == 0)) - math.lgamma(n + 1)))
    term = term * np.where((h < 0) & (n % 2 == 1), -1.0, 1.0)
    total = term.copy()
    peak = np.abs(term)
    q = -h * h
    hmax = float(np.max(np.abs(h))) if h.size else 0.0
    k = 1
    while True:
        term = term * q / (k * (k + n))
        total = total + term
        a = np.abs(term)
        peak = np.maximum(peak, a)
        if k > hmax and np.all(a <= 1e-17 * peak):
            break
        k += 1
    return total


def _miller_start(nmax, xmax):
    top = max(nmax, xmax)
    M = int(top + 30 + math.sqrt(40.0 * top))
    return M + (M % 2)


def bessel_j_orders(nmax, x):
    """J_0..J_nmax at every x via Miller's backward recurrence.

    Returns an array of shape (nmax+1,) + x.shape. Normalised with
    J_0 + 2 sum_k J_2k = 1.
    """
    x = np.asarray(x, dtype=float)
    if nmax < 0:
        raise DomainError("nmax must be nonnegative")
    flat = x.ravel()
    ax = np.abs(flat)
    out = np.zeros((nmax + 1, flat.size))
    zero = ax == 0.0
    out[0, zero] = 1.0
    nz = ~zero
    if nz.any():
        xs = ax[nz]
        M = _miller_start(nmax, float(xs.max()))
        store = np.zeros((nmax + 1, xs.size))
        bkp1 = np.zeros(xs.size)
        bk = np.full(xs.size, 1e-30)
        norm = np.zeros(xs.size)
        inv = 2.0 / xs
        for k in range(M, 0, -1):
            if k <= nmax:
                store[k] = bk
            if k % 2 == 0:
                norm += 2.0 * bk
            bkm1 = k * inv * bk - bkp1
            bkp1, bk = bk, bkm1
            big = np.abs(bk) > 1e200
            if big.any():
                bk[big] *= 1e-200
                bkp1[big] *= 1e-200
                norm[big] *= 1e-200
                store[k:, big] *= 1e-200
        store[0] = bk
        norm += bk
        out[:, nz] = store / norm
    neg = flat < 0
    if neg.any():
        odd = np.arange(nmax + 1) % 2 == 1
        out[np.ix_(odd, neg)] *= -1.0
    return out.reshape((nmax + 1,) + x.shape)


def bessel_j(n, x):
    """Bessel function of the first kind J_n(x), integer n of either sign."""
    n = int(n)
    xa = np.asarray(x, dtype=float)
    flat = xa.ravel()
    na = abs(n)
    res = np.empty(flat.size)
    small = np.abs(flat) < BESSEL_SERIES_MAX
    if small.any():
        res[small] = _bessel_series(na, flat[small])
    if (~small).any():
        res[~small] = bessel_j_orders(na, flat[~small])[na]
    if n < 0 and na % 2:
        res = -res
    res = res.reshape(xa.shape)
    return float(res) if res.ndim == 0 else res


# ---------------------------------------------------------------- M_r kernels

def _laguerre_poly(r, y):
    # L_r(y) = sum_j C(r, j) (-y)^j / j!
    term = np.ones_like(y)
    total = term.copy()
    for j in range(1, r + 1):
        term = term * (-(r - j + 1) * y) / (j * j)
        total = total + term
    return total


def m_r_kernel(r, x):
    """M_r(x) = sum_j r!/((r+1)^j (r-j)!) (-1)^j/(j!)^2 (x/2)^(2j) e^(-x^2/(4(r+1)))."""
    if r < 0:
        raise DomainError("r must be nonnegative")
    x = np.asarray(x, dtype=float)
    y = x * x / (4.0 * (r + 1))
    out = _laguerre_poly(r, y) * np.exp(-y)
    return float(out) if out.ndim == 0 else out


def middle_limit_kernel(r, x):
    """Radial limit of the rescaled ell-r regime covariance at ``shrink_rate``.

    L_r(y) e^(-y/2) with y = x^2/(4(r+1)). Differs from ``m_r_kernel`` by the
    Gaussian width; this one is what the Wigner d-function actually converges
    to under the rate 1/sqrt((r+1)(2 ell - r)).
    """
    if r < 0:
        raise DomainError("r must be nonnegative")
    x = np.asarray(x, dtype=float)
    y = x * x / (4.0 * (r + 1))
    out = _laguerre_poly(r, y) * np.exp(-0.5 * y)
    return float(out) if out.ndim == 0 else out

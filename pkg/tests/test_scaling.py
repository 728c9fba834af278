import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinfields.errors import ConfigError, DomainError
from spinfields.field_model import SpinSpectrum
from spinfields.grids import DiskGrid
from spinfields.scaling import (BargmannFockSampler, BerrySampler, RegimeSpec, RescaledSampler, bf_truncation,
                                chart_rate, circle_average, helmholtz_residual, limit_covariance,
                                rescaled_covariance, sample_berry, shrink_rate)
from spinfields.special_fn import bessel_j, middle_limit_kernel


def test_regime_json_and_beta():
    assert RegimeSpec("berry").beta == 0.0
    assert RegimeSpec("middle", 1).beta == 0.25
    assert RegimeSpec("bargmann_fock").beta == 0.5
    for r in (RegimeSpec("berry"), RegimeSpec("middle", 3), RegimeSpec("bargmann_fock")):
        assert RegimeSpec.from_json(r.to_json()) == r
    with pytest.raises(DomainError):
        RegimeSpec("middle")
    with pytest.raises(DomainError):
        RegimeSpec("other")


def test_shrink_rate_values():
    assert shrink_rate(10, 2) == 1 / math.sqrt(9 * 12)
    assert shrink_rate(5, 5) == 1 / math.sqrt(10)
    with pytest.raises(DomainError):
        shrink_rate(3, 4)


def test_rescaled_covariance_limits():
    x = np.linspace(0, 8, 81)
    z0 = np.zeros_like(x, complex)
    spec = SpinSpectrum.monochromatic(256, 2)
    err = np.abs(rescaled_covariance(spec, shrink_rate(256, 2), z0, x) - bessel_j(0, x))
    assert err.max() < 1e-3
    bf = RegimeSpec("bargmann_fock")
    rng = np.random.default_rng(1)
    z1 = rng.uniform(-2, 2, 50) + 1j * rng.uniform(-2, 2, 50)
    z2 = rng.uniform(-2, 2, 50) + 1j * rng.uniform(-2, 2, 50)
    cov = rescaled_covariance(SpinSpectrum.monochromatic(128, 128), chart_rate(bf, 128, 128), z1, z2)
    assert np.max(np.abs(cov - limit_covariance(bf, z1, z2))) < 0.01


def test_middle_regime_radial_limit():
    x = np.linspace(0, 8, 81)
    cov = rescaled_covariance(SpinSpectrum.monochromatic(256, 255), shrink_rate(256, 255), np.zeros(81, complex), x)
    assert np.max(np.abs(cov - middle_limit_kernel(1, x))) < 5e-3


def test_berry_sampler_checks_truncation():
    with pytest.raises(ConfigError):
        BerrySampler(DiskGrid(3.0, 16), truncation=10)
    with pytest.raises(ConfigError):
        BargmannFockSampler(DiskGrid(3.0, 16), truncation=3)
    assert bf_truncation(3.0) > 20


@given(st.integers(0, 10 ** 6), st.floats(0.1, 4.0))
def test_circle_average_identity(seed, r):
    pts = np.array([0j, r + 0j])
    f = sample_berry(pts, None, seed).spectral
    avg = circle_average(f, r)
    assert abs(avg - f(0j) * bessel_j(0, r)) < 1e-6


def test_helmholtz_residual_small():
    f = BerrySampler(DiskGrid(3.0, 40)).sample(5)
    assert helmholtz_residual(f) < 1e-8


def test_bargmann_fock_variance(rng):
    z = np.array([0j, 1.5 + 0.5j, -2.0j])
    s = BargmannFockSampler(z)
    v = np.array([np.abs(s.sample(rng).values) ** 2 for _ in range(4000)])
    assert np.all(np.abs(v.mean(axis=0) - 1) < 4 * v.std(axis=0) / np.sqrt(len(v)))


def test_rescaled_sampler_is_unit_variance(rng):
    spec = SpinSpectrum.monochromatic(12, 2)
    z = np.array([0j, 1 + 1j])
    s = RescaledSampler(spec, shrink_rate(12, 2), z)
    v = np.array([np.abs(s.sample(rng).values) ** 2 for _ in range(3000)])
    assert np.all(np.abs(v.mean(axis=0) - 1) < 4 * v.std(axis=0) / np.sqrt(len(v)))

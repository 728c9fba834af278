import math

import numpy as np
import pytest

from spinfields import kernels
from spinfields.field_model import SphereSynthesizer, SpinSpectrum, replicate_seed, sample_coefficients
from spinfields.geometry import (alexander_check, analyze, betti_numbers, complement_component_count,
                                 critical_points_modulus, excursion_mask, indicator_mask, lk_curvatures,
                                 zero_count, zero_set)
from spinfields.grids import ComplexGridField, DiskGrid, SphereGrid
from spinfields.harness import scaled
from spinfields.scaling import BargmannFockSampler

SG = SphereGrid(256, 512)


def _cap(lo, hi):
    c = np.cos(SG.theta)[:, None] * np.ones(SG.n_phi)
    return indicator_mask(SG, np.minimum(c - lo, hi - c), poles=(1.0 <= hi, -1.0 >= lo))


def test_polar_cap():
    m = _cap(0.5, 2.0)
    L0, L1, L2 = lk_curvatures(m)
    assert L0 == 1 and betti_numbers(m) == (1, 0, 0)
    assert abs(L2 - math.pi) < 0.03
    assert abs(2 * L1 - math.pi * math.sqrt(3)) / (math.pi * math.sqrt(3)) < 0.01
    assert alexander_check(m)


def test_band_has_one_loop():
    m = _cap(-0.3, 0.6)
    assert betti_numbers(m) == (1, 1, 0)
    assert complement_component_count(m) == 2 and alexander_check(m)
    assert abs(lk_curvatures(m)[2] - 2 * math.pi * 0.9) < 0.03


def test_full_sphere():
    m = _cap(-2.0, 2.0)
    assert betti_numbers(m) == (1, 0, 1) and lk_curvatures(m)[0] == 2 and alexander_check(m)


def test_annulus_on_disk():
    g = DiskGrid(3.0, 200)
    r = np.abs(g.points)
    m = indicator_mask(g, 1.0 - np.abs(r - 1.5))
    L0, L1, L2 = lk_curvatures(m)
    assert L0 == 0 and betti_numbers(m) == (1, 1, 0)
    assert abs(L2 - 6 * math.pi) < 0.15
    assert abs(2 * L1 - 6 * math.pi) / (6 * math.pi) < 0.01


def test_polynomial_zeros_on_disk():
    g = DiskGrid(3.0, 120)
    z = g.points
    roots = (0.3 + 0.2j, -1.1 + 0.7j, 1.6 - 1.2j)
    f = ComplexGridField(g, (z - roots[0]) * (z - roots[1]) * np.conj(z - roots[2]))
    zs = zero_set(f)
    assert zs.count == 3
    ci, cj, x, y = zs.positions
    found = list(complex(g.x[i] + a * g.h, g.x[j] + b * g.h) for i, j, a, b in zip(ci, cj, x, y))
    for r in roots:
        assert min(abs(r - w) for w in found) < 1e-2


def test_sphere_zeros_bulk_and_poles():
    th, ph = SG.theta[:, None], SG.phi[None, :]
    x, y, zc = np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th) * np.ones_like(ph)
    assert zero_count(ComplexGridField(SG, zc + 1j * x, poles=(1.0, -1.0))) == 2
    assert zero_count(ComplexGridField(SG, x + 1j * y, poles=(0.0, 0.0))) == 2


def test_holomorphic_zero_count():
    spec = SpinSpectrum.monochromatic(5, 5)
    synth = SphereSynthesizer(spec, SphereGrid(128, 256))
    for r in range(3):
        assert zero_count(synth.synthesize(sample_coefficients(spec, replicate_seed(0, r)))) == 10


def test_random_field_invariants():
    spec = SpinSpectrum.monochromatic(6, 0)
    synth = SphereSynthesizer(spec, SphereGrid(256, 512))
    agree = 0
    for r in range(6):
        f = scaled(synth.synthesize(sample_coefficients(spec, replicate_seed(3, r))))
        for u in (0.5, 1.5):
            row = analyze(f, u, r)
            assert row.L0 == row.b0 - row.b1 + row.b2
            assert row.flags["alexander_ok"] == 1
            agree += row.flags["morse_ok"]
    assert agree >= 11


def test_critical_point_counts_at_zero_level():
    # at u = 0 every zero is a minimum of |f|^2 and the signed sum is chi(S^2) = 2
    spec = SpinSpectrum.monochromatic(5, 0)
    f = scaled(SphereSynthesizer(spec, SphereGrid(256, 512)).synthesize(sample_coefficients(spec, 4)))
    assert critical_points_modulus(f, 0.0).signed_sum == 2


def test_excursion_level_rejects_negative():
    with pytest.raises(ValueError):
        excursion_mask(ComplexGridField(DiskGrid(1.0, 4), np.ones((4, 4), complex)), -1.0)


def test_bargmann_fock_holes_contain_zeros():
    # log|f| is superharmonic away from zeros, so a bounded hole of {|f| >= u} must hold a zero
    g = DiskGrid(3.0, 160)
    sampler = BargmannFockSampler(g)
    cx = g.complex
    rim = g.inside & ~np.pad(g.inside[1:-1, 1:-1] & g.inside[:-2, 1:-1] & g.inside[2:, 1:-1]
                             & g.inside[1:-1, :-2] & g.inside[1:-1, 2:], 1)
    seen = 0
    for r in range(30):
        f = scaled(sampler.sample(replicate_seed(8, r)))
        mask = excursion_mask(f, 1.0)
        comp = ~mask.vertices() & cx.domain
        lab, n = kernels.label_components(cx.n_vertices, np.concatenate([cx.edges, cx.diagonals]), comp)
        lab = lab.reshape(g.shape)
        holes = set(range(n)) - set(lab[rim & (lab >= 0)].tolist())
        ci, cj, x, y = zero_set(f).positions
        hit = set(lab[ci + np.rint(x).astype(int), cj + np.rint(y).astype(int)].tolist())
        assert holes <= hit
        seen += len(holes)
    assert seen > 0

"""Acceptance runs, one or more tests per numbered criterion.

Each test records a PASS/FAIL line; the terminal summary prints one line per
criterion. The Monte Carlo runs are shared through module fixtures.
"""
import math
import time

import numpy as np
import pytest

from conftest import record
from spinfields.closed_form import det_integral, expected_zeros, kac_rice_zeros
from spinfields.field_model import SpinSpectrum, circular_covariance, jet_covariance
from spinfields.harness import ExperimentConfig, run
from spinfields.scaling import RegimeSpec, chart_rate, rescaled_covariance
from spinfields.special_fn import bessel_j, wigner_d, wigner_d_rows


def _run(**cfg):
    return run(ExperimentConfig.from_dict(cfg))


@pytest.fixture(scope="module")
def zeros_run():
    return _run(experiment="zeros")


@pytest.fixture(scope="module")
def holomorphic_run():
    return _run(experiment="zeros", ell=5, spin=5)


@pytest.fixture(scope="module")
def excursion_run():
    return _run(experiment="excursion")


def _report(res, name):
    return next(r for r in res.reports if r.name == name)


# ---------------------------------------------------------------- 1 and 2

def test_c1_zero_count_law(zeros_run):
    r = _report(zeros_run, "zeros")
    ok = abs(r.empirical - 106.0377) <= 3 * r.std_error and zeros_run.wall_clock <= 300
    assert record(1, "mean zeros ell=10 s=2", ok,
                  f"mean={r.empirical:.3f} se={r.std_error:.3f} target=106.0377 t={zeros_run.wall_clock:.0f}s")


def test_c2_holomorphic_edge_case(holomorphic_run):
    r = _report(holomorphic_run, "zeros")
    ok = abs(r.empirical - 10) <= 3 * r.std_error and holomorphic_run.wall_clock <= 120
    assert record(2, "mean zeros ell=s=5", ok,
                  f"mean={r.empirical:.3f} se={r.std_error:.3f} target=10 t={holomorphic_run.wall_clock:.0f}s")


# ---------------------------------------------------------------------- 3

@pytest.mark.parametrize("u", [0.5, 1.0, 2.0])
def test_c3_gkf_spin0(excursion_run, u):
    lam = 15 * 16
    e = math.exp(-u * u / 2)
    area = _report(excursion_run, f"L2@u={u!r}")
    length = _report(excursion_run, f"length@u={u!r}")
    chi = _report(excursion_run, f"chi@u={u!r}")
    t_area, t_len, t_chi = 4 * math.pi * e, math.sqrt(lam) * 2 * math.pi ** 1.5 * u * e, (lam * (u * u - 1) + 2) * e
    ok_a = abs(area.empirical - t_area) <= 3 * area.std_error
    ok_l = abs(length.empirical - t_len) <= max(3 * length.std_error, 0.03 * t_len)
    ok_c = abs(chi.empirical - t_chi) <= 3 * chi.std_error
    ok = ok_a and ok_l and ok_c and excursion_run.wall_clock <= 600
    assert record(3, f"u={u}", ok,
                  f"area z={area.z_score:.2f} length z={length.z_score:.2f} chi z={chi.z_score:.2f}")


# ---------------------------------------------------------------------- 4

def test_c4_berry_sweep():
    t0 = time.perf_counter()
    res = _run(experiment="convergence", regime={"kind": "berry"}, spin=2, ells=[32, 64, 128, 256])
    e = res.results["sup_errors"]
    ok = res.results["strictly_decreasing"] and e[-1] <= 0.02 and time.perf_counter() - t0 <= 60
    assert record(4, "berry s=2 sweep", ok, "errors " + ", ".join(f"{x:.2e}" for x in e))


def test_c4_bargmann_fock():
    res = _run(experiment="convergence", regime={"kind": "bargmann_fock"}, ells=[128])
    e = res.results["final_error"]
    assert record(4, "bargmann-fock ell=128", e <= 0.01, f"error {e:.2e}")


def test_c4_middle_regime():
    res = _run(experiment="convergence", regime={"kind": "middle", "r": 1}, ells=[256])
    e = res.results["final_error"]
    exact = float(res.tables["convergence"][1][0][4])
    assert record(4, "middle r=1 ell=256 vs M_1", e <= 0.02,
                  f"error {e:.3f} (vs exact planar limit {exact:.1e})")


# ---------------------------------------------------------------------- 5

def _fd_jet(k, rho, h):
    e = (0, 1, 1j)
    out = np.zeros((3, 3), complex)
    for a in range(3):
        for b in range(3):
            tot = 0
            for p in ((1,) if a == 0 else (1, -1)):
                for q in ((1,) if b == 0 else (1, -1)):
                    z1 = p * h * e[a] if a else 0j
                    z2 = q * h * e[b] if b else 0j
                    tot += (p if a else 1) * (q if b else 1) * rescaled_covariance(k, rho, z1, z2)
            out[a, b] = tot / ((2 * h) ** (a > 0) * (2 * h) ** (b > 0))
    return out


@pytest.mark.parametrize("ell,s", [(8, 0), (10, 2), (12, 12)])
def test_c5_jet_covariance(ell, s):
    t0 = time.perf_counter()
    reg = RegimeSpec("bargmann_fock") if s == ell else RegimeSpec("berry")
    rho = chart_rate(reg, ell, s)
    k = circular_covariance(SpinSpectrum.monochromatic(ell, s))
    d = np.diag([1.0, rho, rho])
    ref = d @ jet_covariance(k).matrix @ d
    h = 1e-2
    fd = (4 * _fd_jet(k, rho, h / 2) - _fd_jet(k, rho, h)) / 3
    err = float(np.abs(fd - ref).max())
    ok = err <= 1e-5 and time.perf_counter() - t0 <= 10
    assert record(5, f"(ell,s)=({ell},{s})", ok, f"max entry error {err:.1e}")


# ---------------------------------------------------------------------- 6

def test_c6_kac_rice_lattice():
    worst = 0.0
    n = 0
    for k0 in (0.25, 0.5, 1.0, 2.0, 5.0):
        for s in (0, 1, 2, 5):
            for t in (0.01, 0.3, 1.0, 7.0, 40.0):
                k2 = -(s * k0 / 2 + t)
                worst = max(worst, abs(kac_rice_zeros(k0, k2, s) - expected_zeros(k0, k2, s)))
                n += 1
    assert n == 100
    assert record(6, "algebraic identity", worst <= 1e-12, f"max abs diff {worst:.1e} over {n} points")


def test_c6_det_integral_monte_carlo():
    rng = np.random.default_rng(20240601)
    n = 10 ** 6
    g1 = math.sqrt(0.5) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    g2 = (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    x = np.abs(np.abs(g1) ** 2 - np.abs(g2) ** 2)
    se = x.std(ddof=1) / math.sqrt(n)
    ok = abs(x.mean() - det_integral(1, 2)) <= 3 * se and det_integral(1, 2) == 5 / 3
    assert record(6, "det_integral(1,2)", ok, f"mc={x.mean():.5f} se={se:.1e} exact={5 / 3:.5f}")


# ---------------------------------------------------------------------- 7

def test_c7_row_normalization():
    th = np.linspace(0, np.pi, 37)
    worst = 0.0
    for ell in range(33):
        for s in range(-ell, ell + 1):
            worst = max(worst, float(np.abs(np.sum(wigner_d_rows(ell, s, th) ** 2, axis=1) - 1).max()))
    assert record(7, "row normalization ell<=32", worst <= 1e-9, f"max deviation {worst:.1e}")


def test_c7_bessel_limit_monotone():
    x = np.linspace(0, 8, 161)
    ells = list(range(32, 257, 16))
    ok = True
    finals = []
    for m, s in ((0, 0), (1, 1), (2, -1), (0, 2), (3, 0)):
        e = [np.abs(wigner_d(L, m, s, x / L) - (-1) ** (m + s) * bessel_j(m + s, x)).max() for L in ells]
        ok &= all(a > b for a, b in zip(e, e[1:]))
        finals.append(e[-1])
    assert record(7, "bessel limit monotone", ok, f"errors at ell=256 <= {max(finals):.1e}")


def test_c7_bessel_ode_residual():
    x = np.linspace(0.0, 30.0, 601)
    worst = 0.0
    for n in range(0, 11):
        J = lambda k: bessel_j(k, x)
        d1 = 0.5 * (J(n - 1) - J(n + 1))
        d2 = 0.25 * (J(n - 2) - 2 * J(n) + J(n + 2))
        worst = max(worst, float(np.abs(x * x * d2 + x * d1 + (x * x - n * n) * J(n)).max()))
    assert record(7, "bessel ode residual", worst <= 1e-9, f"max residual {worst:.1e}")


# ---------------------------------------------------------------------- 8

def test_c8_topology_cross_checks(zeros_run, holomorphic_run, excursion_run):
    rows = zeros_run.rows + holomorphic_run.rows + excursion_run.rows
    euler = all(r.L0 == r.b0 - r.b1 + r.b2 for r in rows)
    alex = all(r.flags["alexander_ok"] == 1 for r in rows)
    assert record(8, "euler and alexander on every replicate", euler and alex, f"{len(rows)} replicate-levels")


def test_c8_morse_rate(zeros_run, holomorphic_run, excursion_run):
    rates = []
    for name, res in (("c1", zeros_run), ("c2", holomorphic_run), ("c3", excursion_run)):
        ok = sum(r.flags["morse_ok"] for r in res.rows)
        rates.append(f"{name} {ok}/{len(res.rows)}")
    rows = zeros_run.rows + holomorphic_run.rows + excursion_run.rows
    rate = sum(r.flags["morse_ok"] for r in rows) / len(rows)
    assert record(8, "morse signed sum", rate >= 0.95, f"pooled {rate:.1%} ({', '.join(rates)})")


# ---------------------------------------------------------------------- 9

def test_c9_berry_field():
    res = _run(experiment="berry_props")
    h, c = res.results["max_helmholtz_residual"], res.results["max_circle_average_error"]
    var_ok = all(abs(r.z_score) <= 3 for r in res.reports)
    ok = h <= 1e-8 and c <= 1e-6 and var_ok and res.wall_clock <= 120
    zs = ", ".join(f"{r.z_score:.2f}" for r in res.reports)
    assert record(9, "helmholtz, circle average, variance", ok,
                  f"residual {h:.1e} circle {c:.1e} variance z [{zs}]")


# --------------------------------------------------------------------- 10

def test_c10_berry_two_sampler_tv():
    res = _run(experiment="limit_topology")
    tv = res.results["tv@u=1.0"]
    ok = tv <= 0.15 and res.wall_clock <= 600
    assert record(10, "berry rescaled vs limit TV", ok, f"tv={tv:.3f} (300+300, u=1)")


def test_c10_bargmann_fock_b1_zero():
    res = _run(experiment="limit_topology", regime={"kind": "bargmann_fock"})
    holes = res.results["replicates_with_b1>0@u=1.0"]
    ok = holes["rescaled"] == 0 and holes["limit"] == 0
    assert record(10, "bargmann-fock b1=0", ok,
                  f"replicates with b1>0: rescaled {holes['rescaled']}/300, limit {holes['limit']}/300")

"""Experiment configuration, replicated runs and result emission.

Every replicate draws from its own stream replicate_seed(base_seed, id), so
rows do not depend on thread count or execution order. Excursion levels
refer to the field scaled so that its real and imaginary parts have unit
variance (|f| >= u then has probability exp(-u^2/2)).
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import os
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__, kernels
from .closed_form import ExpectationReport, berry_expectations, expected_zeros, gkf_spin0
from .errors import ConfigError, DomainError, ModelError, ResolutionAbort
from .field_model import (SphereSynthesizer, SpinSpectrum, circular_covariance, replicate_seed,
                          sample_coefficients)
from .geometry import GeometrySummary, analyze, zero_set
from .grids import ComplexGridField, DiskGrid, SphereGrid
from .scaling import (BargmannFockSampler, BerrySampler, RegimeSpec, RescaledSampler, chart_rate,
                      helmholtz_operator, helmholtz_residual, limit_covariance, rescaled_covariance)
from .special_fn import bessel_j, bessel_j_orders, m_r_kernel, middle_limit_kernel, wigner_d_rows

EXPERIMENTS = ("zeros", "excursion", "convergence", "limit_topology", "berry_props", "special_fn_table")

# field scale that gives the real and imaginary parts unit variance
LEVEL_SCALE = math.sqrt(2.0)

DEFAULTS = {
    "zeros": {"ell": 10, "spin": 2, "levels": [0.0], "replicates": 200},
    "excursion": {"ell": 15, "spin": 0, "levels": [0.5, 1.0, 2.0], "replicates": 100},
    "convergence": {"regime": {"kind": "berry"}, "spin": 2, "ells": [32, 64, 128, 256], "xmax": 8.0,
                    "design": "radial", "n_design": 161},
    "limit_topology": {"regime": {"kind": "berry"}, "ell": 64, "spin": 2, "levels": [1.0], "replicates": 300,
                       "disk_radius": 3.0, "disk_n": 160, "tv_caps": [6, 2]},
    "berry_props": {"replicates": 5000, "radii": [0.5, 1.0, 2.0, 3.0], "n_circle": 256},
    "special_fn_table": {"ell": 4, "spin": 1, "thetas": [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0], "nmax": 4,
                         "xs": [0.0, 1.0, 2.5, 5.0, 10.0, 20.0], "r_max": 3, "replicates": 1},
}

FIELDS = ("experiment", "ell", "spin", "spectrum", "regime", "levels", "replicates", "n_theta", "n_phi",
          "disk_radius", "disk_n", "ells", "xmax", "design", "n_design", "radii", "n_circle", "thetas",
          "nmax", "xs", "r_max", "tv_caps", "abort_fraction", "base_seed", "threads", "output")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    ell: int | None = None
    spin: int = 0
    spectrum: SpinSpectrum | None = None
    regime: RegimeSpec | None = None
    levels: tuple = (0.0,)
    replicates: int = 1
    n_theta: int = 512
    n_phi: int | None = None
    disk_radius: float = 3.0
    disk_n: int = 160
    ells: tuple = ()
    xmax: float = 8.0
    design: str = "radial"
    n_design: int = 161
    radii: tuple = ()
    n_circle: int = 256
    thetas: tuple = ()
    nmax: int = 4
    xs: tuple = ()
    r_max: int = 3
    tv_caps: tuple = (6, 2)
    abort_fraction: float = 0.01
    base_seed: int = 0
    threads: int = 1
    output: str | None = None

    @classmethod
    def from_dict(cls, obj, **overrides):
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        data = dict(obj)
        data.update({k: v for k, v in overrides.items() if v is not None})
        exp = data.get("experiment")
        if exp not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {exp!r}")
        unknown = set(data) - set(FIELDS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged = dict(DEFAULTS[exp])
        merged.update(data)
        try:
            if merged.get("spectrum") is not None:
                merged["spectrum"] = SpinSpectrum.from_dict(merged["spectrum"])
            if merged.get("regime") is not None:
                merged["regime"] = RegimeSpec.from_dict(merged["regime"])
            for key in ("levels", "ells", "radii", "thetas", "xs", "tv_caps"):
                if key in merged:
                    merged[key] = tuple(merged[key])
            cfg = cls(**merged)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path, **overrides):
        try:
            with open(path) as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(obj, **overrides)

    def to_dict(self):
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, (SpinSpectrum, RegimeSpec)):
                v = v.to_dict()
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out

    def config_hash(self):
        """sha256 of every field that can change the emitted tables."""
        d = self.to_dict()
        d.pop("output")
        d.pop("threads")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()

    # ------------------------------------------------------------ checks
    def model(self):
        """SpinSpectrum of a sphere experiment (explicit spectrum or monochromatic ell)."""
        if self.spectrum is not None:
            return self.spectrum
        return SpinSpectrum.monochromatic(self.ell, self.spin)

    def validate(self):
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(isinstance(self.replicates, int) and self.replicates >= 1, "replicates must be a positive integer")
        need(isinstance(self.threads, int) and self.threads >= 1, "threads must be a positive integer")
        need(isinstance(self.base_seed, int) and 0 <= self.base_seed < 2 ** 64, "base_seed must be a 64-bit unsigned integer")
        need(all(isinstance(u, (int, float)) and u >= 0 and math.isfinite(u) for u in self.levels), "levels must be finite and nonnegative")
        need(len(self.levels) >= 1, "need at least one level")
        need(0 < self.abort_fraction <= 1, "abort_fraction must lie in (0, 1]")
        exp = self.experiment
        try:
            if exp in ("zeros", "excursion"):
                spec = self.model()
                k = circular_covariance(spec)
                expected_zeros(k.k0, k.k2, spec.spin)
                SphereGrid(self.n_theta, self.n_phi or 2 * self.n_theta)
                if exp == "excursion" and spec.spin != 0:
                    need(self.spectrum is None, "spin-s excursion targets need a monochromatic model")
                    need(self.ell > abs(self.spin), "spin-s excursion targets need ell > |s|")
            elif exp == "convergence":
                need(self.regime is not None, "convergence needs a regime")
                need(len(self.ells) >= 1, "convergence needs ells")
                need(self.design in ("radial", "planar"), "design must be radial or planar")
                need(self.xmax > 0 and self.n_design >= 2, "need xmax > 0 and n_design >= 2")
                for ell in self.ells:
                    s = self.regime.spin_for(ell, self.spin)
                    need(0 <= abs(s) <= ell and ell >= 1, f"regime spin {s} invalid at ell={ell}")
                    need(chart_rate(self.regime, ell, s) * self.xmax <= np.pi, f"design overflows the chart at ell={ell}")
            elif exp == "limit_topology":
                need(self.regime is not None and self.regime.kind in ("berry", "bargmann_fock"),
                     "limit topology needs a berry or bargmann_fock regime")
                s = self.regime.spin_for(self.ell, self.spin)
                need(self.ell is not None and abs(s) <= self.ell, "invalid ell/spin")
                grid = DiskGrid(self.disk_radius, self.disk_n)
                need(chart_rate(self.regime, self.ell, s) * grid.radius <= np.pi, "disk overflows the chart")
                need(len(self.tv_caps) == 2 and min(self.tv_caps) >= 1, "tv_caps needs two positive caps")
            elif exp == "berry_props":
                need(len(self.radii) >= 1 and all(r > 0 for r in self.radii), "radii must be positive")
                need(self.n_circle >= 8, "n_circle must be >= 8")
            elif exp == "special_fn_table":
                SpinSpectrum.monochromatic(self.ell, self.spin)
                need(all(0 <= t <= np.pi for t in self.thetas), "thetas must lie in [0, pi]")
                need(self.nmax >= 0 and self.r_max >= 0, "nmax and r_max must be nonnegative")
        except (DomainError, ModelError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc


@dataclass
class RunResult:
    config: ExperimentConfig
    rows: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)  # name -> (header, rows)
    flags: dict = field(default_factory=dict)
    seeds: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    wall_clock: float = 0.0


def _map(cfg, fn, ids):
    if cfg.threads == 1:
        return [fn(i) for i in ids]
    with ThreadPoolExecutor(max_workers=cfg.threads) as ex:
        return list(ex.map(fn, ids))


def _seed_record(cfg, ids):
    return [{"replicate": int(i), "seed": int(replicate_seed(cfg.base_seed, i).generate_state(1, np.uint64)[0])}
            for i in ids]


def scaled(field_, c=LEVEL_SCALE):
    poles = None if field_.poles is None else tuple(c * np.asarray(field_.poles))
    return ComplexGridField(field_.grid, c * field_.values, poles, spectral=field_.spectral, spin=field_.spin)


def _flag_totals(rows):
    tot = Counter()
    for row in rows:
        for k, v in row.flags.items():
            if isinstance(v, (int, np.integer)):
                tot[k] += int(v)
    tot["rows"] = len(rows)
    return dict(sorted(tot.items()))


def _sphere_rows(cfg):
    spec = cfg.model()
    grid = SphereGrid(cfg.n_theta, cfg.n_phi or 2 * cfg.n_theta)
    synth = SphereSynthesizer(spec, grid)

    def one(r):
        f = scaled(synth.synthesize(sample_coefficients(spec, replicate_seed(cfg.base_seed, r))))
        zs = zero_set(f)
        if zs.flagged_cells > cfg.abort_fraction * zs.cells:
            raise ResolutionAbort(f"replicate {r}: {zs.flagged_cells} of {zs.cells} cells hold several zeros")
        return [analyze(f, u, r, zeros=zs) for u in cfg.levels]

    return [row for rows in _map(cfg, one, range(cfg.replicates)) for row in rows]


def _zeros_report(cfg, rows):
    spec = cfg.model()
    k = circular_covariance(spec)
    first = [r.zeros for r in rows if r.u == cfg.levels[0]]
    return ExpectationReport.from_samples("zeros", expected_zeros(k.k0, k.k2, spec.spin), first)


def run_zeros(cfg):
    t0 = time.perf_counter()
    rows = _sphere_rows(cfg)
    res = RunResult(cfg, rows, [_zeros_report(cfg, rows)], flags=_flag_totals(rows),
                    seeds=_seed_record(cfg, range(cfg.replicates)))
    res.wall_clock = time.perf_counter() - t0
    return res


def excursion_targets(cfg, u):
    """(area, boundary length, chi, zeros) targets at level u."""
    spec = cfg.model()
    if spec.spin == 0:
        k = circular_covariance(spec)
        return gkf_spin0(2 * abs(k.k2) / k.k0, u)
    return berry_expectations(cfg.ell, cfg.spin, u)


def run_excursion(cfg):
    t0 = time.perf_counter()
    rows = _sphere_rows(cfg)
    reports = []
    for u in cfg.levels:
        at = [r for r in rows if r.u == u]
        area, length, chi, _ = excursion_targets(cfg, u)
        reports.append(ExpectationReport.from_samples(f"L2@u={u!r}", area, [r.L2 for r in at]))
        reports.append(ExpectationReport.from_samples(f"length@u={u!r}", length, [2 * r.L1 for r in at]))
        if u > 0:
            reports.append(ExpectationReport.from_samples(f"chi@u={u!r}", chi, [r.L0 for r in at]))
        for b in ("b0", "b1"):
            reports.append(ExpectationReport.from_samples(f"{b}@u={u!r}", math.nan, [getattr(r, b) for r in at]))
    reports.append(_zeros_report(cfg, rows))
    res = RunResult(cfg, rows, reports, flags=_flag_totals(rows), seeds=_seed_record(cfg, range(cfg.replicates)))
    res.wall_clock = time.perf_counter() - t0
    return res


# ---------------------------------------------------------- convergence

def convergence_design(cfg):
    """Pairs (z1, z2) on which the rescaled and limit covariances are compared."""
    if cfg.design == "radial":
        x = np.linspace(0.0, cfg.xmax, cfg.n_design)
        return np.zeros_like(x, complex), x.astype(complex)
    h = cfg.xmax / 2
    g = np.linspace(-h, h, 9) / math.sqrt(2)
    pts = (g[:, None] + 1j * g[None, :]).ravel()
    z1, z2 = np.meshgrid(pts, pts, indexing="ij")
    return z1.ravel(), z2.ravel()


def convergence_errors(regime, ell, spin, z1, z2):
    """(rho, sup error vs the regime kernel, sup error vs the exact middle limit)."""
    s = regime.spin_for(ell, spin)
    spec = SpinSpectrum.monochromatic(ell, s)
    rho = chart_rate(regime, ell, s)
    k = circular_covariance(spec)
    cov = rescaled_covariance(k, rho, z1, z2)
    err = float(np.max(np.abs(cov - limit_covariance(regime, z1, z2))))
    alt = math.nan
    if regime.kind == "middle":
        ref = middle_limit_kernel(regime.r, np.abs(z1 - z2)) * np.exp(1j * regime.beta * np.imag(z1 * np.conj(z2)))
        alt = float(np.max(np.abs(cov - ref)))
    return rho, err, alt


def run_convergence(cfg):
    t0 = time.perf_counter()
    z1, z2 = convergence_design(cfg)
    out = _map(cfg, lambda ell: convergence_errors(cfg.regime, ell, cfg.spin, z1, z2), cfg.ells)
    rows = []
    for ell, (rho, err, alt) in zip(cfg.ells, out):
        rows.append([str(ell), str(cfg.regime.spin_for(ell, cfg.spin)), repr(rho), repr(err), repr(alt)])
    errs = [o[1] for o in out]
    res = RunResult(cfg, tables={"convergence": (("ell", "spin", "rho", "sup_error", "sup_error_exact_limit"), rows)})
    res.results = {"sup_errors": errs, "strictly_decreasing": bool(all(a > b for a, b in zip(errs, errs[1:]))),
                   "final_error": errs[-1]}
    res.wall_clock = time.perf_counter() - t0
    return res


# ------------------------------------------------------- limit topology

def _capped(pairs, caps):
    return [(min(b0, caps[0]), min(b1, caps[1])) for b0, b1 in pairs]


def tv_distance(a, b):
    """Total variation between the empirical laws of two samples of hashable outcomes."""
    ca, cb = Counter(a), Counter(b)
    keys = set(ca) | set(cb)
    return 0.5 * sum(abs(ca[k] / len(a) - cb[k] / len(b)) for k in keys)


def run_limit_topology(cfg):
    t0 = time.perf_counter()
    regime = cfg.regime
    s = regime.spin_for(cfg.ell, cfg.spin)
    spec = SpinSpectrum.monochromatic(cfg.ell, s)
    grid = DiskGrid(cfg.disk_radius, cfg.disk_n)
    rescaled = RescaledSampler(spec, chart_rate(regime, cfg.ell, s), grid)
    limit = BerrySampler(grid) if regime.kind == "berry" else BargmannFockSampler(grid)
    n = cfg.replicates

    def one(i):
        sampler, tag = (rescaled, 0) if i < n else (limit, 1)
        f = scaled(sampler.sample(replicate_seed(cfg.base_seed, i)))
        zs = zero_set(f)
        rows = []
        for u in cfg.levels:
            row = analyze(f, u, i, zeros=zs)
            row.flags["sampler"] = tag
            rows.append(row)
        return rows

    rows = [row for rr in _map(cfg, one, range(2 * n)) for row in rr]
    hist_rows, tv_rows, results = [], [], {}
    for u in cfg.levels:
        a = _capped([(r.b0, r.b1) for r in rows if r.u == u and r.flags["sampler"] == 0], cfg.tv_caps)
        b = _capped([(r.b0, r.b1) for r in rows if r.u == u and r.flags["sampler"] == 1], cfg.tv_caps)
        tv = tv_distance(a, b)
        ca, cb = Counter(a), Counter(b)
        for key in sorted(set(ca) | set(cb)):
            hist_rows.append([repr(float(u)), str(key[0]), str(key[1]), str(ca[key]), str(cb[key])])
        with_holes = [sum(1 for r in rows if r.u == u and r.flags["sampler"] == t and r.b1 > 0) for t in (0, 1)]
        tv_rows.append([repr(float(u)), repr(tv), str(len(a)), str(len(b)), str(with_holes[0]), str(with_holes[1])])
        results[f"tv@u={u!r}"] = tv
        results[f"replicates_with_b1>0@u={u!r}"] = {"rescaled": with_holes[0], "limit": with_holes[1]}
    res = RunResult(cfg, rows, flags=_flag_totals(rows), seeds=_seed_record(cfg, range(2 * n)))
    res.tables = {
        "histogram": (("u", "b0", "b1", "count_rescaled", "count_limit"), hist_rows),
        "tv": (("u", "tv", "n_rescaled", "n_limit", "b1_positive_rescaled", "b1_positive_limit"), tv_rows),
    }
    res.results = dict(results, tv_caps=list(cfg.tv_caps), tv_calibration="artifact constant, no published rate")
    res.wall_clock = time.perf_counter() - t0
    return res


# ----------------------------------------------------------- Berry field

def run_berry_props(cfg):
    """Helmholtz residual, circle averages and pointwise variance of Berry samples."""
    t0 = time.perf_counter()
    radii = np.asarray(cfg.radii, float)
    th = 2 * np.pi * np.arange(cfg.n_circle) / cfg.n_circle
    circles = (radii[:, None] * np.exp(1j * th)[None, :]).ravel()
    pts = np.concatenate([[0j], radii.astype(complex), circles])
    sampler = BerrySampler(pts, truncation=None)
    J = bessel_j_orders(sampler.N, radii)
    var_target = J[0] ** 2 + 2 * np.sum(J[1:] ** 2, axis=0)
    J0 = bessel_j(0, radii)
    nr = len(radii)
    op = helmholtz_operator(pts, sampler.N)

    def one(i):
        f = sampler.sample(replicate_seed(cfg.base_seed, i))
        v = f.values
        circ = v[1 + nr:].reshape(nr, cfg.n_circle).mean(axis=1)
        avg_err = float(np.max(np.abs(circ - v[0] * J0)))
        return helmholtz_residual(f, operator=op), avg_err, np.abs(v[1:1 + nr]) ** 2

    out = _map(cfg, one, range(cfg.replicates))
    rows = []
    for i, (res_h, avg_err, p) in enumerate(out):
        rows.append([str(i), repr(res_h), repr(avg_err)] + [repr(float(x)) for x in p])
    mod2 = np.array([o[2] for o in out])
    reports = [ExpectationReport.from_samples(f"E|xi|^2@r={r!r}", float(t), mod2[:, k])
               for k, (r, t) in enumerate(zip(cfg.radii, var_target))]
    res = RunResult(cfg, reports=reports, seeds=_seed_record(cfg, range(cfg.replicates)))
    res.tables = {"berry_props": (("replicate_id", "helmholtz_residual", "circle_average_error")
                                  + tuple(f"abs2@r={r!r}" for r in cfg.radii), rows)}
    res.results = {"max_helmholtz_residual": max(o[0] for o in out),
                   "max_circle_average_error": max(o[1] for o in out), "truncation": sampler.N}
    res.wall_clock = time.perf_counter() - t0
    return res


# ------------------------------------------------------- function tables

def run_special_fn_table(cfg):
    t0 = time.perf_counter()
    th = np.asarray(cfg.thetas, float)
    d = wigner_d_rows(cfg.ell, cfg.spin, th)
    wig = [[str(cfg.ell), str(m), str(cfg.spin), repr(float(t)), repr(float(d[i, m + cfg.ell]))]
           for i, t in enumerate(th) for m in range(-cfg.ell, cfg.ell + 1)]
    xs = np.asarray(cfg.xs, float)
    J = bessel_j_orders(cfg.nmax, xs)
    bes = [[str(n), repr(float(x)), repr(float(J[n, i]))] for n in range(cfg.nmax + 1) for i, x in enumerate(xs)]
    mr = [[str(r), repr(float(x)), repr(float(v))] for r in range(cfg.r_max + 1)
          for x, v in zip(xs, m_r_kernel(r, xs))]
    res = RunResult(cfg)
    res.tables = {
        "wigner_d": (("ell", "m", "s", "theta", "d"), wig),
        "bessel_j": (("n", "x", "J"), bes),
        "m_r": (("r", "x", "M"), mr),
    }
    res.wall_clock = time.perf_counter() - t0
    return res


RUNNERS = {
    "zeros": run_zeros,
    "excursion": run_excursion,
    "convergence": run_convergence,
    "limit_topology": run_limit_topology,
    "berry_props": run_berry_props,
    "special_fn_table": run_special_fn_table,
}


def run(cfg):
    return RUNNERS[cfg.experiment](cfg)


# ------------------------------------------------------------- emission

def _write_csv(path, header, rows):
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def emit(result, out_dir):
    """Write summary.csv, reports.csv, one CSV per table and manifest.json; returns the paths."""
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {out_dir}: {exc}") from exc
    paths = []
    if result.rows:
        p = os.path.join(out_dir, "summary.csv")
        _write_csv(p, GeometrySummary.CSV_HEADER, [r.csv_row() for r in result.rows])
        paths.append(p)
    if result.reports:
        p = os.path.join(out_dir, "reports.csv")
        _write_csv(p, ExpectationReport.CSV_HEADER, [r.csv_row() for r in result.reports])
        paths.append(p)
    for name, (header, rows) in sorted(result.tables.items()):
        p = os.path.join(out_dir, f"{name}.csv")
        _write_csv(p, header, rows)
        paths.append(p)
    cfg = result.config
    manifest = {
        "experiment": cfg.experiment,
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "wall_clock_seconds": result.wall_clock,
        "seeds": result.seeds,
        "flags": result.flags,
        "results": result.results,
        "files": [os.path.basename(p) for p in paths],
    }
    p = os.path.join(out_dir, "manifest.json")
    try:
        with open(p, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write {p}: {exc}") from exc
    paths.append(p)
    return paths


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not serializable: {type(obj)}")

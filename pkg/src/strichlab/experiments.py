"""Scaling-exponent probes: Knapp necessity, dyadic operator growth, wave shells,
end-to-end ratio sweeps and the Bessel bound audits."""
from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bessel, exponents as ex
from .dispersion import DispersionRelation, RescaledProfile, Wave
from .norms import RadialAccumulator, data_norm, mixed_norm
from .propagator import (
    RadialProfile,
    SpaceTimeGrid,
    beta,
    frequency_l2_norm,
    harmonic_constant,
    knapp_data,
    required_nodes,
    t_nu,
    t_nu_fft,
)
from .sphere import sphere_area, zonal_lp_norm

DEFAULT_R_LIST = tuple(2.0**j for j in range(4, 10))
SLOPE_TOL = 0.05
RESIDUAL_MAX = 0.1


class HypothesisError(ValueError):
    """Exponents outside the hypotheses of the bound being probed."""


def _workers(workers: int | None) -> int:
    return max(1, os.cpu_count() or 1) if workers is None else max(1, int(workers))


def pmap(func, items, workers: int | None = None) -> list:
    """Order-preserving map, serial for one worker, process pool otherwise."""
    items = list(items)
    w = min(_workers(workers), len(items))
    if w <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=w) as pool:
        return list(pool.map(func, items))


def _inv(p) -> float:
    return float(ex.as_reciprocal(p))


# ---------------------------------------------------------------------------
# log-log fits


@dataclass(frozen=True)
class ScalingFit:
    samples: tuple[tuple[float, float], ...]
    slope: float
    intercept: float
    max_residual: float
    dropped: tuple[tuple[float, float], ...] = ()

    def agrees(self, predicted: float, tol: float = SLOPE_TOL) -> bool:
        return abs(self.slope - predicted) <= tol and self.max_residual < RESIDUAL_MAX


def _lsq(samples):
    x = np.log2([s[0] for s in samples])
    y = np.log2([s[1] for s in samples])
    A = np.stack([x, np.ones_like(x)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    res = np.abs(y - (slope * x + intercept))
    return float(slope), float(intercept), res


def fit_scaling(samples, allow_drop: bool = True) -> ScalingFit:
    """Least squares of log2 value against log2 R.

    If the smallest R sits more than three times further off the line through
    the other samples than any of them (pre-asymptotic contamination), the fit
    without it is returned and the dropped sample is recorded.
    """
    samples = tuple(sorted((float(R), float(v)) for R, v in samples))
    if len(samples) < 4:
        raise ValueError("a scaling fit needs at least 4 samples")
    if any(v <= 0 or not math.isfinite(v) for _, v in samples):
        raise ValueError("scaling fit needs positive finite values")
    if allow_drop and len(samples) >= 5:
        kept = samples[1:]
        slope, icpt, res = _lsq(kept)
        R0, v0 = samples[0]
        off = abs(math.log2(v0) - (slope * math.log2(R0) + icpt))
        if off > 3 * np.max(res):
            return ScalingFit(kept, slope, icpt, float(np.max(res)), samples[:1])
    slope, icpt, res = _lsq(samples)
    return ScalingFit(samples, slope, icpt, float(np.max(res)))


# ---------------------------------------------------------------------------
# Knapp necessity experiment


class Centering(enum.Enum):
    GROUP = "group"
    PHASE = "phase"
    BOTH = "both"

    def members(self) -> list["Centering"]:
        return [Centering.GROUP, Centering.PHASE] if self is Centering.BOTH else [self]


def tube_speed(rel: DispersionRelation, rho0: float, centering: Centering) -> float:
    """Velocity of the tube centre: omega'(rho0) for GROUP, omega(rho0) for PHASE."""
    if centering is Centering.GROUP:
        return float(rel.omega(rho0, 1))
    if centering is Centering.PHASE:
        return float(rel.omega(rho0, 0))
    raise ValueError("pick a single centering")


@dataclass(frozen=True)
class KnappConfig:
    n: int
    family: DispersionRelation
    p: object
    q: object
    rho0: float = 1.0
    R_list: tuple[float, ...] = DEFAULT_R_LIST
    centering: Centering = Centering.GROUP
    extra_pairs: tuple[tuple[object, object], ...] = ()

    def __post_init__(self):
        R = list(self.R_list)
        if any(b <= a for a, b in zip(R, R[1:])):
            raise ValueError("R_list must be strictly increasing")
        if R[0] < 16:
            raise ValueError("R_list must start at 16 or above")
        if len(R) < 4:
            raise ValueError("R_list needs at least 4 values")

    @property
    def pairs(self) -> tuple[tuple[object, object], ...]:
        out = [(self.p, self.q)]
        for pq in self.extra_pairs:
            if pq not in out:
                out.append(pq)
        return tuple(out)


def knapp_tube_field(n: int, rel: DispersionRelation, rho0: float, R: float, speed: float):
    """(profile, solution on the tube t in [R/2, R], |r - speed t| <= R^{1/2})."""
    w = math.sqrt(R)
    lo, hi = rho0 - 1 / w, rho0 + 1 / w
    chk = np.linspace(lo, hi, 65)
    max_speed = float(np.max(np.abs(rel.omega(chk, 1))))
    max_phase = float(np.max(np.abs(rel.omega(chk, 0))))
    t_max = R
    r_max = speed * R + w
    need = required_nodes((lo, hi), r_max, t_max, max_speed)
    h = knapp_data(R, rho0, n, nodes=max(64, math.ceil(1.5 * need)))
    nt = math.ceil((R / 2) / (math.pi / 4 / max_phase)) + 1
    nr = math.ceil(2 * w / (math.pi / 8)) + 1
    t = np.linspace(R / 2, R, nt)
    if speed * t[0] - w < 0:
        raise ValueError("tube reaches negative radii; raise R")
    grid = SpaceTimeGrid.tube(t, speed, w, nr, n)
    f = t_nu(h, bessel.nu_of(n, 0), rel, grid, bump=None, k=0)
    return h, f * ((2 * math.pi) ** (-n / 2))


def _radial_space_norm(field, n, p, q) -> float:
    """L^q_t L^p_x of a radial function from its radial samples."""
    return sphere_area(n) ** _inv(p) * mixed_norm(field, p, q)


def _knapp_sample(args):
    n, rel, rho0, R, centering, pairs = args
    h, f = knapp_tube_field(n, rel, rho0, R, tube_speed(rel, rho0, centering))
    data = frequency_l2_norm(h, n)
    rows = []
    for p, q in pairs:
        val = _radial_space_norm(f, n, p, q)
        rows.append((R, centering.value, p, q, val, data, val / data))
    mass = _radial_space_norm(f, n, 2, 2) ** 2  # space-time integral of |u|^2 over the tube
    return rows, mass


@dataclass
class KnappReport:
    config: KnappConfig
    rows: list = field(default_factory=list)
    masses: dict = field(default_factory=dict)
    field_fits: dict = field(default_factory=dict)
    ratio_fits: dict = field(default_factory=dict)
    data_fit: ScalingFit | None = None

    def predicted_field(self, p, q) -> float:
        return float(ex.knapp_field_exponent(self.config.n, p, q))

    def predicted_ratio(self, p, q) -> float:
        return float(ex.knapp_ratio_exponent(self.config.n, p, q))


def knapp_scaling_experiment(cfg: KnappConfig, workers: int | None = None) -> KnappReport:
    """Knapp lower bound: tube-restricted norms of the solution, their R-slopes and the data slope."""
    for p, q in cfg.pairs:
        ex.exponents(cfg.n, p, q)
    tasks = [
        (cfg.n, cfg.family, cfg.rho0, R, c, cfg.pairs)
        for c in cfg.centering.members()
        for R in cfg.R_list
    ]
    out = pmap(_knapp_sample, tasks, workers)
    rep = KnappReport(cfg)
    data = []
    for task, (rows, mass) in zip(tasks, out):
        rep.rows.extend(rows)
        rep.masses[(task[4].value, task[3])] = mass
        if task[4] is cfg.centering.members()[0]:
            data.append((task[3], rows[0][5]))
    rep.data_fit = fit_scaling(data)
    for c in cfg.centering.members():
        for p, q in cfg.pairs:
            sel = [r for r in rep.rows if r[1] == c.value and r[2] == p and r[3] == q]
            rep.field_fits[(c.value, p, q)] = fit_scaling([(r[0], r[4]) for r in sel])
            rep.ratio_fits[(c.value, p, q)] = fit_scaling([(r[0], r[6]) for r in sel])
    return rep


# ---------------------------------------------------------------------------
# dyadic operator probes


def random_profile(seed: int, index: int, modes: int = 16):
    """Smooth band-limited trigonometric profile on [1/2, 2] from a fixed seed."""
    rng = np.random.default_rng([seed, index])
    freqs = np.arange(modes) - modes // 2
    # algebraic decay keeps the profiles smooth on the scale of the annulus
    coef = (rng.standard_normal(modes) + 1j * rng.standard_normal(modes)) / (1.0 + np.abs(freqs)) ** 2

    def f(rho):
        x = 2 * np.pi * (np.asarray(rho, dtype=float) - 0.5) / 1.5
        return np.exp(1j * np.outer(x, freqs)) @ coef

    return RadialProfile.from_function(f, 128)


def probe_profiles(R: float, n: int, seed: int, count: int = 8) -> list[RadialProfile]:
    """Knapp profile at scale R (ρ0 = 1) followed by ``count`` random smooth profiles."""
    return [knapp_data(R, 1.0, n)] + [random_profile(seed, i) for i in range(count)]


@dataclass(frozen=True)
class ProbeSample:
    R: float
    probe: int
    p: object
    q: object
    value: float


def _shell_probe_sample(args):
    """All (probe, p, q) normalized shell norms at one R."""
    n, nu, phase, R, pairs, seed, count = args
    profiles = probe_profiles(R, n, seed, count)
    dr = math.pi / 8
    m = math.ceil(R / dr)
    dr = R / m
    r = R + dr * (np.arange(m) + 0.5)
    ps = sorted({float(p) for p, _ in pairs})
    out = []
    for idx, h in enumerate(profiles):
        holder = {}

        def reducer(vals, block, holder=holder):
            if "acc" not in holder:
                holder["acc"] = RadialAccumulator(n, r, np.full(m, dr), ps, vals.shape[0])
            holder["acc"](vals, block)

        grid = t_nu_fft(h, nu, phase, r, n, (-6 * R, 6 * R), rho_power=0.0, t_half=9 * R + 64, reducer=reducer)
        acc = holder["acc"]
        hn = h.l2_norm()
        for p, q in pairs:
            out.append(ProbeSample(R, idx, p, q, acc.mixed_norm(p, q, grid.t_weights) / hn))
    return out


@dataclass
class ProbeReport:
    n: int
    nu: float
    pairs: tuple
    samples: list
    fits: dict
    predicted: dict
    decay_regime: list

    def best(self, p, q) -> list[tuple[float, float]]:
        by_R: dict[float, float] = {}
        for s in self.samples:
            if s.p == p and s.q == q:
                by_R[s.R] = max(by_R.get(s.R, 0.0), s.value)
        return sorted(by_R.items())


def _probe(n, nu, phase, pairs, R_list, predictor, seed, count, workers) -> ProbeReport:
    tasks = [(n, nu, phase, float(R), tuple(pairs), seed, count) for R in R_list]
    chunks = pmap(_shell_probe_sample, tasks, workers)
    samples = [s for c in chunks for s in c]
    decay = [float(R) for R in R_list if 4 * R < nu / 2]
    rep = ProbeReport(n, nu, tuple(pairs), samples, {}, {}, decay)
    for p, q in pairs:
        rep.predicted[(p, q)] = float(predictor(n, p, q))
        pts = [(R, v) for R, v in rep.best(p, q) if R not in decay]
        if len(pts) >= 4:
            rep.fits[(p, q)] = fit_scaling(pts)
    return rep


def operator_scaling_probe(
    n: int,
    nu: float,
    family: DispersionRelation,
    pairs,
    R_list=DEFAULT_R_LIST,
    seed: int = 0,
    count: int = 8,
    workers: int | None = None,
) -> ProbeReport:
    """Max over probes of ||T_R^nu h|| / ||h||_2 across R; predicted 1/q - (2n-1)/2 (1/2 - 1/p)."""
    for p, q in pairs:
        if 2 * _inv(q) < 0.5 - _inv(p):
            raise HypothesisError(f"(p, q) = ({p}, {q}) violates 2/q >= 1/2 - 1/p")
    return _probe(n, nu, RescaledProfile(family, 1.0), pairs, R_list, ex.operator_exponent, seed, count, workers)


def wave_exponent_probe(n: int, pairs, R_list=DEFAULT_R_LIST, seed: int = 0, count: int = 8, workers=None) -> ProbeReport:
    """Same probe with varpi(rho) = rho; predicted 1/q + (n-1)/p - (n-1)/2."""
    return _probe(n, bessel.nu_of(n, 0), RescaledProfile(Wave, 1.0), pairs, R_list, ex.wave_exponent, seed, count, workers)


# ---------------------------------------------------------------------------
# end-to-end ratio sweeps


def smooth_profile(rho):
    return beta(rho).astype(complex)


def _single_harmonic_norm(n, k, rel, h, T, p, q) -> float:
    """||u||_{L^q_t L^p_x} for data a(rho) Y_k in frequency, t in [-T, T]."""
    lo, hi = h.support
    chk = np.linspace(lo, hi, 65)
    speed = float(np.max(rel.omega(chk, 1)))
    r_max = speed * T + 32.0
    m = math.ceil(r_max / (math.pi / 8))
    r = np.linspace(0.0, r_max, m + 1)
    acc_holder = {}

    def reducer(vals, block):
        if "acc" not in acc_holder:
            w = np.full(r.size, r[1] - r[0])
            w[0] *= 0.5
            w[-1] *= 0.5
            acc_holder["acc"] = RadialAccumulator(n, r, w, [p], vals.shape[0])
        acc_holder["acc"](vals, block)

    grid = t_nu_fft(h, bessel.nu_of(n, k), rel, r, n, (-T, T), bump=None, reducer=reducer)
    scale = (2 * math.pi) ** (-n) * abs(harmonic_constant(n, k))
    radial = acc_holder["acc"].mixed_norm(p, q, grid.t_weights)
    return scale * radial * zonal_lp_norm(n, k, p)


def _homo_sample(args):
    kind, n, rel, p, q, alpha, k, R, T = args
    e = ex.exponents(n, p, q)
    h = knapp_data(R, 1.0, n) if kind == "R" else RadialProfile.from_function(smooth_profile, 128)
    num = _single_harmonic_norm(n, k, rel, h, T, p, q)
    den = (2 * math.pi) ** (-n / 2) * data_norm(h, n, k, float(e.s), alpha, rel, float(e.s1), float(e.s2))
    return (kind, k, R, num, den, num / den)


@dataclass
class HomoReport:
    rows: list
    max_ratio: float
    k_trend: float | None
    R_trend: float | None
    threshold: float | None


def homo_ratio_probe(
    n: int,
    family: DispersionRelation,
    p,
    q,
    alpha: float,
    k_list=(0, 1, 2, 4, 8),
    R_list=(16.0, 32.0, 64.0, 128.0),
    T_smooth: float = 64.0,
    enforce_threshold: bool = True,
    workers: int | None = None,
) -> HomoReport:
    """Ratios ||u|| / ||D phi||_{H^s_r H^alpha} for single harmonics (k sweep) and Knapp data (R sweep, k = 0)."""
    cls = ex.classify(n, p, q)
    if cls.region not in (ex.Region.EXTENDED, ex.Region.SHARP_LINE):
        raise HypothesisError(f"(n, p, q) = ({n}, {p}, {q}) is {cls.region.value}, not covered")
    thr = float(cls.alpha_thm1)
    if enforce_threshold and not alpha > thr:
        raise HypothesisError(f"alpha = {alpha} not above threshold {thr}")
    tasks = [("k", n, family, p, q, alpha, k, 0.0, T_smooth) for k in k_list]
    tasks += [("R", n, family, p, q, alpha, 0, float(R), 4.0 * R) for R in R_list]
    rows = pmap(_homo_sample, tasks, workers)
    ks = [(r[1], r[5]) for r in rows if r[0] == "k" and r[1] >= 1]
    k_trend = float(np.polyfit(np.log([k for k, _ in ks]), np.log([v for _, v in ks]), 1)[0]) if len(ks) >= 2 else None
    Rs = [(r[2], r[5]) for r in rows if r[0] == "R"]
    R_trend = float(np.polyfit(np.log2([a for a, _ in Rs]), np.log2([v for _, v in Rs]), 1)[0]) if len(Rs) >= 2 else None
    return HomoReport(rows, max(r[5] for r in rows), k_trend, R_trend, thr)


# ---------------------------------------------------------------------------
# Bessel audits


@dataclass(frozen=True)
class AuditRow:
    check: str
    nu: float
    param: float
    value: float
    cap: float
    passed: bool


@dataclass
class AuditReport:
    rows: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def group(self, check: str) -> list[AuditRow]:
        return [r for r in self.rows if r.check == check]


def residual_grid(nu: float, r_hi: float, step: float = 0.125) -> np.ndarray:
    lo = max(bessel.oscillatory_threshold(nu), bessel.OSC_R_MIN)
    return np.arange(lo, r_hi + step / 2, step)


def residual_bound_rows(nus=(2.5, 5.5, 10.5), r_hi: float = 2.0**12, c_max: float = 10.0, growth: float = 0.05, coefficients="hankel"):
    rows = []
    for nu in nus:
        base = bessel.residual_audit(nu, residual_grid(nu, r_hi), bessel.j_fast, coefficients)
        wide = bessel.residual_audit(nu, residual_grid(nu, 2 * r_hi), bessel.j_fast, coefficients)
        rows.append(AuditRow("residual", nu, r_hi, base, c_max, base <= c_max))
        rows.append(AuditRow("residual-doubled", nu, 2 * r_hi, wide, c_max, wide <= c_max))
        rel_growth = wide / base - 1.0
        rows.append(AuditRow("residual-growth", nu, 2 * r_hi, rel_growth, growth, rel_growth <= growth))
    return rows


def fast_path_rows(nus=(2.5, 5.5, 10.5), r_hi: float = 2.0**12, points: int = 64, tol: float = 1e-11):
    """Spot-check the vectorized J against the oracle on each residual grid."""
    rows = []
    for nu in nus:
        r = np.geomspace(max(bessel.oscillatory_threshold(nu), 4.0), 2 * r_hi, points)
        diff = float(np.max(np.abs(bessel.j_oracle_array(nu, r) - bessel.j_fast(nu, r))))
        rows.append(AuditRow("fast-vs-oracle", nu, 2 * r_hi, diff, tol, diff <= tol))
    return rows


def square_function_rows(nus=None, R_exps=range(0, 13), cap: float = 1.0):
    nus = np.arange(0, 101) * 0.5 if nus is None else nus
    worst = (-1.0, 0.0, 0.0)
    for nu in nus:
        for j in R_exps:
            v = bessel.square_function_integral(float(nu), 2.0**j)
            if v > worst[0]:
                worst = (v, float(nu), 2.0**j)
    v, nu, R = worst
    return [AuditRow("square-function-max", nu, R, v, cap, v <= cap)]


def decay_rows(min_rate: float = 0.3):
    c = bessel.decay_audit(0.5, np.linspace(10, 80, 15))
    return [AuditRow("decay-rate", 0.0, 0.5, c, min_rate, c >= min_rate)]


def normalization_rows(nus=(0.5, 2.5, 5.0), r_max: float = 1e4, rel_tol: float = 0.01):
    rows = []
    for nu in nus:
        v = bessel.normalization_integral(nu, r_max)
        err = abs(v - 1 / (2 * nu)) * 2 * nu
        rows.append(AuditRow("normalization", nu, r_max, err, rel_tol, err < rel_tol))
    return rows


def regime_bound_rows(nus=(0.5, 1.0, 2.5, 5.5, 10.5, 20.0, 40.0), r_hi: float = 2.0**12):
    rows = []
    for nu in nus:
        r = np.linspace(2 * nu if nu > 0 else 0.1, r_hi, 20000)
        v = float(np.max(np.sqrt(r) * np.abs(bessel.j_fast(nu, r))))
        rows.append(AuditRow("sqrt-r-bound", nu, r_hi, v, 1.0, v <= 1.0))
    return rows


def bessel_bound_audit_suite(c_max: float = 10.0) -> AuditReport:
    """Residual, decay, dyadic square-function, normalization and regime checks with fixed caps."""
    rows = []
    rows += residual_bound_rows(c_max=c_max)
    rows += fast_path_rows()
    rows += square_function_rows()
    rows += decay_rows()
    rows += normalization_rows()
    rows += regime_bound_rows()
    return AuditReport(rows)

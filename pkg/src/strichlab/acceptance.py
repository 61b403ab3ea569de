"""The eleven acceptance checks, each runnable on its own.

Every check returns a ``CriterionResult`` whose fields are deterministic
numbers; wall-clock runtimes are reported separately so that summary files
stay byte-identical across worker counts.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from fractions import Fraction as F
from pathlib import Path

import numpy as np

from . import bessel, experiments as E, exponents as X
from .dispersion import Boussinesq, KleinGordon, ModifiedBoussinesq, PowerLaw, RescaledProfile, Wave
from .norms import radial_norms
from .propagator import SpaceTimeGrid, default_node_count, single_harmonic_solution

INF = math.inf


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    measured: str
    target: str
    passed: bool


RUNTIME_LIMITS = {1: 10, 2: 60, 3: 120, 4: 30, 5: 60, 6: 120, 7: 600, 8: 600, 9: 300, 10: 1, 11: None}


def _g(x) -> str:
    return f"{x:.17g}"


# ---------------------------------------------------------------------------


def closed_form_half(nu: float, r):
    r = np.asarray(r, dtype=float)
    s = np.sqrt(2 / (np.pi * r))
    if nu == 0.5:
        return s * np.sin(r)
    if nu == 1.5:
        return s * (np.sin(r) / r - np.cos(r))
    raise ValueError("closed form only for nu in {1/2, 3/2}")


def recurrence_probe(count: int = 200, seed: int = 1234):
    rng = np.random.default_rng(seed)
    nus = rng.uniform(1.0, 20.0, count)
    rs = np.exp(rng.uniform(math.log(0.5), math.log(200.0), count))
    return nus, rs


def recurrence_defect(nus, rs) -> float:
    worst = 0.0
    for nu, r in zip(nus, rs):
        a, b, c = (bessel.j_oracle(v, r) for v in (nu - 1, nu, nu + 1))
        d = abs(a + c - 2 * nu / r * b) / (1 + max(abs(a), abs(b), abs(c)))
        worst = max(worst, d)
    return worst


def criterion_1(workers=None) -> CriterionResult:
    r = np.geomspace(0.1, 100.0, 200)
    rel = 0.0
    for nu in (0.5, 1.5):
        exact = closed_form_half(nu, r)
        rel = max(rel, float(np.max(np.abs(bessel.j_oracle_array(nu, r) - exact) / np.abs(exact))))
    rec = recurrence_defect(*recurrence_probe())
    ok = rel < 1e-10 and rec < 1e-9
    return CriterionResult(1, "bessel-oracle", f"rel={_g(rel)};recurrence={_g(rec)}", "rel<1e-10;recurrence<1e-9", ok)


def criterion_2(workers=None) -> CriterionResult:
    rows = E.residual_bound_rows((2.5, 5.5, 10.5), 2.0**12, c_max=10.0, growth=0.05)
    worst = max(r.value for r in rows if r.check == "residual")
    growth = max(r.value for r in rows if r.check == "residual-growth")
    ok = all(r.passed for r in rows)
    return CriterionResult(2, "asymptotic-residual", f"sup={_g(worst)};growth={_g(growth)}", "sup<=10;growth<=0.05", ok)


def criterion_3(workers=None) -> CriterionResult:
    nus = np.arange(0, 101) * 0.5
    parts = E.pmap(_square_rows, [tuple(c) for c in np.array_split(nus, 8)], workers)
    best = max((row for rows in parts for row in rows), key=lambda r: r.value)
    return CriterionResult(
        3, "dyadic-square-function", f"max={_g(best.value)};nu={_g(best.nu)};R={_g(best.param)}", "max<=1", best.value <= 1.0
    )


def _square_rows(nus):
    return E.square_function_rows(nus)


def criterion_4(workers=None) -> CriterionResult:
    row = E.decay_rows(0.3)[0]
    return CriterionResult(4, "small-argument-decay", f"c={_g(row.value)}", "c>=0.3", row.passed)


def criterion_5(workers=None) -> CriterionResult:
    rows = E.normalization_rows((0.5, 2.5, 5.0), 1e4, 0.01)
    worst = max(r.value for r in rows)
    return CriterionResult(5, "normalization-integral", f"max_rel_err={_g(worst)}", "rel_err<0.01", all(r.passed for r in rows))


# ---------------------------------------------------------------------------


CONSERVATION_FAMILIES = (PowerLaw(2.0), KleinGordon, Boussinesq, ModifiedBoussinesq, Wave)


def conservation_drift(rel, n: int, k: int, T: float = 8.0, margin: float = 200.0) -> float:
    """max_t / min_t of ||u(t)||_{L^2(r^{n-1} dr)} minus one for one smooth profile."""
    phase = RescaledProfile(rel, 1.0)
    chk = np.linspace(0.5, 2.0, 257)
    speed = float(np.max(np.abs(phase.omega(chk, 1))))
    top = float(np.max(np.abs(phase.omega(chk, 0))))
    r_max = speed * T + margin
    nt = math.ceil(T / (math.pi / 4 / top)) + 1
    grid = SpaceTimeGrid.gauss_radial(np.linspace(0.0, T, nt), 0.0, r_max, math.ceil(r_max / 2), n, order=16)
    h = E.random_profile(7, 0).resample(default_node_count((0.5, 2.0), r_max, T, speed))
    u = single_harmonic_solution(h, n, k, phase, grid, strict=False)
    norms = radial_norms(u, 2)
    return float(norms.max() / norms.min() - 1.0)


def _drift_task(args):
    rel, n, k = args
    return conservation_drift(rel, n, k)


def criterion_6(workers=None) -> CriterionResult:
    tasks = [(rel, n, k) for rel in CONSERVATION_FAMILIES for n in (2, 3) for k in (0, 1, 4)]
    drifts = E.pmap(_drift_task, tasks, workers)
    i = int(np.argmax(drifts))
    worst = drifts[i]
    rel, n, k = tasks[i]
    return CriterionResult(6, "l2-conservation", f"max_drift={_g(worst)};at={rel.token}/n={n}/k={k}", "drift<1e-6", worst < 1e-6)


def criterion_7(workers=None) -> CriterionResult:
    cfg = E.KnappConfig(2, PowerLaw(2.0), 4, 4, extra_pairs=((4, 2),))
    rep = E.knapp_scaling_experiment(cfg, workers)
    f44 = rep.field_fits[("group", 4, 4)]
    r42 = rep.ratio_fits[("group", 4, 2)]
    ok = abs(f44.slope + 0.375) <= 0.05 and f44.max_residual < 0.1 and r42.slope >= 0.05
    return CriterionResult(
        7,
        "knapp-necessity",
        f"field_slope_44={_g(f44.slope)};residual={_g(f44.max_residual)};ratio_slope_42={_g(r42.slope)}",
        "field_slope=-0.375+-0.05;residual<0.1;ratio_slope>=0.05",
        ok,
    )


def criterion_8(workers=None) -> CriterionResult:
    rep = E.operator_scaling_probe(2, 0.0, PowerLaw(2.0), [(INF, 4), (2, 2)], workers=workers)
    a, b = rep.fits[(INF, 4)], rep.fits[(2, 2)]
    ok = abs(a.slope + 0.5) <= 0.1 and abs(b.slope - 0.5) <= 0.1 and a.max_residual < 0.1 and b.max_residual < 0.1
    return CriterionResult(
        8,
        "shell-operator-exponent",
        f"slope_inf4={_g(a.slope)};slope_22={_g(b.slope)};residuals={_g(a.max_residual)}/{_g(b.max_residual)}",
        "slope_inf4=-0.5+-0.1;slope_22=0.5+-0.1",
        ok,
    )


def criterion_9(workers=None) -> CriterionResult:
    rep = E.wave_exponent_probe(3, [(INF, 2)], workers=workers)
    f = rep.fits[(INF, 2)]
    ok = abs(f.slope + 0.5) <= 0.1 and f.max_residual < 0.1
    return CriterionResult(9, "wave-exponent", f"slope={_g(f.slope)};residual={_g(f.max_residual)}", "slope=-0.5+-0.1", ok)


# ---------------------------------------------------------------------------

N = None
EX = X.Region.EXCLUDED_ENDPOINT
CL = X.Region.CLASSICAL
EXT = X.Region.EXTENDED
SH = X.Region.SHARP_LINE
VI = X.Region.NECESSITY_VIOLATED

# (n, p, q) -> (s1, s2, s, region, alpha_thm1, alpha_thm2, alpha_wave), worked out by hand
EXPONENT_CASES = [
    ((3, 2, 2), (F(-1, 2), F(0), F(-1), VI, N, N, N)),
    ((3, INF, 2), (F(-1, 4), F(-1, 4), F(1, 2), CL, F(0), F(0), F(0))),
    ((2, INF, 2), (F(-1, 4), F(-1, 4), F(0), EX, N, N, F(1, 2))),
    ((3, F(10, 3), 2), (F(-2, 5), F(-1, 10), F(-2, 5), EX, N, N, N)),
    ((2, 6, 2), (F(-1, 3), F(-1, 6), F(-1, 3), EX, N, N, N)),
    ((2, 4, 4), (F(-1, 8), F(-1, 8), F(0), CL, F(0), F(0), F(1, 4))),
    ((2, 4, 2), (F(-3, 8), F(-1, 8), F(-1, 2), VI, N, N, N)),
    ((2, INF, 4), (F(0), F(-1, 4), F(1, 2), CL, F(0), F(0), F(0))),
    ((2, 2, 4), (F(-1, 4), F(0), F(-1, 2), VI, N, N, N)),
    ((3, 4, 2), (F(-3, 8), F(-1, 8), F(-1, 4), EXT, F(7, 20), F(5, 16), F(1, 2))),
    ((2, 3, 4), (F(-1, 6), F(-1, 12), F(-1, 6), SH, F(3, 10), F(1, 4), N)),
    ((3, 6, 2), (F(-1, 3), F(-1, 6), F(0), CL, F(0), F(0), F(1, 3))),
    ((3, 3, 2), (F(-5, 12), F(-1, 12), F(-1, 2), VI, N, N, N)),
    ((3, 4, 4), (F(-1, 8), F(-1, 8), F(1, 4), CL, F(0), F(0), F(0))),
    ((3, 5, 2), (F(-7, 20), F(-3, 20), F(-1, 10), EXT, F(7, 50), F(1, 8), F(2, 5))),
    ((2, 5, 3), (F(-11, 60), F(-3, 20), F(-1, 15), EXT, F(3, 25), F(1, 10), N)),
    ((4, 2, INF), (F(0), F(0), F(0), CL, F(0), F(0), F(0))),
    ((3, 3, F(12, 5)), (F(-1, 3), F(-1, 12), F(-1, 3), SH, F(7, 15), F(5, 12), N)),
    ((2, 6, 3), (F(-1, 6), F(-1, 6), F(0), CL, F(0), F(0), F(1, 3))),
    ((3, INF, INF), (F(1, 4), F(-1, 4), F(3, 2), CL, F(0), F(0), F(0))),
]


def exponent_mismatches() -> list[tuple]:
    bad = []
    for (n, p, q), want in EXPONENT_CASES:
        e = X.exponents(n, p, q)
        c = X.classify(n, p, q)
        got = (e.s1, e.s2, e.s, c.region, c.alpha_thm1, c.alpha_thm2, c.alpha_wave)
        if got != want:
            bad.append(((n, p, q), got, want))
    return bad


def criterion_10(workers=None) -> CriterionResult:
    bad = exponent_mismatches()
    return CriterionResult(10, "exponent-calculus", f"mismatches={len(bad)}/{len(EXPONENT_CASES)}", "mismatches=0", not bad)


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 11)}


# ---------------------------------------------------------------------------
# suite driver


SUMMARY_NAME = "acceptance_summary.csv"
TIMING_NAME = "acceptance_timing.csv"


def run_suite(criteria, workers, out_dir, echo=print) -> list[tuple[CriterionResult, float]]:
    """Run the given numerical criteria, write summary and timing CSVs, return (result, seconds)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    done = []
    for i in criteria:
        t0 = time.perf_counter()
        res = CRITERIA[i](workers)
        dt = time.perf_counter() - t0
        done.append((res, dt))
        if echo:
            echo(result_line(res, dt))
    with open(out / SUMMARY_NAME, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["criterion", "name", "measured", "target", "passed"])
        for res, _ in done:
            w.writerow([res.number, res.name, res.measured, res.target, int(res.passed)])
    with open(out / TIMING_NAME, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["criterion", "seconds", "limit", "within_limit"])
        for res, dt in done:
            lim = RUNTIME_LIMITS[res.number]
            w.writerow([res.number, f"{dt:.3f}", lim, int(lim is None or dt < lim)])
    return done


def result_line(res: CriterionResult, seconds: float | None = None) -> str:
    tag = "PASS" if res.passed else "FAIL"
    lim = RUNTIME_LIMITS.get(res.number)
    extra = ""
    if seconds is not None:
        extra = f" [{seconds:.1f}s" + (f" / limit {lim}s]" if lim else "]")
    return f"criterion {res.number:2d} {tag} {res.name}: {res.measured} (target {res.target}){extra}"


def determinism_check(out_dir, criteria=tuple(range(1, 11)), worker_counts=(1, 8), echo=print) -> CriterionResult:
    """Run the suite once per worker count and compare the summary files byte for byte."""
    blobs = []
    for w in worker_counts:
        d = Path(out_dir) / f"workers-{w}"
        run_suite(criteria, w, d, echo=echo)
        blobs.append((d / SUMMARY_NAME).read_bytes())
    same = all(b == blobs[0] for b in blobs[1:])
    return compare_result(same, worker_counts)


def compare_result(same: bool, worker_counts=(1, 8)) -> CriterionResult:
    label = "/".join(str(w) for w in worker_counts)
    return CriterionResult(11, "determinism", f"identical={int(same)};workers={label}", "identical=1", same)

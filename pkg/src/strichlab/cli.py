"""Command-line entry point: ``strichlab <subcommand> ...``.

Exit codes: 0 when every enabled check passes, 2 when a check fails,
1 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import acceptance as A, bessel, experiments as E, exponents as X
from .dispersion import DispersionRelation

OUTPUT_ENV = "STRICHLAB_OUTPUT_DIR"
EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
EXPERIMENTS = ("exponents", "bessel-audit", "knapp", "operator-probe", "wave-probe", "homo-probe")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# value parsing and CSV output


def fmt(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.17g}"
    return str(x)


def parse_exponent(text: str):
    """'inf', '4', '10/3' or '2.5' -> exact exponent (float inf for infinity)."""
    try:
        return X.from_reciprocal(X.as_reciprocal(text))
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(f"bad exponent {text!r}: {e}") from None


def parse_pair(text: str):
    try:
        p, q = text.split(",")
    except ValueError:
        raise argparse.ArgumentTypeError(f"pair must look like 'p,q', got {text!r}") from None
    return parse_exponent(p), parse_exponent(q)


def parse_family(text: str) -> DispersionRelation:
    try:
        return DispersionRelation.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def parse_dyadic(text: str) -> float:
    """'512' or '2^9'."""
    t = text.strip()
    v = 2.0 ** float(t[2:]) if t.startswith("2^") else float(t)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"R must be positive, got {text!r}")
    return v


def write_csv(path: Path, header, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def output_dir(args) -> Path:
    if getattr(args, "output_dir", None):
        return Path(args.output_dir)
    return Path(os.environ.get(OUTPUT_ENV, "strichlab-output"))


def _fit_row(label, fit: E.ScalingFit, predicted: float, tol: float):
    ok = fit.agrees(predicted, tol)
    dropped = ";".join(fmt(R) for R, _ in fit.dropped)
    return [label, fit.slope, predicted, fit.max_residual, fit.intercept, len(fit.samples), dropped, ok]


FIT_HEADER = ["quantity", "slope", "predicted", "max_residual", "intercept", "samples", "dropped_R", "passed"]


# ---------------------------------------------------------------------------
# subcommands


def cmd_exponents(args) -> int:
    row = X.csv_row(args.n, args.p, args.q)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(X.csv_header())
    w.writerow(row)
    return EXIT_OK


def cmd_bessel_audit(args) -> int:
    out = output_dir(args)
    rep = E.bessel_bound_audit_suite(args.c_max)
    write_csv(
        out / "bessel_audit.csv",
        ["check", "nu", "param", "value", "cap", "passed"],
        [(r.check, r.nu, r.param, r.value, r.cap, r.passed) for r in rep.rows],
    )
    rows = []
    for nu in args.table_nu:
        r = E.residual_grid(nu, args.table_r_max, step=args.table_step)
        r, J, main, res = bessel.residual_table(nu, r, bessel.j_fast, args.coefficients)
        for i in range(r.size):
            rows.append((nu, bessel.regime(nu, r[i]).value, r[i], J[i], main[i], res[i]))
    write_csv(out / "bessel_residuals.csv", ["nu", "regime", "r", "J", "main", "residual_times_r"], rows)
    for r in rep.rows:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.check} nu={fmt(r.nu)} value={fmt(r.value)} cap={fmt(r.cap)}")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_knapp(args) -> int:
    out = output_dir(args)
    cfg = E.KnappConfig(
        args.n, args.family, args.p, args.q, args.rho0, tuple(args.R), E.Centering(args.centering), tuple(args.extra_pair)
    )
    rep = E.knapp_scaling_experiment(cfg, args.workers)
    write_csv(out / "knapp_samples.csv", ["R", "centering", "p", "q", "field_norm", "data_norm", "ratio"], rep.rows)
    summary = [["data_norm", rep.data_fit.slope, -0.25, rep.data_fit.max_residual, rep.data_fit.intercept,
                len(rep.data_fit.samples), "", rep.data_fit.agrees(-0.25, args.tol)]]
    ok = summary[0][-1]
    for c in cfg.centering.members():
        for p, q in cfg.pairs:
            key = (c.value, p, q)
            tag = f"{c.value}:p={fmt(p)}:q={fmt(q)}"
            pf, pr = rep.predicted_field(p, q), rep.predicted_ratio(p, q)
            frow = _fit_row(f"field:{tag}", rep.field_fits[key], pf, args.tol)
            rrow = _fit_row(f"ratio:{tag}", rep.ratio_fits[key], pr, args.tol)
            summary += [frow, rrow]
            if c is E.Centering.GROUP:
                ok = ok and frow[-1] and rrow[-1]
    if cfg.centering is E.Centering.BOTH:
        R = max(cfg.R_list)
        g, ph = rep.masses[("group", R)], rep.masses[("phase", R)]
        summary.append([f"mass_ratio_group_over_phase:R={fmt(R)}", g / ph, "", "", "", 1, "", g >= 100 * ph])
        ok = ok and summary[-1][-1]
    write_csv(out / "knapp_summary.csv", FIT_HEADER, summary)
    _echo(summary)
    return EXIT_OK if ok else EXIT_FAIL


def _echo(summary):
    for row in summary:
        print(",".join(fmt(v) for v in row))


def _probe_outputs(out: Path, stem: str, rep: E.ProbeReport, tol: float) -> int:
    write_csv(
        out / f"{stem}_samples.csv",
        ["R", "probe", "p", "q", "normalized_norm", "decay_regime"],
        [(s.R, s.probe, s.p, s.q, s.value, s.R in rep.decay_regime) for s in rep.samples],
    )
    summary, ok = [], True
    for pq in rep.pairs:
        fit = rep.fits.get(pq)
        if fit is None:
            summary.append([f"p={fmt(pq[0])}:q={fmt(pq[1])}", "", rep.predicted[pq], "", "", 0, "", False])
            ok = False
            continue
        row = _fit_row(f"p={fmt(pq[0])}:q={fmt(pq[1])}", fit, rep.predicted[pq], tol)
        summary.append(row)
        ok = ok and row[-1]
    write_csv(out / f"{stem}_summary.csv", FIT_HEADER, summary)
    _echo(summary)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_operator_probe(args) -> int:
    rep = E.operator_scaling_probe(args.n, args.nu, args.family, args.pair, tuple(args.R), args.seed, args.probes, args.workers)
    return _probe_outputs(output_dir(args), "operator_probe", rep, args.tol)


def cmd_wave_probe(args) -> int:
    rep = E.wave_exponent_probe(args.n, args.pair, tuple(args.R), args.seed, args.probes, args.workers)
    return _probe_outputs(output_dir(args), "wave_probe", rep, args.tol)


def cmd_homo_probe(args) -> int:
    rep = E.homo_ratio_probe(
        args.n, args.family, args.p, args.q, args.alpha, tuple(args.k), tuple(args.R),
        enforce_threshold=not args.allow_below_threshold, workers=args.workers,
    )
    out = output_dir(args)
    write_csv(out / "homo_samples.csv", ["sweep", "k", "R", "solution_norm", "data_norm", "ratio"], rep.rows)
    summary = [("max_ratio", rep.max_ratio), ("k_trend", rep.k_trend if rep.k_trend is not None else ""),
               ("R_trend", rep.R_trend if rep.R_trend is not None else ""), ("alpha_threshold", rep.threshold)]
    write_csv(out / "homo_summary.csv", ["quantity", "value"], summary)
    _echo(summary)
    return EXIT_OK


def cmd_acceptance(args) -> int:
    out = output_dir(args) / "acceptance"
    wanted = sorted(set(args.criterion or range(1, 12)))
    numeric = [c for c in wanted if c != 11]
    ok = True
    if numeric:
        done = A.run_suite(numeric, args.workers, out)
        ok = all(r.passed for r, _ in done)
    if 11 in wanted:
        res = A.determinism_check(out / "determinism", worker_counts=(1, 8), echo=None)
        print(A.result_line(res))
        ok = ok and res.passed
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# config files


@dataclass
class RunConfig:
    """One experiment invocation as a flat key/value section."""

    experiment: str
    params: dict[str, str] = field(default_factory=dict)
    output_dir: str = ""
    seed: int = 0

    def to_text(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str  # keep flag case (--R)
        cp["run"] = {"experiment": self.experiment, "output_dir": self.output_dir, "seed": str(self.seed)}
        cp[self.experiment] = dict(self.params)
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str  # keep flag case (--R)
        cp.read_string(text)
        if "run" not in cp or "experiment" not in cp["run"]:
            raise UsageError("config needs a [run] section with an 'experiment' key")
        exp = cp["run"]["experiment"].strip()
        if exp not in EXPERIMENTS:
            raise UsageError(f"unknown experiment {exp!r}; choose from {', '.join(EXPERIMENTS)}")
        params = dict(cp[exp]) if exp in cp else {}
        return cls(exp, params, cp["run"].get("output_dir", ""), int(cp["run"].get("seed", "0")))

    def argv(self) -> list[str]:
        """Translate to subcommand arguments. List values are whitespace separated."""
        argv = [self.experiment]
        positional = {"exponents": ("n", "p", "q")}.get(self.experiment, ())
        for key in positional:
            if key not in self.params:
                raise UsageError(f"[{self.experiment}] needs '{key}'")
            argv.append(self.params[key])
        for key, val in self.params.items():
            if key in positional:
                continue
            flag = "--" + key.replace("_", "-")
            if val.strip().lower() in ("true", "yes", "on"):
                argv.append(flag)
            elif val.strip().lower() in ("false", "no", "off"):
                continue
            else:
                parts = val.split()
                if key in ("pair", "extra_pair"):
                    for part in parts:
                        argv += [flag, part]
                else:
                    argv += [flag, *parts]
        if self.experiment in ("operator-probe", "wave-probe") and "seed" not in self.params:
            argv += ["--seed", str(self.seed)]
        if self.output_dir and self.experiment != "exponents":
            argv += ["--output-dir", self.output_dir]
        return argv


def cmd_run(args) -> int:
    path = Path(args.config)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    try:
        cfg = RunConfig.from_text(path.read_text())
    except configparser.Error as e:
        raise UsageError(f"cannot parse {path}: {e}") from None
    argv = cfg.argv()
    if args.workers is not None and cfg.experiment not in ("exponents", "bessel-audit"):
        argv += ["--workers", str(args.workers)]
    if args.output_dir and cfg.experiment != "exponents":
        argv += ["--output-dir", args.output_dir]
    return main(argv)


# ---------------------------------------------------------------------------
# parser


def _common(p, workers=True):
    p.add_argument("--output-dir", help=f"directory for CSV output (default ${OUTPUT_ENV} or ./strichlab-output)")
    if workers:
        p.add_argument("--workers", type=int, default=None, help="process count (default: available CPUs; 1 = serial)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="strichlab", description="Numerical experiments on Strichartz exponents for radial dispersive equations.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    R_default = [2.0**j for j in range(4, 10)]

    p = sub.add_parser("exponents", help="exponent triple, region and alpha thresholds as one CSV row")
    p.add_argument("n", type=int)
    p.add_argument("p", type=parse_exponent)
    p.add_argument("q", type=parse_exponent)
    p.set_defaults(func=cmd_exponents)

    p = sub.add_parser("bessel-audit", help="Bessel bound audits against fixed caps")
    _common(p, workers=False)
    p.add_argument("--c-max", type=float, default=10.0, help="cap on r|J - main| (default 10)")
    p.add_argument("--table-nu", type=float, nargs="*", default=[2.5, 5.5, 10.5], help="orders for the residual table")
    p.add_argument("--table-r-max", type=float, default=2.0**12, help="upper r of the residual table (default 4096)")
    p.add_argument("--table-step", type=float, default=1.0, help="r spacing of the residual table (default 1)")
    p.add_argument("--coefficients", choices=["hankel", "printed"], default="hankel", help="main-part coefficient set")
    p.set_defaults(func=cmd_bessel_audit)

    p = sub.add_parser("knapp", help="Knapp necessity scaling experiment")
    _common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--family", type=parse_family, default=parse_family("power:2"), help="dispersion token (default power:2)")
    p.add_argument("--p", type=parse_exponent, required=True)
    p.add_argument("--q", type=parse_exponent, required=True)
    p.add_argument("--rho0", type=float, default=1.0, help="frequency centre (default 1)")
    p.add_argument("--R", type=parse_dyadic, nargs="+", default=R_default, help="scales (default 2^4 .. 2^9)")
    p.add_argument("--centering", choices=[c.value for c in E.Centering], default="group", help="tube centre velocity")
    p.add_argument("--extra-pair", type=parse_pair, action="append", default=[], help="additional p,q evaluated on the same fields")
    p.add_argument("--tol", type=float, default=E.SLOPE_TOL, help="slope tolerance (default 0.05)")
    p.set_defaults(func=cmd_knapp)

    for name, fn, helptext in (
        ("operator-probe", cmd_operator_probe, "dyadic shell operator growth"),
        ("wave-probe", cmd_wave_probe, "dyadic shell operator growth for the wave phase"),
    ):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        p.add_argument("--n", type=int, required=True)
        if name == "operator-probe":
            p.add_argument("--nu", type=float, required=True, help="Bessel order")
            p.add_argument("--family", type=parse_family, default=parse_family("power:2"))
        p.add_argument("--pair", type=parse_pair, action="append", required=True, help="p,q (repeatable)")
        p.add_argument("--R", type=parse_dyadic, nargs="+", default=R_default)
        p.add_argument("--seed", type=int, default=0, help="seed of the random probe profiles")
        p.add_argument("--probes", type=int, default=8, help="number of random probe profiles (default 8)")
        p.add_argument("--tol", type=float, default=0.1, help="slope tolerance (default 0.1)")
        p.set_defaults(func=fn)

    p = sub.add_parser("homo-probe", help="ratio of solution norm to data norm across k and R")
    _common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--family", type=parse_family, default=parse_family("power:2"))
    p.add_argument("--p", type=parse_exponent, required=True)
    p.add_argument("--q", type=parse_exponent, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--k", type=int, nargs="+", default=[0, 1, 2, 4, 8])
    p.add_argument("--R", type=parse_dyadic, nargs="+", default=[16.0, 32.0, 64.0, 128.0])
    p.add_argument("--allow-below-threshold", action="store_true", help="permit alpha at or below the threshold")
    p.set_defaults(func=cmd_homo_probe)

    p = sub.add_parser("run", help="run one experiment described by a config file")
    p.add_argument("config")
    _common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("acceptance", help="acceptance criteria 1-11")
    _common(p)
    p.add_argument("--criterion", type=int, action="append", choices=range(1, 12), help="run only this criterion (repeatable)")
    p.set_defaults(func=cmd_acceptance)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # --help exits 0, parse errors exit EXIT_USAGE
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, X.RangeError, E.HypothesisError, ValueError) as e:
        print(f"strichlab: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

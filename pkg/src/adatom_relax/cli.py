"""Command line front end.

Every command prints (or writes with ``--out``) a JSON report carrying the
configuration, its hash, the tolerances in force and a provenance block that
names the operation behind each reported quantity. Exit status is 0 on
success, 2 on malformed input and 3 when a numeric routine fails.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from . import density as dmod
from ._validation import RelaxationError
from .balls import (
    GRID_POINTS,
    PLATEAU_RTOL,
    R_XTOL,
    BallProblem,
    ball_energy,
    ball_energy_derivative,
    build_plateau_density,
    check_hypotheses,
    check_plateau,
    closed_form_rstar,
    critical_residual,
    minimize_ball_energy,
    ubar,
)
from .geometry import AtomMeasure, DiscreteCouple, energy, hausdorff_distance, mass, perimeter, weakstar_distance
from .io import (
    InputParseError,
    dumps_report,
    load_json,
    measure_to_dict,
    read_measure_json,
    read_polygon_csv,
    read_values_csv,
    report,
    write_couple_csv,
    write_rows_csv,
    write_svg,
)
from .lsc import WriggleTuple, build_sawtooth, sweep
from .recovery import dirac_approx, recover_ac, recover_general, relaxed_min_check
from .wriggle import FREQ_RTOL, SAMPLES_PER_WAVE, wriggle_uniform, wriggle_weighted

EXIT_OK, EXIT_PARSE, EXIT_NUMERIC = 0, 2, 3

DEFAULT_TOLERANCES = {
    "s0_rtol": dmod.S0_RTOL,
    "r_xtol": R_XTOL,
    "freq_rtol": FREQ_RTOL,
    "plateau_rtol": PLATEAU_RTOL,
}


# --- argument helpers --------------------------------------------------------


def parse_density(text: str) -> dmod.EnergyDensity:
    """Shorthand (``quadratic:1``), inline JSON or ``@file.json``."""
    text = text.strip()
    if text.startswith("@"):
        spec: Any = load_json(text[1:])
        source = text[1:]
    elif text.startswith("{") or text.startswith("["):
        spec = load_json(text, is_text=True)
        source = "<density>"
    else:
        spec, source = text, "<density>"
    try:
        return dmod.from_spec(spec)
    except (ValueError, TypeError, KeyError) as exc:
        raise InputParseError(f"invalid density: {exc}", source, 1, 1) from None


def _floats(text: str) -> list[float]:
    """Comma list ``a,b,c`` or range ``lo:hi:count`` (log-spaced with ``log:`` prefix)."""
    text = text.strip()
    try:
        if text.startswith("log:") or text.count(":") == 2:
            spacing = "log" if text.startswith("log:") else "lin"
            lo, hi, cnt = text.removeprefix("log:").split(":")
            n = int(cnt)
            if n < 1:
                raise ValueError("count must be positive")
            pts = np.geomspace(float(lo), float(hi), n) if spacing == "log" else np.linspace(float(lo), float(hi), n)
            return [float(x) for x in pts]
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}: {exc}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty range")
    return vals


def _window(text: str) -> tuple[float, float, float, float]:
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad window {text!r}") from None
    if len(vals) != 4 or vals[0] >= vals[2] or vals[1] >= vals[3]:
        raise argparse.ArgumentTypeError("window must be x0,y0,x1,y1 with x0<x1 and y0<y1")
    return vals  # type: ignore[return-value]


def _tolerance(text: str) -> tuple[str, float]:
    key, _, val = text.partition("=")
    if key not in DEFAULT_TOLERANCES:
        raise argparse.ArgumentTypeError(f"unknown tolerance {key!r}; known: {', '.join(sorted(DEFAULT_TOLERANCES))}")
    try:
        x = float(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {key} needs a number") from None
    if not (x > 0 and math.isfinite(x)):
        raise argparse.ArgumentTypeError(f"tolerance {key} must be positive")
    return key, x


def _existing(text: str) -> Path:
    p = Path(text)
    if not p.is_file():
        raise argparse.ArgumentTypeError(f"file not found: {text}")
    return p


def _couple_from_args(args) -> DiscreteCouple:
    c = read_polygon_csv(args.polygon)
    if getattr(args, "density_csv", None) is not None:
        vals = read_values_csv(args.density_csv)
        if len(vals) != c.n_vertices:
            raise InputParseError(f"expected {c.n_vertices} densities, got {len(vals)}", str(args.density_csv), len(vals), 1)
        c = c.with_density(vals)
    elif getattr(args, "u", None) is not None:
        c = c.with_density(np.full(c.n_vertices, args.u))
    return c


def _measure_from_args(args) -> AtomMeasure:
    if getattr(args, "measure", None) is not None:
        return read_measure_json(args.measure)
    return AtomMeasure(_couple_from_args(args), np.zeros((0, 3)))


# --- commands ----------------------------------------------------------------


def cmd_envelope(args, tol):
    psi = parse_density(args.density)
    env = dmod.build_envelope(psi, rtol=tol["s0_rtol"])
    result = env.to_dict()
    if args.csv:
        s = np.linspace(0.0, args.smax, args.grid)
        write_rows_csv(args.csv, ["s", "psi", "psi_bar"], zip(s, psi(s), dmod.eval_envelope(env, s)))
    prov = {"s0": "compute_s0", "theta": "recession_slope", "psi_bar": "build_envelope"}
    return result, prov


def cmd_eq_solve(args, tol):
    psi = parse_density(args.density)
    pb = BallProblem(args.n, args.rho, args.m)
    sol = minimize_ball_energy(pb, psi, xtol=tol["r_xtol"])
    env = dmod.build_envelope(psi, rtol=tol["s0_rtol"])
    result = {
        "problem": {"n": pb.n, "rho": pb.rho, "m": pb.m, "rbar": pb.rbar},
        "solution": sol.to_dict(),
        "hypotheses": check_hypotheses(pb, psi).to_dict(),
        "s0": env.s0,
        "criticality_residual": critical_residual(psi, sol.c, (pb.n - 1) / sol.R, pb.rho) if sol.kind == "interior-minimum" else None,
    }
    prov = {"solution": "minimize_ball_energy", "hypotheses": "check_hypotheses", "s0": "compute_s0",
            "criticality_residual": "critical_residual"}
    if psi.kind == "quadratic" and pb.n == 2:
        result["closed_form_R"] = closed_form_rstar(psi.params["gamma"], pb.m, pb.rho)
        prov["closed_form_R"] = "closed_form_rstar"
    if args.csv:
        _energy_table(args.csv, pb, psi, np.geomspace(1e-3 * pb.rbar, pb.rbar, args.grid))
    return result, prov


def _energy_table(path, pb, psi, R):
    R = R[ubar(pb, R) <= psi.domain_max]
    write_rows_csv(path, ["R", "ubar", "e", "eprime"],
                   zip(R, ubar(pb, R), ball_energy(pb, psi, R), ball_energy_derivative(pb, psi, R)))


def cmd_eq_sweep(args, tol):
    psi_text = args.density
    rows = []
    worst = 0.0
    for n in args.n:
        for rho in args.rho:
            for m in args.m:
                for gamma in args.gamma:
                    psi = parse_density(psi_text.replace("{gamma}", repr(gamma))) if "{gamma}" in psi_text else parse_density(psi_text)
                    pb = BallProblem(int(n), rho, m)
                    sol = minimize_ball_energy(pb, psi, xtol=tol["r_xtol"])
                    closed = math.nan
                    if psi.kind == "quadratic" and pb.n == 2:
                        closed = closed_form_rstar(psi.params["gamma"], m, rho)
                        worst = max(worst, abs(sol.R - closed) / closed)
                    rows.append([int(n), rho, m, gamma, sol.R, sol.c, sol.energy, sol.kind, closed])
    if args.csv:
        write_rows_csv(args.csv, ["n", "rho", "m", "gamma", "R", "c", "energy", "kind", "closed_form_R"], rows)
    result = {"cells": len(rows), "max_rel_err_closed_form": worst, "kinds": sorted({r[7] for r in rows})}
    return result, {"R": "minimize_ball_energy", "closed_form_R": "closed_form_rstar"}


def cmd_eq_plateau(args, tol):
    pb = BallProblem(args.n, args.rho, args.m)
    r1, r2 = args.r1 * pb.rbar, args.r2 * pb.rbar
    plateau = build_plateau_density(r1, r2, pb, g_m=args.g_m)
    checks = check_plateau(plateau)
    result = {"R1": r1, "R2": r2, "rbar": pb.rbar, "eps": plateau.eps, "checks": checks}
    if args.csv:
        _energy_table(args.csv, pb, plateau.psi, np.linspace(0.05 * pb.rbar, pb.rbar, args.grid))
    return result, {"checks": "check_plateau", "density": "build_plateau_density"}


def cmd_lsc_sweep(args, tol):
    psi = parse_density(args.density)
    target = dmod.build_envelope(psi, rtol=tol["s0_rtol"]) if args.envelope else psi
    res = sweep(target, n=args.samples, seed=args.seed)
    if args.csv:
        order = np.argsort(res.gaps)[: args.keep]
        write_rows_csv(args.csv, ["alpha", "beta", "lam", "a", "b", "gap"],
                       (list(res.tuples[i]) + [res.gaps[i]] for i in order))
    result = res.to_dict() | {"seed": args.seed, "envelope": bool(args.envelope)}
    return result, {"min_gap": "wriggle_inequality_gap"}


def cmd_lsc_sawtooth(args, tol):
    psi = parse_density(args.density)
    t = WriggleTuple(args.alpha, args.beta, args.lam, args.a, args.b)
    rows = []
    last = None
    for k in args.k:
        st = build_sawtooth(t, int(k), psi)
        rows.append({"k": int(k), "energy": st.energy, "closed_form_energy": st.closed_form_energy,
                     "quadrature_error": abs(st.energy - st.closed_form_energy)})
        last = st
    if args.svg and last is not None:
        write_svg(args.svg, [last.couple, last.limit])
    result = {"tuple": t.as_dict(), "limit_energy": last.limit_energy, "base_height": last.base_height,
              "runs": rows, "energy_drop": last.limit_energy - last.energy}
    return result, {"energy": "build_sawtooth", "limit_energy": "build_sawtooth"}


def cmd_geo_energy(args, tol):
    mu = _measure_from_args(args)
    psi = parse_density(args.psi)
    rep = energy(mu, psi, args.rho, dmod.build_envelope(psi, rtol=tol["s0_rtol"]))
    result = rep.to_dict()
    if args.window is not None and mu.carrier is not None:
        result["window"] = list(args.window)
        result["window_perimeter"] = perimeter(mu.carrier, args.window)
    return result, {"energy_F": "energy", "energy_Fbar": "energy", "perimeter": "perimeter"}


def cmd_geo_mass(args, tol):
    mu = _measure_from_args(args)
    return {"mass": mass(mu, args.rho), "singular_mass": mu.singular_mass()}, {"mass": "mass"}


def _write_couple_outputs(args, couple, atoms=None):
    if args.csv:
        write_couple_csv(args.csv, couple)
    if args.svg:
        write_svg(args.svg, [couple], atoms)


def cmd_relax_wriggle(args, tol):
    c = _couple_from_args(args)
    res = wriggle_uniform(c, args.r, args.k, compensate=not args.raw, samples_per_wave=args.samples_per_wave)
    _write_couple_outputs(args, res.couple)
    result = res.to_dict() | {
        "perimeter_in": perimeter(c),
        "perimeter_out": perimeter(res.couple),
        "hausdorff": hausdorff_distance(c, res.couple),
    }
    return result, {"couple": "wriggle_uniform", "hausdorff": "hausdorff_distance"}


def cmd_relax_weighted(args, tol):
    c = _couple_from_args(args)
    if args.f_csv is not None:
        f = read_values_csv(args.f_csv)
        if len(f) != c.n_vertices:
            raise InputParseError(f"expected {c.n_vertices} values, got {len(f)}", str(args.f_csv), len(f), 1)
    else:
        f = np.full(c.n_vertices, args.f)
    res = wriggle_weighted(c, f, args.k, cell=args.cell, compensate=not args.raw)
    _write_couple_outputs(args, res.couple)
    result = res.to_dict() | {"perimeter_in": perimeter(c), "perimeter_out": perimeter(res.couple)}
    if args.window:
        result["windows"] = [
            {"window": list(w), "base": perimeter(c, w), "wriggled": perimeter(res.couple, w)} for w in args.window
        ]
    return result, {"couple": "wriggle_weighted", "windows": "perimeter"}


SWEEP_COLUMNS = ["k", "perimeter", "energy", "weakstar_distance"]


def _sweep_outputs(args, rows, couple):
    if args.sweep_csv:
        write_rows_csv(args.sweep_csv, SWEEP_COLUMNS, ([r[c] for c in SWEEP_COLUMNS] for r in rows))
    if couple is not None:
        _write_couple_outputs(args, couple)


def cmd_relax_dirac(args, tol):
    mu = read_measure_json(args.measure)
    psi = parse_density(args.psi)
    env = dmod.build_envelope(psi, rtol=tol["s0_rtol"])
    runs = []
    last = None
    for k in args.k:
        approx = dirac_approx(mu, int(k), delta=args.delta)
        entry = approx.to_dict() | {"k": int(k)}
        if approx.couple is not None:
            rep = energy(approx.couple, psi, 0.0, env)
            entry |= {"perimeter": rep.perimeter, "energy": rep.energy_Fbar,
                      "weakstar_distance": weakstar_distance(approx.couple, mu)}
        runs.append(entry)
        last = approx
    _sweep_outputs(args, [r for r in runs if "energy" in r], None if last is None else last.couple)
    result = {"input_mass": mu.singular_mass(), "theta": env.theta, "runs": runs}
    return result, {"couple": "dirac_approx", "energy": "energy", "weakstar_distance": "weakstar_distance"}


def cmd_relax_recover(args, tol):
    mu = read_measure_json(args.measure)
    psi = parse_density(args.psi)
    env = dmod.build_envelope(psi, rtol=tol["s0_rtol"])
    target = energy(mu, psi, args.rho, env).energy_Fbar
    use_ac = mu.singular_mass() == 0 and mu.carrier is not None and not args.general
    runs, out = [], None
    for k in args.k:
        if use_ac:
            out = recover_ac(mu.carrier, env, k).couple
            got = energy(out, psi, args.rho, env)
            entry = {"energy_F": got.energy_F, "mass": got.mass, "target_Fbar": target,
                     "energy_gap": got.energy_F - target, "vertices": out.n_vertices}
        else:
            rr = recover_general(mu, env, k, args.rho, delta=args.delta)
            out = rr.couple
            entry = rr.to_dict()
        entry |= {"k": k, "perimeter": perimeter(out), "energy": entry["energy_F"],
                  "weakstar_distance": weakstar_distance(out, mu)}
        runs.append(entry)
    _sweep_outputs(args, runs, out)
    result = {"method": "recover_ac" if use_ac else "recover_general", "target_Fbar": target,
              "target_mass": mass(mu, args.rho), "runs": runs}
    if args.echo_input:
        result["input"] = measure_to_dict(mu)
    return result, {"couple": result["method"], "target_Fbar": "energy", "weakstar_distance": "weakstar_distance"}


def cmd_relax_mincheck(args, tol):
    psi = parse_density(args.density)
    rep = relaxed_min_check(BallProblem(2, args.rho, args.m), psi, samples=args.samples, seed=args.seed)
    return rep.to_dict(), {"gamma_m": "minimize_ball_energy", "min_Fbar": "energy"}


# --- parser ------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep status 2 but avoid argparse's SystemExit noise in callers
        self.print_usage(sys.stderr)
        raise InputParseError(message, self.prog, 0, 0)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--out", "--report-json", dest="out", type=Path, help="write the JSON report here instead of stdout")
    p.add_argument("--tol", type=_tolerance, action="append", default=[], metavar="KEY=VALUE",
                   help="override a tolerance")


def _geometry_inputs(p: argparse.ArgumentParser, measure: bool = False):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--polygon", type=_existing, help="polygon CSV (x,y or loop,x,y,u)")
    if measure:
        src.add_argument("--measure", type=_existing, help="measure JSON {couple, atoms}")
    dens = p.add_mutually_exclusive_group()
    dens.add_argument("--density-csv", "--density-file", dest="density_csv", type=_existing,
                      help="one facet density per edge (row i is the edge leaving vertex i)")
    dens.add_argument("--u", type=float, help="constant facet density")


def _outputs(p: argparse.ArgumentParser, sweep: bool = False):
    p.add_argument("--csv", type=Path, help="write the output polygon as CSV")
    if sweep:
        p.add_argument("--sweep-csv", type=Path, help="write k, perimeter, energy, weakstar_distance per k")
    p.add_argument("--svg", "--out-svg", dest="svg", type=Path, help="write an SVG drawing")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adatom-relax", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("envelope", help="parabolicity threshold and recession slope")
    p.add_argument("--density", required=True)
    p.add_argument("--csv", type=Path, help="tabulate psi and its envelope")
    p.add_argument("--smax", type=float, default=10.0)
    p.add_argument("--grid", type=int, default=201)
    _common(p)
    p.set_defaults(func=cmd_envelope)

    eq = sub.add_parser("equilibria", help="ball equilibria").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    p = eq.add_parser("solve")
    p.add_argument("--density", required=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--csv", type=Path, help="tabulate R, ubar, e, eprime on the scan grid")
    p.add_argument("--grid", type=int, default=GRID_POINTS)
    _common(p)
    p.set_defaults(func=cmd_eq_solve)

    p = eq.add_parser("sweep", help="grid over (n, rho, m, gamma); '{gamma}' in --density is substituted")
    p.add_argument("--density", default="quadratic:{gamma}")
    p.add_argument("--gamma", type=_floats, default=[1.0])
    p.add_argument("--m", type=_floats, default=[1.0])
    p.add_argument("--rho", type=_floats, default=[1.0])
    p.add_argument("--n", type=_floats, default=[2.0])
    p.add_argument("--csv", type=Path)
    _common(p)
    p.set_defaults(func=cmd_eq_sweep)

    p = eq.add_parser("plateau", help="density with a flat ball energy on [r1, r2] (fractions of Rbar)")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--r1", type=float, default=0.3)
    p.add_argument("--r2", type=float, default=0.6)
    p.add_argument("--g-m", type=float, default=1.0)
    p.add_argument("--csv", type=Path, help="tabulate e(R)")
    p.add_argument("--grid", type=int, default=401)
    _common(p)
    p.set_defaults(func=cmd_eq_plateau)

    lsc = sub.add_parser("lsc", help="lower semicontinuity probe").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    p = lsc.add_parser("sweep")
    p.add_argument("--density", required=True)
    p.add_argument("--envelope", action="store_true", help="test the envelope instead of the density")
    p.add_argument("--samples", "--tuples", dest="samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", type=Path, help="write the worst tuples")
    p.add_argument("--keep", type=int, default=100)
    _common(p)
    p.set_defaults(func=cmd_lsc_sweep)

    p = lsc.add_parser("sawtooth")
    p.add_argument("--density", required=True)
    for name, default in (("alpha", math.sqrt(3)), ("beta", math.sqrt(3)), ("lam", 0.5), ("a", 1.0), ("b", 1.0)):
        p.add_argument(f"--{name}", type=float, default=default)
    p.add_argument("--k", type=_floats, default=[1, 2, 4, 8, 16, 32, 64])
    p.add_argument("--svg", "--out-svg", dest="svg", type=Path)
    _common(p)
    p.set_defaults(func=cmd_lsc_sawtooth)

    geo = sub.add_parser("geometry", help="energies and masses").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    p = geo.add_parser("energy")
    _geometry_inputs(p, measure=True)
    p.add_argument("--psi", required=True, help="energy density")
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--window", type=_window)
    _common(p)
    p.set_defaults(func=cmd_geo_energy)

    p = geo.add_parser("mass")
    _geometry_inputs(p, measure=True)
    p.add_argument("--rho", type=float, default=1.0)
    _common(p)
    p.set_defaults(func=cmd_geo_mass)

    rel = sub.add_parser("relax", help="recovery constructions").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    p = rel.add_parser("wriggle")
    _geometry_inputs(p)
    p.add_argument("--r", type=float, required=True, help="length factor (>= 1)")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--raw", action="store_true", help="do not compensate for the cutoff collars")
    p.add_argument("--samples-per-wave", type=int, default=SAMPLES_PER_WAVE)
    _outputs(p)
    _common(p)
    p.set_defaults(func=cmd_relax_wriggle)

    p = rel.add_parser("weighted")
    _geometry_inputs(p)
    fsrc = p.add_mutually_exclusive_group(required=True)
    fsrc.add_argument("--f", type=float, help="constant excess factor")
    fsrc.add_argument("--f-csv", type=_existing, help="excess factor per vertex row")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--cell", type=float)
    p.add_argument("--raw", action="store_true")
    p.add_argument("--window", type=_window, action="append", help="report the perimeter inside this window")
    _outputs(p)
    _common(p)
    p.set_defaults(func=cmd_relax_weighted)

    p = rel.add_parser("dirac")
    p.add_argument("--measure", type=_existing, required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--k", type=_floats, default=[2, 3, 4, 5, 6])
    p.add_argument("--delta", type=float, default=0.0)
    _outputs(p, sweep=True)
    _common(p)
    p.set_defaults(func=cmd_relax_dirac)

    p = rel.add_parser("recover")
    p.add_argument("--measure", type=_existing, required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--k", type=_floats, default=[64.0])
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--general", action="store_true", help="use the general construction even without atoms")
    p.add_argument("--echo-input", action="store_true")
    _outputs(p, sweep=True)
    _common(p)
    p.set_defaults(func=cmd_relax_recover)

    p = rel.add_parser("mincheck")
    p.add_argument("--density", required=True)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    _common(p)
    p.set_defaults(func=cmd_relax_mincheck)
    return parser


def _config(args) -> dict:
    skip = {"func", "out", "tol"}
    out = {}
    for key, val in sorted(vars(args).items()):
        if key in skip:
            continue
        out[key] = str(val) if isinstance(val, Path) else val
    return out


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(dict(args.tol))
        func: Callable = args.func
        t0 = time.perf_counter()
        result, prov = func(args, tol)
        elapsed = time.perf_counter() - t0
    except InputParseError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_PARSE
    except RelaxationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_NUMERIC
    name = " ".join(x for x in (args.command, getattr(args, "sub", None)) if x)
    rep = report(name, _config(args), result, tol, prov)
    text = dumps_report(rep)
    if args.out:
        args.out.write_text(text)
    else:
        stdout.write(text)
    print(f"done in {elapsed:.3f}s", file=stderr)
    return EXIT_OK


def main(argv: list[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

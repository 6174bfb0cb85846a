"""Command line interface: ``shocknozzle <command> --config FILE``.

Exit codes: 0 success, 2 validation error (including failed verification),
3 divergence of the fixed-point iteration, 4 I/O or parse error.
"""

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from . import io
from .background import exit_pressure_of_shock, pressure_window
from .coefficients import compute
from .config import SolverConfig, load
from .errors import DivergenceError, ShockNozzleError, TableParseError, WindowError
from .grid import GridQ
from .pipeline import (run_perturbation, solve_background, verify_background_dir, verify_perturbation_dir,
                       write_background, write_perturbation)

EXIT_OK, EXIT_VALIDATION, EXIT_DIVERGENCE, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("shocknozzle")


def _grid(text):
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 129x129, got {text!r}") from None


def build_parser():
    p = argparse.ArgumentParser(prog="shocknozzle", description="Transonic shocks in a flat nozzle with a force.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI configuration file (defaults are used when omitted)")
    common.add_argument("--out", help="output directory (overrides [output] directory)")
    common.add_argument("--grid", type=_grid, help="grid size N1xN2")
    common.add_argument("--epsilon", type=float, help="exit pressure perturbation amplitude")
    common.add_argument("--quiet", action="store_true", help="only report errors")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("background", parents=[common], help="1D background shock and branch tables")
    sub.add_parser("window", parents=[common], help="exit-pressure window and the Pe(Ls) curve")
    sub.add_parser("perturb", parents=[common], help="2D perturbed shock by fixed-point iteration")
    sub.add_parser("sweep", parents=[common], help="parameter sweep from the [sweep] section")
    v = sub.add_parser("verify", parents=[common], help="re-check stored results")
    v.add_argument("result", help="result directory written by background or perturb")
    sub.add_parser("coeffs", parents=[common], help="coefficient profiles of the linearized problem")
    return p


def _config(args):
    cfg = load(args.config, validate=False) if args.config else SolverConfig()
    kw = {"directory": args.out, "epsilon": args.epsilon}
    if args.grid:
        kw["N1"], kw["N2"] = args.grid
    return cfg.with_overrides(**kw).validate()


def _say(args, *lines):
    if not args.quiet:
        for line in lines:
            print(line)


def cmd_background(cfg, args):
    bg = solve_background(cfg)
    summary = write_background(bg, cfg, cfg.directory)
    _say(args,
         f"shock position Ls = {summary['Ls']!r}",
         f"exit pressure Pe = {summary['exit_pressure']!r}",
         f"RH residual = {max(summary['rh_mass'], summary['rh_momentum']):.3e}",
         f"pressure jump P+ - P- = {summary['pressure_jump']!r}")
    if "window" in summary:
        _say(args, f"window (P1, P0) = ({summary['window']['P1']!r}, {summary['window']['P0']!r})")
    if "monotonicity_derivative" in summary:
        _say(args, f"d rho+(L1) / d Ls = {summary['monotonicity_derivative']!r}")
    _say(args, f"wrote {cfg.directory}")
    return EXIT_OK


def cmd_window(cfg, args):
    setup = cfg.setup()
    w = pressure_window(setup)
    io.ensure_dir(cfg.directory)
    if w.degenerate:
        _say(args, f"degenerate window: exit pressure independent of shock position (P1 = P0 = {w.P0!r})")
    else:
        _say(args, f"window (P1, P0) = ({w.P1!r}, {w.P0!r})")
    Ls = np.linspace(cfg.L0, cfg.L1, 11)
    Pe = np.array([exit_pressure_of_shock(x, setup) for x in Ls])
    io.write_table(os.path.join(cfg.directory, "window.csv"), {"Ls": Ls, "Pe": Pe},
                   {"P1": w.P1, "P0": w.P0, "degenerate": w.degenerate})
    return EXIT_OK


def cmd_perturb(cfg, args):
    run = run_perturbation(cfg)
    summary = write_perturbation(run, cfg, cfg.directory)
    res = run.residuals
    _say(args,
         f"converged in {summary['iterations']} iteration(s); kappa = {summary['kappa']!r}",
         f"|V| = {summary['V_norm']:.6e}; |V|/eps = {summary['V_over_eps']:.6g}; |xi - Ls|/eps = "
         f"{summary['xi_over_eps']:.6g}",
         "residuals: " + ", ".join(f"{k}={res[k]:.2e}" for k in ("density", "vorticity", "transport",
                                                                   "rh_mass", "exit_pressure")),
         f"wrote {cfg.directory}")
    return EXIT_OK


def _sweep_one(cfg, value):
    try:
        if cfg.parameter == "epsilon":
            run = run_perturbation(cfg.with_overrides(epsilon=value))
            return {"value": value, "ok": 1.0, **run.scaled_norms, "V_norm": run.state.norm(),
                    "iterations": float(run.report.iterations)}
        if cfg.parameter == "shock_position":
            Pe = exit_pressure_of_shock(value, cfg.setup())
            return {"value": value, "ok": 1.0, "Pe": Pe}
        bg = solve_background(replace(cfg, pressure=value, shock_position=None))
        return {"value": value, "ok": 1.0, "Ls": bg.Ls}
    except ShockNozzleError as exc:
        log.warning("sweep point %r failed: %s", value, exc)
        return {"value": value, "ok": 0.0}


def cmd_sweep(cfg, args):
    values = list(cfg.values)
    threads = int(os.environ.get("SHOCKNOZZLE_THREADS", "0") or 0) or (os.cpu_count() or 1)
    threads = max(1, min(threads, len(values) or 1))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        rows = list(pool.map(lambda v: _sweep_one(cfg, v), values))
    keys = []
    for r in rows:
        keys += [k for k in r if k not in keys]
    if not keys:
        keys = ["value", "ok"]
    cols = {k: np.array([r.get(k, np.nan) for r in rows], dtype=float) for k in keys}
    io.ensure_dir(cfg.directory)
    io.write_table(os.path.join(cfg.directory, "sweep.csv"), cols, {"parameter": cfg.parameter, "threads": threads})
    failed = sum(1 for r in rows if not r["ok"])
    _say(args, f"sweep over {cfg.parameter}: {len(rows)} point(s), {failed} failed; wrote {cfg.directory}")
    return EXIT_OK


def cmd_verify(cfg, args):
    path = args.result
    if not os.path.isdir(path):
        raise FileNotFoundError(f"no result directory {path}")
    kind = io.read_json(os.path.join(path, "perturbation.json"))["kind"] if os.path.exists(
        os.path.join(path, "perturbation.json")) else "background"
    checks = verify_perturbation_dir(path) if kind == "perturbation" else verify_background_dir(path)
    report = {"kind": kind, "passed": all(ok for _, ok, _ in checks),
              "checks": [{"check": name, "passed": ok, "detail": detail} for name, ok, detail in checks]}
    io.write_json(os.path.join(path, "verify.json"), report)
    for name, ok, detail in checks:
        _say(args, f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    if not report["passed"]:
        failed = [name for name, ok, _ in checks if not ok]
        print(f"verification failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_coeffs(cfg, args):
    bg = solve_background(cfg)
    grid = GridQ(cfg.N1, cfg.N2, bg.Ls, cfg.L1)
    c = compute(bg, grid.y1)
    io.ensure_dir(cfg.directory)
    io.write_table(os.path.join(cfg.directory, "coefficients.csv"), c.profiles(), {"N1": cfg.N1, "Ls": bg.Ls})
    io.write_json(os.path.join(cfg.directory, "coefficients.json"), c.scalars())
    _say(args, f"b0 = {c.b0!r}, b2 = {c.b2!r}, b3 = {c.b3!r}, a3 = {c.a3!r}",
         f"min a0 = {c.a0.min()!r}, min a1 = {c.a1.min()!r}, min a2 = {c.a2.min()!r}", f"wrote {cfg.directory}")
    return EXIT_OK


COMMANDS = {"background": cmd_background, "window": cmd_window, "perturb": cmd_perturb, "sweep": cmd_sweep,
            "verify": cmd_verify, "coeffs": cmd_coeffs}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _config(args)
        return COMMANDS[args.command](cfg, args)
    except WindowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DivergenceError as exc:
        ratios = ", ".join(f"{r:.3g}" for r in exc.ratios)
        print(f"error: {exc}; contraction ratios [{ratios}]", file=sys.stderr)
        return EXIT_DIVERGENCE
    except TableParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ShockNozzleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""Scaled perturbation size |V|/eps and shock displacement |xi - Ls|/eps against eps.

    python3 scripts/epsilon_scaling.py --grid 65 --eps 1e-4 2.5e-4 5e-4 1e-3 2e-3
"""

import argparse
import os
import warnings

from shocknozzle import io
from shocknozzle.config import SolverConfig
from shocknozzle.pipeline import run_perturbation, solve_background


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=int, default=65)
    ap.add_argument("--eps", type=float, nargs="+", default=[1e-4, 2.5e-4, 5e-4, 1e-3, 2e-3])
    ap.add_argument("--out", default="results/eps_scaling")
    args = ap.parse_args()

    base = SolverConfig(N1=args.grid, N2=args.grid)
    bg = solve_background(base)
    cols = {"epsilon": [], "V_over_eps": [], "xi_over_eps": [], "iterations": [], "max_ratio": []}
    for eps in args.eps:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            run = run_perturbation(base.with_overrides(epsilon=eps), background=bg)
        s = run.scaled_norms
        cols["epsilon"].append(eps)
        cols["V_over_eps"].append(s["V_over_eps"])
        cols["xi_over_eps"].append(s["xi_over_eps"])
        cols["iterations"].append(run.report.iterations)
        cols["max_ratio"].append(max(run.report.contraction_ratios, default=0.0))
        print(f"eps = {eps:.1e}: |V|/eps = {s['V_over_eps']:.5f}, |xi - Ls|/eps = {s['xi_over_eps']:.5f}, "
              f"{run.report.iterations} iterations")
    io.ensure_dir(args.out)
    io.write_table(os.path.join(args.out, "scaling.csv"), cols, {"grid": args.grid})


if __name__ == "__main__":
    main()

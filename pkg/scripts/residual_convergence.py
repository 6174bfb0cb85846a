"""Grid study of the converged perturbation: nonlinear residuals and their ratios.

    python3 scripts/residual_convergence.py --grids 33 65 129 --epsilon 1e-3
"""

import argparse
import os
import time

import numpy as np

from shocknozzle import io
from shocknozzle.config import SolverConfig
from shocknozzle.pipeline import run_perturbation, solve_background

KEYS = ("density", "vorticity", "transport", "rh_mass", "rh_momentum1", "exit_pressure", "shock_slope")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grids", type=int, nargs="+", default=[33, 65, 129])
    ap.add_argument("--epsilon", type=float, default=1e-3)
    ap.add_argument("--out", default="results/convergence")
    args = ap.parse_args()

    base = SolverConfig(epsilon=args.epsilon)
    bg = solve_background(base)
    rows = {k: [] for k in ("N", "iterations", "seconds") + KEYS}
    for N in args.grids:
        t0 = time.perf_counter()
        run = run_perturbation(base.with_overrides(N1=N, N2=N), background=bg)
        rows["N"].append(N)
        rows["iterations"].append(run.report.iterations)
        rows["seconds"].append(time.perf_counter() - t0)
        for k in KEYS:
            rows[k].append(run.residuals[k])
        print(f"N = {N:4d}: " + ", ".join(f"{k} {run.residuals[k]:.2e}" for k in KEYS[:3]))
    for k in KEYS[:3]:
        r = np.array(rows[k])
        print(f"{k} ratios: " + " ".join(f"{x:.2f}" for x in r[:-1] / r[1:]))
    io.ensure_dir(args.out)
    io.write_table(os.path.join(args.out, "residuals.csv"), rows, {"epsilon": args.epsilon})


if __name__ == "__main__":
    main()

"""Exit pressure as a function of shock position, with the admissible window.

    python3 scripts/window_curve.py --gamma 1.4 --force 0.1 --out results/window
"""

import argparse
import os

import numpy as np

from shocknozzle import io
from shocknozzle.background import NozzleSetup, exit_pressure_of_shock, monotonicity_derivative, pressure_window
from shocknozzle.gas import ForceField, GasModel


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gamma", type=float, default=2.0)
    ap.add_argument("--force", type=float, default=0.1)
    ap.add_argument("--samples", type=int, default=41)
    ap.add_argument("--out", default="results/window")
    args = ap.parse_args()

    setup = NozzleSetup(0.0, 1.0, 1.0, 2.0, GasModel(args.gamma, 1.0),
                        ForceField.constant(args.force, 0.0, 1.0, require_positive=args.force > 0))
    w = pressure_window(setup)
    Ls = np.linspace(0.0, 1.0, args.samples)
    Pe = np.array([exit_pressure_of_shock(x, setup) for x in Ls])
    dP = np.array([monotonicity_derivative(x, setup) if 0.0 < x < 1.0 else np.nan for x in Ls])
    io.ensure_dir(args.out)
    io.write_table(os.path.join(args.out, "pe_curve.csv"), {"Ls": Ls, "Pe": Pe, "drho_exit_dLs": dP},
                   {"gamma": args.gamma, "force": args.force, "P1": w.P1, "P0": w.P0, "degenerate": w.degenerate})
    print(f"window (P1, P0) = ({w.P1:.10g}, {w.P0:.10g}), degenerate = {w.degenerate}")
    print(f"Pe strictly decreasing: {bool(np.all(np.diff(Pe) < 0))}")


if __name__ == "__main__":
    main()

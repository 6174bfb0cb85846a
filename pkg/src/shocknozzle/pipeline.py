"""End-to-end runs built from a SolverConfig, plus re-checks of stored results."""

import os
from dataclasses import dataclass

import numpy as np

from . import io
from .background import background_at, monotonicity_derivative, solve_shock_position
from .coefficients import compute
from .config import dump, load
from .grid import GridQ
from .iteration import ExitPerturbation, iterate
from .operators import PerturbationState, ShockProblem
from .residual import compatibility_suite, foot_jump_check, nonlinear_residual, to_physical


def solve_background(cfg):
    setup = cfg.setup()
    if cfg.pressure is not None:
        return solve_shock_position(cfg.pressure, setup, tol_shoot=cfg.tol_shoot, delta0=cfg.delta0)
    bg = background_at(cfg.shock_position, setup, delta0=cfg.delta0)
    return bg


def exit_data(cfg, N2):
    if cfg.samples:
        return ExitPerturbation(cfg.epsilon, np.array(cfg.samples))
    return ExitPerturbation.builtin(cfg.epsilon, cfg.profile, N2)


def build_problem(cfg, background):
    grid = GridQ(cfg.N1, cfg.N2, background.Ls, cfg.L1)
    coeffs = compute(background, grid.y1)
    return ShockProblem(background, coeffs, grid)


@dataclass
class PerturbationRun:
    background: object
    problem: ShockProblem
    exit: ExitPerturbation
    state: PerturbationState
    report: object
    residuals: dict
    compatibility: list

    @property
    def scaled_norms(self):
        eps = self.exit.epsilon
        if eps == 0:
            return {"V_over_eps": float("nan"), "xi_over_eps": float("nan")}
        return {"V_over_eps": self.state.norm() / abs(eps),
                "xi_over_eps": float(np.max(np.abs(self.state.v4))) / abs(eps)}


def run_perturbation(cfg, background=None):
    bg = solve_background(cfg) if background is None else background
    problem = build_problem(cfg, bg)
    ex = exit_data(cfg, cfg.N2)
    compat = []

    def monitor(n, state, bundle):
        checks = compatibility_suite(state, problem.grid, bundle)
        compat.append(checks)
        return max(checks.values())

    state, report = iterate(problem, ex, tol_fp=cfg.tol_fp, max_iter=cfg.max_iter, eps_max=cfg.eps_max,
                            monitor=monitor)
    res = nonlinear_residual(state, problem, ex)
    res.update({f"foot_{k}": v for k, v in foot_jump_check(state, problem).items()})
    report.final_residuals = res
    return PerturbationRun(bg, problem, ex, state, report, res, compat)


def background_summary(bg):
    rh = bg.rh_residuals()
    gas = bg.gas
    out = {
        "kind": "background",
        "Ls": bg.Ls,
        "J": bg.J,
        "exit_pressure": bg.exit_pressure,
        "delta0": bg.delta0,
        "rh_mass": rh["mass"],
        "rh_momentum": rh["momentum"],
        "pressure_jump": rh["pressure_jump"],
        "bernoulli_plus": bg.bernoulli_plus,
        "post_shock_mach_sq": float(gas.mach_sq(bg.post_shock)),
        "shooting_iterations": bg.shooting_iterations,
    }
    if bg.setup.L0 < bg.Ls < bg.setup.L1:
        out["monotonicity_derivative"] = monotonicity_derivative(bg.Ls, bg.setup)
    if bg.window is not None:
        out["window"] = {"P1": bg.window.P1, "P0": bg.window.P0, "degenerate": bg.window.degenerate}
    return out


def write_background(bg, cfg, out_dir):
    io.ensure_dir(out_dir)
    gas, force = bg.gas, bg.force
    units = {"x1": "length", "u": "velocity", "rho": "density", "P": "pressure", "B": "energy per mass"}
    for name, br in (("supersonic", bg.supersonic), ("subsonic", bg.subsonic), ("extension", bg.extension)):
        io.write_table(
            os.path.join(out_dir, f"{name}.csv"),
            {"x1": br.x, "u": br.u, "rho": br.rho, "P": gas.pressure(br.rho), "mach_sq": br.mach_sq(gas),
             "B": br.bernoulli(gas, force)},
            {"branch": name, "regime": br.regime, "J": br.J, "units": units, "gamma": gas.gamma,
             "entropy_const": gas.entropy_const},
        )
    summary = background_summary(bg)
    io.write_json(os.path.join(out_dir, "summary.json"), summary)
    dump(cfg, os.path.join(out_dir, "config.ini"))
    return summary


def write_perturbation(run, cfg, out_dir):
    io.ensure_dir(out_dir)
    write_background(run.background, cfg, out_dir)
    grid = run.problem.grid
    st = run.state
    meta = io.grid_meta(grid)
    meta["epsilon"] = run.exit.epsilon
    io.write_table(os.path.join(out_dir, "fields_computational.csv"),
                   io.field_columns(grid, {"v1": st.v1, "v2": st.v2, "v3": st.v3}), meta)
    phys = to_physical(st, run.problem)
    io.write_table(os.path.join(out_dir, "fields_physical.csv"),
                   {k: phys[k].ravel() for k in ("x1", "x2", "u1", "u2", "rho", "P", "B")},
                   dict(meta, units={"x1": "length", "u1": "velocity", "rho": "density", "P": "pressure"}))
    io.write_table(os.path.join(out_dir, "shock.csv"),
                   {"y2": grid.y2, "v4": st.v4, "dv4": st.dv4, "xi": phys["shock_x1"], "Pex_hat": run.exit.Pex_hat},
                   meta)
    summary = {"kind": "perturbation", "epsilon": run.exit.epsilon, "grid": [grid.N1, grid.N2],
               "iterations": run.report.iterations, "V_norm": st.norm(), "kappa": run.report.kappa_history[-1],
               **run.scaled_norms}
    io.write_json(os.path.join(out_dir, "perturbation.json"), summary)
    io.write_json(os.path.join(out_dir, "report.json"), run.report.to_dict())
    io.write_json(os.path.join(out_dir, "residuals.json"), run.residuals)
    return summary


def read_state(out_dir):
    fields, meta = io.read_table(os.path.join(out_dir, "fields_computational.csv"))
    shock, _ = io.read_table(os.path.join(out_dir, "shock.csv"))
    N1, N2 = int(meta["N1"]), int(meta["N2"])
    shape = (N1, N2)
    state = PerturbationState(fields["v1"].reshape(shape), fields["v2"].reshape(shape), fields["v3"].reshape(shape),
                              shock["v4"], shock["dv4"])
    return state, meta, shock


def verify_background_dir(out_dir, tol=1e-10):
    """Re-check stored 1D branches; returns a list of (check, passed, detail)."""
    checks = []
    summary = io.read_json(os.path.join(out_dir, "summary.json"))
    for name in ("supersonic", "subsonic", "extension"):
        cols, meta = io.read_table(os.path.join(out_dir, f"{name}.csv"))
        x, u, rho, B, m2 = cols["x1"], cols["u"], cols["rho"], cols["B"], cols["mach_sq"]
        bad = np.flatnonzero(~(rho > 0))
        checks.append((f"{name}: positive density", bad.size == 0,
                       "ok" if bad.size == 0 else f"rho = {rho[bad[0]]!r} at node {int(bad[0])}, x1 = {x[bad[0]]!r}"))
        J = meta["J"]
        mass = float(np.max(np.abs(rho * u - J)) / abs(J))
        checks.append((f"{name}: mass flux", mass <= tol, f"{mass:.3e}"))
        bern = float(np.max(np.abs(B - B[0])) / max(1.0, abs(B[0])))
        checks.append((f"{name}: Bernoulli constant", bern <= tol, f"{bern:.3e}"))
        if x.size > 1:
            dm = np.diff(m2) * np.sign(np.diff(x))
            mono = bool(np.all(dm > 0)) if meta["regime"] == "supersonic" else bool(np.all(dm < 0))
            flat = bool(np.all(np.abs(dm) <= 1e-14))
            checks.append((f"{name}: Mach monotone", mono or flat, meta["regime"]))
    rh = max(summary["rh_mass"], summary["rh_momentum"])
    checks.append(("RH residual", rh <= tol, f"{rh:.3e}"))
    checks.append(("entropy P+ > P-", summary["pressure_jump"] > 0, f"{summary['pressure_jump']:.6g}"))
    return checks


def verify_perturbation_dir(out_dir, rtol=1e-6):
    """Recompute residuals of stored fields and compare with the stored summary."""
    checks = verify_background_dir(out_dir)
    phys, _ = io.read_table(os.path.join(out_dir, "fields_physical.csv"))
    bad = np.flatnonzero(~(phys["rho"] > 0))
    checks.append(("perturbed flow: positive density", bad.size == 0,
                   "ok" if bad.size == 0 else
                   f"rho = {phys['rho'][bad[0]]!r} at x1 = {phys['x1'][bad[0]]!r}, x2 = {phys['x2'][bad[0]]!r}"))
    cfg = load(os.path.join(out_dir, "config.ini"))
    state, meta, shock = read_state(out_dir)
    cfg = cfg.with_overrides(N1=int(meta["N1"]), N2=int(meta["N2"]))
    bg = solve_background(cfg)
    problem = build_problem(cfg, bg)
    ex = ExitPerturbation(float(meta["epsilon"]), shock["Pex_hat"])
    res = nonlinear_residual(state, problem, ex)
    stored = io.read_json(os.path.join(out_dir, "residuals.json"))
    for key in ("density", "vorticity", "transport", "exit_pressure", "rh_mass", "rh_momentum1", "rh_momentum2"):
        ok = res[key] <= stored[key] * (1.0 + rtol) + 1e-12
        checks.append((f"residual {key}", ok, f"{res[key]:.3e} (stored {stored[key]:.3e})"))
    if ex.epsilon == 0:
        worst = max(res[k] for k in ("density", "vorticity", "transport", "exit_pressure", "rh_mass"))
        checks.append(("zero perturbation residuals <= 1e-10", worst <= 1e-10, f"{worst:.3e}"))
    checks.append(("entropy at shock foot", res["entropy_margin"] > 0, f"{res['entropy_margin']:.6g}"))
    comp = compatibility_suite(state, problem.grid)
    checks.append(("wall compatibility", all(v <= 1.0 for v in comp.values()),
                   ", ".join(f"{k}={v:.2g}" for k, v in comp.items())))
    return checks

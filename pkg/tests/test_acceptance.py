"""The ten acceptance criteria at their stated tolerances.

Each test logs one PASS/FAIL line; the lines are repeated in the pytest
terminal summary under "acceptance criteria".
"""

import time

import numpy as np
import pytest

from shocknozzle.background import (background_at, exit_pressure_of_shock, monotonicity_derivative, pressure_window,
                                    solve_shock_position)
from shocknozzle.coefficients import compute
from shocknozzle.elliptic import solve_nonlocal_elliptic
from shocknozzle.grid import GridQ
from shocknozzle.iteration import ExitPerturbation, assemble_remainders, fixed_point_map, iterate
from shocknozzle.operators import PerturbationState
from shocknozzle.residual import foot_jump_check, nonlinear_residual

from conftest import converged_run, make_setup, standard_background, standard_problem

TARGETS = (0.1, 0.3, 0.5, 0.7, 0.9)


@pytest.fixture(scope="module")
def shots():
    """Shooting round trips for both gamma values, with their wall time."""
    t0 = time.perf_counter()
    out = []
    for gamma in (1.4, 2.0):
        setup = make_setup(gamma)
        for Ls in TARGETS:
            bg = solve_shock_position(exit_pressure_of_shock(Ls, setup), setup)
            out.append((gamma, Ls, bg))
    return out, time.perf_counter() - t0


def test_criterion_1_shooting_roundtrip(shots, criterion):
    runs, elapsed = shots
    err = max(abs(bg.Ls - Ls) for _, Ls, bg in runs)
    criterion(1, err <= 1e-8 and elapsed < 5.0,
              f"max |Ls - Ls*| = {err:.2e} over {len(runs)} shots (gamma 1.4, 2); runtime {elapsed:.2f} s")


def test_criterion_2_force_stabilization(criterion):
    flat = make_setup(force=0.0, require_positive=False)
    xs = np.linspace(0.0, 1.0, 11)
    pe0 = np.array([exit_pressure_of_shock(x, flat) for x in xs])
    spread = float(np.max(pe0) - np.min(pe0))
    degenerate = pressure_window(flat).degenerate
    setup = make_setup()
    pe = np.array([exit_pressure_of_shock(x, setup) for x in xs])
    decreasing = bool(np.all(np.diff(pe) < 0))
    worst = 0.0
    h = 1e-5
    for Ls in np.linspace(0.1, 0.9, 9):
        fd = (exit_pressure_of_shock(Ls + h, setup) ** 0.5 - exit_pressure_of_shock(Ls - h, setup) ** 0.5) / (2 * h)
        an = monotonicity_derivative(Ls, setup)
        worst = max(worst, abs(an - fd) / abs(fd))
    ok = spread <= 1e-10 and degenerate and decreasing and worst <= 1e-6
    criterion(2, ok, f"f=0 Pe spread {spread:.1e} (degenerate={degenerate}); f=0.1 decreasing={decreasing}, "
                     f"derivative vs FD rel err {worst:.1e}")


def test_criterion_3_rankine_hugoniot_and_entropy(shots, criterion):
    worst, min_jump = 0.0, np.inf
    for _, _, bg in shots[0]:
        r = bg.rh_residuals()
        worst = max(worst, r["mass"], r["momentum"])
        min_jump = min(min_jump, r["pressure_jump"])
    for N in (65, 129):
        state, _, _ = converged_run(N, 1e-3)
        foot = foot_jump_check(state, standard_problem(N))
        worst = max(worst, foot["mass"], foot["momentum1"], foot["momentum2"])
        min_jump = min(min_jump, foot["min_pressure_jump"])
    criterion(3, worst <= 1e-12 and min_jump > 0,
              f"max jump residual {worst:.1e} (1D shocks and 2D foot nodes); min P+ - P- = {min_jump:.4f}")


def test_criterion_4_branch_conservation(shots, criterion):
    mass = bern = 0.0
    monotone = True
    for _, _, bg in shots[0]:
        gas, force = bg.gas, bg.force
        for br, sign in ((bg.supersonic, 1.0), (bg.subsonic, -1.0)):
            mass = max(mass, float(np.max(np.abs(br.rho * br.u - br.J)) / br.J))
            B = br.bernoulli(gas, force)
            bern = max(bern, float(np.max(np.abs(B - B[0])) / abs(B[0])))
            monotone &= bool(np.all(sign * np.diff(br.mach_sq(gas)) > 0))
    criterion(4, mass <= 1e-10 and bern <= 1e-10 and monotone,
              f"mass flux {mass:.1e}, Bernoulli {bern:.1e} (relative); Mach monotone = {monotone}")


def _manufactured_errors(N):
    bg = standard_background()
    grid = GridQ(N, N, bg.Ls, 1.0)
    c = compute(bg, grid.y1)
    Y1, Y2 = grid.mesh()
    C = np.cos(np.pi * (Y2 + 1.0))
    phi = (Y1 - bg.Ls) ** 2 * C
    kappa = 0.3
    trace = kappa + phi[0]
    rhs = (2.0 * C - c.a2[:, None] * np.pi**2 * (Y1 - bg.Ls) ** 2 * C + c.a1[:, None] * 2.0 * (Y1 - bg.Ls) * C
           - c.a0[:, None] * trace)
    g1 = -c.a3 * trace
    g2 = 2.0 * (1.0 - bg.Ls) * C[-1]
    t0 = time.perf_counter()
    sol = solve_nonlocal_elliptic(c.a0, c.a1, c.a2, c.a3, grid, g1, g2, rhs=rhs)
    elapsed = time.perf_counter() - t0
    return float(np.max(np.abs(sol.phi - phi))), abs(sol.kappa - kappa), elapsed


def test_criterion_5_nonlocal_elliptic(criterion):
    e65, k65, _ = _manufactured_errors(65)
    e129, k129, _ = _manufactured_errors(129)
    _, _, t257 = _manufactured_errors(257)
    rp, rk = e65 / e129, k65 / k129
    ok = 3.5 <= rp <= 4.5 and 3.5 <= rk <= 4.5 and t257 < 10.0
    criterion(5, ok, f"error ratio 65->129: phi {rp:.3f}, kappa {rk:.3f}; 257^2 solve {t257:.2f} s")


def test_criterion_6_zero_fixed_point(criterion):
    problem = standard_problem(65)
    state, report = iterate(problem, ExitPerturbation.builtin(0.0, "cos:1", 65))
    norm = state.norm()
    criterion(6, norm <= 1e-12 and report.iterations == 1,
              f"eps = 0: |V| = {norm:.1e} after {report.iterations} iteration(s)")


def test_criterion_7_contraction_and_linearity(criterion):
    problem = standard_problem(129)
    s1, r1, _ = converged_run(129, 1e-3)
    s2, _, _ = converged_run(129, 5e-4)
    v1, v2 = s1.norm() / 1e-3, s2.norm() / 5e-4
    x1, x2 = np.max(np.abs(s1.v4)) / 1e-3, np.max(np.abs(s2.v4)) / 5e-4
    dv, dx = abs(v1 - v2) / v2, abs(x1 - x2) / x2
    ratios = r1.contraction_ratios
    ok = r1.converged and r1.iterations <= 15 and max(ratios) <= 0.5 and dv <= 0.1 and dx <= 0.1
    assert problem.grid.N1 == 129
    criterion(7, ok, f"{r1.iterations} iterations, max ratio {max(ratios):.3f}; |V|/eps {v1:.4f} vs {v2:.4f} "
                     f"({dv:.1%}), |xi - Ls|/eps {x1:.4f} vs {x2:.4f} ({dx:.1%})")


def test_criterion_8_quadratic_remainders(criterion):
    problem = standard_problem(65)
    W, _, _ = fixed_point_map(PerturbationState.zeros(problem.grid), problem,
                              ExitPerturbation.builtin(1e-3, "cos:1", 65))
    shape = W.scaled(1.0 / W.norm())
    zero_exit = ExitPerturbation.builtin(0.0, "cos:1", 65)
    deltas = np.array([1e-3, 5e-4, 2.5e-4])
    norms = [assemble_remainders(shape.scaled(d), problem, zero_exit).norms() for d in deltas]
    exps = {}
    for key in norms[0]:
        vals = np.array([n[key] for n in norms])
        if np.all(vals > 1e-15):
            exps[key] = float(np.polyfit(np.log(deltas), np.log(vals), 1)[0])
    lo, hi = min(exps.values()), max(exps.values())
    criterion(8, 1.8 <= lo and hi <= 2.2 and len(exps) >= 10,
              f"fitted exponents of {len(exps)} remainders in [{lo:.3f}, {hi:.3f}]")


def test_criterion_9_nonlinear_residual(criterion):
    res = {}
    for N in (65, 129):
        state, report, _ = converged_run(N, 1e-3)
        res[N] = nonlinear_residual(state, standard_problem(N), ExitPerturbation.builtin(1e-3, "cos:1", N))
    tol_fp = 1e-10
    bound = {N: (2.0 / (N - 1)) ** 2 * 0.5 ** 2 + tol_fp for N in res}
    interior = ("density", "vorticity", "transport")
    within = all(res[N][k] <= bound[N] for N in res for k in interior + ("shock_slope",))
    exact = all(res[N][k] <= 1e-12 for N in res for k in ("rh_mass", "rh_momentum1", "rh_momentum2",
                                                          "exit_pressure", "wall"))
    ratio = {k: res[65][k] / res[129][k] for k in ("density", "vorticity")}
    ok = within and exact and all(3.5 <= r <= 4.5 for r in ratio.values())
    criterion(9, ok, f"129^2 residuals: density {res[129]['density']:.1e}, vorticity {res[129]['vorticity']:.1e}, "
                     f"transport {res[129]['transport']:.1e}; RH/exit/wall <= 1e-12: {exact}; "
                     f"65->129 ratios density {ratio['density']:.2f}, vorticity {ratio['vorticity']:.2f}")


def test_criterion_10_compatibility(criterion):
    worst, count = 0.0, 0
    for N, eps in ((65, 1e-3), (129, 1e-3), (129, 5e-4)):
        _, _, compat = converged_run(N, eps)
        for checks in compat:
            worst = max(worst, max(checks.values()))
            count += 1
    criterion(10, worst <= 1.0, f"{count} iterates checked; worst ratio to the O(h^2) allowance {worst:.3f}")

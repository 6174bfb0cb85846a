"""Verification of computed perturbations: full nonlinear residuals, the
physical-coordinate map and the wall compatibility suite."""

import numpy as np

from .errors import DomainError
from .grid import diff_y2, wall_compatibility_defect, wall_slopes

EQUATIONS = ("density", "vorticity", "transport")


def rh_flux_residuals(upstream, downstream, slope, gas):
    """Jump relations across the curve x1 = xi(x2) (upstream has u2 = 0).

    Returns relative residuals of mass, axial momentum and transverse momentum.
    """
    rm, um = upstream
    rp, u1, u2 = downstream
    Pm, Pp = gas.pressure(rm), gas.pressure(rp)
    m = rm * um
    mass = rp * u1 - m - slope * rp * u2
    mom1 = rp * u1 * u1 + Pp - (m * um + Pm) - slope * rp * u1 * u2
    mom2 = rp * u1 * u2 - slope * (rp * u2 * u2 + Pp - Pm)
    scale = m * um + Pm
    return {
        "mass": np.abs(mass) / abs(m) if np.ndim(m) == 0 else np.abs(mass) / np.abs(m),
        "momentum1": np.abs(mom1) / np.abs(scale),
        "momentum2": np.abs(mom2) / np.abs(scale),
    }


def foot_jump_check(state, problem):
    """Exact jump at every foot node of ``state``: RH residuals and entropy margin."""
    foot = problem.jump_at_foot(state.v4, state.v2[0])
    res = rh_flux_residuals((foot["rho_m"], foot["u_m"]), (foot["rho"], foot["u1"], foot["u2"]), foot["slope"],
                            problem.gas)
    gas = problem.gas
    entropy = gas.pressure(foot["rho"]) - gas.pressure(foot["rho_m"])
    return {
        "mass": float(np.max(res["mass"])),
        "momentum1": float(np.max(res["momentum1"])),
        "momentum2": float(np.max(res["momentum2"])),
        "min_pressure_jump": float(np.min(entropy)),
    }


def nonlinear_residual(state, problem, exit_data):
    """Max-norm residuals of every equation and boundary condition at ``state``."""
    gas, grid = problem.gas, problem.grid
    n1, n2, n3 = problem.nonlinear(state)
    out = {"density": float(np.max(np.abs(n1))), "vorticity": float(np.max(np.abs(n2))),
           "transport": float(np.max(np.abs(n3)))}

    # shock foot: flow state carried by the perturbation against the upstream flow
    xi = problem.Ls + state.v4
    rho_m, u_m = problem.background.upstream_at(xi)
    u1 = problem.u[0, 0] + state.v1[0]
    u2 = state.v2[0]
    B = problem.B_bar + state.v3[0]
    rho = gas.density_from_bernoulli(B, problem.force.potential(xi), u1 * u1 + u2 * u2)
    rh = rh_flux_residuals((rho_m, u_m), (rho, u1, u2), state.dv4, gas)
    out["rh_mass"] = float(np.max(rh["mass"]))
    out["rh_momentum1"] = float(np.max(rh["momentum1"]))
    out["rh_momentum2"] = float(np.max(rh["momentum2"]))
    out["entropy_margin"] = float(np.min(gas.pressure(rho) - gas.pressure(rho_m)))
    out["shock_slope"] = float(np.max(np.abs(diff_y2(state.v4, grid.h2) - state.dv4)))

    # exit pressure
    u1e = problem.u_exit + state.v1[-1]
    rho_e = gas.density_from_bernoulli(problem.B_bar + state.v3[-1], problem.phi_L1, u1e**2 + state.v2[-1] ** 2)
    target = problem.exit_pressure + exit_data.epsilon * problem.exit_pressure ** (1.0 / gas.gamma) * exit_data.Pex_hat
    out["exit_pressure"] = float(np.max(np.abs(gas.pressure(rho_e) - target)))
    out["wall"] = float(max(np.max(np.abs(state.v2[:, 0])), np.max(np.abs(state.v2[:, -1]))))
    return out


def to_physical(state, problem):
    """Fields on the physical nodes (image of the computational nodes) and the shock curve."""
    bg = problem.background
    xi = problem.Ls + state.v4
    if np.any(xi <= bg.setup.L0) or np.any(xi >= bg.setup.L1):
        raise DomainError("shock curve leaves the nozzle (L0, L1)")
    gas = problem.gas
    x1 = problem.x1(state.v4)
    x2 = np.broadcast_to(problem.y2, x1.shape)
    u1 = problem.u + state.v1
    u2 = state.v2
    B = problem.B_bar + state.v3
    rho = gas.density_from_bernoulli(B, problem.force.potential(x1), u1 * u1 + u2 * u2)
    return {
        "x1": x1, "x2": np.array(x2), "u1": u1, "u2": u2, "rho": rho, "P": gas.pressure(rho), "B": B,
        "shock_x2": problem.y2.copy(), "shock_x1": xi,
    }


def physical_to_computational(x1, x2, xi_of_x2, Ls, L1):
    """y = ((x1 - xi)/(L1 - xi) (L1 - Ls) + Ls, x2)."""
    xi = xi_of_x2
    return (x1 - xi) / (L1 - xi) * (L1 - Ls) + Ls, x2


def computational_to_physical(y1, y2, v4, Ls, L1):
    return y1 + (L1 - y1) / (L1 - Ls) * v4, y2


def second_wall_derivative(g, h):
    """One-sided second-order estimate of g'' at both walls (last axis)."""
    lo = (2.0 * g[..., 0] - 5.0 * g[..., 1] + 4.0 * g[..., 2] - g[..., 3]) / h**2
    hi = (2.0 * g[..., -1] - 5.0 * g[..., -2] + 4.0 * g[..., -3] - g[..., -4]) / h**2
    return lo, hi


def second_derivative_defect(g, h, safety=4.0, rtol=1e-6, atol=1e-13):
    """|g''(+-1)| relative to its O(h^2) truncation allowance from fourth differences."""
    g = np.asarray(g, dtype=float)
    lo, hi = second_wall_derivative(g, h)
    d4lo = np.abs(g[..., 4] - 4 * g[..., 3] + 6 * g[..., 2] - 4 * g[..., 1] + g[..., 0]) / h**4
    d4hi = np.abs(g[..., -5] - 4 * g[..., -4] + 6 * g[..., -3] - 4 * g[..., -2] + g[..., -1]) / h**4
    scale = np.max(np.abs(g), axis=-1) / h**2
    alo = safety * 11.0 / 12.0 * h * h * d4lo + rtol * scale + atol
    ahi = safety * 11.0 / 12.0 * h * h * d4hi + rtol * scale + atol
    return float(max(np.max(np.abs(lo) / alo), np.max(np.abs(hi) / ahi)))


def compatibility_suite(state, grid, bundle=None, atol=1e-13):
    """Ratios (<= 1 passes) of every wall condition of the iteration space.

    v2 = 0 on the walls is checked absolutely; derivative conditions are
    measured against their O(h^2) truncation allowance.
    """
    h = grid.h2
    wall_v2 = max(np.max(np.abs(state.v2[:, 0])), np.max(np.abs(state.v2[:, -1])))
    out = {
        "v2_wall": float(wall_v2 / atol) if wall_v2 > 0 else 0.0,
        "d2_v1": wall_compatibility_defect(state.v1, h),
        "d2_v3": wall_compatibility_defect(state.v3, h),
        "d22_v2": second_derivative_defect(state.v2, h),
        "dv4_wall": float(max(abs(state.dv4[0]), abs(state.dv4[-1])) / atol),
        "d1_v4": wall_compatibility_defect(state.v4, h),
        "d3_v4": second_derivative_defect(state.dv4, h),
    }
    if bundle is not None:
        g2_wall = max(np.max(np.abs(bundle.G2[:, 0])), np.max(np.abs(bundle.G2[:, -1])))
        out["G2_wall"] = float(g2_wall / atol)
        out["d2_G1"] = wall_compatibility_defect(bundle.G1, h)
        out["d_R6"] = wall_compatibility_defect(bundle.R6, h)
        out["d_R7"] = wall_compatibility_defect(bundle.R7, h)
    return out


def compatibility_ok(report_dict):
    return all(v <= 1.0 for v in report_dict.values())


def max_wall_slopes(g, h):
    lo, hi = wall_slopes(g, h)
    return float(max(np.max(np.abs(lo)), np.max(np.abs(hi))))

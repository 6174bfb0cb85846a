"""Fixed-point iteration for the perturbed transonic shock.

One sweep freezes a state V_hat, evaluates every nonlinear remainder at it,
and solves the linear problem: the trace-coupled elliptic problem gives the
potential (hence v1, v2 and the wall endpoint of the shock), the shock ODE gives
v4, and transport along the frozen characteristics gives v3.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .elliptic import solve_nonlocal_elliptic
from .errors import DivergenceError, DomainError
from .grid import EVEN, diff_y1, diff_y2, integrate_y2, require_wall_compatible
from .operators import PerturbationState, ShockProblem
from .transport import solve_bernoulli_transport, trace_characteristics, wall_clamped_spline, shock_interpolant

BUILTIN_PROFILES = ("cos",)


@dataclass
class ExitPerturbation:
    epsilon: float
    Pex_hat: np.ndarray

    def __post_init__(self):
        self.Pex_hat = np.asarray(self.Pex_hat, dtype=float)
        if self.Pex_hat.ndim != 1 or self.Pex_hat.size < 4:
            raise DomainError("exit profile must be a 1D array of node samples")
        if not np.all(np.isfinite(self.Pex_hat)):
            raise DomainError("exit profile has non-finite samples")
        require_wall_compatible(self.Pex_hat, 2.0 / (self.Pex_hat.size - 1), "exit pressure profile")

    @classmethod
    def builtin(cls, epsilon, profile, N2):
        """Named profile, e.g. 'cos:1' for cos(pi (y2 + 1))."""
        name, _, arg = profile.partition(":")
        if name != "cos":
            raise DomainError(f"unknown exit profile {profile!r}; built-ins: {', '.join(BUILTIN_PROFILES)}")
        k = int(arg) if arg else 1
        y2 = np.linspace(-1.0, 1.0, N2)
        return cls(epsilon, np.cos(k * np.pi * (y2 + 1.0)))


@dataclass
class RemainderBundle:
    F3: np.ndarray
    F4: np.ndarray
    F5: np.ndarray
    F6: np.ndarray
    G1: np.ndarray
    G2: np.ndarray
    R2: np.ndarray
    R3: np.ndarray
    R4: np.ndarray
    R5: np.ndarray
    R6: np.ndarray
    R7: np.ndarray
    foot: object = None

    def norms(self):
        names = ("F3", "F4", "F5", "F6", "G1", "G2", "R2", "R3", "R4", "R5", "R6", "R7")
        return {k: float(np.max(np.abs(getattr(self, k)))) for k in names}


@dataclass
class IterationReport:
    step_norms: list = field(default_factory=list)
    state_norms: list = field(default_factory=list)
    contraction_ratios: list = field(default_factory=list)
    kappa_history: list = field(default_factory=list)
    compatibility_history: list = field(default_factory=list)
    clamp_counts: list = field(default_factory=list)
    converged: bool = False
    final_residuals: dict = field(default_factory=dict)

    @property
    def iterations(self):
        return len(self.step_norms)

    def to_dict(self):
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "step_norms": self.step_norms,
            "state_norms": self.state_norms,
            "contraction_ratios": self.contraction_ratios,
            "kappa_history": self.kappa_history,
            "compatibility_history": self.compatibility_history,
            "clamp_counts": self.clamp_counts,
            "final_residuals": self.final_residuals,
        }


def assemble_remainders(hat, problem, exit_data):
    """Nonlinear remainders at the frozen state, as exact discrete defects."""
    grid, c = problem.grid, problem.coeffs
    u = problem.u
    sub = problem.c2 - u * u

    d = problem._derivs(hat)
    n = problem.nonlinear(hat, d)
    n0 = problem.nonlinear(PerturbationState.zeros(grid))
    lin = problem.linear(hat, d)
    F3 = -(n[0] - n0[0] - lin[0])
    F4 = -(n[1] - n0[1] - lin[1])

    q = hat.v2[0]
    foot = problem.jump_at_foot(hat.v4, q)
    F5 = foot["slope"] - c.b0 * q
    R2 = (foot["u1"] - problem.foot0["u1"]) - c.b2 * hat.v4
    R3 = (foot["B"] - problem.B_bar) - c.b3 * hat.v4

    v1_exit = problem.exit_velocity(hat.v2[-1], hat.v3[-1], exit_data.epsilon, exit_data.Pex_hat)
    v1_exit0 = problem.exit_velocity(0.0, 0.0, 0.0, 0.0)
    lin_exit = (hat.v3[-1] - exit_data.epsilon * problem.A_root * exit_data.Pex_hat) / problem.u_exit
    R4 = (v1_exit - v1_exit0) - lin_exit

    chars = trace_characteristics(hat, c, grid)
    y2 = grid.y2
    v4_hat = shock_interpolant(y2, hat.v4, hat.dv4)
    F6 = c.b3 * (v4_hat(chars.beta) - hat.v4[None, :]) + wall_clamped_spline(y2, R3)(chars.beta)
    R5 = integrate_y2(F5, grid.h2)

    G1 = (F3 - c.B3[:, None] * F6 - (c.B3 * c.b3 + c.B4)[:, None] * R5[None, :]) / sub
    G2 = F4 - c.lam[:, None] * F5[None, :] - diff_y2(F6, grid.h2, EVEN) / u
    R6 = c.b2 * R5 + R2
    R7 = (c.b3 * R5 + F6[-1]) / problem.u_exit + R4
    return RemainderBundle(F3, F4, F5, F6, G1, G2, R2, R3, R4, R5, R6, R7, chars)


def update_shock(v2_at_Ls, F5, v4_at_minus1, b0, h2, potential_trace=None):
    """Shock displacement from its ODE, integrated from the lower wall.

    Returns (v4, dv4).  With ``potential_trace`` = b0 (kappa + phi(Ls, .)) the
    integral of b0 v2(Ls, .) is taken from the potential itself, which is the
    exact discrete primitive of its central y2 difference.
    """
    F5 = np.asarray(F5, dtype=float)
    dv4 = b0 * np.asarray(v2_at_Ls, dtype=float) + F5
    R5 = integrate_y2(F5, h2)
    if potential_trace is not None:
        v4 = np.asarray(potential_trace, dtype=float) + R5
    else:
        v4 = v4_at_minus1 + integrate_y2(dv4, h2)
    return v4, dv4


def elliptic_data(bundle, problem, exit_data):
    """rhs, g1, g2 of the potential problem and the primitive of G2."""
    grid, c = problem.grid, problem.coeffs
    Gamma = integrate_y2(bundle.G2, grid.h2)
    rhs = bundle.G1 + c.lam1[:, None] * Gamma + diff_y1(Gamma, grid.h1)
    g1 = bundle.R6 + Gamma[0]
    g2 = bundle.R7 - exit_data.epsilon * problem.A_root * exit_data.Pex_hat / problem.u_exit + Gamma[-1]
    return rhs, g1, g2, Gamma


def solve_velocity(bundle, problem, exit_data, check_compat=False):
    """(v1, v2, v4(-1), potential solution, trace b0 (kappa + phi(Ls, .)))."""
    grid, c = problem.grid, problem.coeffs
    rhs, g1, g2, Gamma = elliptic_data(bundle, problem, exit_data)
    sol = solve_nonlocal_elliptic(c.a0, c.a1, c.a2, c.a3, grid, g1, g2, rhs=rhs, check_compat=check_compat)
    W = c.b0 * sol.trace
    v2 = sol.d2(grid.h2)
    v1 = sol.d1(grid.h1) + c.lam[:, None] * W[None, :] - Gamma
    return v1, v2, c.b0 * sol.kappa, sol, W


def fixed_point_map(hat, problem, exit_data):
    """One sweep V = T(V_hat); returns the new state and diagnostics."""
    grid, c = problem.grid, problem.coeffs
    bundle = assemble_remainders(hat, problem, exit_data)
    v1, v2, v4m1, sol, W = solve_velocity(bundle, problem, exit_data)
    v4, dv4 = update_shock(v2[0], bundle.F5, v4m1, c.b0, grid.h2, potential_trace=W)
    v3 = solve_bernoulli_transport(v4, dv4, bundle.foot, c.b3, bundle.R3, grid.y2)
    return PerturbationState(v1, v2, v3, v4, dv4), bundle, sol


def iterate(problem, exit_data, tol_fp=1e-10, max_iter=50, eps_max=1e-2, monitor=None):
    """Fixed-point loop from V = 0; returns (state, report).

    ``monitor(n, state, bundle)`` is called after every sweep and may return a
    float which is recorded in the compatibility history.
    """
    eps = abs(exit_data.epsilon)
    if eps > eps_max:
        raise DomainError(f"epsilon = {eps} exceeds the configured bound {eps_max}")
    if eps > 1e-3:
        warnings.warn(f"epsilon = {eps} is above 1e-3; the linear regime may not hold", RuntimeWarning)
    if exit_data.Pex_hat.size != problem.grid.N2:
        raise DomainError("exit profile does not match the y2 grid")
    report = IterationReport()
    V = PerturbationState.zeros(problem.grid)
    for n in range(1, max_iter + 1):
        new, bundle, sol = fixed_point_map(V, problem, exit_data)
        step = new.distance(V)
        report.step_norms.append(step)
        report.state_norms.append(new.norm())
        report.kappa_history.append(sol.kappa)
        report.clamp_counts.append(bundle.foot.clamp_count)
        if len(report.step_norms) > 1 and report.step_norms[-2] > 0:
            report.contraction_ratios.append(step / report.step_norms[-2])
        if monitor is not None:
            val = monitor(n, new, bundle)
            if val is not None:
                report.compatibility_history.append(val)
        V = new
        if not np.isfinite(step):
            break
        if step <= tol_fp:
            report.converged = True
            return V, report
    raise DivergenceError(
        f"fixed-point iteration did not reach tol {tol_fp:g} in {max_iter} steps "
        f"(last step {report.step_norms[-1]:.3e})",
        report.contraction_ratios,
    )

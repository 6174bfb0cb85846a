"""One-dimensional transonic shock with an external force.

Supersonic branch from the inlet, Rankine-Hugoniot jump at ``Ls``, subsonic
branch to the exit, and shooting on ``Ls`` for a prescribed exit pressure.
The exit-pressure map is strictly decreasing in ``Ls`` when f > 0, which is
what makes the shooting globally convergent.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, HatStateTooLargeError, MonotonicityError, SonicDegeneracyError, WindowError
from .gas import FlowState, ForceField, GasModel

SUPERSONIC = "supersonic"
SUBSONIC = "subsonic"


@dataclass(frozen=True)
class NozzleSetup:
    L0: float
    L1: float
    rho0: float
    u0: float
    gas: GasModel
    force: ForceField
    n_steps: int = 2000
    sonic_guard: float = 1e-8

    def __post_init__(self):
        if not self.L0 < self.L1:
            raise DomainError(f"need L0 < L1, got [{self.L0}, {self.L1}]")
        if self.rho0 <= 0 or self.u0 <= 0:
            raise DomainError("inlet density and velocity must be positive")
        if self.u0**2 <= self.gas.sound_speed_sq(self.rho0):
            raise DomainError(
                f"inlet must be supersonic: u0^2 = {self.u0**2:.6g} <= c^2(rho0) = "
                f"{self.gas.sound_speed_sq(self.rho0):.6g}"
            )
        if (self.force.L0, self.force.L1) != (self.L0, self.L1):
            raise DomainError("force interval must coincide with [L0, L1]")
        if self.n_steps < 1:
            raise DomainError("n_steps must be positive")

    @property
    def J(self):
        return self.rho0 * self.u0

    @property
    def length(self):
        return self.L1 - self.L0


@dataclass
class SolutionBranch:
    x: np.ndarray
    u: np.ndarray
    rho: np.ndarray
    regime: str
    J: float

    def state(self, k=-1):
        return FlowState(float(self.rho[k]), float(self.u[k]))

    def pressure(self, gas):
        return gas.pressure(self.rho)

    def mach_sq(self, gas):
        return self.u**2 / gas.sound_speed_sq(self.rho)

    def bernoulli(self, gas, force):
        return 0.5 * self.u**2 + gas.enthalpy(self.rho) - force.potential(self.x)


@dataclass
class PressureWindow:
    P1: float
    P0: float
    degenerate: bool = False

    def contains(self, Pe):
        return self.P1 < Pe < self.P0


@dataclass
class BackgroundSolution:
    setup: NozzleSetup
    supersonic: SolutionBranch
    subsonic: SolutionBranch
    Ls: float
    J: float
    exit_pressure: float
    extension: SolutionBranch
    delta0: float
    window: PressureWindow = None
    shooting_iterations: int = 0
    _upstream_cache: dict = field(default_factory=dict, repr=False)

    @property
    def gas(self):
        return self.setup.gas

    @property
    def force(self):
        return self.setup.force

    @property
    def pre_shock(self):
        return self.supersonic.state(-1)

    @property
    def post_shock(self):
        return self.subsonic.state(0)

    @property
    def bernoulli_plus(self):
        """Bernoulli constant of the subsonic branch, taken at the shock."""
        return float(self.gas.bernoulli(self.post_shock, self.force.potential(self.Ls)))

    def rh_residuals(self):
        return rh_residuals(self.pre_shock, self.post_shock, self.gas)

    def upstream_at(self, x, n_sub=16):
        """Supersonic state (rho, u) at positions x near Ls (vectorized).

        The supersonic flow is unperturbed, so it is continued from the stored
        pre-shock state with a short RK4 march; x == Ls returns that state exactly.
        """
        x = np.asarray(x, dtype=float)
        u = advance(self.setup, self.J, np.full(x.shape, self.pre_shock.u1), self.Ls, x, n_sub)
        return self.J / u, u


def _rhs_factory(setup, J):
    """Scalar right-hand side of u' = u f / (u^2 - c^2(J/u)) with the sonic guard."""
    gas = setup.gas
    g = gas.gamma
    k = g * gas.entropy_const * J ** (g - 1.0)
    f = setup.force.scalar_evaluator()
    guard = setup.sonic_guard * gas.sound_speed_sq(setup.rho0)

    def rhs(x, u):
        if not u > 0.0:
            raise SonicDegeneracyError(f"velocity left the admissible range near x1 = {x:.12g}")
        d = u * u - k * u ** (1.0 - g)
        if abs(d) < guard:
            raise SonicDegeneracyError(f"sonic degeneracy at x1 = {x:.12g} (u = {u:.12g})")
        return u * f(x) / d

    return rhs


def velocity_slope(gas, force, J, x, u):
    """Vectorized u' = u f / (u^2 - c^2) along a 1D branch of mass flux J."""
    c2 = gas.sound_speed_sq(J / u)
    return u * force(x) / (u * u - c2)


def advance(setup, J, u, x0, x1, n_sub):
    """Vectorized RK4 march of the 1D velocity ODE from x0 to x1 (arrays)."""
    gas, force = setup.gas, setup.force
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), np.shape(u))
    h = (np.asarray(x1, dtype=float) - x0) / n_sub
    u = np.array(u, dtype=float)
    for k in range(n_sub):
        x = x0 + k * h
        k1 = velocity_slope(gas, force, J, x, u)
        k2 = velocity_slope(gas, force, J, x + 0.5 * h, u + 0.5 * h * k1)
        k3 = velocity_slope(gas, force, J, x + 0.5 * h, u + 0.5 * h * k2)
        k4 = velocity_slope(gas, force, J, x + h, u + h * k3)
        u = u + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return u


def integrate_branch(start_state, interval, setup, n_steps=None):
    """Classical RK4 for the 1D velocity ODE with rho = J/u.

    ``interval`` is (x_start, x_end); x_end < x_start integrates backwards.
    The regime is fixed by the start state and must persist along the branch.
    """
    a, b = float(interval[0]), float(interval[1])
    n = setup.n_steps if n_steps is None else int(n_steps)
    gas = setup.gas
    J = start_state.rho * start_state.u1
    m2 = gas.mach_sq(start_state)
    if abs(m2 - 1.0) * gas.sound_speed_sq(start_state.rho) < setup.sonic_guard * gas.sound_speed_sq(setup.rho0):
        raise SonicDegeneracyError("branch starts at a sonic state")
    regime = SUPERSONIC if m2 > 1.0 else SUBSONIC
    if a == b:
        x = np.array([a])
        u = np.array([start_state.u1])
        return SolutionBranch(x, u, J / u, regime, J)

    rhs = _rhs_factory(setup, J)
    k_c2 = gas.gamma * gas.entropy_const * J ** (gas.gamma - 1.0)  # c^2 = k_c2 u^(1 - gamma)
    supersonic = regime == SUPERSONIC
    h = (b - a) / n
    xs = [a + i * h for i in range(n)] + [b]
    us = [float(start_state.u1)]
    u = us[0]
    for i in range(n):
        x = xs[i]
        k1 = rhs(x, u)
        k2 = rhs(x + 0.5 * h, u + 0.5 * h * k1)
        k3 = rhs(x + 0.5 * h, u + 0.5 * h * k2)
        k4 = rhs(x + h, u + h * k3)
        u = u + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not u > 0.0 or (u * u > k_c2 * u ** (1.0 - gas.gamma)) != supersonic:
            raise SonicDegeneracyError(f"{regime} branch crossed the sonic line near x1 = {xs[i + 1]:.12g}")
        us.append(u)
    x = np.array(xs)
    u = np.array(us)
    branch = SolutionBranch(x, u, J / u, regime, J)
    m2 = branch.mach_sq(gas)
    if (regime == SUPERSONIC and np.any(m2 <= 1.0)) or (regime == SUBSONIC and np.any(m2 >= 1.0)):
        raise SonicDegeneracyError(f"{regime} branch changed regime on [{a}, {b}]")
    return branch


def _momentum_defect(rho, m, target, gas, q2=0.0, p_minus=None):
    val = m * m / rho + gas.pressure(rho) - target
    if p_minus is not None:
        val = val + m * m * q2 / (gas.pressure(rho) - p_minus)
    return val


def rh_jump(upstream, gas):
    """Subsonic state behind a normal shock (mass and momentum flux conserved).

    Bracketed bisection on m(rho) = J^2/rho + P(rho) above the sonic density,
    where m is increasing and has exactly one root of m(rho) = m(rho_minus).
    """
    rho_m, u_m = float(upstream.rho), float(upstream.u1)
    J = rho_m * u_m
    c2 = gas.sound_speed_sq(rho_m)
    if u_m * u_m < c2 * (1.0 - 1e-14):
        raise DomainError("upstream state of a shock must be supersonic")
    rho_s = gas.sonic_density(J)
    if u_m * u_m <= c2 * (1.0 + 1e-14) or rho_s <= rho_m:
        return FlowState(rho_m, u_m)
    target = J * u_m + gas.pressure(rho_m)
    rho = _bisect_increasing(lambda r: _momentum_defect(r, J, target, gas), rho_s)
    return FlowState(rho, J / rho)


def _bisect_increasing(F, lo, max_iter=400):
    """Root of F above lo, where F(lo) < 0 and F increases to +inf."""
    if not F(lo) < 0.0:
        raise HatStateTooLargeError("root bracketing failed at the sonic density")
    hi = 2.0 * lo
    for _ in range(200):
        if F(hi) > 0.0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise HatStateTooLargeError("root bracketing failed: no sign change")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= 1e-16 * hi:
            break
        if F(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _bisect_vec(F, lo, hi):
    """Vectorized bisection for F(lo) <= 0 < F(hi), F increasing on the bracket."""
    lo, hi = lo.copy(), hi.copy()
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        pos = F(mid) > 0.0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
        if np.all(hi - lo <= 1e-16 * hi):
            break
    return 0.5 * (lo + hi)


def rh_jump_tangential(rho_m, u_m, q, gas):
    """Downstream (rho, u1) and shock slope for an upstream flow (rho_m, u_m, 0).

    ``q`` is the downstream tangential velocity u2+; all inputs are arrays.
    With m = rho_m u_m the jump conditions reduce to the scalar equation

        m^2/rho + P(rho) - m u_m - P(rho_m) + m^2 q^2 / (P(rho) - P(rho_m)) = 0,

    whose strong (subsonic) root is taken.  Then u1 = m/rho + m q^2/dP and the
    shock slope is xi' = m q / dP.
    """
    rho_m = np.asarray(rho_m, dtype=float)
    u_m = np.asarray(u_m, dtype=float)
    q2 = np.asarray(q, dtype=float) ** 2
    m = rho_m * u_m
    p_m = gas.pressure(rho_m)
    target = m * u_m + p_m

    def F(r, q2=q2):
        return m * m / r + gas.pressure(r) - target + m * m * q2 / (gas.pressure(r) - p_m)

    shape = np.broadcast(m, q2).shape
    lo = np.broadcast_to(gas.sonic_density(m), shape).copy()
    if np.any(lo <= rho_m):
        raise HatStateTooLargeError("upstream state at the shock foot is not supersonic")
    # normal-shock density: F(., 0) <= F(., q2), so every root lies in (rho_m, rho_n)
    hi = 2.0 * lo
    for _ in range(200):
        neg = F(hi, 0.0) <= 0.0
        if not np.any(neg):
            break
        lo = np.where(neg, hi, lo)
        hi = np.where(neg, 2.0 * hi, hi)
    rho_n = _bisect_vec(lambda r: F(r, 0.0), lo, hi)
    # F is convex on (rho_m, inf); its minimiser separates the weak and strong roots
    a = np.broadcast_to(rho_m, shape).copy()
    b = rho_n.copy()
    for _ in range(120):
        c1, c2 = a + (b - a) / 3.0, b - (b - a) / 3.0
        left = F(c1) < F(c2)
        b = np.where(left, c2, b)
        a = np.where(left, a, c1)
    rmin = 0.5 * (a + b)
    if not np.all(F(rmin) < 0.0):
        bad = np.flatnonzero(~(np.broadcast_to(F(rmin), shape) < 0.0))
        raise HatStateTooLargeError(f"no admissible jump at {bad.size} foot node(s); perturbation too large")
    lo, hi = rmin, np.maximum(rho_n, rmin)
    rho = np.where(q2 == 0.0, rho_n, _bisect_vec(F, lo, hi))
    dP = gas.pressure(rho) - p_m
    u1 = m / rho + m * q2 / dP
    slope = m * np.asarray(q, dtype=float) / dP
    return rho, u1, slope


def rh_residuals(upstream, downstream, gas):
    """Relative mass and momentum flux jumps across a normal shock."""
    mass_m = upstream.rho * upstream.u1
    mass_p = downstream.rho * downstream.u1
    mom_m = upstream.rho * upstream.u1**2 + gas.pressure(upstream.rho)
    mom_p = downstream.rho * downstream.u1**2 + gas.pressure(downstream.rho)
    return {
        "mass": abs(mass_p - mass_m) / abs(mass_m),
        "momentum": abs(mom_p - mom_m) / abs(mom_m),
        "pressure_jump": float(gas.pressure(downstream.rho) - gas.pressure(upstream.rho)),
    }


def _pipeline(Ls, setup):
    if not setup.L0 <= Ls <= setup.L1:
        raise DomainError(f"shock position {Ls} outside [{setup.L0}, {setup.L1}]")
    inlet = FlowState(setup.rho0, setup.u0)
    sup = integrate_branch(inlet, (setup.L0, Ls), setup)
    post = rh_jump(sup.state(-1), setup.gas)
    sub = integrate_branch(post, (Ls, setup.L1), setup)
    return sup, sub


def exit_pressure_of_shock(Ls, setup):
    _, sub = _pipeline(Ls, setup)
    return float(setup.gas.pressure(sub.rho[-1]))


def _exit_density_slope(Ls, setup, sup, sub):
    gas = setup.gas
    u_m = sup.u[-1]
    u_p = sub.u[0]
    I = setup.force(Ls) * (u_p - u_m) / u_m
    rho_e = sub.rho[-1]
    coeff = gas.gamma * gas.entropy_const * rho_e ** (gas.gamma - 2.0) - sub.J**2 / rho_e**3
    return float(I / coeff)


def monotonicity_derivative(Ls, setup):
    """d rho+(L1) / d Ls from the Bernoulli identity across the subsonic branch.

    I = f(Ls) (u+ - u-) / u- is the Ls-derivative of the post-shock Bernoulli
    value; dividing by d B / d rho at the exit (fixed mass flux) gives the slope.
    """
    sup, sub = _pipeline(Ls, setup)
    return _exit_density_slope(Ls, setup, sup, sub)


def pressure_window(setup, rtol=1e-12):
    """Exit pressures P0 (shock at L0) and P1 (shock at L1)."""
    P0 = exit_pressure_of_shock(setup.L0, setup)
    P1 = exit_pressure_of_shock(setup.L1, setup)
    scale = max(abs(P0), abs(P1))
    if abs(P0 - P1) <= rtol * scale:
        return PressureWindow(P1, P0, degenerate=True)
    if P0 < P1:
        raise MonotonicityError(f"pressure window inverted: P0 = {P0!r} < P1 = {P1!r}")
    return PressureWindow(P1, P0)


def extend_subsonic(solution, delta0):
    """Backward continuation of the subsonic branch to [Ls - delta0, L1]."""
    setup = solution.setup
    Ls = solution.Ls
    if delta0 < 0:
        raise DomainError("delta0 must be non-negative")
    if delta0 == 0:
        sub = solution.subsonic
        return SolutionBranch(sub.x.copy(), sub.u.copy(), sub.rho.copy(), SUBSONIC, sub.J)
    if not Ls - delta0 > setup.L0:
        raise DomainError(f"extension start Ls - delta0 = {Ls - delta0} must exceed L0 = {setup.L0}")
    try:
        back = integrate_branch(solution.post_shock, (Ls, Ls - delta0), setup)
    except SonicDegeneracyError as exc:
        raise SonicDegeneracyError(f"subsonic extension hit sonic; shrink delta0 (= {delta0}): {exc}") from exc
    sub = solution.subsonic
    x = np.concatenate([back.x[::-1], sub.x[1:]])
    u = np.concatenate([back.u[::-1], sub.u[1:]])
    return SolutionBranch(x, u, sub.J / u, SUBSONIC, sub.J)


def _default_delta0(setup, Ls, delta0):
    if delta0 is None:
        delta0 = 0.1 * setup.length
    return min(delta0, 0.5 * (Ls - setup.L0))


def assemble_background(Ls, setup, delta0=None, window=None, iterations=0, branches=None):
    sup, sub = branches if branches is not None else _pipeline(Ls, setup)
    d0 = _default_delta0(setup, Ls, delta0)
    sol = BackgroundSolution(
        setup=setup,
        supersonic=sup,
        subsonic=sub,
        Ls=float(Ls),
        J=setup.J,
        exit_pressure=float(setup.gas.pressure(sub.rho[-1])),
        extension=None,
        delta0=d0,
        window=window,
        shooting_iterations=iterations,
    )
    sol.extension = extend_subsonic(sol, d0)
    return sol


def solve_shock_position(Pe, setup, tol_shoot=1e-10, max_iter=200, delta0=None):
    """Shock position for exit pressure Pe by safeguarded Newton shooting.

    The bracket [lo, hi] always satisfies Pe(lo) > Pe > Pe(hi); Newton steps
    use the analytic exit-density slope and fall back to bisection whenever
    they would leave the bracket.
    """
    window = pressure_window(setup)
    if window.degenerate:
        raise WindowError(
            "degenerate window: exit pressure independent of shock position "
            f"(P1 = P0 = {window.P0!r})",
            window,
        )
    if not window.contains(Pe):
        raise WindowError(
            f"no transonic shock for this exit pressure: Pe = {Pe!r} not in (P1, P0) = "
            f"({window.P1!r}, {window.P0!r})",
            window,
        )
    lo, hi = setup.L0, setup.L1
    Ls = lo + (window.P0 - Pe) / (window.P0 - window.P1) * (hi - lo)
    gas = setup.gas
    for it in range(1, max_iter + 1):
        sup, sub = _pipeline(Ls, setup)
        rho_e = sub.rho[-1]
        g = float(gas.pressure(rho_e)) - Pe
        if g > 0.0:
            lo = Ls
        else:
            hi = Ls
        slope = gas.sound_speed_sq(rho_e) * _exit_density_slope(Ls, setup, sup, sub)
        step = -g / slope if slope != 0.0 else math.inf
        if abs(g) <= tol_shoot and abs(step) <= 1e-13 * setup.length:
            return assemble_background(Ls, setup, delta0, window, it, (sup, sub))
        if hi - lo <= 1e-15 * setup.length:
            if abs(g) <= tol_shoot:
                return assemble_background(Ls, setup, delta0, window, it, (sup, sub))
            break
        new = Ls + step
        if not lo < new < hi:
            new = 0.5 * (lo + hi)
        Ls = new
    raise MonotonicityError(f"shooting did not converge in {max_iter} iterations (Ls = {Ls!r})")


def background_at(Ls, setup, delta0=None):
    """Background solution with the shock placed at Ls (Pe is then an output)."""
    return assemble_background(Ls, setup, delta0)

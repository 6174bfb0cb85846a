"""Flow equations in the straightened subsonic domain and their linear part.

A perturbation state V = (v1, v2, v3, v4, v4') describes the flow

    u1 = u_bar(y1) + v1,  u2 = v2,  B = B_bar + v3,  shock at x1 = Ls + v4(y2),

with the physical abscissa x1 = y1 + (L1 - y1) v4 / L, L = L1 - Ls.  The
three equations are the density equation (continuity rewritten with the
Bernoulli closure), the vorticity relation and Bernoulli transport.  Both the
full operator and its linear part use the same difference stencils, so their
difference is exactly the nonlinear remainder of the discrete problem.
"""

from dataclasses import dataclass

import numpy as np

from .background import rh_jump_tangential
from .errors import DomainError, HatStateTooLargeError, VacuumError
from .grid import EVEN, ODD, diff_y1, diff_y2


@dataclass
class PerturbationState:
    v1: np.ndarray
    v2: np.ndarray
    v3: np.ndarray
    v4: np.ndarray
    dv4: np.ndarray

    @classmethod
    def zeros(cls, grid):
        z = grid.zeros()
        return cls(z.copy(), z.copy(), z.copy(), np.zeros(grid.N2), np.zeros(grid.N2))

    @property
    def v4_at_minus1(self):
        return float(self.v4[0])

    def fields(self):
        return (self.v1, self.v2, self.v3, self.v4, self.dv4)

    def norm(self):
        return max(float(np.max(np.abs(a))) for a in self.fields())

    def distance(self, other):
        return max(float(np.max(np.abs(a - b))) for a, b in zip(self.fields(), other.fields()))

    def scaled(self, s):
        return PerturbationState(*(s * a for a in self.fields()))


class ShockProblem:
    """Background data frozen on the computational grid."""

    def __init__(self, background, coeffs, grid):
        if abs(grid.Ls - background.Ls) > 1e-14 or abs(grid.L1 - background.setup.L1) > 1e-14:
            raise DomainError("grid does not match the background shock position")
        self.background = background
        self.coeffs = coeffs
        self.grid = grid
        self.gas = background.gas
        self.force = background.force
        self.Ls, self.L1 = grid.Ls, grid.L1
        self.length = self.L1 - self.Ls
        self.y1 = grid.y1[:, None]
        self.y2 = grid.y2
        self.u = coeffs.u[:, None]
        self.du = coeffs.profile.du[:, None]
        self.c2 = coeffs.c2[:, None]
        self.A_root = self.gas.entropy_const ** (1.0 / self.gas.gamma)
        self.u_exit = float(coeffs.u[-1])
        self.rho_exit = background.J / self.u_exit
        self.exit_pressure = float(self.gas.pressure(self.rho_exit))
        # post-shock reference states from the same jump routine used for perturbed feet
        self.foot0 = self.jump_at_foot(np.zeros(1), np.zeros(1))
        self.B_bar = float(self.foot0["B"][0])
        self.phi_L1 = float(self.force.potential(self.L1))

    # geometry
    def x1(self, v4):
        return self.y1 + (self.L1 - self.y1) / self.length * v4[None, :]

    def shock_position(self, v4):
        return self.Ls + v4

    # exact jump at the (perturbed) shock foot
    def jump_at_foot(self, v4, q):
        xi = self.Ls + np.asarray(v4, dtype=float)
        bg = self.background
        lo = max(bg.setup.L0, self.Ls - bg.delta0)
        if np.any(xi <= lo) or np.any(xi >= self.L1):
            raise HatStateTooLargeError("perturbed shock foot leaves the admissible range of positions")
        rho_m, u_m = bg.upstream_at(xi)
        rho, u1, slope = rh_jump_tangential(rho_m, u_m, q, self.gas)
        q = np.asarray(q, dtype=float)
        B = 0.5 * (u1 * u1 + q * q) + self.gas.enthalpy(rho) - self.force.potential(xi)
        return {"xi": xi, "rho_m": rho_m, "u_m": u_m, "rho": rho, "u1": u1, "u2": q, "slope": slope, "B": B}

    def exit_velocity(self, v2_exit, v3_exit, epsilon, pex_hat):
        """Axial velocity perturbation at x1 = L1 that realizes the exit pressure exactly."""
        gas = self.gas
        P_target = self.exit_pressure + epsilon * self.exit_pressure ** (1.0 / gas.gamma) * pex_hat
        if np.any(P_target <= 0):
            raise HatStateTooLargeError("prescribed exit pressure is not positive")
        kinetic = self.B_bar + v3_exit + self.phi_L1 - gas.enthalpy(gas.density_from_pressure(P_target)) - 0.5 * v2_exit**2
        if np.any(kinetic <= 0):
            raise HatStateTooLargeError("exit state has no admissible axial velocity")
        return np.sqrt(2.0 * kinetic) - self.u_exit

    # interior operators
    def _derivs(self, V):
        g = self.grid
        return {
            "d1v1": diff_y1(V.v1, g.h1),
            "d1v2": diff_y1(V.v2, g.h1),
            "d1v3": diff_y1(V.v3, g.h1),
            "d2v1": diff_y2(V.v1, g.h2, EVEN),
            "d2v2": diff_y2(V.v2, g.h2, ODD),
            "d2v3": diff_y2(V.v3, g.h2, EVEN),
        }

    def nonlinear(self, V, d=None):
        """Density, vorticity and transport equations of the full flow (each should vanish)."""
        d = self._derivs(V) if d is None else d
        L = self.length
        x1 = self.x1(V.v4)
        u1 = self.u + V.v1
        u2 = V.v2
        c2 = (self.gas.gamma - 1.0) * (self.B_bar + V.v3 + self.force.potential(x1) - 0.5 * (u1 * u1 + u2 * u2))
        if np.any(c2 <= 0):
            raise VacuumError("vacuum/invalid state: non-positive sound speed in the perturbed flow")
        D = L / (L - V.v4)[None, :]
        E = (self.y1 - self.L1) * V.dv4[None, :] / (L - V.v4)[None, :]
        du1_dy1 = self.du + d["d1v1"]
        dx1_u1 = D * du1_dy1
        dx2_u1 = d["d2v1"] + E * du1_dy1
        dx1_u2 = D * d["d1v2"]
        dx2_u2 = d["d2v2"] + E * d["d1v2"]
        dx1_B = D * d["d1v3"]
        dx2_B = d["d2v3"] + E * d["d1v3"]
        n1 = (c2 - u1 * u1) * dx1_u1 - u1 * u2 * (dx1_u2 + dx2_u1) + (c2 - u2 * u2) * dx2_u2 + u1 * self.force(x1)
        n2 = dx1_u2 - dx2_u1 + dx2_B / u1
        n3 = u1 * dx1_B + u2 * dx2_B
        return n1, n2, n3

    def linear(self, V, d=None):
        d = self._derivs(V) if d is None else d
        c = self.coeffs
        u, c2 = self.u, self.c2
        v4 = V.v4[None, :]
        dv4 = V.dv4[None, :]
        s = (self.L1 - self.y1) / self.length
        l1 = ((c2 - u * u) * d["d1v1"] + c2 * d["d2v2"] + c.B1[:, None] * V.v1 + c.B3[:, None] * V.v3
              + c.B4[:, None] * v4)
        l2 = d["d1v2"] - d["d2v1"] + s * self.du * dv4 + d["d2v3"] / u
        l3 = u * d["d1v3"]
        return l1, l2, l3

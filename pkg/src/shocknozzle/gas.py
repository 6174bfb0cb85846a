"""Polytropic gas closures, Bernoulli algebra and the external force."""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DomainError, VacuumError


@dataclass(frozen=True)
class FlowState:
    rho: float
    u1: float
    u2: float = 0.0

    def __post_init__(self):
        if not np.all(np.asarray(self.rho) > 0):
            raise DomainError(f"density must be positive, got {self.rho}")

    @property
    def speed_sq(self):
        return self.u1 * self.u1 + self.u2 * self.u2


@dataclass(frozen=True)
class GasModel:
    """Isentropic polytropic gas with P(rho) = A rho**gamma.

    All methods accept scalars or numpy arrays.
    """

    gamma: float = 1.4
    entropy_const: float = 1.0

    def __post_init__(self):
        if not 1.0 < self.gamma < 3.0:
            raise DomainError(f"gamma must lie in (1, 3), got {self.gamma}")
        if not self.entropy_const > 0.0:
            raise DomainError(f"entropy constant must be positive, got {self.entropy_const}")

    @staticmethod
    def _check_rho(rho):
        if not np.all(np.asarray(rho) > 0):
            raise DomainError("density must be positive")
        return rho

    def pressure(self, rho):
        rho = self._check_rho(rho)
        return self.entropy_const * rho**self.gamma

    def sound_speed_sq(self, rho):
        rho = self._check_rho(rho)
        return self.gamma * self.entropy_const * rho ** (self.gamma - 1.0)

    def enthalpy(self, rho):
        rho = self._check_rho(rho)
        g = self.gamma
        return g * self.entropy_const / (g - 1.0) * rho ** (g - 1.0)

    def density_from_pressure(self, p):
        if not np.all(np.asarray(p) > 0):
            raise DomainError("pressure must be positive")
        return (p / self.entropy_const) ** (1.0 / self.gamma)

    def bernoulli(self, state, phi=0.0):
        """B = |u|^2/2 + h(rho) - Phi."""
        return 0.5 * state.speed_sq + self.enthalpy(state.rho) - phi

    def density_from_bernoulli(self, B, phi, speed_sq):
        g = self.gamma
        radicand = (g - 1.0) / (g * self.entropy_const) * (B + phi - 0.5 * speed_sq)
        if not np.all(np.asarray(radicand) > 0):
            raise VacuumError("vacuum/invalid state: B + Phi - |u|^2/2 must be positive")
        return radicand ** (1.0 / (g - 1.0))

    def mach_sq(self, state):
        return state.speed_sq / self.sound_speed_sq(state.rho)

    def sonic_density(self, mass_flux):
        """Density at which a 1D flow with the given mass flux is sonic."""
        return (mass_flux**2 / (self.gamma * self.entropy_const)) ** (1.0 / (self.gamma + 1.0))


class ForceField:
    """Axial force f(x1) given by polynomial coefficients (ascending powers).

    The potential is the exact antiderivative with Phi(L0) = 0.
    """

    n_samples = 2001

    def __init__(self, coeffs, L0, L1, require_positive=True):
        coeffs = tuple(float(c) for c in np.atleast_1d(coeffs))
        if not coeffs:
            raise DomainError("force needs at least one coefficient")
        if not L0 < L1:
            raise DomainError(f"need L0 < L1, got [{L0}, {L1}]")
        self.coeffs = coeffs
        self.L0 = float(L0)
        self.L1 = float(L1)
        self.require_positive = require_positive
        self._f = Polynomial(coeffs)
        self._df = self._f.deriv()
        self._phi = self._f.integ(lbnd=self.L0)
        if require_positive:
            xs = np.linspace(self.L0, self.L1, self.n_samples)
            vals = self._f(xs)
            bad = np.flatnonzero(vals <= 0.0)
            if bad.size:
                raise DomainError(
                    f"force must be positive on [L0, L1]; f({xs[bad[0]]:.6g}) = {vals[bad[0]]:.6g}"
                )

    @classmethod
    def constant(cls, value, L0, L1, require_positive=True):
        return cls([value], L0, L1, require_positive=require_positive)

    def __call__(self, x):
        return self._f(x)

    def derivative(self, x):
        return self._df(x)

    def potential(self, x):
        return self._phi(x)

    def scalar_evaluator(self):
        """Plain-float Horner closure for the scalar RK4 loops."""
        cs = self.coeffs[::-1]

        def f(x):
            r = 0.0
            for c in cs:
                r = r * x + c
            return r

        return f

    def __repr__(self):
        return f"ForceField(coeffs={self.coeffs}, L0={self.L0}, L1={self.L1})"

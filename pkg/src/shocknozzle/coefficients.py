"""Coefficients of the linearized shock problem around the 1D background.

Everything is sampled on the y1 grid of the subsonic region [Ls, L1].  The
background velocity slope is taken from the ODE itself (not by differencing
the stored branch) and the force derivative is exact.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .background import SUBSONIC, integrate_branch, rh_jump
from .errors import CoefficientDegeneracyError, DomainError
from .gas import FlowState


@dataclass
class SubsonicProfile:
    """Subsonic background sampled on the y1 nodes."""

    y1: np.ndarray
    u: np.ndarray
    rho: np.ndarray
    c2: np.ndarray
    du: np.ndarray
    d2u: np.ndarray
    f: np.ndarray
    df: np.ndarray

    @property
    def mach_sq(self):
        return self.u**2 / self.c2


def sample_subsonic(background, y1, substeps=None):
    """RK4 subsonic branch on the uniform nodes y1 (with internal substeps)."""
    y1 = np.asarray(y1, dtype=float)
    setup = background.setup
    n = y1.size - 1
    if n < 1:
        raise DomainError("y1 grid needs at least two nodes")
    m = substeps if substeps is not None else max(1, math.ceil(setup.n_steps / n))
    branch = integrate_branch(background.post_shock, (y1[0], y1[-1]), setup, n_steps=m * n)
    u = branch.u[::m].copy()
    gas, force = setup.gas, setup.force
    rho = background.J / u
    c2 = gas.sound_speed_sq(rho)
    f = force(y1)
    df = force.derivative(y1)
    d = u * u - c2
    du = u * f / d
    g = u / d
    dg = -(u * u + gas.gamma * c2) / d**2
    d2u = dg * du * f + g * df
    return SubsonicProfile(y1, u, rho, c2, du, d2u, f, df)


def jump_partials(rho_m, u_m, gas):
    """Partials of the downstream (rho+, u1+) with respect to (rho-, u-, (u2+)^2).

    Obtained by implicit differentiation of the exact jump relations at zero
    tangential velocity.  Keys: 'rho', 'u', 's' for each of h1 (density) and
    h2 (axial velocity).
    """
    post = rh_jump(FlowState(rho_m, u_m), gas)
    rp, up = post.rho, post.u1
    m = rho_m * u_m
    c2m = gas.sound_speed_sq(rho_m)
    c2p = gas.sound_speed_sq(rp)
    dP = gas.pressure(rp) - gas.pressure(rho_m)
    if not dP > 0:
        raise DomainError("jump partials need a strict pressure increase across the shock")
    den = up * up - c2p
    drho_da = (2.0 * up * u_m - u_m * u_m - c2m) / den
    drho_db = 2.0 * rho_m * (up - u_m) / den
    drho_ds = (m * m / dP) / den
    h1 = {"rho": drho_da, "u": drho_db, "s": drho_ds}
    h2 = {
        "rho": u_m / rp - up / rp * drho_da,
        "u": rho_m / rp - up / rp * drho_db,
        "s": -m * c2p / (dP * den),
    }
    return h1, h2


def rh_boundary_partials(background):
    pre = background.pre_shock
    return jump_partials(pre.rho, pre.u1, background.gas)


@dataclass
class LinearCoefficients:
    Ls: float
    L1: float
    gamma: float
    entropy_const: float
    J: float
    rho_minus: float
    u_minus: float
    rho_plus: float
    u_plus: float
    P_minus: float
    P_plus: float
    B_plus: float
    b0: float
    b2: float
    b3: float
    profile: SubsonicProfile
    B1: np.ndarray
    B3: np.ndarray
    B4: np.ndarray
    lam: np.ndarray
    dlam: np.ndarray
    lam0: np.ndarray
    lam1: np.ndarray
    lam2: np.ndarray
    a0: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    a3: float
    h1_partials: dict
    h2_partials: dict
    _spline: CubicSpline = field(default=None, repr=False)

    @property
    def y1(self):
        return self.profile.y1

    @property
    def u(self):
        return self.profile.u

    @property
    def c2(self):
        return self.profile.c2

    @property
    def length(self):
        return self.L1 - self.Ls

    @property
    def u_spline(self):
        """C2 interpolant of the background velocity for off-grid queries."""
        if self._spline is None:
            p = self.profile
            self._spline = CubicSpline(p.y1, p.u, bc_type=((1, p.du[0]), (1, p.du[-1])))
        return self._spline

    def interp(self, name, y1):
        """Linear interpolation of a sampled profile at arbitrary y1."""
        return np.interp(y1, self.y1, getattr(self, name))

    def profiles(self):
        """Columns for tabular output, keyed by name."""
        n = self.y1.size
        cols = {"y1": self.y1, "u": self.u, "rho": self.profile.rho, "c2": self.c2, "du": self.profile.du}
        for name in ("B1", "B3", "B4", "lam", "lam0", "lam1", "lam2", "a0", "a1", "a2"):
            cols[name] = getattr(self, name)
        cols["a3"] = np.full(n, self.a3)
        return cols

    def scalars(self):
        return {
            "Ls": self.Ls, "b0": self.b0, "b2": self.b2, "b3": self.b3, "a3": self.a3,
            "rho_minus": self.rho_minus, "u_minus": self.u_minus,
            "rho_plus": self.rho_plus, "u_plus": self.u_plus,
            "P_minus": self.P_minus, "P_plus": self.P_plus, "B_plus": self.B_plus,
            "h1_partials": dict(self.h1_partials), "h2_partials": dict(self.h2_partials),
        }

    def certify(self):
        """Raise unless every sign/positivity requirement of the elliptic problem holds."""
        checks = [
            ("b0 > 0", np.atleast_1d(self.b0), lambda v: v > 0),
            ("b2 < 0", np.atleast_1d(self.b2), lambda v: v < 0),
            ("a0 > 0", self.a0, lambda v: v > 0),
            ("a1 > 0", self.a1, lambda v: v > 0),
            ("a2 > 1", self.a2, lambda v: v > 1),
            ("a3 > 0", np.atleast_1d(self.a3), lambda v: v > 0),
        ]
        for label, vals, ok in checks:
            good = ok(vals) & np.isfinite(vals)
            if not np.all(good):
                k = int(np.flatnonzero(~good)[0])
                where = f" at y1 = {self.y1[k]:.12g}" if vals.size == self.y1.size else ""
                raise CoefficientDegeneracyError(f"coefficient certificate {label} fails{where}: value {vals[k]!r}")
        return True


def compute(background, grid_y1, certify=True):
    """All linearized coefficients on grid_y1 (which must span [Ls, L1])."""
    y1 = np.asarray(grid_y1, dtype=float)
    Ls, L1 = background.Ls, background.setup.L1
    if not (abs(y1[0] - Ls) <= 1e-12 * max(1.0, abs(Ls)) and abs(y1[-1] - L1) <= 1e-12 * max(1.0, abs(L1))):
        raise DomainError("y1 grid must run from Ls to L1")
    if background.subsonic.regime != SUBSONIC:
        raise DomainError("background downstream branch is not subsonic")
    gas = background.gas
    g = gas.gamma
    pre, post = background.pre_shock, background.post_shock
    rm, um, rp, up = pre.rho, pre.u1, post.rho, post.u1
    Pm, Pp = float(gas.pressure(rm)), float(gas.pressure(rp))
    c2p = float(gas.sound_speed_sq(rp))
    fLs = float(background.force(Ls))
    J = background.J
    if not Pp > Pm:
        raise CoefficientDegeneracyError("entropy condition P+ > P- fails at the shock")

    b0 = J / (Pp - Pm)
    b2 = up * up * fLs / (um * (up * up - c2p))
    b3 = (rm - rp) * fLs / rp

    p = sample_subsonic(background, y1)
    u, c2, du, d2u, f, df = p.u, p.c2, p.du, p.d2u, p.f, p.df
    L = L1 - Ls
    s = (L1 - y1) / L
    sub = c2 - u * u

    B1 = f - (g + 1.0) * u * du
    B3 = (g - 1.0) * du
    B4 = ((g - 1.0) * f * (L1 - y1) * du - u * f + u * df * (L1 - y1)) / L
    lam = s * du + b3 / u
    dlam = -du / L + s * d2u - b3 * du / u**2
    lam1 = B1 / sub
    lam2 = (B3 * b3 + B4) / sub
    lam0 = dlam + lam1 * lam + lam2
    a0 = -b0 * lam0
    a1 = lam1
    a2 = c2 / sub
    a3 = float(b0 * (b2 - lam[0]))

    h1, h2 = jump_partials(rm, um, gas)
    coeffs = LinearCoefficients(
        Ls=Ls, L1=L1, gamma=g, entropy_const=gas.entropy_const, J=J,
        rho_minus=rm, u_minus=um, rho_plus=rp, u_plus=up, P_minus=Pm, P_plus=Pp,
        B_plus=background.bernoulli_plus,
        b0=b0, b2=b2, b3=b3, profile=p,
        B1=B1, B3=B3, B4=B4, lam=lam, dlam=dlam, lam0=lam0, lam1=lam1, lam2=lam2,
        a0=a0, a1=a1, a2=a2, a3=a3, h1_partials=h1, h2_partials=h2,
    )
    if certify:
        coeffs.certify()
    return coeffs

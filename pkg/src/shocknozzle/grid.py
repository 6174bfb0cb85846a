"""Computational rectangle and the finite-difference helpers shared by the solvers."""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import CompatibilityError, DomainError

EVEN = 1
ODD = -1


@dataclass(frozen=True)
class GridQ:
    """Uniform node grid on [Ls, L1] x [-1, 1]; arrays are indexed [i1, i2]."""

    N1: int
    N2: int
    Ls: float
    L1: float

    def __post_init__(self):
        if self.N1 < 9 or self.N2 < 9:
            raise DomainError(f"grid needs N1, N2 >= 9, got {self.N1}x{self.N2}")
        if not self.Ls < self.L1:
            raise DomainError("need Ls < L1")

    @property
    def y1(self):
        return np.linspace(self.Ls, self.L1, self.N1)

    @property
    def y2(self):
        return np.linspace(-1.0, 1.0, self.N2)

    @property
    def h1(self):
        return (self.L1 - self.Ls) / (self.N1 - 1)

    @property
    def h2(self):
        return 2.0 / (self.N2 - 1)

    @property
    def shape(self):
        return (self.N1, self.N2)

    def mesh(self):
        return np.meshgrid(self.y1, self.y2, indexing="ij")

    def zeros(self):
        return np.zeros(self.shape)


def diff_y1(F, h):
    """Second-order y1 derivative: central inside, one-sided at both ends."""
    return np.gradient(F, h, axis=0, edge_order=2)


def diff_y2(F, h, parity=None):
    """Second-order y2 derivative (last axis).

    With ``parity`` the wall values use the reflected ghost node: EVEN fields
    get a zero derivative, ODD fields get F[1]/h style central values.  Without
    parity the ends are one-sided second order.
    """
    F = np.asarray(F, dtype=float)
    if parity is None:
        return np.gradient(F, h, axis=-1, edge_order=2)
    D = np.empty_like(F)
    D[..., 1:-1] = (F[..., 2:] - F[..., :-2]) / (2.0 * h)
    D[..., 0] = (F[..., 1] - parity * F[..., 1]) / (2.0 * h)
    D[..., -1] = (parity * F[..., -2] - F[..., -2]) / (2.0 * h)
    return D


def integrate_y2(F, h):
    """Cumulative integral from y2 = -1 along the last axis (composite Simpson)."""
    return cumulative_simpson(np.asarray(F, dtype=float), dx=h, axis=-1, initial=0.0)


def wall_slopes(g, h):
    """One-sided second-order derivative at y2 = -1 and y2 = +1 (last axis)."""
    g = np.asarray(g, dtype=float)
    lo = (-3.0 * g[..., 0] + 4.0 * g[..., 1] - g[..., 2]) / (2.0 * h)
    hi = (3.0 * g[..., -1] - 4.0 * g[..., -2] + g[..., -3]) / (2.0 * h)
    return lo, hi


def wall_slope_allowance(g, h, safety=4.0, rtol=1e-6, atol=1e-13):
    """Truncation allowance for ``wall_slopes`` estimated from third differences.

    A compatible profile has a one-sided wall slope of size about (h^2/3)|g'''|;
    anything well above that (plus a relative floor) is an incompatibility.
    """
    g = np.asarray(g, dtype=float)
    d3_lo = np.abs(g[..., 3] - 3.0 * g[..., 2] + 3.0 * g[..., 1] - g[..., 0]) / h**3
    d3_hi = np.abs(g[..., -1] - 3.0 * g[..., -2] + 3.0 * g[..., -3] - g[..., -4]) / h**3
    scale = np.max(np.abs(g), axis=-1) if g.ndim else abs(g)
    floor = rtol * scale + atol
    return safety * h * h / 3.0 * d3_lo + floor, safety * h * h / 3.0 * d3_hi + floor


def wall_compatibility_defect(g, h, safety=4.0, rtol=1e-6, atol=1e-13):
    """Largest ratio |wall slope| / allowance (<= 1 means compatible)."""
    lo, hi = wall_slopes(g, h)
    alo, ahi = wall_slope_allowance(g, h, safety, rtol, atol)
    return float(max(np.max(np.abs(lo) / alo), np.max(np.abs(hi) / ahi)))


def require_wall_compatible(g, h, name, **kw):
    ratio = wall_compatibility_defect(g, h, **kw)
    if ratio > 1.0:
        lo, hi = wall_slopes(g, h)
        raise CompatibilityError(
            f"{name} violates the wall compatibility condition (zero y2-derivative at y2 = +-1): "
            f"one-sided slopes {np.max(np.abs(lo)):.3e} / {np.max(np.abs(hi)):.3e}"
        )
    return ratio

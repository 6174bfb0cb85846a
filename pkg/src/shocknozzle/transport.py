"""Bernoulli transport along the characteristics of the frozen velocity field."""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .errors import CharacteristicDegeneracyError


@dataclass
class CharacteristicFoot:
    beta: np.ndarray  # ordinate at y1 = Ls of the characteristic through each node
    clamp_count: int = 0  # interior nodes whose foot left [-1, 1]
    max_overshoot: float = 0.0


def _refine_y1(F, q):
    """Linear refinement along y1 by a factor q (exact at the original nodes)."""
    n1 = F.shape[0]
    t = np.arange(q) / q
    out = np.empty(((n1 - 1) * q + 1,) + F.shape[1:])
    lo, hi = F[:-1], F[1:]
    for k in range(q):
        out[k:-1:q] = (1.0 - t[k]) * lo + t[k] * hi
    out[-1] = F[-1]
    return out


class _RowInterp:
    """Linear interpolation in y2 on selected rows of a refined field."""

    def __init__(self, h2, n2):
        self.h2 = h2
        self.n2 = n2

    def weights(self, y2):
        x = np.clip((y2 + 1.0) / self.h2, 0.0, self.n2 - 1.0)
        j0 = np.minimum(x.astype(int), self.n2 - 2)
        return j0, x - j0

    @staticmethod
    def gather(Fq, rows, j0, w):
        R = rows[:, None]
        return (1.0 - w) * Fq[R, j0] + w * Fq[R, j0 + 1]


def characteristic_slope(u_bar, v1, v2, v4, dv4, s, L1, length):
    """dy2/ds of the transport characteristics in the straightened domain."""
    den = (u_bar + v1) * length + v2 * (s - L1) * dv4
    with np.errstate(divide="ignore", invalid="ignore"):  # callers guard den
        return v2 * (length - v4) / den, den


def trace_characteristics(hat, coeffs, grid, den_guard=1e-3):
    """Trace every node back to y1 = Ls by RK4 with step h1/2 (all nodes in lockstep).

    Hat fields are interpolated bilinearly; the background velocity comes from
    its cubic spline.  Returns the foot ordinates clamped to [-1, 1].
    """
    N1, N2 = grid.N1, grid.N2
    y2 = grid.y2
    beta = np.broadcast_to(y2, (N1, N2)).copy()
    if not np.any(hat.v2):
        return CharacteristicFoot(beta)

    q = 4  # quarter steps: RK4 stages of a half step land on them
    hq = grid.h1 / q
    Ls, L1 = grid.Ls, grid.L1
    length = L1 - Ls
    sq = Ls + hq * np.arange((N1 - 1) * q + 1)
    V1 = _refine_y1(hat.v1, q)
    V2 = _refine_y1(hat.v2, q)
    U = coeffs.u_spline(sq)
    rows_interp = _RowInterp(grid.h2, N2)
    umin = float(np.min(U))
    guard = den_guard * umin * length

    def rhs(rows, Y):
        j0, w = rows_interp.weights(Y)
        v1 = rows_interp.gather(V1, rows, j0, w)
        v2 = rows_interp.gather(V2, rows, j0, w)
        v4 = np.interp(Y, y2, hat.v4)
        dv4 = np.interp(Y, y2, hat.dv4)
        slope, den = characteristic_slope(U[rows][:, None], v1, v2, v4, dv4, sq[rows][:, None], L1, length)
        if np.any(np.abs(den) < guard):
            raise CharacteristicDegeneracyError("characteristic denominator below guard; perturbation too large")
        return slope

    h = -0.5 * grid.h1
    n_steps = 2 * (N1 - 1)
    for k in range(n_steps):
        i0 = k // 2 + 1  # columns still marching at this step
        cols = np.arange(i0, N1)
        r = q * cols - 2 * k  # quarter-grid row of the current s
        Y = beta[i0:]
        k1 = rhs(r, Y)
        k2 = rhs(r - 1, Y + 0.5 * h * k1)
        k3 = rhs(r - 1, Y + 0.5 * h * k2)
        k4 = rhs(r - 2, Y + h * k3)
        beta[i0:] = Y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    over = np.abs(beta[:, 1:-1]) - 1.0
    clamp_count = int(np.count_nonzero(over > 0.0))
    max_over = float(max(0.0, np.max(over))) if over.size else 0.0
    beta = np.clip(beta, -1.0, 1.0)
    beta[:, 0], beta[:, -1] = -1.0, 1.0
    beta[0] = y2
    return CharacteristicFoot(beta, clamp_count, max_over)


def shock_interpolant(y2, v4, dv4):
    return CubicHermiteSpline(y2, v4, dv4)


def wall_clamped_spline(y2, values):
    """Cubic spline with zero slope at both walls (even extension across the walls)."""
    return CubicSpline(y2, values, bc_type=((1, 0.0), (1, 0.0)))


def solve_bernoulli_transport(v4, dv4, foot, b3, R3, y2):
    """v3 = b3 v4(beta) + R3(beta), constant along each characteristic."""
    beta = foot.beta
    v4_at = shock_interpolant(y2, v4, dv4)(beta)
    r3_at = wall_clamped_spline(y2, R3)(beta)
    return b3 * v4_at + r3_at

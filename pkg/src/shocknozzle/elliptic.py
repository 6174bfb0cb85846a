"""Second-order elliptic problem with a free constant and a trace coupling.

Solves, on the rectangle [Ls, L1] x [-1, 1],

    phi_11 + a2 phi_22 + a1 phi_1 - a0 (kappa + phi(Ls, y2)) = rhs
    phi_1(Ls, y2) - a3 (kappa + phi(Ls, y2)) = g1(y2)
    phi_1(L1, y2) = g2(y2)
    phi_2(y1, +-1) = 0,   phi(Ls, -1) = 0

with a 5-point stencil.  One ghost column beyond each y1 end carries the
central Robin/Neumann conditions, walls are reflections, and the pin row is
paired with the extra unknown kappa so the sparse system is square.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import MatrixRankWarning, spsolve

from .errors import DomainError, SolverError
from .grid import require_wall_compatible


@dataclass
class PotentialSolution:
    phi: np.ndarray  # (N1, N2) on the grid nodes
    kappa: float
    ghost_lo: np.ndarray  # phi at y1 = Ls - h1
    ghost_hi: np.ndarray  # phi at y1 = L1 + h1
    residual: float

    def d1(self, h1):
        """Central y1 derivative on every node, using the ghost columns."""
        ext = np.vstack([self.ghost_lo, self.phi, self.ghost_hi])
        return (ext[2:] - ext[:-2]) / (2.0 * h1)

    def d2(self, h2):
        """Central y2 derivative with reflected wall ghosts (zero at the walls)."""
        D = np.zeros_like(self.phi)
        D[:, 1:-1] = (self.phi[:, 2:] - self.phi[:, :-2]) / (2.0 * h2)
        return D

    @property
    def trace(self):
        """kappa + phi(Ls, y2)."""
        return self.kappa + self.phi[0]


def assemble(a0, a1, a2, a3, grid):
    """Sparse operator (scaled rows) of the discrete problem."""
    N1, N2 = grid.N1, grid.N2
    h1, h2 = grid.h1, grid.h2
    a0, a1, a2 = (np.broadcast_to(np.asarray(a, dtype=float), (N1,)) for a in (a0, a1, a2))
    ncol = N1 + 2
    n = ncol * N2 + 1
    k_idx = n - 1

    def idx(i, j):
        return (i + 1) * N2 + j

    I = np.arange(N1)[:, None] * np.ones((1, N2), dtype=int)
    Jj = np.ones((N1, 1), dtype=int) * np.arange(N2)[None, :]
    rows_pde = (I * N2 + Jj).ravel()
    ii, jj = I.ravel(), Jj.ravel()
    r = h1 / h2
    A2 = a2[ii] * r * r
    rows, cols, vals = [], [], []

    def put(rw, cl, vl):
        rows.append(np.asarray(rw))
        cols.append(np.asarray(cl))
        vals.append(np.broadcast_to(np.asarray(vl, dtype=float), np.shape(rw)))

    # interior equation, multiplied by h1^2
    put(rows_pde, idx(ii, jj), -2.0 - 2.0 * A2)
    put(rows_pde, idx(ii + 1, jj), 1.0 + 0.5 * h1 * a1[ii])
    put(rows_pde, idx(ii - 1, jj), 1.0 - 0.5 * h1 * a1[ii])
    jm = np.where(jj == 0, 1, jj - 1)
    jp = np.where(jj == N2 - 1, N2 - 2, jj + 1)
    put(rows_pde, idx(ii, jm), A2)
    put(rows_pde, idx(ii, jp), A2)
    put(rows_pde, idx(0, jj), -h1 * h1 * a0[ii])
    put(rows_pde, np.full_like(rows_pde, k_idx), -h1 * h1 * a0[ii])

    j = np.arange(N2)
    base = N1 * N2
    # Robin at Ls, multiplied by h1
    rr = base + j
    put(rr, idx(1, j), 0.5)
    put(rr, idx(-1, j), -0.5)
    put(rr, idx(0, j), -h1 * a3)
    put(rr, np.full_like(rr, k_idx), -h1 * a3)
    # Neumann at L1, multiplied by h1
    rn = base + N2 + j
    put(rn, idx(N1, j), 0.5)
    put(rn, idx(N1 - 2, j), -0.5)
    # pin
    put(np.array([n - 1]), np.array([idx(0, 0)]), 1.0)

    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    return A.tocsr()


def assemble_rhs(rhs, g1, g2, grid):
    h1 = grid.h1
    return np.concatenate([(h1 * h1 * rhs).ravel(), h1 * np.asarray(g1, float), h1 * np.asarray(g2, float), [0.0]])


def solve_nonlocal_elliptic(a0, a1, a2, a3, grid, g1, g2, f=None, rhs=None, check_compat=True,
                            residual_tol=1e-11, dump_matrix=None):
    """Solve the trace-coupled elliptic problem; returns a PotentialSolution.

    The source is either a field ``f`` (its y1 derivative is formed by second
    order differences) or the already differentiated ``rhs``.
    """
    N1, N2 = grid.N1, grid.N2
    if (f is None) == (rhs is None):
        raise DomainError("give exactly one of f or rhs")
    if rhs is None:
        f = np.asarray(f, dtype=float)
        rhs = np.gradient(f, grid.h1, axis=0, edge_order=2)
        if check_compat:
            require_wall_compatible(f, grid.h2, "source field f")
    rhs = np.asarray(rhs, dtype=float)
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    if rhs.shape != (N1, N2) or g1.shape != (N2,) or g2.shape != (N2,):
        raise DomainError("data shapes do not match the grid")
    if check_compat:
        require_wall_compatible(g1, grid.h2, "boundary data g1")
        require_wall_compatible(g2, grid.h2, "boundary data g2")

    A = assemble(a0, a1, a2, a3, grid)
    b = assemble_rhs(rhs, g1, g2, grid)
    if dump_matrix is not None:
        coo = A.tocoo()
        np.savetxt(dump_matrix, np.column_stack([coo.row, coo.col, coo.data]), fmt=["%d", "%d", "%.17g"],
                   header="row col value")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", MatrixRankWarning)
            x = spsolve(A.tocsc(), b)
    except MatrixRankWarning:
        raise SolverError("elliptic system is singular") from None
    except RuntimeError as exc:
        raise SolverError(f"sparse factorization failed: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SolverError("sparse solve produced non-finite values (singular system)")
    res = float(np.max(np.abs(A @ x - b)) / max(1.0, float(np.max(np.abs(b)))))
    if res > residual_tol:
        raise SolverError(f"linear residual {res:.3e} above tolerance {residual_tol:.1e}")
    ext = x[:-1].reshape(N1 + 2, N2)
    return PotentialSolution(phi=ext[1:-1].copy(), kappa=float(x[-1]), ghost_lo=ext[0].copy(),
                             ghost_hi=ext[-1].copy(), residual=res)

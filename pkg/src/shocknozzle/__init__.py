"""Steady transonic shocks in a flat nozzle with an external force."""

from .background import (BackgroundSolution, NozzleSetup, PressureWindow, background_at, exit_pressure_of_shock,
                         extend_subsonic, integrate_branch, monotonicity_derivative, pressure_window, rh_jump,
                         rh_jump_tangential, solve_shock_position)
from .coefficients import LinearCoefficients, compute, rh_boundary_partials
from .elliptic import PotentialSolution, solve_nonlocal_elliptic
from .gas import FlowState, ForceField, GasModel
from .grid import GridQ
from .iteration import ExitPerturbation, IterationReport, RemainderBundle, assemble_remainders, iterate, update_shock
from .operators import PerturbationState, ShockProblem
from .residual import nonlinear_residual, to_physical
from .transport import CharacteristicFoot, solve_bernoulli_transport, trace_characteristics

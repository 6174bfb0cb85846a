import functools

import numpy as np
import pytest

from shocknozzle.background import NozzleSetup, background_at
from shocknozzle.coefficients import compute
from shocknozzle.gas import ForceField, GasModel
from shocknozzle.grid import GridQ
from shocknozzle.iteration import ExitPerturbation, iterate
from shocknozzle.operators import ShockProblem
from shocknozzle.residual import compatibility_suite


def make_setup(gamma=2.0, force=0.1, require_positive=True, **kw):
    gas = GasModel(gamma, 1.0)
    f = ForceField.constant(force, 0.0, 1.0, require_positive=require_positive)
    return NozzleSetup(0.0, 1.0, 1.0, 2.0, gas, f, **kw)


@functools.lru_cache(maxsize=None)
def standard_background(Ls=0.5, gamma=2.0):
    return background_at(Ls, make_setup(gamma))


@functools.lru_cache(maxsize=None)
def standard_problem(N, Ls=0.5):
    bg = standard_background(Ls)
    grid = GridQ(N, N, bg.Ls, 1.0)
    return ShockProblem(bg, compute(bg, grid.y1), grid)


@functools.lru_cache(maxsize=None)
def converged_run(N, epsilon):
    """(state, report, per-iterate compatibility checks) for the cos(pi (y2 + 1)) exit profile."""
    problem = standard_problem(N)
    compat = []

    def monitor(n, state, bundle):
        checks = compatibility_suite(state, problem.grid, bundle)
        compat.append(checks)
        return max(checks.values())

    ex = ExitPerturbation.builtin(epsilon, "cos:1", N)
    state, report = iterate(problem, ex, monitor=monitor)
    return state, report, compat


@pytest.fixture(scope="session")
def setup2():
    return make_setup(2.0)


@pytest.fixture(scope="session")
def background():
    return standard_background()


@pytest.fixture(scope="session")
def problem33():
    return standard_problem(33)


@pytest.fixture(scope="session")
def problem65():
    return standard_problem(65)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """record(n, ok, detail): log one acceptance line and assert it."""

    def record(n, ok, detail):
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        print(ACCEPTANCE_LINES[-1])
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from shocknozzle.background import (
    SUBSONIC, NozzleSetup, SUPERSONIC, extend_subsonic, exit_pressure_of_shock, integrate_branch, monotonicity_derivative,
    pressure_window, rh_jump, rh_jump_tangential, rh_residuals, solve_shock_position)
from shocknozzle.errors import DomainError, HatStateTooLargeError, SonicDegeneracyError, WindowError
from shocknozzle.gas import FlowState, ForceField, GasModel

from conftest import make_setup

G2 = GasModel(2.0, 1.0)
RHO_PLUS = (-1.0 + math.sqrt(17.0)) / 2.0


def oracle_velocity(setup, state, a, b):
    """High-order adaptive integration of the same velocity ODE."""
    J = state.rho * state.u1
    gas, f = setup.gas, setup.force

    def rhs(x, u):
        return u * f(x) / (u * u - gas.sound_speed_sq(J / u))

    sol = solve_ivp(rhs, (a, b), [state.u1], method="DOP853", rtol=1e-13, atol=1e-14)
    return sol.y[0, -1]


def test_zero_force_branch_is_constant():
    s = make_setup(force=0.0, require_positive=False)
    br = integrate_branch(FlowState(1.0, 2.0), (0.0, 1.0), s)
    assert np.all(br.u == 2.0) and np.all(br.rho == 1.0)


def test_branch_matches_adaptive_oracle(setup2):
    br = integrate_branch(FlowState(1.0, 2.0), (0.0, 1.0), setup2)
    assert br.regime == SUPERSONIC
    assert np.max(np.abs(br.rho * br.u - 2.0)) <= 1e-10 * 2.0
    assert br.u[-1] == pytest.approx(oracle_velocity(setup2, FlowState(1.0, 2.0), 0.0, 1.0), abs=1e-8)


def test_sonic_guard():
    s = make_setup()
    # the sonic velocity of J = 2 at gamma = 2 is u = (2 J)^(1/3) = 4^(1/3)
    u_s = 4.0 ** (1.0 / 3.0)
    with pytest.raises(SonicDegeneracyError):
        integrate_branch(FlowState(2.0 / u_s, u_s), (0.0, 1.0), s)
    # marching a subsonic branch upstream against f > 0 accelerates it into the sonic line
    long = NozzleSetup(0.0, 50.0, 1.0, 2.0, G2, ForceField.constant(0.1, 0.0, 50.0))
    with pytest.raises(SonicDegeneracyError):
        integrate_branch(FlowState(2.0 / 1.5, 1.5), (50.0, 0.0), long)


def test_rh_jump_reference_state():
    post = rh_jump(FlowState(1.0, 2.0), G2)
    assert post.rho == pytest.approx(RHO_PLUS, rel=1e-14)
    assert post.u1 == pytest.approx(2.0 / RHO_PLUS, rel=1e-14)
    assert post.rho**3 - 5 * post.rho + 4 == pytest.approx(0.0, abs=1e-13)
    r = rh_residuals(FlowState(1.0, 2.0), post, G2)
    assert r["mass"] <= 1e-12 and r["momentum"] <= 1e-12
    assert G2.mach_sq(post) == pytest.approx(0.5252, abs=5e-5)
    assert G2.pressure(post.rho) > 1.0


def test_rh_jump_sonic_and_subsonic_upstream():
    u_s = 4.0 ** (1.0 / 3.0)
    post = rh_jump(FlowState(2.0 / u_s, u_s), G2)
    assert post.rho == pytest.approx(2.0 / u_s, rel=1e-12)
    with pytest.raises(DomainError):
        rh_jump(FlowState(1.0, 1.0), G2)


@settings(max_examples=150, deadline=None)
@given(st.floats(1.1, 2.9), st.floats(0.2, 5.0), st.floats(1.05, 6.0))
def test_rh_jump_properties(gamma, rho, mach):
    gas = GasModel(gamma, 1.0)
    u = mach * math.sqrt(gas.sound_speed_sq(rho))
    pre = FlowState(rho, u)
    post = rh_jump(pre, gas)
    r = rh_residuals(pre, post, gas)
    assert r["mass"] <= 1e-12 and r["momentum"] <= 1e-12
    assert post.rho > rho and gas.mach_sq(post) < 1.0


def test_tangential_jump_satisfies_oblique_relations():
    q = np.array([0.0, 0.05, -0.1, 0.2])
    rho_m = np.full(4, 1.0)
    u_m = np.full(4, 2.0)
    rho, u1, slope = rh_jump_tangential(rho_m, u_m, q, G2)
    m = 2.0
    P, Pm = G2.pressure(rho), 1.0
    assert np.max(np.abs(rho * u1 - slope * rho * q - m)) / m <= 1e-12
    assert np.max(np.abs(rho * u1**2 + P - slope * rho * u1 * q - (m * 2.0 + Pm))) / 5.0 <= 1e-12
    assert np.max(np.abs(rho * u1 * q - slope * (rho * q**2 + P - Pm))) / 5.0 <= 1e-12
    assert rho[0] == pytest.approx(RHO_PLUS, rel=1e-14)
    # strong root at q = 0.2 from a generic nonlinear solve of the three relations
    assert rho[3] == pytest.approx(1.43925455, abs=1e-8)
    assert slope[3] == pytest.approx(0.37332459, abs=1e-8)
    assert np.all(P > Pm)
    with pytest.raises(HatStateTooLargeError):
        rh_jump_tangential(np.array([1.0]), np.array([2.0]), np.array([5.0]), G2)


def test_exit_pressure_zero_force_constant():
    s = make_setup(force=0.0, require_positive=False)
    vals = [exit_pressure_of_shock(x, s) for x in np.linspace(0, 1, 6)]
    assert max(vals) - min(vals) <= 1e-12
    w = pressure_window(s)
    assert w.degenerate
    with pytest.raises(WindowError, match="degenerate"):
        solve_shock_position(vals[0], s)


EXIT_PRESSURE_HALF = 2.6926258228076025  # gamma=2, rho0=1, u0=2, f=0.1 on [0,1], Ls=0.5


def test_exit_pressure_regression(setup2):
    assert exit_pressure_of_shock(0.5, setup2) == pytest.approx(EXIT_PRESSURE_HALF, rel=1e-12)


def test_exit_pressure_against_oracle_pipeline(setup2):
    sup = oracle_velocity(setup2, FlowState(1.0, 2.0), 0.0, 0.5)
    post = rh_jump(FlowState(2.0 / sup, sup), G2)
    ue = oracle_velocity(setup2, post, 0.5, 1.0)
    assert exit_pressure_of_shock(0.5, setup2) == pytest.approx(G2.pressure(2.0 / ue), rel=1e-10)


def test_window(setup2):
    w = pressure_window(setup2)
    assert w.P0 > w.P1 > 0
    assert w.P1 == exit_pressure_of_shock(1.0, setup2)
    assert w.P0 == exit_pressure_of_shock(0.0, setup2)


@pytest.mark.parametrize("frac", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_shooting_roundtrip(setup2, frac):
    Pe = exit_pressure_of_shock(frac, setup2)
    bg = solve_shock_position(Pe, setup2)
    assert bg.Ls == pytest.approx(frac, abs=1e-8)
    assert abs(bg.exit_pressure - Pe) <= 1e-10


def test_shooting_errors_and_midwindow(setup2):
    w = pressure_window(setup2)
    with pytest.raises(WindowError, match="no transonic shock"):
        solve_shock_position(w.P0 + 0.1, setup2)
    bg = solve_shock_position(0.5 * (w.P0 + w.P1), setup2)
    assert 0.0 < bg.Ls < 1.0
    r = bg.rh_residuals()
    assert r["mass"] <= 1e-10 and r["momentum"] <= 1e-10 and r["pressure_jump"] > 0


def test_monotonicity_derivative(setup2):
    s0 = make_setup(force=0.0, require_positive=False)
    assert monotonicity_derivative(0.5, s0) == 0.0
    h = 1e-5
    fd = (exit_pressure_of_shock(0.5 + h, setup2) ** 0.5 - exit_pressure_of_shock(0.5 - h, setup2) ** 0.5) / (2 * h)
    assert monotonicity_derivative(0.5, setup2) == pytest.approx(fd, rel=1e-6)
    for Ls in np.linspace(0.05, 0.95, 10):
        assert monotonicity_derivative(Ls, setup2) < 0


def test_branch_invariants(background):
    gas, force = background.gas, background.force
    for br, sign in ((background.supersonic, 1), (background.subsonic, -1), (background.extension, -1)):
        assert np.max(np.abs(br.rho * br.u - br.J)) <= 1e-10 * br.J
        B = br.bernoulli(gas, force)
        assert np.max(np.abs(B - B[0])) <= 1e-10 * abs(B[0])
        assert np.all(sign * np.diff(br.mach_sq(gas)) > 0)
    assert background.subsonic.regime == SUBSONIC


def test_pe_strictly_decreasing(setup2):
    Pe = [exit_pressure_of_shock(x, setup2) for x in np.linspace(0, 1, 11)]
    assert np.all(np.diff(Pe) < 0)


def test_extension(background, setup2):
    ext0 = extend_subsonic(background, 0.0)
    np.testing.assert_array_equal(ext0.u, background.subsonic.u)
    ext = extend_subsonic(background, 0.1)
    k = np.argmin(np.abs(ext.x - background.Ls))
    assert ext.x[k] == background.Ls
    assert ext.u[k] == pytest.approx(background.post_shock.u1, abs=1e-12)
    ref = oracle_velocity(setup2, background.post_shock, 0.5, 0.4)
    assert ext.u[0] == pytest.approx(ref, abs=1e-8)
    with pytest.raises(DomainError):
        extend_subsonic(background, 0.6)


def test_upstream_continuation(background, setup2):
    rho, u = background.upstream_at(np.array([0.5, 0.45]))
    assert u[0] == background.pre_shock.u1
    ref = oracle_velocity(setup2, background.pre_shock, 0.5, 0.45)
    assert u[1] == pytest.approx(ref, abs=1e-12)

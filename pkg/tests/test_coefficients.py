import numpy as np
import pytest

from shocknozzle.background import background_at, rh_jump, rh_jump_tangential
from shocknozzle.coefficients import compute, jump_partials, sample_subsonic
from shocknozzle.errors import CoefficientDegeneracyError, DomainError
from shocknozzle.gas import FlowState
from shocknozzle.grid import GridQ

from conftest import make_setup, standard_background


@pytest.fixture(scope="module")
def coeffs():
    bg = standard_background()
    return compute(bg, GridQ(65, 65, bg.Ls, 1.0).y1)


def test_reference_values(coeffs):
    assert coeffs.b0 == pytest.approx(1.26162, abs=1e-5)
    assert coeffs.b2 == pytest.approx(-0.0477336, abs=1e-7)
    assert coeffs.b3 == pytest.approx(-0.0387074, abs=1e-7)
    assert coeffs.a3 == pytest.approx(0.0769393, abs=1e-7)
    assert 0.00815 <= coeffs.a0.min() and coeffs.a0.max() <= 0.00955
    assert coeffs.a1.min() == pytest.approx(0.194, abs=1e-3)
    assert coeffs.a2.min() == pytest.approx(1.827, abs=1e-3)
    assert coeffs.B_plus == pytest.approx(3.9246, abs=1e-4)
    assert coeffs.certify()


def test_structural_identities(coeffs):
    p = coeffs.profile
    g = coeffs.gamma
    assert np.all(p.u**2 - p.c2 < 0)
    # B1 written through the ODE for u'
    alt = p.f * (1.0 - (g + 1.0) * p.u**2 / (p.u**2 - p.c2))
    np.testing.assert_allclose(coeffs.B1, alt, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(coeffs.a0, -coeffs.b0 * coeffs.lam0, rtol=0, atol=0)
    np.testing.assert_array_equal(coeffs.a1, coeffs.lam1)
    lam_Ls = p.du[0] + coeffs.b3 / p.u[0]
    assert coeffs.a3 == pytest.approx(coeffs.b0 * (coeffs.b2 - lam_Ls), rel=1e-14)
    assert coeffs.b0 == pytest.approx(coeffs.J / (coeffs.P_plus - coeffs.P_minus), rel=1e-15)


def test_profile_slopes_match_differences():
    bg = standard_background()
    y = np.linspace(0.5, 1.0, 401)
    p = sample_subsonic(bg, y)
    h = y[1] - y[0]
    fd = np.gradient(p.u, h, edge_order=2)
    assert np.max(np.abs(fd - p.du)) <= 1e-6
    fd2 = np.gradient(p.du, h, edge_order=2)
    assert np.max(np.abs(fd2 - p.d2u)) <= 1e-5


def _fd(fun, x, h):
    return (fun(x + h) - fun(x - h)) / (2.0 * h)


@pytest.mark.parametrize("gamma,rho_m,u_m", [(2.0, 0.8, 2.5), (1.4, 1.0, 1.8), (2.8, 0.5, 3.0)])
def test_jump_partials_against_differences(gamma, rho_m, u_m):
    from shocknozzle.gas import GasModel
    gas = GasModel(gamma, 1.0)
    h1, h2 = jump_partials(rho_m, u_m, gas)
    dr = _fd(lambda r: rh_jump(FlowState(r, u_m), gas).rho, rho_m, 1e-6)
    du = _fd(lambda u: rh_jump(FlowState(rho_m, u), gas).rho, u_m, 1e-6)
    assert h1["rho"] == pytest.approx(dr, abs=1e-5)
    assert h1["u"] == pytest.approx(du, abs=1e-5)
    assert h2["rho"] == pytest.approx(_fd(lambda r: rh_jump(FlowState(r, u_m), gas).u1, rho_m, 1e-6), abs=1e-5)
    assert h2["u"] == pytest.approx(_fd(lambda u: rh_jump(FlowState(rho_m, u), gas).u1, u_m, 1e-6), abs=1e-5)

    # s = (u2+)^2: one-sided difference quotients, Richardson-extrapolated
    def quot(s):
        rho, u1, _ = rh_jump_tangential(np.array([rho_m]), np.array([u_m]), np.array([np.sqrt(s)]), gas)
        post = rh_jump(FlowState(rho_m, u_m), gas)
        return (rho[0] - post.rho) / s, (u1[0] - post.u1) / s

    (r1, v1), (r2, v2) = quot(2e-4), quot(1e-4)
    assert h1["s"] == pytest.approx(2 * r2 - r1, abs=1e-5)
    assert h2["s"] == pytest.approx(2 * v2 - v1, abs=1e-5)


def test_b2_is_the_shock_sensitivity_along_the_supersonic_branch(coeffs):
    bg = standard_background()
    gas, pre = bg.gas, bg.pre_shock
    c2 = gas.sound_speed_sq(pre.rho)
    du = pre.u1 * bg.force(bg.Ls) / (pre.u1**2 - c2)
    drho = -pre.rho * du / pre.u1
    h2 = coeffs.h2_partials
    assert coeffs.b2 == pytest.approx(h2["rho"] * drho + h2["u"] * du, rel=1e-10)


def test_zero_force_is_degenerate():
    s = make_setup(force=0.0, require_positive=False)
    bg = background_at(0.5, s)
    y1 = GridQ(17, 17, 0.5, 1.0).y1
    with pytest.raises(CoefficientDegeneracyError):
        compute(bg, y1)
    c = compute(bg, y1, certify=False)
    assert c.b2 == 0.0 and c.b3 == 0.0


def test_grid_must_span_subsonic_region():
    bg = standard_background()
    with pytest.raises(DomainError):
        compute(bg, np.linspace(0.4, 1.0, 17))


@pytest.mark.parametrize("Ls", [0.2, 0.8])
def test_certificate_holds_across_shock_positions(Ls):
    bg = standard_background(Ls)
    assert compute(bg, GridQ(33, 33, Ls, 1.0).y1).certify()

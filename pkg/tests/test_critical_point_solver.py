import json
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from cohesive_phasefield.critical_point_solver import (
    H,
    ShootingProblem,
    elastic_pair,
    half_width,
    i_eps,
    m_hat,
    shoot,
    solve,
)
from cohesive_phasefield.errors import NumericalFailure, ShootingError
from cohesive_phasefield.material_law import PrototypeQ, regularize

LAW = PrototypeQ(1.0, 1.0)


def problem(eps, c=0.3, L=1.0):
    return ShootingProblem(regularize(LAW, eps), c, L)


@pytest.fixture(scope="module", params=[1e-2, 1e-3])
def pair(request):
    return solve(problem(request.param))


def test_parameter_checks():
    with pytest.raises(ValueError):
        problem(1e-3, c=0.6)
    with pytest.raises(ValueError):
        problem(1e-3, c=0.0)


def test_eps_too_large_is_reported():
    with pytest.raises((ShootingError, NumericalFailure)):
        shoot(problem(0.3))


def test_H_at_one():
    pb = problem(1e-3)
    for m in (0.2, 0.4, 0.55):
        Km = (1 - m) ** 2 / 4 - 0.09 / float(LAW(m)) ** 2
        expected = (-1e-3 * 0.09 - Km) / 1e-6
        assert H(pb, m, 1.0) == pytest.approx(expected, rel=1e-12)
        assert H(pb, m, 1.0) > 0


def test_infimum_bounds_and_m_hat():
    for eps in (1e-2, 1e-3, 1e-4):
        pb = problem(eps)
        i = i_eps(pb)
        fe = float(pb.reg(pb.reg.s_eps))
        assert -eps * 0.09 / fe**2 <= i <= -eps * 0.09
        mh = m_hat(pb)
        assert float(LAW.stress(mh)) < 0.6
    assert m_hat(problem(1e-6)) == pytest.approx(0.6, abs=1e-5)


def test_half_width_limits():
    pb = problem(1e-3)
    mh = m_hat(pb)
    assert half_width(pb, 1e-3) < 0.5
    widths = [half_width(pb, mh * (1 - 10.0**-k)) for k in (2, 4, 6, 8)]
    assert all(b > a for a, b in zip(widths, widths[1:]))
    with pytest.raises(ValueError):
        half_width(pb, mh * 1.01)


@pytest.mark.parametrize("eps", [1e-2, 1e-3])
def test_half_width_against_ivp(eps):
    pb = problem(eps)
    m = 0.9 * m_hat(pb)
    X = half_width(pb, m)
    c2 = pb.c**2

    def dG(v):
        fe = float(pb.reg(v))
        return -(1 - v) / 2 + 2 * eps * c2 * float(pb.reg.d1(v)) / fe**3

    def rhs(t, Y):
        return [Y[1], 0.5 * dG(min(Y[0], 1.0))]

    def hit(t, Y):
        return Y[0] - 1

    hit.terminal = True
    sol = solve_ivp(rhs, [0, 1e4], [m, 0.0], method="DOP853", rtol=1e-12, atol=1e-14, events=hit)
    assert sol.t_events[0][0] * eps == pytest.approx(X, rel=1e-5)


def test_shooting_baseline():
    res = shoot(problem(1e-3))
    assert len(res.roots) == 1
    assert 0.55 < res.m < 0.6
    assert float(LAW.stress(res.m)) <= 0.6


def test_pair_bounds_and_symmetry(pair):
    assert np.all(pair.v > 0) and np.all(pair.v <= 1)
    assert pair.v[0] == 1.0 and pair.v[-1] == 1.0
    assert pair.u[0] == 0.0 and pair.u[-1] == pytest.approx(pair.a_eps)
    np.testing.assert_allclose(pair.x + pair.x[::-1], pair.L, atol=1e-14)
    np.testing.assert_allclose(pair.v, pair.v[::-1], atol=1e-12)
    np.testing.assert_allclose(pair.u + pair.u[::-1], pair.a_eps, atol=1e-10)
    assert np.min(pair.v) == pytest.approx(pair.m, abs=1e-12)


def test_pair_first_integral(pair):
    fi = pair.first_integral()
    assert np.max(np.abs(fi - pair.d_eps)) <= 1e-6 * abs(pair.d_eps)
    assert pair.residuals["first_integral_max_rel"] <= 1e-6


def test_pair_slope_squared_matches_H(pair):
    pb = pair.problem
    right = pair.x >= 0.5 * pair.L
    cs = CubicSpline(pair.x[right], pair.v[right])
    xm = 0.5 * (pair.x[right][1:] + pair.x[right][:-1])
    vm = np.clip(cs(xm), pair.m, 1.0)
    Hv = H(pb, pair.m, vm)
    assert np.max(np.abs(cs(xm, 1) ** 2 - Hv)) <= 1e-6 * np.max(Hv)


def test_pair_discrepancy(pair):
    xi = pair.discrepancy()
    i_mid = int(np.argmin(pair.v))
    assert xi[0] <= 0
    assert np.argmin(xi) in (0, len(xi) - 1)
    assert xi[i_mid] == pytest.approx((1 - pair.m) ** 2 / (4 * pair.eps), rel=1e-9)
    assert xi[i_mid] == pytest.approx(np.max(xi), rel=1e-12)


def test_pair_weak_residual_and_energy(pair):
    assert pair.weak_residual() <= 1e-5
    assert pair.residuals["energy_identity_rel"] <= 1e-8
    assert pair.residuals["half_width_residual"] <= 1e-8
    assert pair.d_eps == pytest.approx(-0.09, abs=1e-12)


def test_pair_exports(pair, tmp_path):
    pair.to_csv(tmp_path / "p.csv")
    assert (tmp_path / "p.csv").read_text().splitlines()[0] == "x,u,v"
    d = json.loads(pair.diagnostics_json())
    assert d["m_eps"] == pair.m and "residuals" in d


def test_fixed_c_keeps_minimum_away_from_zero():
    ms = [shoot(problem(e)).m for e in (1e-2, 1e-3, 1e-4)]
    assert min(ms) > 0.5


def test_vanishing_c_drives_minimum_to_zero():
    ms = [shoot(problem(e, c=e**0.25)).m for e in (1e-2, 1e-4)]
    assert ms[1] < 0.5 * ms[0]


def test_elastic_pair():
    p = elastic_pair(0.4, 1.0, regularize(LAW, 1e-3))
    assert p.energy == pytest.approx(0.16)
    assert np.all(p.v == 1.0)
    assert p.d_eps == pytest.approx(-0.16)
    assert math.isfinite(p.energy)

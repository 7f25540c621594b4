import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from cohesive_phasefield import cohesive_law as cl
from cohesive_phasefield import profile_ode as po
from cohesive_phasefield.material_law import PrototypeP, PrototypeQ

LAW = PrototypeQ(1.0, 1.0)
C = po.Classification


def A_closed(alpha, y):
    # (1-y) f(y) = y for this law, so alpha^2/f^2 = alpha^2 (1-y)^2 / y^2
    return (1 - y) ** 2 / 4 * (1 - (2 * alpha / y) ** 2)


def test_fbar_values():
    assert po.fbar(LAW, 0.5) == pytest.approx(8.0, rel=1e-14)
    assert po.fbar(LAW, 0.1) == pytest.approx(1000.0, rel=1e-13)
    assert po.fbar(LAW, 1 - 1e-7) == pytest.approx(1.0, rel=1e-6)
    with pytest.raises(ValueError):
        po.fbar(LAW, 1.0)


def test_z_alpha_closed_form():
    assert po.z_alpha(LAW, 0.2) == pytest.approx(0.4 ** (2 / 3), abs=1e-14)
    assert po.z_alpha(LAW, 0.4) == pytest.approx(0.8 ** (2 / 3), abs=1e-14)
    with pytest.raises(ValueError):
        po.z_alpha(LAW, 0.5)


@pytest.mark.parametrize("law", [LAW, PrototypeQ(1, 2), PrototypeP(1, 0.5)])
def test_z_alpha_monotone_and_above_threshold(law):
    alphas = np.linspace(0.01, 0.49, 40) * law.sigma_c
    zs = np.array([po.z_alpha(law, a) for a in alphas])
    assert np.all(np.diff(zs) > 0)
    assert np.all(law.stress(zs) > 2 * alphas)


def test_classification_examples():
    assert po.classify(po.OdeParams(LAW, 0.2, 0.3)) is C.REACHES_ONE
    assert po.classify(po.OdeParams(LAW, 0.2, 0.4)) is C.HETEROCLINIC
    assert po.classify(po.OdeParams(LAW, 0.2, 0.5)) is C.PERIODIC
    assert po.classify(po.OdeParams(LAW, 0.5, 0.9)) is C.SUPERCRITICAL_REACHES_ONE


def test_first_integral_spot_value():
    p = po.OdeParams(LAW, 0.2, 0.3)
    expected = A_closed(0.2, 0.35) - A_closed(0.2, 0.3)
    assert expected == pytest.approx(0.06294359410430839, rel=1e-12)
    assert po.psi_first_integral(p, 0.35) == pytest.approx(expected, rel=1e-12)


def test_psi_vanishes_at_one_for_heteroclinic():
    p = po.OdeParams(LAW, 0.2, 0.4)
    assert abs(po.psi_first_integral(p, 1.0)) < 1e-15
    assert po.psi_first_integral(p, 1 - 1e-6) == pytest.approx(0.0, abs=1e-11)


def test_max_amplitude_scalar_equation():
    p = po.OdeParams(LAW, 0.2, 0.45)
    M = po.max_amplitude(p)
    rhs = 0.3025 - 0.16 * (0.55 / 0.45) ** 2

    def eq(y):
        return (1 - y) ** 2 - 0.16 * (1 - y) ** 2 / y**2 - rhs

    assert abs(eq(M)) < 1e-12
    M_ref = brentq(eq, po.z_alpha(LAW, 0.2), 1 - 1e-12, xtol=1e-15)
    assert M == pytest.approx(M_ref, abs=1e-12)


def test_max_amplitude_limits():
    z = po.z_alpha(LAW, 0.2)
    near_z = po.max_amplitude(po.OdeParams(LAW, 0.2, z - 1e-6))
    assert abs(near_z - z) < 1e-4
    near_one = po.max_amplitude(po.OdeParams(LAW, 0.2, 0.4 + 1e-9))
    assert 1 - near_one < 1e-3


def test_time_of_flight_matches_ivp():
    p = po.OdeParams(LAW, 0.2, 0.3)
    tq = po.time_of_flight(p, 0.9)
    sol = po.solve_ivp(p, eta=0.9, tol=1e-12)
    t_ivp = float(sol.message.split("=")[1])
    assert tq == pytest.approx(t_ivp, rel=1e-6)
    assert tq >= po.flight_time_lower_bound(p, 0.9)


def test_time_of_flight_heteroclinic_diverges():
    p = po.OdeParams(LAW, 0.2, 0.4)
    assert po.time_of_flight(p, 1.0) == math.inf
    ts = [po.time_of_flight(p, 1 - 10.0**-k) for k in (2, 4, 6)]
    assert ts[0] < ts[1] < ts[2]


def test_time_of_flight_growth_near_one():
    # t_eta sqrt(1 - eta) stays bounded as eta -> 1 for a finite-time case
    p = po.OdeParams(LAW, 0.2, 0.3)
    vals = [po.time_of_flight(p, 1 - 10.0**-k) * 10.0 ** (-k / 2) for k in range(1, 8)]
    assert max(vals) < 10 * vals[0]
    assert po.time_of_flight(p, 1.0) < math.inf


def test_periodic_solution_has_period_two_t2():
    p = po.OdeParams(LAW, 0.2, 0.45)
    sol = po.solve_ivp(p, t_max=200.0, tol=1e-12)
    assert sol.t2 is not None and sol.M == pytest.approx(po.max_amplitude(p), abs=1e-8)
    T = 2 * sol.t2
    t = np.linspace(0, T, 200)
    y0 = sol.interpolant(t)[0]
    y1 = sol.interpolant(t + T)[0]
    assert np.max(np.abs(y1 - y0)) < 1e-6
    assert po.time_of_flight(p, sol.M) == pytest.approx(sol.t2, rel=1e-6)


@pytest.mark.parametrize("m", [0.3, 0.4, 0.45])
def test_increasing_and_convex_before_inflection(m):
    p = po.OdeParams(LAW, 0.2, m)
    sol = po.solve_ivp(p, t_max=60.0, n_samples=4001)
    assert sol.t0 is not None
    sel = (sol.t > 0) & (sol.t <= sol.t0)
    assert np.all(np.diff(sol.y[sel]) > 0)
    assert np.all(po.h(p, sol.y[sel]) > 0)


def test_heteroclinic_stays_below_one():
    sol = po.solve_ivp(po.OdeParams(LAW, 0.2, 0.4), t_max=25.0, tol=1e-12, n_samples=2001)
    assert sol.t1 is None
    assert np.all(sol.y < 1)
    assert np.all(np.diff(sol.y) > 0)
    assert 1 - sol.y[-1] < 1e-3


@settings(max_examples=40, deadline=None)
@given(
    law=st.sampled_from([LAW, PrototypeQ(1, 2), PrototypeP(1, 0.5)]),
    alpha=st.floats(0.005, 0.8),
    m=st.floats(0.005, 0.99),
    n_samples=st.sampled_from([None, 501]),
)
def test_first_integral_conserved(law, alpha, m, n_samples):
    p = po.OdeParams(law, alpha, m)
    tol = 1e-10
    sol = po.solve_ivp(p, t_max=30.0, tol=tol, n_samples=n_samples)
    assert sol.first_integral_relative() <= max(1e-8, 10 * tol)
    if np.max(sol.yp**2) <= 1.0:
        assert np.max(sol.first_integral_residual()) <= max(1e-8, 10 * tol)


@settings(max_examples=200, deadline=None)
@given(alpha=st.floats(1e-3, 0.499), m=st.floats(1e-3, 0.999))
def test_classification_matches_sign(alpha, m):
    p = po.OdeParams(LAW, alpha, m)
    delta = m - 2 * alpha
    expected = C.HETEROCLINIC if abs(delta) < 1e-10 else (C.REACHES_ONE if delta < 0 else C.PERIODIC)
    assert po.classify(p) is expected


def test_optimal_profile_identities():
    m = 0.6
    sol = po.optimal_profile(LAW, m)
    alpha = 0.5 * float(LAW.stress(m))
    f = LAW(np.minimum(sol.y, 1 - 1e-16))
    dA = alpha / f**2
    res = f**2 * dA**2 + sol.yp**2 - (1 - sol.y) ** 2 / 4
    assert np.max(np.abs(res)) <= 1e-8
    assert sol.increment == pytest.approx(cl.s_of_m(LAW, m), abs=1e-6)


def test_csv_exports(tmp_path):
    sol = po.solve_ivp(po.OdeParams(LAW, 0.2, 0.3), n_samples=11)
    sol.to_csv(tmp_path / "t.csv")
    sol.mirrored().phase_csv(tmp_path / "p.csv")
    assert (tmp_path / "t.csv").read_text().splitlines()[0] == "t,y,yprime"
    data = np.loadtxt(tmp_path / "p.csv", delimiter=",", skiprows=1)
    assert data.shape == (21, 2)
    # even extension: y' is odd about the centre sample
    np.testing.assert_array_equal(data[:10, 1], -data[:10:-1, 1])
    np.testing.assert_array_equal(data[:10, 0], data[:10:-1, 0])

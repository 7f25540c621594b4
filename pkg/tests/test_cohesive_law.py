import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cohesive_phasefield import cohesive_law as cl
from cohesive_phasefield.material_law import PrototypeP, PrototypeQ

LAW = PrototypeQ(1.0, 1.0)


def s_closed(m):
    r = math.sqrt(1 - m * m)
    return 2 * math.atan(r / m) - 2 * m * math.log((1 + r) / m)


def g_closed(m):
    r = math.sqrt(1 - m * m)
    return m * m * math.log(m / (r + 1)) + r


def test_spot_values():
    assert cl.s_of_m(LAW, 0.6) == pytest.approx(2 * math.atan(4 / 3) - 1.2 * math.log(3), abs=1e-12)
    assert cl.g_of_m(LAW, 0.6) == pytest.approx(0.36 * math.log(1 / 3) + 0.8, abs=1e-12)


@pytest.mark.parametrize("m", np.linspace(0.01, 0.99, 25))
def test_closed_forms(m):
    assert cl.s_of_m(LAW, float(m)) == pytest.approx(s_closed(m), abs=1e-10)
    assert cl.g_of_m(LAW, float(m)) == pytest.approx(g_closed(m), abs=1e-10)


def test_sigma_scaling():
    law = PrototypeQ(2.5, 1.0)
    for m in (0.1, 0.5, 0.9):
        assert cl.s_of_m(law, m) == pytest.approx(s_closed(m) / 2.5, rel=1e-10)
        assert cl.g_of_m(law, m) == pytest.approx(g_closed(m), rel=1e-10)


def test_endpoint_limits():
    assert cl.s_of_m(LAW, 1 - 1e-9) < 1e-6
    assert cl.s_of_m(LAW, 1e-9) == pytest.approx(math.pi, abs=1e-6)
    assert cl.g_of_m(LAW, 1e-9) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ValueError):
        cl.s_of_m(LAW, 1.0)


@pytest.mark.parametrize("law", [LAW, PrototypeQ(1, 2), PrototypeQ(2, 0.5), PrototypeP(1, 0.5)])
def test_inverse_round_trip(law):
    for m in (0.02, 0.3, 0.6, 0.97, 1 - 1e-6):
        s = cl.s_of_m(law, m)
        assert cl.m_of_s(law, s) == pytest.approx(m, abs=1e-9)


def test_inverse_limits():
    m = cl.m_of_s(LAW, 1e-8)
    assert m > 1 - 1e-4
    assert cl.s_of_m(LAW, m) == pytest.approx(1e-8, rel=1e-6)
    assert cl.m_of_s(LAW, math.pi) == 0.0
    assert cl.m_of_s(LAW, 5.0) == 0.0
    assert cl.m_of_s(LAW, math.pi * (1 - 1e-9)) < 1e-6


def test_derivative_values():
    assert cl.g_prime(LAW, 0.0) == 1.0
    assert cl.g_prime(LAW, cl.s_of_m(LAW, 0.6)) == pytest.approx(0.6, abs=1e-12)
    assert cl.g_prime(LAW, math.pi) == 0.0
    assert cl.g_prime(LAW, 1e-7) == pytest.approx(1.0, abs=1e-4)
    assert cl.g(LAW, 4.0) == 1.0


def test_s_frac():
    assert cl.s_frac(LAW) == math.pi
    assert cl.s_frac(PrototypeQ(2.0, 0.5)) == math.pi / (0.5 * 2.0)
    assert cl.s_frac(PrototypeP(1.0, 0.3)) == math.inf


@settings(max_examples=15, deadline=None)
@given(sigma=st.floats(0.5, 3.0), q=st.floats(0.3, 2.0))
def test_s_frac_extrapolation(sigma, q):
    law = PrototypeQ(sigma, q)
    assert cl.s_frac_extrapolated(law) == pytest.approx(math.pi / (q * sigma), abs=1e-5)


@pytest.mark.parametrize("q,p", [(1.0, 5 / 3), (2.0, 3.0), (0.5, 9 / 7)])
def test_asymptotic_exponent(q, p):
    fit = cl.asymptotic_exponent(PrototypeQ(1.0, q))
    assert fit.p_expected == pytest.approx(p)
    assert abs(fit.p - p) <= 0.05 * p
    assert fit.consistent
    assert fit.deficit_nonnegative
    assert fit.ell_tilde > 0


def _g_values(law, s):
    return np.array([cl.g(law, float(x)) for x in s])


@pytest.mark.parametrize("law", [LAW, PrototypeQ(1, 2), PrototypeP(1, 0.5)])
def test_shape_properties(law):
    top = min(cl.s_frac(law), 8.0)
    s = np.linspace(1e-3, 1.2 * top, 120)
    gv = _g_values(law, s)
    assert np.all(np.diff(gv) >= -1e-12)
    assert np.all(gv <= np.minimum(1.0, law.sigma_c * s) + 1e-12)
    # Lipschitz with constant sigma_c
    assert np.all(np.abs(np.diff(gv)) <= law.sigma_c * np.diff(s) * (1 + 1e-9))


def test_subadditivity():
    rng = np.random.default_rng(7)
    ab = rng.uniform(0.01, 2.5, size=(200, 2))
    for a, b in ab:
        assert cl.g(LAW, a + b) <= cl.g(LAW, a) + cl.g(LAW, b) + 1e-12


def test_derivative_matches_finite_differences():
    h = 1e-5
    for s in np.linspace(0.05, 0.95 * math.pi, 15):
        fd = (cl.g(LAW, s + h) - cl.g(LAW, s - h)) / (2 * h)
        assert cl.g_prime(LAW, s) == pytest.approx(fd, abs=1e-5)


def test_table_and_csv(tmp_path):
    tab = cl.tabulate(LAW, n=16)
    assert np.all(np.diff(tab.m_grid) < 0)
    assert np.all(np.diff(tab.s_values) > 0)
    ip = tab.interpolant()
    assert ip(0.0) == 0.0
    x = np.linspace(0, tab.s_values[-1], 100)
    assert np.all(np.diff(ip(x)) >= 0)
    tab.to_csv(tmp_path / "law.csv")
    lines = (tmp_path / "law.csv").read_text().splitlines()
    assert lines[0] == "m,s,g,gprime" and len(lines) == 17


def test_parallel_table_identical():
    a = cl.tabulate(PrototypeQ(1.0, 1.5), n=12)
    b = cl.tabulate(PrototypeQ(1.0, 1.5), n=12, workers=2)
    np.testing.assert_array_equal(a.s_values, b.s_values)
    np.testing.assert_array_equal(a.g_values, b.g_values)

import json
import math

import numpy as np
import pytest

from cohesive_phasefield import experiments as ex
from cohesive_phasefield import profile_ode as po
from cohesive_phasefield.material_law import PrototypeP, PrototypeQ

LAW = PrototypeQ(1.0, 1.0)
S06 = 2 * math.atan(4 / 3) - 1.2 * math.log(3)
G06 = 0.36 * math.log(1 / 3) + 0.8


def test_config_validation():
    with pytest.raises(ValueError):
        ex.SweepConfig(regime="other")
    with pytest.raises(ValueError):
        ex.SweepConfig(eps_list=(1e-3, 1e-2))
    with pytest.raises(ValueError):
        ex.SweepConfig(c0=0.7)


def test_stress_level_root():
    assert ex.stress_level_root(LAW, 0.6) == pytest.approx(0.6, abs=1e-15)
    with pytest.raises(ValueError):
        ex.stress_level_root(LAW, 1.2)


@pytest.fixture(scope="module")
def short_sweep():
    return ex.prefractured_sweep(ex.SweepConfig(eps_list=(1e-2, 1e-3)))


def test_prefractured_limits(short_sweep):
    lim = short_sweep.limits
    assert lim["m_star"] == pytest.approx(0.6, abs=1e-14)
    assert lim["jump_limit"] == pytest.approx(S06, abs=1e-12)
    assert lim["a_limit"] == pytest.approx(0.3 + S06, abs=1e-12)
    assert lim["energy_limit"] == pytest.approx(0.09 + G06, abs=1e-12)
    assert lim["d_limit"] == pytest.approx(-0.09)


def test_prefractured_trends(short_sweep):
    rows = short_sweep.rows
    assert all(r.status == "ok" for r in rows)
    assert rows[1].jump == pytest.approx(S06, abs=5e-2)
    for key in ("a_gap_trend", "crit_residual_trend", "energy_gap_trend"):
        assert short_sweep.assertions[key]["passed"], key
    s = json.loads(short_sweep.summary_json())
    assert s["regime"] == "prefractured" and "assertions" in s


def test_csv_is_deterministic(tmp_path, short_sweep):
    short_sweep.to_csv(tmp_path / "a.csv")
    again = ex.prefractured_sweep(ex.SweepConfig(eps_list=(1e-2, 1e-3)))
    again.to_csv(tmp_path / "b.csv")
    a = (tmp_path / "a.csv").read_bytes()
    assert a == (tmp_path / "b.csv").read_bytes()
    assert a.decode().splitlines()[0] == ex.CSV_HEADER


def test_parallel_sweep_identical(tmp_path, short_sweep):
    par = ex.prefractured_sweep(ex.SweepConfig(eps_list=(1e-2, 1e-3), workers=2))
    short_sweep.to_csv(tmp_path / "a.csv")
    par.to_csv(tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_failed_rows_are_marked():
    res = ex.prefractured_sweep(ex.SweepConfig(eps_list=(0.3, 1e-2)))
    assert res.rows[0].status.startswith("failed")
    assert math.isnan(res.rows[0].a_eps)
    assert res.rows[1].status == "ok"
    assert not res.assertions["all_rows_ok"]["passed"]


def test_fractured_requires_finite_s_frac():
    with pytest.raises(ValueError):
        ex.fractured_sweep(ex.SweepConfig(law=PrototypeP(1.0, 0.0), regime="fractured"))


def test_fractured_short_sweep():
    res = ex.fractured_sweep(ex.SweepConfig(regime="fractured", eps_list=(1e-2, 1e-4)))
    r0, r1 = res.rows
    assert r1.m_eps < r0.m_eps
    assert abs(r1.a_eps - math.pi) < abs(r0.a_eps - math.pi)
    assert abs(r1.energy - 1) < abs(r0.energy - 1)
    assert res.limits["a_limit"] == math.pi


def test_elastic_check():
    below = ex.elastic_check(LAW, 0.4)
    assert below["gap"] == 0.0 and below["consistent"]
    above = ex.elastic_check(LAW, 1.0)
    assert above["F_eps"] == 1.0 and above["Phi"] == 0.75 and above["gap"] == 0.25


def test_figure_data(tmp_path):
    paths = ex.figure_data("ode_portrait", LAW, tmp_path)
    stat = np.loadtxt(tmp_path / "ode_portrait_stationary.csv", skiprows=1)
    assert 1.0 in stat
    assert np.any(np.isclose(stat, po.z_alpha(LAW, 0.2), atol=1e-15))
    assert all(p.exists() for p in paths)
    ex.figure_data("law_curves", LAW, tmp_path)
    g = np.loadtxt(tmp_path / "law_curves_g.csv", delimiter=",", skiprows=1)
    assert np.any((g[:, 0] == math.pi) & (g[:, 1] == 1.0))
    ex.figure_data("f_eps_plot", LAW, tmp_path)
    f = np.loadtxt(tmp_path / "f_eps_plot_eps0.01.csv", delimiter=",", skiprows=1)
    assert f[-1, 1] == 1.0 and np.all(np.diff(f[:, 1]) >= 0)
    assert ex.write_plot_script(tmp_path).read_text().startswith('"""Plot')
    with pytest.raises(ValueError):
        ex.figure_data("other", LAW, tmp_path)

"""Eps-sweeps over the three limit regimes and figure data.

Pre-fractured sweeps keep ``c`` fixed; the jump ``a_eps - c L`` should
approach ``s(m*)`` with ``(1-m*) f(m*) = 2c`` and the energy should approach
``c^2 L + g(s(m*))``.  Fractured sweeps drive ``c_eps = eps^gamma`` to zero
(``gamma = 1/4`` by default); ``a_eps`` should approach ``s_frac`` and the
energy 1.  The elastic pair is eps independent and its energy exceeds the
sharp energy exactly when ``a/L > sigma_c/2``.

Convergence is checked as a trend: every residual at the finest ``eps`` must
be at most half its value at the coarsest.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from . import cohesive_law as cl
from . import profile_ode as po
from . import sharp_model as sm
from .critical_point_solver import ShootingProblem, build_pair, elastic_pair, shoot
from .errors import NumericalFailure
from .material_law import MaterialLaw, PrototypeQ, regularize

__all__ = [
    "DEFAULT_EPS",
    "SweepConfig",
    "ConvergenceRow",
    "SweepResult",
    "stress_level_root",
    "prefractured_sweep",
    "fractured_sweep",
    "elastic_check",
    "run_sweep",
    "figure_data",
    "FIGURE_KINDS",
]

DEFAULT_EPS = (1e-2, 3e-3, 1e-3, 3e-4, 1e-4)
CSV_HEADER = "eps,m_eps,a_eps,d_eps,energy,jump,crit_residual,energy_gap"
FIGURE_KINDS = ("f_eps_plot", "ode_portrait", "law_curves", "critical_profiles")


@dataclass
class SweepConfig:
    """Sweep parameters.

    Attributes
    ----------
    law : MaterialLaw
    regime : str
        ``"prefractured"``, ``"fractured"`` or ``"elastic"``.
    eps_list : tuple of float
        Strictly decreasing.
    L : float
    c0 : float
        Stress constant of the pre-fractured regime.
    a : float
        Elongation of the elastic regime.
    exponent : float
        ``c_eps = eps**exponent`` in the fractured regime.
    tol : float
        Shooting tolerance relative to ``L``.
    n_points : int
        Samples per pair.
    workers : int
        Process-pool size; 1 runs sequentially.
    """

    law: MaterialLaw = field(default_factory=PrototypeQ)
    regime: str = "prefractured"
    eps_list: tuple = DEFAULT_EPS
    L: float = 1.0
    c0: float = 0.3
    a: float = 0.4
    exponent: float = 0.25
    tol: float = 1e-10
    n_points: int = 2000
    workers: int = 1

    def __post_init__(self):
        self.eps_list = tuple(float(e) for e in self.eps_list)
        if self.regime not in ("prefractured", "fractured", "elastic"):
            raise ValueError(f"unknown regime {self.regime!r}")
        if any(e <= 0 for e in self.eps_list):
            raise ValueError("eps values must be positive")
        if any(b >= a for a, b in zip(self.eps_list, self.eps_list[1:])):
            raise ValueError("eps_list must be strictly decreasing")
        if not self.L > 0:
            raise ValueError("L must be positive")
        if self.regime == "prefractured" and not (0 < self.c0 < 0.5 * self.law.sigma_c):
            raise ValueError("c0 must lie in (0, sigma_c/2)")


@dataclass
class ConvergenceRow:
    eps: float
    m_eps: float
    a_eps: float
    d_eps: float
    energy: float
    jump: float
    crit_residual: float
    energy_gap: float
    c: float = math.nan
    status: str = "ok"
    extra: dict = field(default_factory=dict)

    def csv_values(self) -> list[float]:
        return [self.eps, self.m_eps, self.a_eps, self.d_eps, self.energy, self.jump,
                self.crit_residual, self.energy_gap]


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list[ConvergenceRow]
    limits: dict
    assertions: dict

    @property
    def passed(self) -> bool:
        return all(a["passed"] for a in self.assertions.values())

    def to_csv(self, path) -> None:
        data = np.array([r.csv_values() for r in self.rows], dtype=float)
        np.savetxt(path, data, delimiter=",", header=CSV_HEADER, comments="", fmt="%.17g")

    def summary(self) -> dict:
        return {
            "regime": self.config.regime,
            "law": self.config.law.to_config(),
            "L": self.config.L,
            "eps_list": list(self.config.eps_list),
            "limits": self.limits,
            "rows": [{"eps": r.eps, "c": r.c, "status": r.status, **r.extra} for r in self.rows],
            "assertions": self.assertions,
            "passed": self.passed,
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, default=float)


def stress_level_root(law: MaterialLaw, level: float) -> float:
    """``m`` with ``(1-m) f(m) = level`` for ``0 < level < sigma_c``."""
    if not (0.0 < level < law.sigma_c):
        raise ValueError("level must lie in (0, sigma_c)")
    return brentq(lambda m: float(law.stress(m)) - level, 1e-15, 1.0 - 1e-15,
                  xtol=1e-16, rtol=1e-15)


def _trend(values: list[float], factor: float = 0.5) -> dict:
    vals = [v for v in values if math.isfinite(v)]
    if len(vals) < 2:
        return {"coarsest": math.nan, "finest": math.nan, "ratio": math.nan, "passed": False}
    first, last = vals[0], vals[-1]
    ratio = last / first if first > 0 else (0.0 if last == 0 else math.inf)
    return {"coarsest": first, "finest": last, "ratio": ratio, "passed": bool(last <= factor * first)}


def _threshold(value: float, bound: float) -> dict:
    return {"value": value, "bound": bound, "passed": bool(math.isfinite(value) and value <= bound)}


def _pair_row(args) -> ConvergenceRow:
    law, eps, c, L, tol, n_points, e_lim = args
    try:
        prob = ShootingProblem(regularize(law, eps), c, L)
        pair = build_pair(prob, shoot(prob, tol=tol), n_points=n_points)
    except (NumericalFailure, ValueError) as exc:
        nan = math.nan
        return ConvergenceRow(eps, nan, nan, nan, nan, nan, nan, nan, c=c, status=f"failed: {exc}")
    jump = pair.jump
    crit = abs(cl.g_prime(law, jump) - 2.0 * c) if jump > 0 else math.nan
    extra = {
        "two_c_over_f_m": 2.0 * c / float(law(pair.m)),
        "first_integral_max_rel": pair.residuals["first_integral_max_rel"],
        "weak_residual": pair.residuals["weak_residual"],
        "energy_identity_rel": pair.residuals["energy_identity_rel"],
        "v_min": pair.residuals["v_min"],
        "v_max": pair.residuals["v_max"],
        "n_shooting_roots": len(pair.shooting["roots"]) if pair.shooting else 1,
        "log_kappa": pair.log_kappa,
    }
    return ConvergenceRow(eps, pair.m, pair.a_eps, pair.d_eps, pair.energy, jump, crit,
                          abs(pair.energy - e_lim), c=c, extra=extra)


def _rows(tasks, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_pair_row, tasks))
    return [_pair_row(t) for t in tasks]


def prefractured_sweep(config: SweepConfig) -> SweepResult:
    """Fixed ``c = c0``; limits ``a* = c0 L + s(m*)`` and ``F* = c0^2 L + g(s(m*))``."""
    law, c0, L = config.law, config.c0, config.L
    m_star = stress_level_root(law, 2.0 * c0)
    s_star = cl.s_of_m(law, m_star)
    a_star = c0 * L + s_star
    e_star = c0 * c0 * L + cl.g_of_m(law, m_star)
    tasks = [(law, e, c0, L, config.tol, config.n_points, e_star) for e in config.eps_list]
    rows = _rows(tasks, config.workers)
    for r in rows:
        r.extra["a_gap"] = abs(r.a_eps - a_star)
        r.extra["d_gap"] = abs(r.d_eps + c0 * c0)
    limits = {"m_star": m_star, "jump_limit": s_star, "a_limit": a_star,
              "energy_limit": e_star, "d_limit": -c0 * c0}
    assertions = {
        "a_gap_trend": _trend([r.extra["a_gap"] for r in rows]),
        "crit_residual_trend": _trend([r.crit_residual for r in rows]),
        "d_gap_trend": _trend([r.extra["d_gap"] for r in rows]),
        "energy_gap_trend": _trend([r.energy_gap for r in rows]),
        "finest_crit_residual": _threshold(rows[-1].crit_residual, 1e-2),
        "all_rows_ok": {"passed": all(r.status == "ok" for r in rows)},
    }
    return SweepResult(config, rows, limits, assertions)


def fractured_sweep(config: SweepConfig) -> SweepResult:
    """``c_eps = eps^exponent``; limits ``a -> s_frac`` and ``F -> 1``."""
    law, L = config.law, config.L
    sf = cl.s_frac(law)
    if not math.isfinite(sf):
        raise ValueError(
            "the fractured regime needs f'(0) > 0 (finite s_frac); this law has f'(0) = 0"
        )
    tasks = []
    for e in config.eps_list:
        c = e**config.exponent
        tasks.append((law, e, c, L, config.tol, config.n_points, 1.0))
    rows = _rows(tasks, config.workers)
    for r in rows:
        r.extra["a_gap"] = abs(r.a_eps - sf)
    finest = rows[-1]
    ratio = finest.extra.get("two_c_over_f_m", math.nan)
    limits = {"a_limit": sf, "energy_limit": 1.0, "m_limit": 0.0, "two_c_over_f_m_limit": 1.0}
    assertions = {
        "a_gap_trend": _trend([r.extra["a_gap"] for r in rows]),
        "energy_gap_trend": _trend([r.energy_gap for r in rows]),
        "m_trend": _trend([r.m_eps for r in rows]),
        "finest_two_c_over_f_m": _threshold(abs(ratio - 1.0), 5e-2),
        "all_rows_ok": {"passed": all(r.status == "ok" for r in rows)},
    }
    return SweepResult(config, rows, limits, assertions)


def elastic_check(law: MaterialLaw, a: float, L: float = 1.0, eps: float = 1e-3) -> dict:
    """Energy of the elastic pair against the sharp elastic energy.

    The gap ``(a/L)^2 L - phi(a/L) L`` vanishes exactly when
    ``a/L <= sigma_c/2`` and is positive otherwise.
    """
    pair = elastic_pair(a, L, regularize(law, eps))
    slope = a / L
    Phi = sm.phi(law.sigma_c, slope) * L
    gap = pair.energy - Phi
    return {
        "a": a,
        "L": L,
        "eps": eps,
        "F_eps": pair.energy,
        "Phi": Phi,
        "gap": gap,
        "energies_converge": bool(slope <= 0.5 * law.sigma_c),
        "consistent": bool(gap == 0.0) if slope <= 0.5 * law.sigma_c else bool(gap > 0.0),
    }


def run_sweep(config: SweepConfig):
    if config.regime == "prefractured":
        return prefractured_sweep(config)
    if config.regime == "fractured":
        return fractured_sweep(config)
    return elastic_check(config.law, config.a, config.L, config.eps_list[-1])


# ---------------------------------------------------------------------------
# figure data


def _save(path: Path, header: str, cols) -> Path:
    np.savetxt(path, np.column_stack(cols), delimiter=",", header=header, comments="", fmt="%.17g")
    return path


def _fig_f_eps(law, out: Path, eps_values=(1e-2, 1e-3)) -> list[Path]:
    paths = []
    for e in eps_values:
        reg = regularize(law, e)
        s = np.unique(np.concatenate([np.linspace(0, 1, 801), [reg.s_eps],
                                      reg.s_eps + (1 - reg.s_eps) * np.linspace(0, 1, 201)]))
        paths.append(_save(out / f"f_eps_plot_eps{e:g}.csv", "s,f_eps,f_eps_d1",
                           [s, reg(s), reg.d1(s)]))
    return paths


def _fig_ode(law, out: Path, alpha=0.2) -> list[Path]:
    m_alpha = stress_level_root(law, 2 * alpha)
    z = po.z_alpha(law, alpha)
    paths = []
    for tag, m in (("below", 0.75 * m_alpha), ("above", 0.5 * (m_alpha + z))):
        p = po.OdeParams(law, alpha, m)
        t_max = 50.0
        sol = po.solve_ivp(p, t_max=t_max, n_samples=1001)
        mir = sol.mirrored()
        paths.append(_save(out / f"ode_portrait_{tag}.csv", "t,y,yprime", [mir.t, mir.y, mir.yp]))
    het = po.optimal_profile(law, m_alpha, half_width=25.0).mirrored()
    paths.append(_save(out / "ode_portrait_heteroclinic.csv", "t,y,yprime", [het.t, het.y, het.yp]))
    paths.append(_save(out / "ode_portrait_stationary.csv", "y", [np.array([1.0, z])]))
    return paths


def _fig_law(law, out: Path) -> list[Path]:
    tab = cl.tabulate(law, n=128)
    paths = [_save(out / "law_curves_m.csv", "m,s,g,gprime",
                   [tab.m_grid, tab.s_values, tab.g_values, tab.gprime_values])]
    sf = cl.s_frac(law)
    top = sf if math.isfinite(sf) else float(tab.s_values.max())
    s = np.linspace(0.0, top, 201)
    gv = np.array([cl.g(law, float(x)) for x in s])
    if math.isfinite(sf):
        s = np.append(s, 1.25 * sf)
        gv = np.append(gv, 1.0)
    paths.append(_save(out / "law_curves_g.csv", "s,g", [s, gv]))
    return paths


def _fig_profiles(law, out: Path, eps=1e-3, c=0.3, L=1.0) -> list[Path]:
    paths = []
    prob = ShootingProblem(regularize(law, eps), c, L)
    pair = build_pair(prob, shoot(prob))
    path = out / "critical_profiles_prefractured.csv"
    pair.to_csv(path)
    paths.append(path)
    cf = eps**0.25
    if math.isfinite(cl.s_frac(law)) and cf < 0.5 * law.sigma_c:
        prob = ShootingProblem(regularize(law, eps), cf, L)
        pair = build_pair(prob, shoot(prob))
        path = out / "critical_profiles_fractured.csv"
        pair.to_csv(path)
        paths.append(path)
    a_pre = c * L + cl.s_of_m(law, stress_level_root(law, 2 * c))
    pts = sm.enumerate_critical_points(law, a_pre, L, 1)
    for p in pts:
        path = out / f"sharp_{p.kind.value.lower()}_k{p.k}.csv"
        p.u.to_csv(path)
        paths.append(path)
    if math.isfinite(cl.s_frac(law)):
        fr = [p for p in sm.enumerate_critical_points(law, 1.2 * cl.s_frac(law), L, 1)
              if p.kind is sm.Kind.FRACTURED]
        for p in fr:
            path = out / f"sharp_fractured_k{p.k}.csv"
            p.u.to_csv(path)
            paths.append(path)
    return paths


PLOT_SCRIPT = '''"""Plot the CSV series written by ``cohesive-pf figures``.

Run ``python plot_figures.py`` inside the output directory (needs matplotlib).
"""
import glob

import matplotlib.pyplot as plt
import numpy as np


def load(path):
    return np.genfromtxt(path, delimiter=",", names=True)


def main():
    for path in sorted(glob.glob("f_eps_plot_*.csv")):
        d = load(path)
        plt.figure()
        plt.plot(d["s"], d["f_eps"])
        plt.xlabel("s")
        plt.ylabel("f_eps")
        plt.savefig(path.replace(".csv", ".png"), dpi=150)
    plt.figure()
    for path in sorted(glob.glob("ode_portrait_*.csv")):
        if "stationary" in path:
            for y in np.atleast_1d(load(path)["y"]):
                plt.axvline(y, ls="--", c="k")
            continue
        d = load(path)
        plt.plot(d["y"], d["yprime"], label=path[13:-4])
    plt.xlabel("y")
    plt.ylabel("y'")
    plt.legend()
    plt.savefig("ode_portrait.png", dpi=150)
    d = load("law_curves_m.csv")
    plt.figure()
    plt.plot(d["m"], d["s"], label="s(m)")
    plt.plot(d["m"], d["g"], label="g(s(m))")
    plt.legend()
    plt.savefig("law_curves_m.png", dpi=150)
    d = load("law_curves_g.csv")
    plt.figure()
    plt.plot(d["s"], d["g"])
    plt.xlabel("s")
    plt.ylabel("g")
    plt.savefig("law_curves_g.png", dpi=150)
    for path in sorted(glob.glob("critical_profiles_*.csv")) + sorted(glob.glob("sharp_*.csv")):
        d = load(path)
        plt.figure()
        plt.plot(d["x"], d["u"], label="u")
        if "v" in d.dtype.names:
            plt.plot(d["x"], d["v"], label="v")
        plt.legend()
        plt.savefig(path.replace(".csv", ".png"), dpi=150)


if __name__ == "__main__":
    main()
'''


def figure_data(kind: str, law: MaterialLaw, out_dir) -> list[Path]:
    """Write the CSV series of one figure kind into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if kind == "f_eps_plot":
        return _fig_f_eps(law, out)
    if kind == "ode_portrait":
        return _fig_ode(law, out)
    if kind == "law_curves":
        return _fig_law(law, out)
    if kind == "critical_profiles":
        return _fig_profiles(law, out)
    raise ValueError(f"unknown figure kind {kind!r}")


def write_plot_script(out_dir) -> Path:
    path = Path(out_dir) / "plot_figures.py"
    path.write_text(PLOT_SCRIPT)
    return path


def row_dict(row: ConvergenceRow) -> dict:
    return asdict(row)

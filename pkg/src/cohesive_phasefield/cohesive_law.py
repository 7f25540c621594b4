"""Cohesive surface density ``g`` generated by a degradation law.

With ``phi(t) = (1-t) f(t)`` (increasing from 0 to ``sigma_c``) the density
is given parametrically in the minimum ``m`` of the optimal profile:

    s(m)    = 2 phi(m) int_m^1 dt / (f(t) sqrt(phi(t)^2 - phi(m)^2))
    g(s(m)) = 2 int_m^1 (1-t) phi(t) / sqrt(phi(t)^2 - phi(m)^2) dt

and ``g'(s) = phi(m_s)`` where ``m_s`` inverts ``s(m)``.  ``s(m)`` decreases
from ``s_frac = pi / f'(0)`` at ``m = 0`` to 0 at ``m = 1``.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import NumericalFailure
from .material_law import MaterialLaw

__all__ = [
    "s_of_m",
    "g_of_m",
    "m_of_s",
    "g",
    "g_prime",
    "s_frac",
    "s_frac_extrapolated",
    "AsymptoticFit",
    "asymptotic_exponent",
    "CohesiveLawTable",
    "tabulate",
]

QUAD_EPSREL = 1e-12
QUAD_EPSABS = 1e-14
M_FLOOR = 1e-14


def _pieces(m: float) -> list[tuple[float, float]]:
    """Split ``[m, 1]`` into pieces adapted to the scale ``m``.

    The first piece starts at the singular endpoint; for small ``m`` the
    next ones double in length up to ``(1+m)/2``.
    """
    mid = 0.5 * (1.0 + m)
    a = m
    b = min(2.0 * m, mid)
    out = [(a, b)]
    while b < mid:
        a, b = b, min(2.0 * b, mid)
        out.append((a, b))
    out.append((mid, 1.0))
    return out


def _integrate(law: MaterialLaw, m: float, weight) -> float:
    """``int_m^1 weight(t) / sqrt(phi(t)^2 - phi(m)^2) dt``."""
    phim = float(law.stress(m))
    dphim = float(law.stress_d1(m))

    def radicand(t):
        phit = float(law.stress(t))
        d = float(law.stress_diff(t, m))
        if d <= 0.0:
            d = dphim * (t - m)
        return d * (phit + phim)

    # convergence is judged from the accumulated error estimate below
    with np.errstate(divide="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        total, err_total = _sum_pieces(m, radicand, weight)
    if not math.isfinite(total):
        raise NumericalFailure(f"quadrature failed at m={m} (error estimate {err_total})")
    if err_total > 1e-7 * abs(total) + 1e-12:
        raise NumericalFailure(
            f"quadrature did not converge at m={m}: estimate {err_total:.3e}"
        )
    return total


def _sum_pieces(m, radicand, weight):
    total = 0.0
    err_total = 0.0
    for k, (a, b) in enumerate(_pieces(m)):
        if k == 0:
            span = b - a

            def fn(u, span=span):
                t = m + span * u * u
                r = radicand(t)
                return 2.0 * span * u * weight(t) / math.sqrt(r) if r > 0 else 0.0

            val, err = quad(fn, 0.0, 1.0, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)
        else:
            def fn(t):
                return weight(t) / math.sqrt(radicand(t))

            val, err = quad(fn, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)
        total += val
        err_total += err
    return total, err_total


def _check_m(m):
    if not (0.0 < m < 1.0):
        raise ValueError(f"m must lie in (0, 1), got {m!r}")


@functools.lru_cache(maxsize=65536)
def s_of_m(law: MaterialLaw, m: float) -> float:
    """Opening ``s(m)`` whose optimal profile has minimum ``m``."""
    _check_m(m)
    phim = float(law.stress(m))

    def w(t):
        # 1/f(t), written through phi so that t = 1 is harmless
        return (1.0 - t) / float(law.stress(t))

    return 2.0 * phim * _integrate(law, m, w)


@functools.lru_cache(maxsize=65536)
def g_of_m(law: MaterialLaw, m: float) -> float:
    """Surface energy ``g(s(m))``."""
    _check_m(m)

    def w(t):
        return (1.0 - t) * float(law.stress(t))

    return 2.0 * _integrate(law, m, w)


def s_frac(law: MaterialLaw) -> float:
    """``pi / f'(0)``; ``inf`` when ``f'(0) = 0``."""
    d = law.slope_at_zero()
    return math.pi / d if d > 0 else math.inf


def s_frac_extrapolated(law: MaterialLaw, ms=(1e-5, 1e-6, 1e-7)) -> float:
    """Limit of ``s(m)`` as ``m -> 0`` from the model ``s0 + a m log m + b m``."""
    ms = np.asarray(ms, dtype=float)
    A = np.column_stack([np.ones_like(ms), ms * np.log(ms), ms])
    rhs = np.array([s_of_m(law, float(m)) for m in ms])
    coef = np.linalg.solve(A, rhs) if len(ms) == 3 else np.linalg.lstsq(A, rhs, rcond=None)[0]
    return float(coef[0])


@functools.lru_cache(maxsize=64)
def _table(law: MaterialLaw) -> tuple[np.ndarray, np.ndarray]:
    j = np.arange(1, 65)
    mg = 0.5 * (1.0 - np.cos(np.pi * j / 65.0))
    sg = np.array([s_of_m(law, float(m)) for m in mg])
    return mg, sg


def m_of_s(law: MaterialLaw, s: float) -> float:
    """Minimum ``m_s`` of the optimal profile for opening ``s``.

    Returns 0 for ``s >= s_frac``.
    """
    if not s > 0:
        raise ValueError(f"s must be positive, got {s!r}")
    if s >= s_frac(law):
        return 0.0
    mg, sg = _table(law)

    def res(m):
        return s_of_m(law, float(m)) - s

    if s > sg[0]:
        lo, hi = M_FLOOR, float(mg[0])
        if res(lo) < 0:
            return M_FLOOR
    elif s < sg[-1]:
        lo = float(mg[-1])
        for k in range(4, 15):
            hi = 1.0 - 10.0**-k
            if hi > lo and res(hi) <= 0:
                break
            lo = max(lo, hi)
        else:
            return hi
    else:
        j = int(np.searchsorted(-sg, -s))
        lo, hi = float(mg[max(j - 1, 0)]), float(mg[min(j, len(mg) - 1)])
        if lo == hi:
            return lo
    return brentq(res, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)


def g(law: MaterialLaw, s: float) -> float:
    """Cohesive surface density ``g(s)``; 1 for ``s >= s_frac``."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    if s == 0:
        return 0.0
    if s >= s_frac(law):
        return 1.0
    m = m_of_s(law, s)
    if m <= M_FLOOR:
        return 1.0
    return g_of_m(law, m)


def g_prime(law: MaterialLaw, s: float) -> float:
    """``g'(s) = (1 - m_s) f(m_s)``; ``sigma_c`` at 0 and 0 beyond ``s_frac``."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    if s == 0:
        return float(law.sigma_c)
    if s >= s_frac(law):
        return 0.0
    return float(law.stress(m_of_s(law, s)))


@dataclass
class AsymptoticFit:
    """Fit of ``sigma_c s - g(s) ~ ell s^p`` for small ``s``."""

    p: float
    ell_tilde: float
    p_expected: float | None
    consistent: bool | None
    deficit_nonnegative: bool
    s: np.ndarray
    deficit: np.ndarray

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "ell_tilde": self.ell_tilde,
            "p_expected": self.p_expected,
            "consistent": self.consistent,
            "deficit_nonnegative": self.deficit_nonnegative,
        }


def asymptotic_exponent(
    law: MaterialLaw,
    q_hint: float | None = None,
    s_min: float = 1e-4,
    s_max: float = 1e-2,
    n: int = 25,
) -> AsymptoticFit:
    """Least-squares slope of ``log(sigma_c s - g(s))`` against ``log s``.

    The points are generated parametrically in ``m`` so that ``s`` and
    ``g`` come from the same profile and no inversion error enters the
    deficit.  With ``q_hint`` (default: the law's expansion exponent) the
    slope is compared to ``(4+q)/(4-q)`` with a 5 % tolerance.
    """
    if q_hint is None:
        q_hint = law.expansion_exponent()
    m_hi = m_of_s(law, s_min)
    m_lo = m_of_s(law, s_max)
    w = np.geomspace(1.0 - m_lo, 1.0 - m_hi, n)
    ms = 1.0 - w
    s = np.array([s_of_m(law, float(m)) for m in ms])
    gv = np.array([g_of_m(law, float(m)) for m in ms])
    deficit = law.sigma_c * s - gv
    nonneg = bool(np.all(deficit >= 0))
    good = deficit > 0
    if good.sum() < 3:
        raise NumericalFailure("deficit sigma_c s - g(s) not positive on the fit window")
    slope, icpt = np.polyfit(np.log(s[good]), np.log(deficit[good]), 1)
    p_exp = None
    consistent = None
    if q_hint is not None:
        p_exp = (4.0 + q_hint) / (4.0 - q_hint)
        consistent = bool(abs(slope - p_exp) <= 0.05 * p_exp)
    return AsymptoticFit(
        p=float(slope), ell_tilde=float(math.exp(icpt)), p_expected=p_exp,
        consistent=consistent, deficit_nonnegative=nonneg, s=s, deficit=deficit,
    )


@dataclass
class CohesiveLawTable:
    """Tabulated ``(m, s(m), g(s(m)), g'(s(m)))`` on a decreasing ``m`` grid."""

    law: MaterialLaw
    m_grid: np.ndarray
    s_values: np.ndarray
    g_values: np.ndarray
    gprime_values: np.ndarray
    s_frac: float

    def interpolant(self) -> PchipInterpolator:
        """Monotone interpolant of ``g`` in ``s`` including ``(0, 0)``."""
        s = np.concatenate([[0.0], self.s_values])
        gv = np.concatenate([[0.0], self.g_values])
        return PchipInterpolator(s, gv, extrapolate=False)

    def to_csv(self, path) -> None:
        data = np.column_stack([self.m_grid, self.s_values, self.g_values, self.gprime_values])
        np.savetxt(path, data, delimiter=",", header="m,s,g,gprime", comments="", fmt="%.17g")


def tabulate(law: MaterialLaw, n: int = 64, workers: int | None = None) -> CohesiveLawTable:
    """Tabulate the law on ``n`` points with ``m`` decreasing.

    ``workers > 1`` evaluates the grid in a process pool; output order is
    independent of scheduling.
    """
    j = np.arange(1, n + 1)
    mg = (0.5 * (1.0 + np.cos(np.pi * j / (n + 1.0))))  # decreasing in (0, 1)
    if workers and workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as ex:
            sv = list(ex.map(s_of_m, [law] * n, mg.tolist()))
            gv = list(ex.map(g_of_m, [law] * n, mg.tolist()))
    else:
        sv = [s_of_m(law, float(m)) for m in mg]
        gv = [g_of_m(law, float(m)) for m in mg]
    return CohesiveLawTable(
        law=law, m_grid=mg, s_values=np.array(sv), g_values=np.array(gv),
        gprime_values=np.asarray(law.stress(mg), dtype=float), s_frac=s_frac(law),
    )

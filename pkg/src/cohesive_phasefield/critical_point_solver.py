"""Shooting construction of critical points of the regularised functional.

On ``[0, L]`` the functional

    F_eps(u, v) = int f_eps(v)^2 u'^2 + (1-v)^2/(4 eps) + eps v'^2 dx

with ``u(0) = 0``, ``u(L) = a`` and ``v(0) = v(L) = 1`` has critical points
with ``f_eps(v)^2 u' = c`` constant and ``v`` a symmetric well with minimum
``m`` at ``L/2``.  Writing

    K(v) = (1-v)^2/4 - c^2/f(v)^2,     G(v) = (1-v)^2/4 - eps c^2/f_eps(v)^2,

``G = K`` below ``s_eps`` and the first integral reads
``eps^2 v'^2 = G(v) - K(m)`` (the right side is ``eps^2 H``).
The half width ``X`` of the well is ``int_m^1 dv / sqrt(H)``; it blows up as
``K(m)`` approaches ``i = inf G`` over ``(s_eps, 1)``.  Since
``X ~ -eps log(kappa)/2`` with ``kappa = i - K(m)``, the shooting unknown is
``lambda = log kappa`` rather than ``m``: for small ``eps`` the relevant
``kappa`` is far below double precision relative to ``m``.

Below ``w_cut`` (``w = 1 - v``) the junction term is negligible against
``w^2/4`` and the tail of the well is integrated in closed form
(``w = 2 sqrt(kappa') sinh(...)``).
"""

from __future__ import annotations

import functools
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq, minimize_scalar

from .errors import NumericalFailure, ShootingError
from .material_law import RegularizedLaw
from .profile_ode import z_alpha

__all__ = [
    "ShootingProblem",
    "ShootingResult",
    "CriticalPointPair",
    "H",
    "i_eps",
    "m_hat",
    "half_width",
    "shoot",
    "build_pair",
    "elastic_pair",
    "solve",
]

W_CUT_RATIO = 1e-17
_GL_N = 8
_GL_X, _GL_W = npleg.leggauss(_GL_N)


def _integration_matrix():
    # S[i, j] = int_{-1}^{x_i} l_j(t) dt for the Lagrange basis on the GL nodes
    V = npleg.legvander(_GL_X, _GL_N - 1)
    Q = np.empty((_GL_N, _GL_N))
    for k in range(_GL_N):
        ck = np.zeros(_GL_N)
        ck[k] = 1.0
        ik = npleg.legint(ck, lbnd=-1.0)
        Q[:, k] = npleg.legval(_GL_X, ik)
    return Q @ np.linalg.inv(V)


_GL_S = _integration_matrix()


def _asinh_exp(y: float) -> float:
    """``asinh(exp(y))`` without overflow."""
    if y > 0:
        return y + math.log1p(math.sqrt(1.0 + math.exp(-2.0 * y)))
    return math.asinh(math.exp(y))


def _quad(fn, a, b, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(fn, a, b, epsabs=0.0, epsrel=1e-12, limit=400, **kw)
    if not math.isfinite(val):
        raise NumericalFailure(f"quadrature failed on [{a}, {b}]")
    return val


@dataclass(frozen=True)
class ShootingProblem:
    """Regularised law, stress constant ``c`` and bar length ``L``."""

    reg: RegularizedLaw
    c: float
    L: float = 1.0

    def __post_init__(self):
        sig = self.reg.base.sigma_c
        if not (0.0 < self.c < 0.5 * sig):
            raise ValueError(f"c must lie in (0, sigma_c/2) = (0, {0.5 * sig}), got {self.c!r}")
        if not self.L > 0:
            raise ValueError("L must be positive")

    @property
    def eps(self) -> float:
        return self.reg.eps

    @property
    def law(self):
        return self.reg.base

    # ------------------------------------------------------------------
    # scalar building blocks

    def K(self, v):
        """``(1-v)^2/4 - c^2/f(v)^2`` with the unregularised law."""
        fv = self.law(v)
        return (1.0 - v) ** 2 / 4.0 - self.c**2 / (fv * fv)

    def defect(self, w):
        """``1 - f_eps`` on the junction as a function of ``w = 1 - v``."""
        w = np.asarray(w, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            ex = self.reg.log_alpha - self.reg.beta / np.maximum(w, 1e-300)
        return np.exp(np.minimum(ex, 0.0))

    def defect_d1(self, w):
        """``f_eps'`` on the junction as a function of ``w = 1 - v``."""
        w = np.asarray(w, dtype=float)
        wp = np.maximum(w, 1e-300)
        with np.errstate(divide="ignore", over="ignore"):
            ex = self.reg.log_alpha - self.reg.beta / wp + math.log(self.reg.beta) - 2 * np.log(wp)
        return np.where(w > 0, np.exp(np.minimum(ex, 700.0)), 0.0)

    def r(self, w):
        """``eps c^2 (1/f_eps^2 - 1)`` on the junction, cancellation free."""
        e = self.defect(w)
        return self.eps * self.c**2 * e * (2.0 - e) / (1.0 - e) ** 2

    def D0(self, w):
        return np.asarray(w) ** 2 / 4.0 - self.r(w)

    @functools.cached_property
    def w_s(self) -> float:
        return 1.0 - self.reg.s_eps

    @functools.cached_property
    def z_c(self) -> float:
        return z_alpha(self.law, self.c)

    @functools.cached_property
    def _inf_data(self) -> tuple[float, float | None]:
        ws = self.w_s
        grid = np.geomspace(ws * 1e-8, ws, 2000)
        d = self.D0(grid)
        j = int(np.argmin(d))
        if d[j] >= 0:
            return 0.0, None
        lo = grid[max(j - 1, 0)]
        hi = grid[min(j + 1, len(grid) - 1)]
        res = minimize_scalar(lambda w: float(self.D0(w)), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14 * ws})
        wmin = float(res.x)
        return max(0.0, -float(self.D0(wmin))), wmin

    @property
    def delta1(self) -> float:
        """``max(0, -min D0)``; ``i = -eps c^2 - delta1``."""
        return self._inf_data[0]

    @functools.cached_property
    def w_cut(self) -> float:
        """Below this ``w`` the junction term is under ``1e-17 w^2/4``."""
        ws = self.w_s

        def res(w):
            rv = float(self.r(w))
            return math.log(max(rv, 1e-300)) - math.log(W_CUT_RATIO * w * w / 4.0)

        if res(ws) <= 0:
            return ws
        lo = ws
        while res(lo) > 0:
            lo *= 0.5
            if lo < 1e-300:
                raise NumericalFailure("cannot locate w_cut")
        return brentq(res, lo, ws, xtol=1e-15 * ws)


def H(problem: ShootingProblem, m: float, v):
    """``H(v; m) = [G(v) - K(m)] / eps^2`` so that ``v'^2 = H(v)``."""
    va = np.asarray(v, dtype=float)
    if np.any(va < m) or np.any(va > 1):
        raise ValueError("v must lie in [m, 1]")
    if not m < problem.reg.s_eps:
        raise ValueError("m must lie below s_eps")
    eps = problem.eps
    Km = float(problem.K(m))
    with np.errstate(divide="ignore", invalid="ignore"):
        fe = problem.reg(va)
        G = (1.0 - va) ** 2 / 4.0 - eps * problem.c**2 / (fe * fe)
        low = problem.K(np.maximum(va, m)) - Km
    out = np.where(va <= problem.reg.s_eps, low, G - Km) / eps**2
    out = np.where(va == m, 0.0, out)
    return out if out.ndim else float(out)


def i_eps(problem: ShootingProblem) -> float:
    """``inf`` of ``G`` over ``(s_eps, 1)``."""
    return -problem.eps * problem.c**2 - problem.delta1


def m_hat(problem: ShootingProblem) -> float:
    """Unique ``m`` in ``(0, z_c)`` with ``K(m) = i``.

    Raises
    ------
    ShootingError
        If ``s_eps <= z_c`` or the root cannot be bracketed.
    """
    return _m_for_level(problem, i_eps(problem))


def _m_for_level(problem, level: float) -> float:
    """Root in ``(0, z_c)`` of ``K(m) = level``."""
    zc = problem.z_c
    if not zc < problem.reg.s_eps:
        raise ShootingError(
            f"eps={problem.eps} too large: s_eps={problem.reg.s_eps:.6g} <= z_c={zc:.6g}"
        )
    if not float(problem.K(zc)) > level:
        raise ShootingError(f"no m with K(m) = {level}: level above max K")
    lo = min(1e-3, 0.5 * zc)
    while float(problem.K(lo)) > level:
        lo *= 1e-3
        if lo < 1e-150:
            raise ShootingError("cannot bracket m from below")
    return brentq(lambda m: float(problem.K(m)) - level, lo, zc, xtol=1e-16, rtol=1e-15,
                  maxiter=500)


@dataclass
class _Geometry:
    """Per-``lambda`` quantities used by the half-width and the pair."""

    lam: float
    m: float
    Km: float          # K(m) = i - kappa
    log_kp: float      # log(delta1 + kappa)
    TA: float
    TB: float
    theta: float       # asinh(w_cut / (2 sqrt(kappa')))

    def half_width(self, eps) -> float:
        return eps * (self.TA + self.TB + 2.0 * self.theta)


def _geometry(problem: ShootingProblem, lam: float, m: float | None = None) -> _Geometry:
    i = i_eps(problem)
    kappa = math.exp(lam)
    level = i - kappa
    if m is None:
        if kappa < 1e-16 * abs(i):
            m = m_hat(problem)
        else:
            m = _m_for_level(problem, level)
    s_e = problem.reg.s_eps
    span = s_e - m

    def fa(u):
        v = m + span * u * u
        d = float(problem.K(v)) - level
        return 2.0 * span * u / math.sqrt(d) if d > 0 else 0.0

    TA = _quad(fa, 0.0, 1.0)
    d1 = problem.delta1
    floor = d1 + kappa

    def fb(w):
        return 1.0 / math.sqrt(max(float(problem.D0(w)) + floor, 1e-300))

    pts = None
    wmin = problem._inf_data[1]
    if wmin is not None and problem.w_cut < wmin < problem.w_s:
        pts = [wmin]
    TB = _quad(fb, problem.w_cut, problem.w_s, points=pts) if problem.w_cut < problem.w_s else 0.0
    log_kp = np.logaddexp(math.log(d1) if d1 > 0 else -np.inf, lam)
    y = math.log(problem.w_cut / 2.0) - 0.5 * float(log_kp)
    return _Geometry(lam=lam, m=m, Km=level, log_kp=float(log_kp), TA=TA, TB=TB,
                     theta=_asinh_exp(y))


def half_width(problem: ShootingProblem, m: float) -> float:
    """Distance from the centre to the point where ``v = 1``.

    Raises
    ------
    ValueError
        If ``m >= m_hat`` (the well is infinitely wide).
    """
    i = i_eps(problem)
    kappa = i - float(problem.K(m))
    if not kappa > 0:
        raise ValueError("m must lie below m_hat")
    return _geometry(problem, math.log(kappa), m=m).half_width(problem.eps)


@dataclass
class ShootingResult:
    """Root of the half-width equation and the bracket report."""

    m: float
    log_kappa: float
    roots: list[dict]
    scan: list[tuple[float, float]] = field(repr=False, default_factory=list)

    def to_dict(self) -> dict:
        return {"m": self.m, "log_kappa": self.log_kappa, "roots": self.roots}


def shoot(problem: ShootingProblem, tol: float = 1e-10, n_scan: int = 64) -> ShootingResult:
    """Solve ``half_width = L/2`` for ``lambda = log kappa``.

    The scan covers ``lambda`` from ``-L/eps - 100`` (well wider than the bar)
    up to the value at ``m = m_hat / 2^15``.  Every sign change is refined;
    the root with the largest ``kappa`` (smallest ``m``) is canonical.

    Raises
    ------
    ShootingError
        When no sign change exists (``eps`` above the validity threshold).
    """
    eps, L = problem.eps, problem.L
    i = i_eps(problem)
    mh = m_hat(problem)
    lam_hi = math.log(i - float(problem.K(mh * 2.0**-15)))
    lam_lo = -L / eps - 100.0
    if lam_lo >= lam_hi:
        raise ShootingError(f"eps={eps}: empty shooting interval")
    target = 0.5 * L

    @functools.lru_cache(maxsize=None)
    def resid(lam):
        return _geometry(problem, lam).half_width(eps) - target

    lams = np.linspace(lam_lo, lam_hi, n_scan)
    vals = [resid(float(x)) for x in lams]
    roots = []
    for a, b, fa, fb in zip(lams[:-1], lams[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0:
            xtol = max(0.1 * tol * L / eps, 1e-12)
            roots.append(brentq(lambda x: resid(float(x)), float(a), float(b), xtol=xtol))
    if not roots:
        raise ShootingError(
            f"eps={eps}, c={problem.c}: no sign change of the half-width residual on "
            f"[{lam_lo:.6g}, {lam_hi:.6g}] (residuals {vals[0]:.3g} .. {vals[-1]:.3g}); "
            "eps is above the validity threshold"
        )
    report = []
    for lam in roots:
        g = _geometry(problem, lam)
        report.append({"log_kappa": lam, "m": g.m, "residual": resid(lam)})
    best = max(report, key=lambda d: d["log_kappa"])
    if abs(best["residual"]) > tol * L:
        raise NumericalFailure(f"shooting residual {best['residual']:.3e} above tolerance")
    return ShootingResult(m=best["m"], log_kappa=best["log_kappa"], roots=report,
                          scan=list(zip(lams.tolist(), vals)))


# ---------------------------------------------------------------------------
# pairs


@dataclass
class _Nodes:
    """Quadrature nodes on the right half: ``x``, weights and field values."""

    x: np.ndarray
    wt: np.ndarray
    v: np.ndarray
    vp: np.ndarray
    up: np.ndarray
    ffp: np.ndarray     # f_eps(v) f_eps'(v)
    inv_fe2: np.ndarray  # 1 / f_eps(v)^2


@dataclass
class CriticalPointPair:
    """Sampled critical pair ``(u, v)`` on ``[0, L]`` with scalar outputs."""

    problem: ShootingProblem | None
    eps: float
    c: float
    L: float
    m: float
    x: np.ndarray
    u: np.ndarray
    v: np.ndarray
    vprime: np.ndarray
    a_eps: float
    d_eps: float
    energy: float
    log_kappa: float | None = None
    residuals: dict = field(default_factory=dict)
    shooting: dict | None = None
    nodes: _Nodes | None = field(default=None, repr=False)

    @property
    def jump(self) -> float:
        """``a_eps - c L``: the opening concentrated in the well."""
        return self.a_eps - self.c * self.L

    def first_integral(self) -> np.ndarray:
        """``(1-v)^2/(4 eps) - c^2/f_eps^2 - eps v'^2`` at the samples."""
        fe = self._fe(self.v)
        return (1 - self.v) ** 2 / (4 * self.eps) - self.c**2 / fe**2 - self.eps * self.vprime**2

    def discrepancy(self) -> np.ndarray:
        """``c^2/f_eps(v)^2 + d_eps`` at the samples."""
        return self.c**2 / self._fe(self.v) ** 2 + self.d_eps

    def _fe(self, v):
        if self.problem is None:
            return np.ones_like(v)
        return np.asarray(self.problem.reg(v), dtype=float)

    def weak_residual(self, n_tests: int = 50, n_modes: int = 5, seed: int = 0) -> float:
        """Largest normalised weak residual of the ``v`` equation.

        Test functions are random combinations of ``sin(k pi x / L)``.  For
        each, ``|int eps v' phi' + f f' u'^2 phi + (v-1) phi/(4 eps)|`` is
        divided by the sum of the integrals of the absolute terms.
        """
        if self.nodes is None:
            return 0.0
        nd = self.nodes
        L, eps = self.L, self.eps
        x = np.concatenate([nd.x, L - nd.x])
        wt = np.concatenate([nd.wt, nd.wt])
        vp = np.concatenate([nd.vp, -nd.vp])
        v = np.concatenate([nd.v, nd.v])
        t2 = np.concatenate([nd.ffp * nd.up**2] * 2)
        t3 = (v - 1.0) / (4.0 * eps)
        rng = np.random.default_rng(seed)
        k = np.arange(1, n_modes + 1)
        S = np.sin(np.outer(x, k) * np.pi / L)
        C = np.cos(np.outer(x, k) * np.pi / L) * (k * np.pi / L)
        worst = 0.0
        for _ in range(n_tests):
            coef = rng.standard_normal(n_modes)
            ph = S @ coef
            dph = C @ coef
            a1 = eps * vp * dph
            a2 = t2 * ph
            a3 = t3 * ph
            R = np.sum(wt * (a1 + a2 + a3))
            N = np.sum(wt * (np.abs(a1) + np.abs(a2) + np.abs(a3)))
            if not (math.isfinite(R) and math.isfinite(N)):
                return math.nan
            if N > 0:
                worst = max(worst, abs(R) / N)
        return float(worst)

    def diagnostics(self) -> dict:
        out = {
            "eps": self.eps,
            "c": self.c,
            "L": self.L,
            "m_eps": self.m,
            "a_eps": self.a_eps,
            "d_eps": self.d_eps,
            "energy": self.energy,
            "jump": self.jump,
            "log_kappa": self.log_kappa,
            "residuals": self.residuals,
        }
        if self.shooting is not None:
            out["shooting"] = self.shooting
        return out

    def diagnostics_json(self) -> str:
        return json.dumps(self.diagnostics(), indent=2)

    def to_csv(self, path) -> None:
        np.savetxt(path, np.column_stack([self.x, self.u, self.v]), delimiter=",",
                   header="x,u,v", comments="", fmt="%.17g")


def _panels(edges: np.ndarray, dens):
    """Gauss-Legendre panels over ``edges`` in a parameter ``p``.

    ``dens(p)`` returns a dict of node arrays including ``dxdp``.  Returns
    the node dict, node weights in ``p`` and the within-panel cumulative
    integral of ``dxdp`` at the nodes.
    """
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    p = (0.5 * (a + b))[:, None] + half[:, None] * _GL_X[None, :]
    vals = dens(p)
    wt = half[:, None] * _GL_W[None, :]
    cum = half[:, None] * (vals["dxdp"] @ _GL_S.T)
    return vals, wt, cum


def build_pair(
    problem: ShootingProblem,
    shot: ShootingResult | float | None = None,
    n_points: int = 2000,
    check: bool = True,
) -> CriticalPointPair:
    """Sample the critical pair for a shooting root and evaluate its integrals.

    Parameters
    ----------
    problem : ShootingProblem
    shot : ShootingResult, float or None
        Shooting result, an explicit ``m`` below ``m_hat`` (the pair then
        lives on ``[0, 2 half_width(m)]``), or ``None`` to shoot first.
    n_points : int
        Approximate number of samples on ``[0, L]``.
    check : bool
        Evaluate invariant residuals.
    """
    eps, c = problem.eps, problem.c
    shooting = None
    if shot is None:
        shot = shoot(problem)
    if isinstance(shot, ShootingResult):
        shooting = shot.to_dict()
        lam, m = shot.log_kappa, shot.m
    else:
        m = float(shot)
        kappa = i_eps(problem) - float(problem.K(m))
        if not kappa > 0:
            raise ValueError("m must lie below m_hat")
        lam = math.log(kappa)
    geo = _geometry(problem, lam, m=m)
    X = geo.half_width(eps)
    Lh = X  # half length actually covered by the profile
    s_e = problem.reg.s_eps
    span = s_e - m
    level = geo.Km
    ws, wc = problem.w_s, problem.w_cut
    floor = problem.delta1 + math.exp(lam)
    law = problem.law

    # --- scalar integrals by adaptive quadrature
    def seg_a(u, which):
        v = m + span * u * u
        d = float(problem.K(v)) - level
        if d <= 0:
            return 0.0
        jac = 2.0 * span * u / math.sqrt(d)
        fv = float(law(v))
        if which == "x":
            return eps * jac
        if which == "a":
            return c / (fv * fv) * jac
        return (c * c / (fv * fv) + (1 - v) ** 2 / 4.0 + d) * jac

    def seg_b(w, which):
        e = float(problem.defect(w))
        D = float(problem.D0(w)) + floor
        jac = 1.0 / math.sqrt(max(D, 1e-300))
        if which == "x":
            return eps * jac
        inv = 1.0 / (1.0 - e) ** 2
        if which == "a":
            return c * eps * inv * jac
        return (eps * c * c * inv + w * w / 4.0 + D) * jac

    xA, aA, eA = (_quad(seg_a, 0.0, 1.0, args=(k,)) for k in ("x", "a", "e"))
    if wc < ws:
        xB, aB, eB = (_quad(seg_b, wc, ws, args=(k,)) for k in ("x", "a", "e"))
    else:
        xB = aB = eB = 0.0
    x_tail = Lh - xA - xB
    tail_v_energy = wc * math.sqrt(floor + wc * wc / 4.0)
    a_eps = 2.0 * (aA + aB + c * x_tail)
    energy = 2.0 * (eA + eB + c * c * x_tail + tail_v_energy)
    d_eps = -c * c - floor / eps

    # --- panels for samples and the weak form
    nA = max(n_points // 4, 16)
    nB = max(n_points // 8, 8)
    nT = max(n_points // 8, 8)

    def dens_a(u):
        v = m + span * u * u
        d = np.maximum(problem.K(v) - level, 1e-300)
        sq = np.sqrt(d)
        fv = law(v)
        return {
            "dxdp": eps * 2.0 * span * u / sq,
            "v": v,
            "vp": sq / eps,
            "inv_fe2": 1.0 / (eps * fv * fv),
            "ffp": eps * fv * law.d1(v),
        }

    lr = math.log(wc / ws) if wc < ws else 0.0

    def dens_b(p):
        w = ws * np.exp(lr * p)
        e = problem.defect(w)
        D = np.maximum(problem.D0(w) + floor, 1e-300)
        sq = np.sqrt(D)
        return {
            "dxdp": eps * w * abs(lr) / sq,
            "v": 1.0 - w,
            "vp": sq / eps,
            "inv_fe2": 1.0 / (1.0 - e) ** 2,
            "ffp": (1.0 - e) * problem.defect_d1(w),
        }

    theta_end = x_tail / (2.0 * eps)
    half_lkp = 0.5 * geo.log_kp

    def dens_t(t):
        arg = np.maximum(geo.theta - t, 0.0)
        big = np.exp(half_lkp + arg)  # sqrt(kappa') e^{arg}
        w = big * (-np.expm1(-2.0 * arg))
        vp = 0.5 * big * (1.0 + np.exp(-2.0 * arg)) / eps
        e = problem.defect(w)
        ffp = (1.0 - e) * problem.defect_d1(w)
        return {
            "dxdp": 2.0 * eps * np.ones_like(t),
            "v": 1.0 - w,
            "vp": vp,
            "inv_fe2": 1.0 / (1.0 - e) ** 2,
            "ffp": ffp,
        }

    eA_edges = np.linspace(0.0, 1.0, nA + 1)
    eB_edges = np.linspace(0.0, 1.0, nB + 1)
    t_fine = min(theta_end, 40.0)
    eT_edges = np.linspace(0.0, t_fine, nT + 1)
    if theta_end > t_fine:
        eT_edges = np.concatenate([eT_edges, np.linspace(t_fine, theta_end, 9)[1:]])

    segs = [(eA_edges, dens_a), (eB_edges, dens_b), (eT_edges, dens_t)]
    xs, vs, vps, ups, ffps, invs, wts = [], [], [], [], [], [], []
    edge_x, edge_v, edge_vp, edge_u = [0.0], [m], [0.0], [0.0]
    x0, u0 = 0.0, 0.0
    for k, (edges, dens) in enumerate(segs):
        if k == 1 and not wc < ws:
            continue
        vals, wt, cum = _panels(edges, dens)
        dx = np.sum(wt * vals["dxdp"], axis=1)
        du = np.sum(wt * vals["dxdp"] * c * vals["inv_fe2"], axis=1)
        xe = x0 + np.concatenate([[0.0], np.cumsum(dx)])
        ue = u0 + np.concatenate([[0.0], np.cumsum(du)])
        xs.append((xe[:-1, None] + cum).ravel())
        vs.append(vals["v"].ravel())
        vps.append(vals["vp"].ravel())
        ups.append((c * vals["inv_fe2"]).ravel())
        ffps.append(vals["ffp"].ravel())
        invs.append(vals["inv_fe2"].ravel())
        wts.append((wt * vals["dxdp"]).ravel())
        ev = dens(edges[1:])
        edge_x.extend(xe[1:].tolist())
        edge_u.extend(ue[1:].tolist())
        edge_v.extend(np.asarray(ev["v"]).tolist())
        edge_vp.extend(np.asarray(ev["vp"]).tolist())
        x0, u0 = xe[-1], ue[-1]

    # right half, measured from the centre
    rx = np.array(edge_x)
    rv = np.array(edge_v)
    rvp = np.array(edge_vp)
    ru = np.array(edge_u)
    rv[-1] = 1.0  # the hit of v = 1 at the end of the tail
    centre = Lh
    nodes = _Nodes(
        x=centre + np.concatenate(xs), wt=np.concatenate(wts), v=np.concatenate(vs),
        vp=np.concatenate(vps), up=np.concatenate(ups), ffp=np.concatenate(ffps),
        inv_fe2=np.concatenate(invs),
    )
    half_a = 0.5 * a_eps
    x = np.concatenate([centre - rx[:0:-1], centre + rx])
    v = np.concatenate([rv[:0:-1], rv])
    vprime = np.concatenate([-rvp[:0:-1], rvp])
    u = np.concatenate([half_a - ru[:0:-1], half_a + ru])
    u_end_raw = float(u[-1])
    # boundary values are imposed exactly; the panel sums differ at round-off
    x[0], x[-1] = 0.0, 2.0 * Lh
    u[0], u[-1] = 0.0, a_eps

    pair = CriticalPointPair(
        problem=problem, eps=eps, c=c, L=2.0 * Lh, m=m, x=x, u=u, v=v, vprime=vprime,
        a_eps=a_eps, d_eps=d_eps, energy=energy, log_kappa=lam, shooting=shooting,
        nodes=nodes,
    )
    if check:
        fi = pair.first_integral()
        panel_a = 2.0 * float(np.sum(nodes.wt * nodes.up))
        panel_el = 2.0 * float(np.sum(nodes.wt * nodes.up**2 / nodes.inv_fe2))
        pair.residuals = {
            "half_width_residual": X - 0.5 * problem.L,
            "first_integral_max_rel": float(np.max(np.abs(fi - d_eps)) / abs(d_eps)),
            "energy_identity_rel": abs(panel_el - c * a_eps) / (c * a_eps),
            "a_eps_panel_rel": abs(panel_a - a_eps) / a_eps,
            "u_end_rel": abs(u_end_raw - a_eps) / a_eps,
            "v_min": float(v.min()),
            "v_max": float(v.max()),
            "weak_residual": pair.weak_residual(),
            "d_consistency": abs(float(problem.K(m)) / eps - d_eps) / abs(d_eps),
        }
    return pair


def elastic_pair(a: float, L: float, reg: RegularizedLaw, n_points: int = 2001) -> CriticalPointPair:
    """Pair ``u = (a/L) x``, ``v = 1``; every Euler-Lagrange residual vanishes."""
    if not a > 0:
        raise ValueError("a must be positive")
    x = np.linspace(0.0, L, n_points)
    slope = a / L
    pair = CriticalPointPair(
        problem=None, eps=reg.eps, c=slope, L=L, m=1.0, x=x, u=slope * x,
        v=np.ones_like(x), vprime=np.zeros_like(x), a_eps=a, d_eps=-slope * slope,
        energy=slope * slope * L,
    )
    fd = float(reg.d1(1.0))
    pair.residuals = {"el_residual_max": abs(float(reg(1.0)) * fd * slope**2)}
    return pair


def solve(problem: ShootingProblem, tol: float = 1e-10, n_points: int = 2000) -> CriticalPointPair:
    """Shoot and build the pair."""
    return build_pair(problem, shoot(problem, tol=tol), n_points=n_points)

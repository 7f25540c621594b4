"""The profile Cauchy problem ``y'' = h(y)``, ``y(0) = m``, ``y'(0) = 0``.

With ``fbar(s) = f'(s) / ((1-s) f(s)^3)`` the right-hand side is

    h(y) = (1-y)/4 * ((2 alpha)^2 fbar(y) - 1)

and the first integral reads ``y'^2 = Psi(y)`` with

    Psi(y) = A(y) - A(m),    A(y) = (1-y)^2/4 - alpha^2/f(y)^2.

Depending on the sign of ``(1-m) f(m) - 2 alpha`` a solution reaches 1 in
finite time, tends to 1 as ``t -> inf`` (heteroclinic), or oscillates
periodically.  For ``alpha >= sigma_c/2`` every solution reaches 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.integrate import quad
from scipy.integrate import solve_ivp as _scipy_solve_ivp
from scipy.optimize import brentq

from .errors import NumericalFailure
from .material_law import MaterialLaw

__all__ = [
    "Classification",
    "OdeParams",
    "ProfileSolution",
    "fbar",
    "h",
    "z_alpha",
    "classify",
    "psi_first_integral",
    "max_amplitude",
    "time_of_flight",
    "flight_time_lower_bound",
    "solve_ivp",
    "optimal_profile",
]

TIE_TOL = 1e-10
T_MAX_DEFAULT = 1e3


class Classification(str, enum.Enum):
    REACHES_ONE = "ReachesOne"
    HETEROCLINIC = "Heteroclinic"
    PERIODIC = "Periodic"
    SUPERCRITICAL_REACHES_ONE = "SupercriticalReachesOne"


@dataclass(frozen=True)
class OdeParams:
    """Parameters ``(law, alpha, m)`` of the Cauchy problem."""

    law: MaterialLaw
    alpha: float
    m: float

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")
        if not (0.0 < self.m < 1.0):
            raise ValueError(f"m must lie in (0, 1), got {self.m!r}")

    @property
    def subcritical(self) -> bool:
        return self.alpha < 0.5 * self.law.sigma_c


@dataclass
class ProfileSolution:
    """Sampled trajectory with classification and landmarks.

    Attributes
    ----------
    t, y, yp : ndarray
        Samples of time, ``y`` and ``y'``; ``t`` is strictly increasing.
    t0 : float or None
        First time with ``y = z_alpha`` (inflection).
    t1 : float or None
        Hitting time of 1.
    t2 : float or None
        Half period (first turning point) for periodic solutions.
    M : float or None
        Maximum amplitude for periodic solutions.
    opening : ndarray or None
        Companion variable integrated along optimal profiles.
    increment : float or None
        Total increment of ``opening`` over the whole line.
    """

    params: OdeParams
    classification: Classification
    t: np.ndarray
    y: np.ndarray
    yp: np.ndarray
    z_alpha: float | None
    t0: float | None = None
    t1: float | None = None
    t2: float | None = None
    M: float | None = None
    opening: np.ndarray | None = None
    increment: float | None = None
    message: str = ""
    interpolant: Any = field(default=None, repr=False)

    @property
    def samples(self) -> np.ndarray:
        return np.column_stack([self.t, self.y, self.yp])

    def first_integral_residual(self) -> np.ndarray:
        """``|y'^2 - Psi(y)|`` at every sample."""
        return np.abs(self.yp**2 - _psi(self.params, self.y))

    def first_integral_relative(self) -> float:
        """Largest residual scaled by ``max(1, max y'^2)``.

        For small ``m`` the slopes grow like ``alpha / f(m)`` and the
        integrator tolerance bounds the error of ``y'^2`` relative to its
        size, not absolutely.
        """
        scale = max(1.0, float(np.max(self.yp**2))) if self.yp.size else 1.0
        res = self.first_integral_residual()
        return float(res.max()) / scale if res.size else 0.0

    def mirrored(self) -> "ProfileSolution":
        """Even extension ``y(-t) = y(t)`` onto ``[-t_end, t_end]``."""
        t = np.concatenate([-self.t[:0:-1], self.t])
        y = np.concatenate([self.y[:0:-1], self.y])
        yp = np.concatenate([-self.yp[:0:-1], self.yp])
        op = None
        if self.opening is not None:
            op = np.concatenate([-self.opening[:0:-1], self.opening])
        return ProfileSolution(
            self.params, self.classification, t, y, yp, self.z_alpha,
            self.t0, self.t1, self.t2, self.M, op, self.increment, self.message,
        )

    def to_csv(self, path) -> None:
        header = "t,y,yprime"
        np.savetxt(path, self.samples, delimiter=",", header=header, comments="", fmt="%.17g")

    def phase_csv(self, path) -> None:
        np.savetxt(
            path, np.column_stack([self.y, self.yp]), delimiter=",",
            header="y,yprime", comments="", fmt="%.17g",
        )


# ---------------------------------------------------------------------------
# scalar functions


def fbar(law: MaterialLaw, s):
    """``f'(s) / ((1-s) f(s)^3)`` on ``(0, 1)``."""
    sa = np.asarray(s, dtype=float)
    if np.any((sa <= 0) | (sa >= 1)):
        raise ValueError("fbar is defined on the open interval (0, 1)")
    return _fbar(law, s)


def _fbar(law, s):
    fv = law(s)
    return law.d1(s) / ((1.0 - s) * fv * fv * fv)


def h(params: OdeParams, y):
    """Right-hand side ``h(y)``; extended linearly for ``y >= 1``."""
    y = np.asarray(y, dtype=float)
    four_a2 = 4.0 * params.alpha**2
    yc = np.clip(y, 1e-300, 1.0 - 1e-16)
    inside = (1.0 - y) / 4.0 * (four_a2 * _fbar(params.law, yc) - 1.0)
    outside = (1.0 - y) / 4.0 * (four_a2 / params.law.sigma_c**2 - 1.0)
    out = np.where(y < 1.0, inside, outside)
    return out if out.ndim else float(out)


def z_alpha(law: MaterialLaw, alpha: float) -> float:
    """Unique root of ``fbar(z) = 1/(2 alpha)^2`` for ``0 < alpha < sigma_c/2``."""
    if not (0.0 < alpha < 0.5 * law.sigma_c):
        raise ValueError(f"alpha must lie in (0, sigma_c/2), got {alpha!r}")
    target = math.log(1.0 / (2.0 * alpha) ** 2)

    def res(z):
        return math.log(float(_fbar(law, z))) - target

    lo, hi = 1e-12, 1.0 - 1e-15
    if res(hi) >= 0:
        # alpha so close to sigma_c/2 that z rounds to 1
        return hi
    z = brentq(res, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    if not float(law.stress(z)) > 2.0 * alpha:
        raise NumericalFailure(f"(1-z) f(z) <= 2 alpha at z={z}")
    return z


def classify(params: OdeParams) -> Classification:
    """Case of the Cauchy problem from the sign of ``(1-m) f(m) - 2 alpha``."""
    if not params.subcritical:
        return Classification.SUPERCRITICAL_REACHES_ONE
    delta = float(params.law.stress(params.m)) - 2.0 * params.alpha
    if abs(delta) < TIE_TOL:
        return Classification.HETEROCLINIC
    return Classification.REACHES_ONE if delta < 0 else Classification.PERIODIC


def _A(params, y):
    fv = params.law(y)
    return (1.0 - y) ** 2 / 4.0 - params.alpha**2 / (fv * fv)


def _psi(params, y):
    y = np.asarray(y, dtype=float)
    with np.errstate(all="ignore"):
        out = np.where(y < 1.0, _A(params, np.minimum(y, 1 - 1e-16)), 0.0) - _A(params, params.m)
    return out if out.ndim else float(out)


def psi_first_integral(params: OdeParams, y):
    """``Psi(y)`` such that ``y'^2 = Psi(y)`` along the solution; ``Psi(m) = 0``.

    ``y = 1`` is allowed and gives the limit value.
    """
    ya = np.asarray(y, dtype=float)
    if np.any(ya > 1.0) or np.any(ya <= 0.0):
        raise ValueError("y must lie in (0, 1]")
    if _increasing_start(params) and np.any(ya < params.m):
        raise ValueError("y must not be below m")
    return _psi(params, y)


def _increasing_start(params) -> bool:
    return float(h(params, params.m)) >= 0.0


def max_amplitude(params: OdeParams) -> float:
    """Maximum ``M`` of a periodic solution.

    ``M`` is the root in ``(z_alpha, 1)`` of ``A(M) = A(m)``.  If ``m``
    already lies above ``z_alpha`` the solution starts at its maximum and
    ``M = m``.
    """
    if classify(params) is not Classification.PERIODIC:
        raise ValueError("max_amplitude requires periodic parameters")
    z = z_alpha(params.law, params.alpha)
    if params.m >= z:
        return params.m
    am = float(_A(params, params.m))
    M = brentq(lambda y: float(_A(params, y)) - am, z, 1.0 - 1e-15, xtol=1e-15, rtol=1e-15)
    return M


def time_of_flight(params: OdeParams, eta: float, cap: float = T_MAX_DEFAULT) -> float:
    """First time ``t_eta`` with ``y(t_eta) = eta``.

    Computed as ``int_m^eta ds / sqrt(Psi(s))`` after the substitution
    ``s = m + (eta-m) u^2`` (or ``s = m + (M-m)(3u^2 - 2u^3)`` when ``eta``
    is the turning point ``M``), which makes the integrand smooth.

    Returns ``inf`` when the time exceeds ``cap`` or the solution only
    reaches ``eta`` asymptotically.
    """
    m = params.m
    if eta == m:
        return 0.0
    if not (m < eta <= 1.0):
        raise ValueError(f"eta must lie in (m, 1], got {eta!r}")
    if not _increasing_start(params):
        raise ValueError("the solution decreases from m; eta > m is never reached")
    cls = classify(params)
    both_ends = False
    if cls is Classification.HETEROCLINIC and eta >= 1.0:
        return math.inf
    if cls is Classification.PERIODIC:
        M = max_amplitude(params)
        if eta > M * (1 + 1e-14):
            raise ValueError(f"eta={eta} exceeds the maximum amplitude M={M}")
        if abs(eta - M) <= 1e-12:
            eta, both_ends = M, True
    span = eta - m

    if both_ends:
        def integrand(u):
            s = m + span * (3 * u * u - 2 * u**3)
            ps = _psi(params, s)
            return 6.0 * span * u * (1 - u) / math.sqrt(ps) if ps > 0 else 0.0
    else:
        def integrand(u):
            s = m + span * u * u
            ps = _psi(params, s)
            return 2.0 * span * u / math.sqrt(ps) if ps > 0 else 0.0

    val, err = quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=1e-12, limit=400)
    if not math.isfinite(val) or val > cap:
        return math.inf
    return val


def flight_time_lower_bound(params: OdeParams, eta: float) -> float:
    """``log((1 - z + C) / (1 - eta + C))`` with ``C = |1 - (2 alpha/((1-m) f(m)))^2|^{1/2}``.

    Valid lower bound for ``t_eta`` when ``alpha < sigma_c/2``.
    """
    z = z_alpha(params.law, params.alpha)
    ratio = 2.0 * params.alpha / float(params.law.stress(params.m))
    C = math.sqrt(abs(1.0 - ratio * ratio))
    return math.log((1.0 - z + C) / (1.0 - eta + C))


# ---------------------------------------------------------------------------
# integration


def solve_ivp(
    params: OdeParams,
    t_max: float = T_MAX_DEFAULT,
    tol: float = 1e-10,
    eta: float | None = None,
    n_samples: int | None = None,
    method: str = "DOP853",
) -> ProfileSolution:
    """Integrate the Cauchy problem with event detection.

    Integration stops at ``t_max`` or when ``y`` reaches 1.  Events record
    ``y = z_alpha`` (``t0``), ``y = 1`` (``t1``), the first turning point
    (``t2``, ``M``) and optionally ``y = eta`` (``message`` and
    ``interpolant`` give access to it).

    Parameters
    ----------
    params : OdeParams
    t_max : float
    tol : float
        Relative and absolute tolerance of the integrator.
    eta : float, optional
        Extra level whose first crossing time is stored in ``t_eta`` of the
        returned ``message``.
    n_samples : int, optional
        If given, samples are taken on a uniform grid from the dense output
        instead of the integrator steps.
    method : str
        Any explicit scipy integrator.
    """
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    cls = classify(params)
    z = z_alpha(params.law, params.alpha) if params.subcritical else None
    up = _increasing_start(params)

    def rhs(t, Y):
        return [Y[1], h(params, Y[0])]

    events = []

    def ev_one(t, Y):
        return Y[0] - 1.0

    ev_one.terminal = True
    ev_one.direction = 1
    events.append(ev_one)

    def ev_turn(t, Y):
        return Y[1]

    ev_turn.terminal = False
    ev_turn.direction = -1 if up else 1
    events.append(ev_turn)
    if z is not None:
        def ev_z(t, Y):
            return Y[0] - z

        events.append(ev_z)
    if eta is not None:
        def ev_eta(t, Y):
            return Y[0] - eta

        events.append(ev_eta)

    sol = _scipy_solve_ivp(
        rhs, (0.0, t_max), [params.m, 0.0], method=method, rtol=tol, atol=tol,
        events=events, dense_output=True,
    )
    if sol.status == -1:
        raise NumericalFailure(f"integration failed at t={sol.t[-1]}: {sol.message}")
    te = sol.t_events
    t1 = float(te[0][0]) if len(te[0]) else None
    t2 = float(te[1][0]) if len(te[1]) else None
    M = float(sol.y_events[1][0][0]) if len(te[1]) else None
    if cls is not Classification.PERIODIC:
        t2, M = None, None
    elif M is not None and not up:
        # started at the maximum; the first turning point is the minimum
        M = params.m
    idx = 2
    t0 = None
    if z is not None:
        t0 = float(te[idx][0]) if len(te[idx]) else None
        idx += 1
    msg = sol.message
    if eta is not None:
        t_eta = float(te[idx][0]) if len(te[idx]) else math.inf
        msg = f"t_eta={t_eta!r}"

    interp = sol.sol
    if t1 is not None and len(sol.t) >= 2:
        # the last step straddles y = 1 where h switches to its extension;
        # redo it on the smooth side up to the event time
        last = _scipy_solve_ivp(
            rhs, (sol.t[-2], t1), sol.y[:, -2], method=method, rtol=tol, atol=tol,
            dense_output=True,
        )
        sol.y[:, -1] = last.y[:, -1]
        interp = _spliced(sol.sol, last.sol, float(sol.t[-2]), t1)

    if n_samples is not None:
        t = np.linspace(0.0, sol.t[-1], int(n_samples))
        Y = interp(t)
        y, yp = Y[0], Y[1]
    else:
        t, y, yp = sol.t, sol.y[0], sol.y[1]
    return ProfileSolution(
        params=params, classification=cls, t=np.asarray(t), y=np.asarray(y),
        yp=np.asarray(yp), z_alpha=z, t0=t0, t1=t1, t2=t2, M=M, message=msg,
        interpolant=interp,
    )


def _spliced(old, new, t_split, t_end):
    """Dense output using ``new`` on ``[t_split, t_end]`` and ``old`` before."""

    def interp(tt):
        tt = np.asarray(tt, dtype=float)
        return np.where(tt < t_split, old(tt), new(np.clip(tt, t_split, t_end)))

    return interp


def optimal_profile(
    law: MaterialLaw,
    m: float,
    half_width: float = 25.0,
    n_samples: int = 2001,
    tol: float = 1e-12,
) -> ProfileSolution:
    """Heteroclinic profile with ``alpha = (1-m) f(m) / 2`` and its opening.

    Integrates ``(y, y', A)`` with ``A' = alpha / f(y)^2`` from ``t = 0``.
    The equilibrium ``y = 1`` is a saddle, so integration stops once
    ``1 - y < 1e-7`` and the remainder of ``[0, half_width]`` is filled
    with the linearised decay ``1 - y ~ exp(-sqrt(k) t)``,
    ``k = (1 - (2 alpha/sigma_c)^2)/4``.  ``increment`` is the total change
    of the opening over the whole line, tail included.
    """
    if not (0.0 < m < 1.0):
        raise ValueError("m must lie in (0, 1)")
    alpha = 0.5 * float(law.stress(m))
    params = OdeParams(law, alpha, m)
    sig = law.sigma_c
    k = (1.0 - (2.0 * alpha / sig) ** 2) / 4.0
    rk = math.sqrt(k)
    stop_gap = 1e-7

    def rhs(t, Y):
        y = Y[0]
        fy = float(law(min(y, 1.0 - 1e-16)))
        return [Y[1], h(params, y), alpha / (fy * fy)]

    def ev_close(t, Y):
        return 1.0 - Y[0] - stop_gap

    ev_close.terminal = True
    ev_close.direction = -1

    def ev_turn(t, Y):
        return Y[1]

    ev_turn.terminal = True
    ev_turn.direction = -1

    sol = _scipy_solve_ivp(
        rhs, (0.0, half_width), [m, 0.0, 0.0], method="DOP853", rtol=tol,
        atol=tol * 1e-2, events=[ev_close, ev_turn], dense_output=True,
    )
    if sol.status == -1:
        raise NumericalFailure(sol.message)
    t_end = float(sol.t[-1])
    y_end, yp_end, a_end = sol.y[:, -1]
    gap_end = 1.0 - y_end
    # linearised tail: 1 - y = gap_end exp(-rk (t - t_end)), f ~ sigma_c/(1-y)
    tail_total = alpha * gap_end**2 / (2.0 * rk * sig**2)

    t = np.linspace(0.0, half_width, int(n_samples))
    inside = t <= t_end
    Y = sol.sol(t[inside])
    tt = t[~inside] - t_end
    gap = gap_end * np.exp(-rk * tt)
    y = np.concatenate([Y[0], 1.0 - gap])
    yp = np.concatenate([Y[1], rk * gap])
    op = np.concatenate(
        [Y[2], a_end + alpha * gap_end**2 / (2.0 * rk * sig**2) * (1.0 - np.exp(-2 * rk * tt))]
    )
    z = z_alpha(law, alpha)
    t0 = None
    for i in range(1, len(t)):
        if y[i - 1] < z <= y[i]:
            t0 = float(brentq(lambda s: sol.sol(s)[0] - z, t[i - 1], min(t[i], t_end)))
            break
    return ProfileSolution(
        params=params, classification=Classification.HETEROCLINIC, t=t, y=y, yp=yp,
        z_alpha=z, t0=t0, opening=op, increment=2.0 * (a_end + tail_total),
        message=f"integrated to t={t_end!r}", interpolant=sol.sol,
    )

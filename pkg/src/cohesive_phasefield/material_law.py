"""Degradation laws f(s), their structural checks and the eps-regularisation.

A degradation law is a function ``f: [0, 1) -> [0, inf)`` entering the
phase-field energy through ``f(v)^2 |u'|^2``.  The two prototype families are

* ``PrototypeQ``: ``f(s) = sigma_c (1 - (1-s)^q) / (1-s)``, ``0 < q < 4``;
* ``PrototypeP``: ``f(s) = (sigma_c + p (1-s)) s^2 / (1-s)``,
  ``-sigma_c < p < 2 sigma_c``.

Both also expose ``stress(s) = (1-s) f(s)``, which is the bridging stress
carried across a crack opened to the level ``s`` and the quantity most of
the downstream computations need.  It is evaluated in closed form to avoid
the ``(1-s) * f(s)`` cancellation near ``s = 1``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import NumericalFailure

__all__ = [
    "MaterialLaw",
    "PrototypeQ",
    "PrototypeP",
    "CustomLaw",
    "CheckResult",
    "ValidationReport",
    "validate_assumptions",
    "RegularizedLaw",
    "regularize",
    "make_prototype_q",
    "make_prototype_p",
    "law_from_config",
]


class MaterialLaw:
    """Base class for degradation laws.

    Subclasses implement ``__call__``, ``d1``, ``d2`` and may override
    ``stress`` and ``stress_d1`` with cancellation-free forms.  All methods
    accept scalars or numpy arrays.
    """

    sigma_c: float

    def __call__(self, s):
        raise NotImplementedError

    def d1(self, s):
        raise NotImplementedError

    def d2(self, s):
        raise NotImplementedError

    def stress(self, s):
        """Bridging stress ``(1-s) f(s)``."""
        return (1.0 - s) * self(s)

    def stress_d1(self, s):
        """Derivative of ``(1-s) f(s)`` with respect to ``s``."""
        return (1.0 - s) * self.d1(s) - self(s)

    def stress_diff(self, t, m):
        """``(1-t) f(t) - (1-m) f(m)``."""
        return self.stress(t) - self.stress(m)

    def slope_at_zero(self) -> float:
        """``f'(0)``."""
        return float(self.d1(0.0))

    def expansion_exponent(self) -> float | None:
        """Exponent ``q`` in ``(1-s) f(s) = sigma_c - l (1-s)^q + ...`` near 1.

        ``None`` when the exponent is not known in closed form.
        """
        return None

    @property
    def family(self) -> str:
        return "custom"

    def to_config(self) -> dict:
        return {"family": self.family, "sigma_c": self.sigma_c}


def _check_sigma(sigma_c: float) -> None:
    if not (np.isfinite(sigma_c) and sigma_c > 0):
        raise ValueError(f"sigma_c must be positive and finite, got {sigma_c!r}")


@dataclass(frozen=True)
class PrototypeQ(MaterialLaw):
    """``f(s) = sigma_c (1 - (1-s)^q) / (1-s)``.

    For ``0 < q <= 2`` all structural assumptions hold.  Values
    ``2 < q < 4`` are accepted with a warning: the convexity of
    ``sqrt(s) f(1 - sqrt(s))`` fails there.
    """

    sigma_c: float = 1.0
    q: float = 1.0

    def __post_init__(self):
        _check_sigma(self.sigma_c)
        if not (0.0 < self.q < 4.0):
            raise ValueError(f"q must lie in (0, 4), got {self.q!r}")
        if self.q > 2.0:
            warnings.warn(
                f"q={self.q} > 2: sqrt(t) f(1 - sqrt(t)) is not convex for this law",
                stacklevel=3,
            )

    @property
    def family(self) -> str:
        return "prototype_q"

    @property
    def satisfies_convexity(self) -> bool:
        return self.q <= 2.0

    def _one_minus_wq(self, s):
        # 1 - (1-s)^q without cancellation for small s
        return -np.expm1(self.q * np.log1p(-s))

    def __call__(self, s):
        return self.sigma_c * self._one_minus_wq(s) / (1.0 - s)

    def d1(self, s):
        w = 1.0 - s
        return self.sigma_c * (1.0 + (self.q - 1.0) * w**self.q) / w**2

    def d2(self, s):
        w = 1.0 - s
        q = self.q
        return self.sigma_c * (2.0 + (q - 1.0) * (2.0 - q) * w**q) / w**3

    def stress(self, s):
        return self.sigma_c * self._one_minus_wq(s)

    def stress_d1(self, s):
        return self.sigma_c * self.q * (1.0 - s) ** (self.q - 1.0)

    def stress_diff(self, t, m):
        # (1-m)^q - (1-t)^q, written to keep relative accuracy near s = 1
        lm = self.q * np.log1p(-m)
        lt = self.q * np.log1p(-t)
        return -self.sigma_c * np.exp(lm) * np.expm1(lt - lm)

    def slope_at_zero(self) -> float:
        return self.q * self.sigma_c

    def expansion_exponent(self) -> float:
        return self.q

    def to_config(self) -> dict:
        return {"family": self.family, "sigma_c": self.sigma_c, "q": self.q}


@dataclass(frozen=True)
class PrototypeP(MaterialLaw):
    """``f(s) = (sigma_c + p (1-s)) s^2 / (1-s)`` with ``-sigma_c < p < 2 sigma_c``."""

    sigma_c: float = 1.0
    p: float = 0.0

    def __post_init__(self):
        _check_sigma(self.sigma_c)
        if not (-self.sigma_c < self.p < 2.0 * self.sigma_c):
            raise ValueError(
                f"p must lie in (-sigma_c, 2 sigma_c) = ({-self.sigma_c}, "
                f"{2 * self.sigma_c}), got {self.p!r}"
            )

    @property
    def family(self) -> str:
        return "prototype_p"

    def _num(self, s):
        return (self.sigma_c + self.p * (1.0 - s)) * s * s

    def _num_d1(self, s):
        return -self.p * s * s + 2.0 * s * (self.sigma_c + self.p * (1.0 - s))

    def _num_d2(self, s):
        return 2.0 * self.sigma_c + 2.0 * self.p - 6.0 * self.p * s

    def __call__(self, s):
        return self._num(s) / (1.0 - s)

    def d1(self, s):
        w = 1.0 - s
        return (self._num_d1(s) * w + self._num(s)) / w**2

    def d2(self, s):
        w = 1.0 - s
        pw = self._num_d1(s) * w + self._num(s)
        return (self._num_d2(s) * w**2 + 2.0 * pw) / w**3

    def stress(self, s):
        return self._num(s)

    def stress_d1(self, s):
        return self._num_d1(s)

    def stress_diff(self, t, m):
        # difference of (sigma_c + p w) (1-w)^2 in factored form
        d = t - m
        return d * (self.sigma_c * (t + m) + self.p * (t + m - (t * t + t * m + m * m)))

    def slope_at_zero(self) -> float:
        return 0.0

    def expansion_exponent(self) -> float:
        # (sigma_c + p w)(1-w)^2 = sigma_c - (2 sigma_c - p) w + O(w^2)
        return 1.0

    def to_config(self) -> dict:
        return {"family": self.family, "sigma_c": self.sigma_c, "p": self.p}


@dataclass(frozen=True, eq=False)
class CustomLaw(MaterialLaw):
    """User supplied law from three callables.

    The callables must accept numpy arrays.  Structural assumptions are not
    checked at construction; use :func:`validate_assumptions`.
    """

    sigma_c: float
    f: Callable
    f_d1: Callable
    f_d2: Callable
    name: str = "custom"

    def __post_init__(self):
        _check_sigma(self.sigma_c)

    def __call__(self, s):
        return self.f(s)

    def d1(self, s):
        return self.f_d1(s)

    def d2(self, s):
        return self.f_d2(s)

    def to_config(self) -> dict:
        return {"family": "custom", "sigma_c": self.sigma_c, "name": self.name}


# ---------------------------------------------------------------------------
# validation


@dataclass
class CheckResult:
    """Outcome of one structural check."""

    name: str
    passed: bool
    worst_value: float
    worst_location: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "worst_value": float(self.worst_value),
            "worst_location": float(self.worst_location),
            "detail": self.detail,
        }


@dataclass
class ValidationReport:
    """Per-assumption pass/fail with the worst violation found."""

    law: dict
    checks: dict[str, CheckResult] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    @property
    def failed(self) -> list[str]:
        return [k for k, c in self.checks.items() if not c.passed]

    def to_dict(self) -> dict:
        return {
            "law": self.law,
            "passed": self.passed,
            "checks": {k: c.to_dict() for k, c in self.checks.items()},
        }


def _aitken_limit(values: np.ndarray) -> float:
    """Extrapolate a sequence sampled on a geometric grid (ratio 1/2).

    Uses the last three terms.  The convergence rate is estimated from the
    data, which is Richardson extrapolation with an unknown order.
    """
    a, b, c = values[-3:]
    d1, d2 = b - a, c - b
    if d1 == 0.0 or d2 == 0.0:
        return float(c)
    rate = d2 / d1
    if not (0.0 < rate < 1.0):
        return float(c)
    return float(c + d2 * rate / (1.0 - rate))


def validate_assumptions(
    law: MaterialLaw, grid_size: int = 1000, tol: float = 1e-9
) -> ValidationReport:
    """Check the structural assumptions and the two endpoint limits on grids.

    Checks are keyed ``f1`` ... ``f6``: positivity with ``f(0) = 0``, the
    limit of ``(1-s) f``, monotonicity of ``(1-s) f``, monotonicity of
    ``(1-s) f'/f``, growth of ``[(1-s) f]'/(1-s)^3`` and convexity of
    ``sqrt(t) f(1 - sqrt(t))``.  ``limit_d1`` and ``limit_log_slope`` check
    ``(1-s)^2 f' -> sigma_c`` at 1 and ``f'/f -> inf`` at 0.

    Parameters
    ----------
    law : MaterialLaw
    grid_size : int
        Number of interior points of the uniform part of the grid; geometric
        refinements toward both endpoints (ratio 1/2, 30 levels) are added.
    tol : float
        Tolerance on monotonicity and convexity checks.

    Returns
    -------
    ValidationReport
    """
    if grid_size < 100:
        raise ValueError("grid_size must be at least 100")
    sig = law.sigma_c
    k = np.arange(1, 31)
    geo = 2.0 ** (-k.astype(float))
    s = np.unique(np.concatenate([np.linspace(0, 1, grid_size + 2)[1:-1], geo, 1 - geo]))
    s = s[(s > 0) & (s < 1)]
    rep = ValidationReport(law=law.to_config())

    with np.errstate(all="ignore"):
        fv = np.asarray(law(s), dtype=float)
        f0 = float(law(0.0))
        bad = ~(fv > 0) | ~np.isfinite(fv)
        worst = float(np.min(fv)) if fv.size else 0.0
        rep.checks["f1"] = CheckResult(
            "f1",
            abs(f0) <= 1e-14 and not bad.any(),
            min(worst, -abs(f0)) if abs(f0) > 1e-14 else worst,
            float(s[np.argmin(fv)]),
            f"f(0)={f0:.3e}; f>0 on (0,1)",
        )

        # (f2): (1-s) f -> sigma_c
        wk = 2.0 ** (-np.arange(10, 31, dtype=float))
        lim = _aitken_limit(np.asarray(law.stress(1 - wk), dtype=float))
        err = abs(lim - sig)
        rep.checks["f2"] = CheckResult(
            "f2", err <= 1e-6 * sig, err, 1.0, f"extrapolated limit {lim:.12g}"
        )

        # (f3): (1-s) f strictly increasing
        phi = np.asarray(law.stress(s), dtype=float)
        dphi = np.diff(phi)
        i = int(np.argmin(dphi))
        rep.checks["f3"] = CheckResult(
            "f3", bool(dphi[i] >= -tol), float(dphi[i]), float(s[i]), "min increment"
        )

        # (f4): (1-s) f'/f decreasing
        r = (1 - s) * np.asarray(law.d1(s), dtype=float) / fv
        dr = np.diff(r) / np.maximum(1.0, np.abs(r[:-1]))
        i = int(np.argmax(dr))
        rep.checks["f4"] = CheckResult(
            "f4", bool(dr[i] <= tol), float(dr[i]), float(s[i]), "max relative increment"
        )

        # (f5): [(1-s) f]' / (1-s)^3 -> +inf at 1, judged by a positive
        # power-law growth exponent over the geometric endpoint grid
        tail = 1 - geo[-20:]
        et = np.asarray(law.stress_d1(tail), dtype=float) / (1 - tail) ** 3
        growth = float(np.polyfit(np.log(1 / (1 - tail)), np.log(et), 1)[0])
        rising = bool(np.all(np.diff(et[-10:]) > 0))
        rep.checks["f5"] = CheckResult(
            "f5",
            bool(rising and growth > 1e-3),
            growth,
            float(tail[-1]),
            f"growth exponent at 1: {growth:.4g}",
        )

        # (f6): sqrt(t) f(1 - sqrt(t)) convex on (0, 1)
        t = np.linspace(0, 1, grid_size + 2)[1:-1]
        h = np.sqrt(t) * np.asarray(law(1 - np.sqrt(t)), dtype=float)
        d2h = h[:-2] - 2 * h[1:-1] + h[2:]
        i = int(np.argmin(d2h))
        rep.checks["f6"] = CheckResult(
            "f6", bool(d2h[i] >= -tol), float(d2h[i]), float(t[i + 1]), "min second difference"
        )

        # (1-s)^2 f'(s) -> sigma_c
        lim = _aitken_limit(np.asarray(wk**2 * law.d1(1 - wk), dtype=float))
        err = abs(lim - sig)
        rep.checks["limit_d1"] = CheckResult(
            "limit_d1", err <= 1e-6 * sig, err, 1.0, f"extrapolated limit {lim:.12g}"
        )

        # f'/f -> inf at 0
        sk = geo
        ratio = np.asarray(law.d1(sk), dtype=float) / np.asarray(law(sk), dtype=float)
        mono = np.all(np.diff(ratio[::-1]) <= 0)  # ratio grows as s decreases
        slope = np.polyfit(np.log(1 / sk[-20:]), np.log(ratio[-20:]), 1)[0]
        rep.checks["limit_log_slope"] = CheckResult(
            "limit_log_slope",
            bool(mono and slope > 0.5),
            float(ratio[-1]),
            float(sk[-1]),
            f"growth exponent of f'/f at 0: {slope:.4g}",
        )
    return rep


# ---------------------------------------------------------------------------
# eps-regularisation


@dataclass(frozen=True)
class RegularizedLaw:
    """The eps-regularised law ``f_eps``.

    ``f_eps = sqrt(eps) f`` on ``[0, s_eps]`` and
    ``f_eps = 1 - alpha exp(-beta / (1-s))`` on ``(s_eps, 1]``, with
    ``alpha`` and ``beta`` making ``f_eps`` continuously differentiable at
    ``s_eps``.  ``alpha`` overflows for small ``eps``, so its logarithm is
    stored.  Outside ``[0, 1]`` the law is extended by ``sqrt(eps) f'(0) s``
    for ``s < 0`` and by 1 for ``s > 1``.
    """

    base: MaterialLaw
    eps: float
    s_eps: float
    beta: float
    log_alpha: float

    @property
    def alpha(self) -> float:
        return math.exp(self.log_alpha) if self.log_alpha < 709.0 else math.inf

    @property
    def sqrt_eps(self) -> float:
        return math.sqrt(self.eps)

    def junction_defect(self, s):
        """``exp(log alpha - beta/(1-s))``, i.e. ``1 - f_eps(s)`` for ``s > s_eps``."""
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            ex = self.log_alpha - self.beta / (1.0 - s)
        return np.exp(np.minimum(ex, 0.0))

    def excess(self, s):
        """``1/f_eps(s)^2 - 1`` for ``s > s_eps``, free of cancellation."""
        e = self.junction_defect(s)
        return e * (2.0 - e) / (1.0 - e) ** 2

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        se = self.sqrt_eps
        with np.errstate(all="ignore"):
            low = se * self.base.slope_at_zero() * s
            mid = se * self.base(np.clip(s, 0.0, self.s_eps))
            high = 1.0 - self.junction_defect(np.clip(s, self.s_eps, 1.0))
        out = np.where(s < 0, low, np.where(s <= self.s_eps, mid, np.where(s < 1, high, 1.0)))
        return out if out.ndim else float(out)

    def d1(self, s):
        s = np.asarray(s, dtype=float)
        se = self.sqrt_eps
        with np.errstate(all="ignore"):
            low = se * self.base.slope_at_zero() * np.ones_like(s)
            mid = se * self.base.d1(np.clip(s, 0.0, self.s_eps))
            w = np.maximum(1.0 - np.clip(s, self.s_eps, 1.0), 1e-300)
            high = self.junction_defect(np.clip(s, self.s_eps, 1.0)) * self.beta / w**2
        out = np.where(s < 0, low, np.where(s <= self.s_eps, mid, np.where(s < 1, high, 0.0)))
        return out if out.ndim else float(out)


def regularize(law: MaterialLaw, eps: float) -> RegularizedLaw:
    """Build ``f_eps`` for ``0 < eps < 1``.

    ``s_eps`` solves ``sqrt(eps) f(s_eps) = 1 - sqrt(eps)``.

    Raises
    ------
    ValueError
        If ``eps`` is outside ``(0, 1)``.
    NumericalFailure
        If the matching conditions cannot be solved or give ``beta <= 0``.
    """
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must lie in (0, 1), got {eps!r}")
    se = math.sqrt(eps)
    target = 1.0 - se

    def res(s):
        return se * float(law(s)) - target

    lo, hi = 1e-14, 1.0 - 1e-15
    if not (res(lo) < 0 < res(hi)):
        raise NumericalFailure(f"cannot bracket s_eps for eps={eps}")
    s_eps = brentq(res, lo, hi, xtol=1e-16, rtol=1e-15, maxiter=500)
    w = 1.0 - s_eps
    gap = 1.0 - se * float(law(s_eps))
    if gap <= 0:
        raise NumericalFailure("sqrt(eps) f(s_eps) >= 1")
    beta = se * float(law.d1(s_eps)) * w * w / gap
    if not (beta > 0 and np.isfinite(beta)):
        raise NumericalFailure(f"invalid beta={beta} for eps={eps}")
    log_alpha = math.log(gap) + beta / w
    return RegularizedLaw(base=law, eps=eps, s_eps=s_eps, beta=beta, log_alpha=log_alpha)


def make_prototype_q(sigma_c: float = 1.0, q: float = 1.0) -> PrototypeQ:
    """``f_q(s) = sigma_c (1 - (1-s)^q) / (1-s)``."""
    return PrototypeQ(sigma_c=float(sigma_c), q=float(q))


def make_prototype_p(sigma_c: float = 1.0, p: float = 0.0) -> PrototypeP:
    """``f^p(s) = (sigma_c + p (1-s)) s^2 / (1-s)``."""
    return PrototypeP(sigma_c=float(sigma_c), p=float(p))


def law_from_config(cfg: dict) -> MaterialLaw:
    """Build a prototype law from a ``{"family", "sigma_c", "q"|"p"}`` mapping."""
    fam = cfg.get("family", "prototype_q")
    sig = float(cfg.get("sigma_c", 1.0))
    if fam == "prototype_q":
        return PrototypeQ(sigma_c=sig, q=float(cfg.get("q", 1.0)))
    if fam == "prototype_p":
        return PrototypeP(sigma_c=sig, p=float(cfg.get("p", 0.0)))
    raise ValueError(f"unknown law family {fam!r}")

"""Sharp cohesive model on a bar ``[0, L]`` with prescribed elongation ``a``.

The energy of a piecewise affine displacement with constant slope and a
finite set of jumps (boundary jumps included) is

    Phi(u) = L phi(u') + sum_j g([u](x_j)),

with ``phi(xi) = xi^2`` for ``|xi| <= sigma_c/2`` and
``sigma_c |xi| - sigma_c^2/4`` beyond.  Critical points are elastic,
pre-fractured (``k`` equal jumps ``s0`` with ``g'(s0) = sigma`` and slope
``sigma/2``) or fractured (stress free, every jump at least ``s_frac``).
"""

from __future__ import annotations

import enum
import functools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import cohesive_law as cl
from .material_law import MaterialLaw

__all__ = [
    "phi",
    "SbvFunction",
    "Kind",
    "SharpCriticalPoint",
    "energy_Phi",
    "enumerate_critical_points",
    "NucleationReport",
    "nucleation_classifier",
]


def phi(sigma_c: float, xi):
    """Elastic energy density, quadratic up to ``sigma_c/2`` and linear beyond."""
    xi = np.asarray(xi, dtype=float)
    ax = np.abs(xi)
    out = np.where(ax <= 0.5 * sigma_c, xi * xi, sigma_c * ax - 0.25 * sigma_c**2)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SbvFunction:
    """Piecewise affine displacement with constant slope and jumps.

    ``u(0-) = 0``; ``jumps`` holds ``(x, amplitude)`` pairs with ``x`` in
    ``[0, L]``, boundary jumps sitting at ``x = 0`` or ``x = L``.
    """

    length: float
    slope: float
    jumps: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("length must be positive")
        for x, _ in self.jumps:
            if not (0.0 <= x <= self.length):
                raise ValueError(f"jump location {x} outside [0, L]")

    @property
    def admissible(self) -> bool:
        """No interpenetration: every jump amplitude is positive."""
        return all(amp > 0 for _, amp in self.jumps)

    @property
    def elongation(self) -> float:
        return self.slope * self.length + sum(amp for _, amp in self.jumps)

    def __call__(self, x):
        """Right-continuous values ``u(x)``."""
        x = np.asarray(x, dtype=float)
        u = self.slope * x
        for xj, amp in self.jumps:
            u = u + amp * (x >= xj)
        return u

    def polyline(self) -> np.ndarray:
        """Vertices ``(x, u)`` of the graph, jumps as vertical segments."""
        pts = [(0.0, 0.0)]
        u = 0.0
        xprev = 0.0
        for xj, amp in sorted(self.jumps):
            u += self.slope * (xj - xprev)
            pts.append((xj, u))
            u += amp
            pts.append((xj, u))
            xprev = xj
        u += self.slope * (self.length - xprev)
        pts.append((self.length, u))
        return np.array(pts)

    def to_csv(self, path) -> None:
        np.savetxt(path, self.polyline(), delimiter=",", header="x,u", comments="", fmt="%.17g")


class Kind(str, enum.Enum):
    ELASTIC = "Elastic"
    PREFRACTURED = "PreFractured"
    FRACTURED = "Fractured"


@dataclass
class SharpCriticalPoint:
    kind: Kind
    sigma: float
    k: int
    u: SbvFunction
    energy: float
    s0: float | None = None
    m: float | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "sigma": self.sigma,
            "k": self.k,
            "s0": self.s0,
            "m": self.m,
            "slope": self.u.slope,
            "jumps": [list(j) for j in self.u.jumps],
            "energy": self.energy,
        }


def energy_Phi(law: MaterialLaw, u: SbvFunction) -> float:
    """``L phi(u') + sum g([u])``; ``inf`` if a jump amplitude is negative."""
    if any(amp < 0 for _, amp in u.jumps):
        return math.inf
    e = phi(law.sigma_c, u.slope) * u.length
    return float(e + sum(cl.g(law, amp) for _, amp in u.jumps if amp > 0))


def _jump_locations(L: float, k: int) -> list[float]:
    return [L * j / (k + 1) for j in range(1, k + 1)]


@functools.lru_cache(maxsize=64)
def _scan_grid(law: MaterialLaw, n: int = 512) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    j = np.arange(n)
    mg = 0.5 * (1.0 - np.cos(np.pi * (j + 0.5) / n))
    ends = 10.0 ** -np.arange(2, 9, dtype=float)
    mg = np.unique(np.concatenate([mg, ends, 1.0 - ends]))
    sv = np.array([cl.s_of_m(law, float(m)) for m in mg])
    return mg, sv, np.asarray(law.stress(mg), dtype=float)


def _prefractured_roots(law, a, L, k, n_grid):
    mg, sv, ph = _scan_grid(law, n_grid)
    rho = ph * L / 2.0 + k * sv - a

    def res(m):
        return float(law.stress(m)) * L / 2.0 + k * cl.s_of_m(law, float(m)) - a

    roots = []
    for i in range(len(mg) - 1):
        r0, r1 = rho[i], rho[i + 1]
        if r0 == 0.0:
            roots.append(float(mg[i]))
        elif r0 * r1 < 0:
            roots.append(brentq(res, float(mg[i]), float(mg[i + 1]), xtol=1e-15, rtol=1e-15))
    if rho[-1] == 0.0:
        roots.append(float(mg[-1]))
    return roots


def enumerate_critical_points(
    law: MaterialLaw, a: float, L: float = 1.0, k_max: int = 1, n_grid: int = 512
) -> list[SharpCriticalPoint]:
    """All elastic, pre-fractured and fractured critical points with ``k <= k_max``.

    Pre-fractured states solve ``(1-m) f(m) L/2 + k s(m) = a`` in ``m``;
    every root found by a sign-change scan is refined and reported.
    Fractured states are represented by ``k`` equal jumps ``a/k``.
    """
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if not (a > 0 and L > 0):
        raise ValueError("a and L must be positive")
    sig = law.sigma_c
    out = []
    slope = a / L
    u = SbvFunction(L, slope)
    out.append(
        SharpCriticalPoint(Kind.ELASTIC, min(2.0 * slope, sig), 0, u, phi(sig, slope) * L)
    )
    sfrac = cl.s_frac(law)
    for k in range(1, k_max + 1):
        for m in _prefractured_roots(law, a, L, k, n_grid):
            sigma = float(law.stress(m))
            s0 = cl.s_of_m(law, m)
            jumps = tuple((x, s0) for x in _jump_locations(L, k))
            u = SbvFunction(L, sigma / 2.0, jumps)
            e = phi(sig, sigma / 2.0) * L + k * cl.g_of_m(law, m)
            out.append(SharpCriticalPoint(Kind.PREFRACTURED, sigma, k, u, e, s0=s0, m=m))
    if math.isfinite(sfrac):
        for k in range(1, k_max + 1):
            if a >= k * sfrac:
                jumps = tuple((x, a / k) for x in _jump_locations(L, k))
                out.append(
                    SharpCriticalPoint(
                        Kind.FRACTURED, 0.0, k, SbvFunction(L, 0.0, jumps), float(k), s0=a / k
                    )
                )
    return out


def critical_points_json(points: list[SharpCriticalPoint]) -> str:
    return json.dumps([p.to_dict() for p in points], indent=2)


@dataclass
class NucleationReport:
    """Whether a pre-fractured branch with vanishing jump leaves ``a = sigma_c L/2``."""

    p: float
    p_fitted: float
    verdict: str
    message: str
    branch: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "p_fitted": self.p_fitted,
            "verdict": self.verdict,
            "message": self.message,
            "branch": self.branch,
        }


def nucleation_classifier(
    law: MaterialLaw, L: float = 1.0, deltas=(1e-1, 1e-2, 1e-3)
) -> NucleationReport:
    """Classify jump nucleation by the exponent ``p`` of ``sigma_c s - g(s) ~ s^p``.

    ``p > 2``: a branch with vanishing jump exists; ``p < 2``: it fails and
    the jump nucleates with positive amplitude; ``p = 2``: the outcome
    depends on ``L``.  The exact exponent is used when the law provides
    its expansion exponent, the fitted one otherwise.  The ``k = 1`` branch
    is traced at ``a = sigma_c L/2 (1 + delta)``.
    """
    fit = cl.asymptotic_exponent(law)
    p = fit.p_expected if fit.p_expected is not None else fit.p
    band = 1e-9 if fit.p_expected is not None else 0.05 * 2.0
    if abs(p - 2.0) <= band:
        verdict = "size-dependent"
        msg = "size effect: depends on L, fails for sufficiently large L"
    elif p > 2.0:
        verdict = "exists"
        msg = "a pre-fractured branch with vanishing jump exists"
    else:
        verdict = "fails"
        msg = "fails: jump nucleates with positive amplitude"
    branch = []
    a0 = 0.5 * law.sigma_c * L
    for d in deltas:
        a = a0 * (1.0 + d)
        s0s = [c.s0 for c in enumerate_critical_points(law, a, L, 1) if c.kind is Kind.PREFRACTURED]
        branch.append({"delta": d, "a": a, "s0": sorted(s0s)})
    return NucleationReport(p=p, p_fitted=fit.p, verdict=verdict, message=msg, branch=branch)

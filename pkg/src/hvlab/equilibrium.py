"""Interior equilibrium, local and global stability, boundedness, Hopf point."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, NoEquilibriumError, NoHopfPointError, ParameterError
from .model import Params, State

__all__ = [
    "StabilityReport",
    "BoundsReport",
    "GlobalStabilityReport",
    "HopfResult",
    "CLASSIFICATIONS",
    "interior_equilibrium",
    "characteristic_coefficients",
    "classify_local",
    "check_global_stability",
    "check_boundedness",
    "hopf_function",
    "find_hopf_points",
    "hopf_point",
    "lyapunov_value",
]

CLASSIFICATIONS = ("stable-node", "stable-focus", "unstable-node", "unstable-focus", "marginal")


def _x_star(params: Params) -> float:
    return params.e / params.d - params.a


def interior_equilibrium(params: Params) -> State:
    """Closed-form coexistence equilibrium ``(x*, y*)``.

    Raises
    ------
    NoEquilibriumError
        If ``e/d - a`` does not lie strictly inside (0, 1).
    """
    xs = _x_star(params)
    if not 0.0 < xs < 1.0:
        raise NoEquilibriumError(
            f"no interior equilibrium: x* = e/d - a = {xs:.6g} is outside (0, 1)"
        )
    ys = (1.0 - xs) * (xs**params.p + params.c) / params.m
    return State(xs, ys)


def characteristic_coefficients(params: Params) -> tuple[float, float]:
    """Coefficients ``(P1, P2)`` of ``lambda**2 - P1 lambda + P2 = 0``."""
    xs, ys = interior_equilibrium(params)
    m, c, d, e, p = params.m, params.c, params.d, params.e, params.p
    xp = xs**p
    den = xp + c
    P1 = m * p * xp * ys / den**2 - xs
    P2 = (m * xs / den) * (d * d * ys * ys / e)
    return P1, P2


@dataclass(frozen=True)
class StabilityReport:
    equilibrium: State
    P1: float
    P2: float
    eigenvalues: tuple[complex, complex]
    classification: str
    hopf_eligible: bool

    def __post_init__(self):
        if self.classification not in CLASSIFICATIONS:
            raise ParameterError(f"unknown classification {self.classification!r}")
        for lam in self.eigenvalues:
            residual = abs(lam * lam - self.P1 * lam + self.P2)
            if residual > 1e-10 * max(1.0, abs(self.P1) ** 2, abs(self.P2)):
                raise ParameterError(f"eigenvalue {lam} does not solve the characteristic equation")

    @property
    def stable(self) -> bool:
        return self.classification.startswith("stable")

    def to_dict(self) -> dict:
        return {
            "equilibrium": {"x": self.equilibrium.x, "y": self.equilibrium.y},
            "P1": self.P1,
            "P2": self.P2,
            "eigenvalues": [{"re": lam.real, "im": lam.imag} for lam in self.eigenvalues],
            "classification": self.classification,
            "hopf_eligible": self.hopf_eligible,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StabilityReport":
        eq = data["equilibrium"]
        return cls(
            equilibrium=State(float(eq["x"]), float(eq["y"])),
            P1=float(data["P1"]),
            P2=float(data["P2"]),
            eigenvalues=tuple(complex(v["re"], v["im"]) for v in data["eigenvalues"]),
            classification=data["classification"],
            hopf_eligible=bool(data["hopf_eligible"]),
        )


def classify_local(params: Params) -> StabilityReport:
    """Linear stability of the interior equilibrium.

    ``|P1| < 1e-9 * max(1, x*)`` is reported as ``"marginal"``.
    """
    eq = interior_equilibrium(params)
    P1, P2 = characteristic_coefficients(params)
    disc = P1 * P1 - 4.0 * P2
    root = cmath.sqrt(disc)
    lam1 = (P1 + root) / 2.0
    lam2 = (P1 - root) / 2.0
    # Vieta form for the smaller-magnitude real root avoids cancellation
    if disc >= 0 and P1 != 0:
        big = (P1 + math.copysign(math.sqrt(disc), P1)) / 2.0
        lam1, lam2 = complex(big), complex(P2 / big)
        if lam1.real < lam2.real:
            lam1, lam2 = lam2, lam1
    if abs(P1) < 1e-9 * max(1.0, abs(eq.x)):
        kind = "marginal"
    else:
        shape = "focus" if disc < 0 else "node"
        kind = f"{'stable' if P1 < 0 else 'unstable'}-{shape}"
    return StabilityReport(
        equilibrium=eq,
        P1=P1,
        P2=P2,
        eigenvalues=(lam1, lam2),
        classification=kind,
        hopf_eligible=bool(disc < 0),
    )


def _float_or_nan(v) -> float:
    # JSON stores nan as null
    return math.nan if v is None else float(v)


@dataclass(frozen=True)
class GlobalStabilityReport:
    """Left-hand sides of the two sufficient conditions for global stability.

    ``degenerate`` is set when ``(1-d)(1+a) - d <= 0``; the first condition
    is then not meaningful as a positive bound even though ``lhs1`` is
    still evaluated as written (``nan`` when the denominator is exactly 0).
    """

    lhs1: float
    lhs2: float
    cond1: bool
    cond2: bool
    degenerate: bool

    def __post_init__(self):
        if self.cond1 != (self.lhs1 > 0) or self.cond2 != (self.lhs2 > 0):
            raise ParameterError("condition flags disagree with the evaluated left-hand sides")

    @property
    def holds(self) -> bool:
        return self.cond1 and self.cond2 and not self.degenerate

    def to_dict(self) -> dict:
        return {
            "lhs1": self.lhs1,
            "lhs2": self.lhs2,
            "cond1": self.cond1,
            "cond2": self.cond2,
            "degenerate": self.degenerate,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GlobalStabilityReport":
        return cls(
            lhs1=_float_or_nan(data["lhs1"]),
            lhs2=_float_or_nan(data["lhs2"]),
            cond1=bool(data["cond1"]),
            cond2=bool(data["cond2"]),
            degenerate=bool(data["degenerate"]),
        )


def check_global_stability(params: Params) -> GlobalStabilityReport:
    xs, ys = interior_equilibrium(params)
    m, c, d, e, a, p = params.m, params.c, params.d, params.e, params.a, params.p
    xp = xs**p
    denom = (1.0 - d) * (1.0 + a) - d
    lhs1 = ys / xp - (1.0 + a) / denom if denom != 0 else math.nan
    cross = c * m / ((1.0 + c) * (xp + c)) - e * ys / (a * (xs + a))
    lhs2 = d * xs / a - 0.25 * cross**2
    return GlobalStabilityReport(
        lhs1=lhs1,
        lhs2=lhs2,
        cond1=bool(lhs1 > 0),
        cond2=bool(lhs2 > 0),
        degenerate=bool(denom <= 0),
    )


@dataclass(frozen=True)
class BoundsReport:
    """Upper bounds, asymptotic lower bounds and the two sufficient conditions for boundedness.

    ``cond_d`` is evaluated as written; at the equilibrium its left side is
    identically zero, so it always holds.
    """

    M1: float
    M2: float
    m1x: float
    m2y: float
    mu: float
    cond_mu: bool
    cond_d: bool
    bounds_valid: bool

    def __post_init__(self):
        if self.M1 != 1.0:
            raise ParameterError("M1 is 1 by construction")

    @property
    def conditions_hold(self) -> bool:
        return self.cond_mu and self.cond_d

    def to_dict(self) -> dict:
        return {
            "M1": self.M1,
            "M2": self.M2,
            "m1x": self.m1x,
            "m2y": self.m2y,
            "mu": self.mu,
            "cond_mu": self.cond_mu,
            "cond_d": self.cond_d,
            "bounds_valid": self.bounds_valid,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BoundsReport":
        return cls(**{k: (bool(v) if isinstance(v, bool) else float(v)) for k, v in data.items()})


def check_boundedness(params: Params) -> BoundsReport:
    xs, ys = interior_equilibrium(params)
    m, c, d, e, a, p = params.m, params.c, params.d, params.e, params.a, params.p
    mu = min(m, e)
    cond_mu = mu < d * xs / (xs**p + c)
    cond_d = d - e / (xs + a) < (d / m) * (xs / ys) ** 2
    M2 = d * (1.0 + mu) / (m * mu)
    m1x = 1.0 - m * M2 / (1.0 + c)
    denom = (1.0 - d) * (1.0 + a) - d
    m2y = (1.0 + a) / denom if denom != 0 else math.nan
    bounds_valid = bool(m1x > 0 and denom > 0 and m2y > 0)
    return BoundsReport(
        M1=1.0,
        M2=M2,
        m1x=m1x,
        m2y=m2y,
        mu=mu,
        cond_mu=bool(cond_mu),
        cond_d=bool(cond_d),
        bounds_valid=bounds_valid,
    )


def hopf_function(params: Params, p: float) -> float:
    """``g(p) = p(1 - x*) - x* - c x*^(1-p)``; its roots are where ``P1 = 0``.

    Only ``m, c, d, e, a`` of ``params`` are used.
    """
    xs = _x_star(params)
    return p * (1.0 - xs) - xs - params.c * xs ** (1.0 - p)


def _hopf_derivative(params: Params, p: float) -> float:
    xs = _x_star(params)
    return (1.0 - xs) + params.c * xs ** (1.0 - p) * math.log(xs)


@dataclass(frozen=True)
class HopfResult:
    """Roots of the Hopf condition in ``p``; ``p1`` is the first one."""

    p1: float
    roots: tuple[float, ...]
    brackets: tuple[tuple[float, float], ...]
    residual: float
    g_at_endpoints: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "p1": self.p1,
            "roots": list(self.roots),
            "brackets": [list(b) for b in self.brackets],
            "residual": self.residual,
            "g_at_endpoints": list(self.g_at_endpoints),
        }


def _bisect(g, lo, hi, glo, tol=1e-15, max_iter=200):
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0.0:
            return mid
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def find_hopf_points(params: Params, n_scan: int = 200) -> HopfResult:
    """Locate every sign change of :func:`hopf_function` on [0, 1].

    A uniform pre-scan of ``n_scan`` intervals brackets the roots, each of
    which is refined by bisection and polished with Newton steps that are
    only accepted while they stay inside the bracket.

    Raises
    ------
    NoEquilibriumError
        If ``x* = e/d - a`` is outside (0, 1).
    NoHopfPointError
        If no sign change is found.
    """
    xs = _x_star(params)
    if not 0.0 < xs < 1.0:
        raise NoEquilibriumError(f"no interior equilibrium: x* = {xs:.6g}")

    def g(p):
        return hopf_function(params, p)

    grid = np.linspace(0.0, 1.0, n_scan + 1)
    vals = [g(float(p)) for p in grid]
    roots, brackets = [], []
    for i in range(n_scan):
        lo, hi = float(grid[i]), float(grid[i + 1])
        glo, ghi = vals[i], vals[i + 1]
        if glo == 0.0:
            root = lo
        elif (glo < 0) != (ghi < 0) and ghi != 0.0:
            root = _bisect(g, lo, hi, glo)
            for _ in range(3):
                dg = _hopf_derivative(params, root)
                if dg == 0:
                    break
                cand = root - g(root) / dg
                if not lo <= cand <= hi or abs(g(cand)) >= abs(g(root)):
                    break
                root = cand
        else:
            continue
        roots.append(root)
        brackets.append((lo, hi))
    if vals[-1] == 0.0:
        roots.append(1.0)
        brackets.append((float(grid[-2]), 1.0))
    if not roots:
        raise NoHopfPointError(
            f"g(p) keeps one sign on [0, 1] (g(0)={vals[0]:.6g}, g(1)={vals[-1]:.6g})"
        )
    return HopfResult(
        p1=roots[0],
        roots=tuple(roots),
        brackets=tuple(brackets),
        residual=abs(g(roots[0])),
        g_at_endpoints=(vals[0], vals[-1]),
    )


def hopf_point(params: Params) -> float:
    """Hassell-Varley constant ``p1`` at which ``P1`` vanishes.

    ``params.p`` is ignored.
    """
    return find_hopf_points(params).p1


def lyapunov_value(params: Params, s) -> float:
    """Volterra-type Lyapunov function centred on the interior equilibrium.

    ``V = (x - x* - x* ln(x/x*)) + (y - y* - y* ln(y/y*))``
    """
    x, y = float(s[0]), float(s[1])
    if x <= 0 or y <= 0:
        raise DomainError(f"Lyapunov function needs x > 0 and y > 0, got ({x}, {y})")
    xs, ys = interior_equilibrium(params)
    return (x - xs - xs * math.log(x / xs)) + (y - ys - ys * math.log(y / ys))

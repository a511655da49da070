"""Hassell-Varley predator-prey model with a generalist predator.

Nondimensional system::

    dx/dt = x (1 - x) - m x y / (x**p + c)
    dy/dt = (d - e / (x + a)) y**2

and its indirectly controlled extension with a control variable ``xi``::

    dy/dt  = (d - e / (x + a - b xi)) y**2
    dxi/dt = phi(b1 x + b2 y - b3 xi)

All functions here are pure; parameter containers are frozen dataclasses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .exceptions import DomainError, ParameterError

__all__ = [
    "DimensionalParams",
    "Params",
    "State",
    "ControlParams",
    "ExtendedState",
    "AdmissibilityReport",
    "nondimensionalize",
    "dimensional_vector_field",
    "vector_field",
    "jacobian",
    "extended_vector_field",
    "extended_jacobian",
    "check_admissible",
    "sigma",
    "make_rhs",
    "make_extended_rhs",
]


def _check_positive(obj, names):
    for name in names:
        value = getattr(obj, name)
        if not (isinstance(value, (int, float, np.floating, np.integer)) and math.isfinite(value)):
            raise ParameterError(f"{name} must be a finite number, got {value!r}")
        if value <= 0:
            raise ParameterError(f"{name} must be strictly positive, got {value!r}")


def _check_exponent(p):
    if not (isinstance(p, (int, float, np.floating, np.integer)) and 0.0 <= p <= 1.0):
        raise ParameterError(f"Hassell-Varley constant p must lie in [0, 1], got {p!r}")


@dataclass(frozen=True)
class DimensionalParams:
    """Parameters of the dimensional model.

    Attributes
    ----------
    R : float
        Intrinsic prey growth rate.
    K : float
        Prey carrying capacity.
    M : float
        Maximum predation rate.
    C : float
        Environmental protection of the prey.
    D : float
        Predator reproduction rate (sexual reproduction).
    E : float
        Maximum predator death rate.
    A : float
        Alternative food available to the predator.
    p : float
        Hassell-Varley constant in [0, 1].
    """

    R: float
    K: float
    M: float
    C: float
    D: float
    E: float
    A: float
    p: float

    def __post_init__(self):
        _check_positive(self, ("R", "K", "M", "C", "D", "E", "A"))
        _check_exponent(self.p)


@dataclass(frozen=True)
class Params:
    """Dimensionless model constants ``(m, c, d, e, a, p)``."""

    m: float
    c: float
    d: float
    e: float
    a: float
    p: float

    def __post_init__(self):
        _check_positive(self, ("m", "c", "d", "e", "a"))
        _check_exponent(self.p)

    def with_p(self, p: float) -> "Params":
        return replace(self, p=p)

    def as_dict(self) -> dict:
        return {f.name: float(getattr(self, f.name)) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "Params":
        try:
            return cls(**{f.name: float(data[f.name]) for f in fields(cls)})
        except KeyError as exc:
            raise ParameterError(f"missing model parameter {exc.args[0]!r}") from None


class State(NamedTuple):
    """Nondimensional prey and predator densities."""

    x: float
    y: float


class ExtendedState(NamedTuple):
    """State of the controlled system: densities plus control variable."""

    x: float
    y: float
    xi: float


@dataclass(frozen=True)
class ControlParams:
    """Coupling ``b`` of the control into the predator food term, and the
    feedback coefficients of ``sigma = b1 x + b2 y - b3 xi``."""

    b: float
    b1: float
    b2: float
    b3: float

    def __post_init__(self):
        for name in ("b", "b1", "b2", "b3"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        if self.b < 0:
            raise ParameterError(f"b must be nonnegative, got {self.b!r}")
        if self.b3 <= 0:
            raise ParameterError(f"b3 must be strictly positive, got {self.b3!r}")

    def as_dict(self) -> dict:
        return {f.name: float(getattr(self, f.name)) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "ControlParams":
        try:
            return cls(**{f.name: float(data[f.name]) for f in fields(cls)})
        except KeyError as exc:
            raise ParameterError(f"missing control parameter {exc.args[0]!r}") from None


def nondimensionalize(dp: DimensionalParams) -> Params:
    """Map dimensional constants onto the dimensionless ones.

    Uses ``x = X/K``, ``y = Y/K`` and ``t = R T``.
    """
    K, p = dp.K, dp.p
    return Params(
        m=dp.M / (dp.R * K ** (p - 1.0)),
        c=dp.C / K**p,
        d=dp.D * K / dp.R,
        e=dp.E / dp.R,
        a=dp.A / K,
        p=p,
    )


def dimensional_vector_field(dp: DimensionalParams, X: float, Y: float) -> tuple[float, float]:
    """Right-hand side of the dimensional model at ``(X, Y)``."""
    dX = dp.R * X * (1.0 - X / dp.K) - dp.M * X * Y / (X**dp.p + dp.C)
    dY = (dp.D - dp.E / (X + dp.A)) * Y * Y
    return dX, dY


def _power(x: float, p: float) -> float:
    # 0.0 ** 0.0 == 1.0 in Python, which is the continuous p = 0 limit
    return x**p


def vector_field(params: Params, s: Sequence[float]) -> tuple[float, float]:
    """Rates ``(dx/dt, dy/dt)`` of the nondimensional model at state ``s``."""
    x, y = float(s[0]), float(s[1])
    if x < 0 or y < 0:
        raise DomainError(f"state must lie in the closed positive quadrant, got ({x}, {y})")
    m, c, d, e, a, p = params.m, params.c, params.d, params.e, params.a, params.p
    dx = x * (1.0 - x) - m * x * y / (_power(x, p) + c)
    dy = (d - e / (x + a)) * y * y
    return dx, dy


def jacobian(params: Params, s: Sequence[float]) -> np.ndarray:
    """Analytic 2x2 Jacobian of :func:`vector_field` at a state with ``x > 0``."""
    x, y = float(s[0]), float(s[1])
    if x <= 0:
        raise DomainError(f"jacobian requires x > 0, got x={x}")
    m, c, d, e, a, p = params.m, params.c, params.d, params.e, params.a, params.p
    xp = x**p
    den = xp + c
    # d/dx [x / (x^p + c)] = (x^p + c - p x^p) / (x^p + c)^2
    j11 = 1.0 - 2.0 * x - m * y * (den - p * xp) / (den * den)
    j12 = -m * x / den
    j21 = e * y * y / (x + a) ** 2
    j22 = 2.0 * y * (d - e / (x + a))
    return np.array([[j11, j12], [j21, j22]])


def sigma(cp: ControlParams, s: Sequence[float]) -> float:
    """Feedback signal ``b1 x + b2 y - b3 xi``."""
    return cp.b1 * s[0] + cp.b2 * s[1] - cp.b3 * s[2]


def _identity(v):
    return v


def extended_vector_field(
    params: Params,
    cp: ControlParams,
    s: Sequence[float],
    phi: Callable[[float], float] = _identity,
) -> tuple[float, float, float]:
    """Rates of the controlled system at ``s = (x, y, xi)``.

    Raises
    ------
    DomainError
        If ``x + a - b xi <= 0``, where the predator death term is undefined.
    """
    x, y, xi = float(s[0]), float(s[1]), float(s[2])
    shifted = x + params.a - cp.b * xi
    if shifted <= 0:
        raise DomainError(f"x + a - b*xi must be positive, got {shifted}")
    m, c, d, e, p = params.m, params.c, params.d, params.e, params.p
    dx = x * (1.0 - x) - m * x * y / (_power(x, p) + c)
    dy = (d - e / shifted) * y * y
    dxi = float(phi(cp.b1 * x + cp.b2 * y - cp.b3 * xi))
    return dx, dy, dxi


def extended_jacobian(
    params: Params,
    cp: ControlParams,
    s: Sequence[float],
    phi_slope: float = 1.0,
) -> np.ndarray:
    """Analytic 3x3 Jacobian of the controlled system.

    ``phi_slope`` is ``phi'(sigma)`` at the state; it is 1 for the linear
    characteristic function.
    """
    x, y, xi = float(s[0]), float(s[1]), float(s[2])
    if x <= 0:
        raise DomainError(f"jacobian requires x > 0, got x={x}")
    shifted = x + params.a - cp.b * xi
    if shifted <= 0:
        raise DomainError(f"x + a - b*xi must be positive, got {shifted}")
    m, c, d, e, p = params.m, params.c, params.d, params.e, params.p
    xp = x**p
    den = xp + c
    j11 = 1.0 - 2.0 * x - m * y * (den - p * xp) / (den * den)
    j12 = -m * x / den
    q = e * y * y / shifted**2
    j21 = q
    j22 = 2.0 * y * (d - e / shifted)
    j23 = -cp.b * q
    return np.array(
        [
            [j11, j12, 0.0],
            [j21, j22, j23],
            [phi_slope * cp.b1, phi_slope * cp.b2, -phi_slope * cp.b3],
        ]
    )


@dataclass(frozen=True)
class AdmissibilityReport:
    """Grid-based check of the three admissibility criteria for ``phi``.

    ``divergent`` is a heuristic: a numerical grid cannot decide whether an
    improper integral diverges. It passes when the integral of ``phi`` over
    the outer half of each half-line keeps growing by at least
    ``growth_ratio_threshold`` times what it gained over the inner half.
    """

    continuous: bool
    zero_at_origin: bool
    sign_preserving: bool
    divergent: bool
    growth_ratio_pos: float
    growth_ratio_neg: float
    divergence_verdict: str = "heuristic"

    @property
    def admissible(self) -> bool:
        return self.continuous and self.zero_at_origin and self.sign_preserving and self.divergent


def check_admissible(
    phi: Callable[[float], float],
    grid: Sequence[float],
    *,
    atol: float = 1e-12,
    growth_ratio_threshold: float = 0.25,
) -> AdmissibilityReport:
    """Check a characteristic function against the admissibility criteria.

    Parameters
    ----------
    phi : callable
        Real-valued characteristic function of the feedback signal.
    grid : sequence of float
        Sample points; must contain 0 and points of both signs.
    atol : float
        Tolerance for ``phi(0) == 0``.
    growth_ratio_threshold : float
        Minimum ratio of outer-half to inner-half integral growth for the
        divergence proxy to pass. 0.25 separates ``1/sigma`` tails
        (divergent, ratio about 0.4 on symmetric grids) from ``1/sigma**2``
        tails (convergent, ratio about 0.1).
    """
    pts = np.unique(np.asarray(grid, dtype=float))
    if not (np.any(pts == 0.0) and np.any(pts < 0) and np.any(pts > 0)):
        raise ParameterError("grid must contain 0 and points of both signs")
    vals = np.array([float(phi(s)) for s in pts])

    finite = bool(np.all(np.isfinite(vals)))
    # jump test: neighbouring differences should not dwarf the typical scale
    if finite and len(vals) > 2:
        steps = np.abs(np.diff(vals))
        scale = max(np.max(np.abs(vals)), 1.0)
        continuous = bool(np.max(steps) <= 0.5 * scale)
    else:
        continuous = finite

    zero_val = vals[pts == 0.0][0]
    zero_at_origin = bool(abs(zero_val) <= atol)
    nonzero = pts != 0.0
    sign_preserving = bool(finite and np.all(pts[nonzero] * vals[nonzero] > 0))

    def growth_ratio(side):
        s = pts[side]
        v = vals[side]
        order = np.argsort(np.abs(s))
        s = np.abs(s[order])
        v = np.abs(v[order])
        s = np.concatenate(([0.0], s))
        v = np.concatenate(([abs(zero_val)], v))
        cum = np.concatenate(([0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(s))))
        half = s[-1] / 2.0
        inner = np.interp(half, s, cum)
        outer = cum[-1] - inner
        if inner <= 0:
            return 0.0
        return float(outer / inner)

    r_pos = growth_ratio(pts > 0) if finite else 0.0
    r_neg = growth_ratio(pts < 0) if finite else 0.0
    divergent = bool(r_pos >= growth_ratio_threshold and r_neg >= growth_ratio_threshold)
    return AdmissibilityReport(
        continuous=continuous,
        zero_at_origin=zero_at_origin,
        sign_preserving=sign_preserving,
        divergent=divergent,
        growth_ratio_pos=r_pos,
        growth_ratio_neg=r_neg,
    )


def make_rhs(params: Params) -> Callable[[float, np.ndarray], np.ndarray]:
    """``f(t, s)`` closure over :func:`vector_field` for the integrator.

    Skips the quadrant check; the integrator rejects steps that leave it.
    """
    m, c, d, e, a, p = params.m, params.c, params.d, params.e, params.a, params.p

    def f(t, s):
        x, y = s.tolist()
        return np.array([x * (1.0 - x) - m * x * y / (x**p + c), (d - e / (x + a)) * y * y])

    return f


def make_extended_rhs(
    params: Params,
    cp: ControlParams,
    phi: Callable[[float], float] = _identity,
) -> Callable[[float, np.ndarray], np.ndarray]:
    """``f(t, s)`` closure over :func:`extended_vector_field`."""

    def f(t, s):
        return np.array(extended_vector_field(params, cp, s.tolist(), phi))

    return f

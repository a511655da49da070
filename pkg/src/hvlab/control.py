"""Equilibrium and linear stability of the indirectly controlled system."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .equilibrium import interior_equilibrium
from .exceptions import DomainError, NoEquilibriumError, ParameterError
from .integrator import IntegratorConfig, Trajectory, integrate
from .model import (
    ControlParams,
    ExtendedState,
    Params,
    extended_jacobian,
    extended_vector_field,
    make_extended_rhs,
)

__all__ = [
    "ControlledStabilityReport",
    "controlled_equilibrium",
    "classify_controlled",
    "characteristic_cubic",
    "simulate_controlled",
]


@dataclass(frozen=True)
class ControlledStabilityReport:
    equilibrium: ExtendedState
    jacobian3: np.ndarray
    eigenvalues: tuple[complex, complex, complex]
    stable: bool
    char_poly: tuple[float, float, float, float]
    sigma: float

    def __post_init__(self):
        coeffs = np.asarray(self.char_poly)
        scale = float(np.max(np.abs(coeffs)))
        for lam in self.eigenvalues:
            if abs(np.polyval(coeffs, lam)) > 1e-10 * max(1.0, scale):
                raise ParameterError(f"{lam} is not a root of the characteristic cubic")
        if abs(self.sigma) > 1e-12:
            raise ParameterError(f"sigma = {self.sigma} is not zero at the equilibrium")
        if self.stable != bool(max(lam.real for lam in self.eigenvalues) < 0):
            raise ParameterError("stable flag disagrees with the eigenvalues")

    def to_dict(self) -> dict:
        eq = self.equilibrium
        return {
            "equilibrium": {"x": eq.x, "y": eq.y, "xi": eq.xi},
            "jacobian": self.jacobian3.tolist(),
            "eigenvalues": [{"re": lam.real, "im": lam.imag} for lam in self.eigenvalues],
            "stable": self.stable,
            "char_poly": list(self.char_poly),
            "sigma": self.sigma,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ControlledStabilityReport":
        eq = data["equilibrium"]
        return cls(
            equilibrium=ExtendedState(float(eq["x"]), float(eq["y"]), float(eq["xi"])),
            jacobian3=np.array(data["jacobian"], dtype=float),
            eigenvalues=tuple(complex(v["re"], v["im"]) for v in data["eigenvalues"]),
            stable=bool(data["stable"]),
            char_poly=tuple(float(v) for v in data["char_poly"]),
            sigma=float(data["sigma"]),
        )


def _stationarity(params: Params, cp: ControlParams, z: np.ndarray) -> np.ndarray:
    x, y, xi = z
    return np.array(
        [
            1.0 - x - params.m * y / (x**params.p + params.c),
            x + params.a - cp.b * xi - params.e / params.d,
            cp.b1 * x + cp.b2 * y - cp.b3 * xi,
        ]
    )


def _stationarity_jacobian(params: Params, cp: ControlParams, z: np.ndarray) -> np.ndarray:
    x, y, _ = z
    m, c, p = params.m, params.c, params.p
    den = x**p + c
    return np.array(
        [
            [-1.0 + m * y * p * x ** (p - 1.0) / den**2, -m / den, 0.0],
            [1.0, 0.0, -cp.b],
            [cp.b1, cp.b2, -cp.b3],
        ]
    )


def _admissible(params: Params, cp: ControlParams, z: np.ndarray) -> bool:
    x, y, xi = z
    return bool(np.all(np.isfinite(z)) and x > 0 and y > 0 and x + params.a - cp.b * xi > 0)


def _damped_newton(params, cp, z, tol=1e-14, max_iter=100):
    g = _stationarity(params, cp, z)
    for _ in range(max_iter):
        gnorm = np.max(np.abs(g))
        if gnorm < tol:
            return z
        try:
            step = np.linalg.solve(_stationarity_jacobian(params, cp, z), -g)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        while lam > 1e-10:
            cand = z + lam * step
            if _admissible(params, cp, cand):
                gc = _stationarity(params, cp, cand)
                if np.max(np.abs(gc)) < (1.0 - 1e-4 * lam) * gnorm:
                    z, g = cand, gc
                    break
            lam *= 0.5
        else:
            return z if np.max(np.abs(g)) < 1e-12 else None
    return z if np.max(np.abs(g)) < 1e-12 else None


def _seeds(params: Params, cp: ControlParams) -> list[np.ndarray]:
    try:
        xs, ys = interior_equilibrium(params)
    except NoEquilibriumError:
        xs = min(max(params.e / params.d - params.a, 0.05), 0.95)
        ys = (1.0 - xs) * (xs**params.p + params.c) / params.m
    xi = (cp.b1 * xs + cp.b2 * ys) / cp.b3
    base = np.array([xs, ys, xi])
    seeds = [base]
    for idx in (0, 2):
        for f in (1.1, 0.9):
            s = base.copy()
            s[idx] *= f
            seeds.append(s)
    return seeds


def controlled_equilibrium(params: Params, cp: ControlParams) -> ExtendedState:
    """Positive equilibrium of the controlled system with ``phi(sigma) = sigma``.

    Solves the prey nullcline, ``x + a - b xi = e/d`` and ``sigma = 0`` by
    damped Newton from the uncontrolled equilibrium and four seeds that
    perturb ``x`` and ``xi`` by 10%.

    Raises
    ------
    NoEquilibriumError
        If no seed converges to an admissible state.
    """
    for seed in _seeds(params, cp):
        if not _admissible(params, cp, seed):
            continue
        z = _damped_newton(params, cp, seed)
        if z is None or not _admissible(params, cp, z):
            continue
        try:
            resid = np.max(np.abs(extended_vector_field(params, cp, z)))
        except DomainError:
            continue
        if resid < 1e-12:
            return ExtendedState(float(z[0]), float(z[1]), float(z[2]))
    raise NoEquilibriumError("no positive controlled equilibrium found from any seed")


def characteristic_cubic(J: np.ndarray) -> tuple[float, float, float, float]:
    """Coefficients of ``det(lambda I - J)``, highest power first."""
    tr = float(np.trace(J))
    minors = float(
        J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        + J[0, 0] * J[2, 2] - J[0, 2] * J[2, 0]
        + J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1]
    )
    det = float(np.linalg.det(J))
    return (1.0, -tr, minors, -det)


def _polish(coeffs, lam, n=3):
    dcoeffs = np.polyder(coeffs)
    for _ in range(n):
        dv = np.polyval(dcoeffs, lam)
        if dv == 0:
            break
        new = lam - np.polyval(coeffs, lam) / dv
        if abs(np.polyval(coeffs, new)) >= abs(np.polyval(coeffs, lam)):
            break
        lam = new
    return complex(lam)


def classify_controlled(
    params: Params, cp: ControlParams, *, phi_slope: float = 1.0
) -> ControlledStabilityReport:
    """Linear stability of the controlled equilibrium.

    Eigenvalues are the roots of the characteristic cubic, found from its
    companion matrix and polished with Newton steps. ``phi_slope`` is
    ``phi'(0)`` for a nonlinear admissible characteristic function.
    """
    if not phi_slope > 0:
        raise ParameterError("phi'(0) must be positive for an admissible phi")
    eq = controlled_equilibrium(params, cp)
    J = extended_jacobian(params, cp, eq, phi_slope=phi_slope)
    coeffs = characteristic_cubic(J)
    roots = np.roots(coeffs)
    lams = sorted((_polish(np.asarray(coeffs), r) for r in roots), key=lambda z: (-z.real, -z.imag))
    return ControlledStabilityReport(
        equilibrium=eq,
        jacobian3=J,
        eigenvalues=tuple(lams),
        stable=bool(max(z.real for z in lams) < 0),
        char_poly=coeffs,
        sigma=float(cp.b1 * eq.x + cp.b2 * eq.y - cp.b3 * eq.xi),
    )


def simulate_controlled(
    params: Params,
    cp: ControlParams,
    s0,
    cfg: IntegratorConfig,
    phi: Optional[Callable[[float], float]] = None,
) -> Trajectory:
    """Integrate the controlled system; positivity is enforced on ``x, y`` only."""
    rhs = make_extended_rhs(params, cp) if phi is None else make_extended_rhs(params, cp, phi)
    return integrate(rhs, s0, cfg, n_monitored=2)

"""Adaptive Dormand-Prince 5(4) integration with positivity and blow-up guards."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .exceptions import DomainError, IncompleteTrajectoryError, IntegrationError, ParameterError

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "STATUSES",
    "integrate",
    "integrate_fixed",
    "sample_uniform",
]

STATUSES = ("completed", "blow-up", "step-underflow")

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# fifth-order weights minus embedded fourth-order weights
_E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 5.0
_BETA = 0.04
_ALPHA = 1.0 / 5.0 - 0.75 * _BETA

_AMAT = np.zeros((7, 7))
for _i, _row in enumerate(_A):
    _AMAT[_i, : len(_row)] = _row
_EVEC = np.array(_E)

Field = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class IntegratorConfig:
    """Step-control settings.

    ``t_end`` is measured from the start time of the integration.
    """

    t_end: float
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    h_init: float = 1e-3
    h_min: float = 1e-12
    h_max: float = 1.0
    blow_up_threshold: float = 1e6
    max_steps: int = 50_000_000

    def __post_init__(self):
        if not (math.isfinite(self.t_end) and self.t_end >= 0):
            raise ParameterError(f"t_end must be finite and nonnegative, got {self.t_end}")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ParameterError("tolerances must be positive")
        if not (0 < self.h_min <= self.h_init <= self.h_max):
            raise ParameterError("need 0 < h_min <= h_init <= h_max")
        if not self.blow_up_threshold > 1:
            raise ParameterError("blow_up_threshold must exceed 1")


@dataclass(frozen=True)
class Trajectory:
    """Accepted steps of an integration.

    ``derivs`` holds the field value at every stored state and drives the
    cubic Hermite dense output. ``t_end`` is the requested final time; for a
    completed run it equals ``times[-1]``.
    """

    times: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    status: str
    t_end: float

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ParameterError(f"unknown status {self.status!r}")
        if len(self.times) != len(self.states) or len(self.states) != len(self.derivs):
            raise ParameterError("times, states and derivs must have equal length")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ParameterError("times must be strictly increasing")
        for arr in (self.times, self.states, self.derivs):
            arr.flags.writeable = False

    @property
    def completed(self) -> bool:
        return self.status == "completed"

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def __len__(self):
        return len(self.times)

    def interpolate(self, t) -> np.ndarray:
        """Cubic Hermite dense output at time(s) ``t`` within the stored span."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        t0, t1 = self.times[0], self.times[-1]
        if np.any(t < t0 - 1e-12 * max(1.0, abs(t0))) or np.any(t > t1 + 1e-12 * max(1.0, abs(t1))):
            raise ValueError("interpolation time outside the integrated span")
        if len(self.times) == 1:
            return np.repeat(self.states[:1], len(t), axis=0)
        idx = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 2)
        ta = self.times[idx]
        h = (self.times[idx + 1] - ta)[:, None]
        s = ((t - ta)[:, None]) / h
        ya, yb = self.states[idx], self.states[idx + 1]
        fa, fb = self.derivs[idx], self.derivs[idx + 1]
        s2 = s * s
        s3 = s2 * s
        h00 = 2 * s3 - 3 * s2 + 1
        h10 = s3 - 2 * s2 + s
        h01 = -2 * s3 + 3 * s2
        h11 = s3 - s2
        return h00 * ya + h10 * h * fa + h01 * yb + h11 * h * fb


def _eval(field: Field, t: float, y: np.ndarray) -> Optional[np.ndarray]:
    try:
        k = np.asarray(field(t, y), dtype=float)
    except (DomainError, ZeroDivisionError, OverflowError):
        return None
    if not math.isfinite(k.sum()):
        return None
    return k


def integrate(
    field: Field,
    s0,
    cfg: IntegratorConfig,
    *,
    t0: float = 0.0,
    n_monitored: Optional[int] = None,
) -> Trajectory:
    """Integrate ``dy/dt = field(t, y)`` from ``t0`` to ``t0 + cfg.t_end``.

    Parameters
    ----------
    field : callable
        ``field(t, y) -> array`` of the same length as ``y``.
    s0 : array_like
        Initial state. The first ``n_monitored`` components must be
        strictly positive.
    cfg : IntegratorConfig
    t0 : float
        Start time.
    n_monitored : int, optional
        Number of leading components that must stay nonnegative and whose
        Euclidean norm is compared with ``cfg.blow_up_threshold``. All
        components by default.

    Returns
    -------
    Trajectory
        ``status`` is ``"blow-up"`` when the monitored norm passes the
        threshold, ``"step-underflow"`` when positivity or accuracy would
        require a step below ``cfg.h_min``.

    Notes
    -----
    A step whose stages or result leave the nonnegative orthant is rejected
    and retried at half the step size; states are never clipped.
    """
    y = np.array(s0, dtype=float)
    if y.ndim != 1:
        raise IntegrationError("initial state must be one-dimensional")
    n = len(y) if n_monitored is None else int(n_monitored)
    if not 0 <= n <= len(y):
        raise IntegrationError("n_monitored out of range")
    if not np.all(np.isfinite(y)):
        raise IntegrationError("initial state must be finite")
    if np.any(y[:n] <= 0):
        raise IntegrationError("monitored components of the initial state must be strictly positive")

    try:
        k1 = np.asarray(field(t0, y), dtype=float)
    except DomainError as exc:
        raise IntegrationError(f"field undefined at the initial state: {exc}") from exc
    if k1.shape != y.shape or not np.all(np.isfinite(k1)):
        raise IntegrationError("non-finite or misshaped field evaluation at the initial state")

    t = t0
    t_final = t0 + cfg.t_end
    times = [t]
    states = [y.copy()]
    derivs = [k1.copy()]
    status = "completed"

    if cfg.t_end == 0:
        return Trajectory(np.array(times), np.array(states), np.array(derivs), status, cfg.t_end)

    rtol, atol = cfg.rel_tol, cfg.abs_tol
    h = min(cfg.h_init, cfg.h_max, cfg.t_end)
    err_prev = 1e-4
    n_steps = 0
    K = np.empty((7, len(y)))

    while t < t_final:
        if n_steps >= cfg.max_steps:
            raise IntegrationError(f"exceeded max_steps={cfg.max_steps}")
        last = False
        if t + h >= t_final or (t_final - t - h) < 1e-12 * max(1.0, abs(t_final)):
            h = t_final - t
            last = True

        K[0] = k1
        ok = True
        for i in range(1, 7):
            yi = y + h * (_AMAT[i, :i] @ K[:i])
            if n and (yi[:n] < 0).any():
                ok = False
                break
            ki = _eval(field, t + _C[i] * h, yi)
            if ki is None:
                ok = False
                break
            K[i] = ki
        # the seventh stage is evaluated at the fifth-order solution (FSAL)
        if ok:
            y_new = yi
            if n and (y_new[:n] < 0).any():
                ok = False

        if not ok:
            h *= 0.5
            if h < cfg.h_min:
                status = "step-underflow"
                break
            continue

        err_vec = h * (_EVEC @ K)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        r = err_vec / scale
        err = math.sqrt(float(r @ r) / len(r))

        if err <= 1.0:
            n_steps += 1
            t = t_final if last else t + h
            y = y_new
            k1 = K[6].copy()
            times.append(t)
            states.append(y)
            derivs.append(k1)
            if n and float(np.linalg.norm(y[:n])) > cfg.blow_up_threshold:
                status = "blow-up"
                break
            err = max(err, 1e-10)
            fac = _SAFETY * err ** (-_ALPHA) * err_prev**_BETA
            fac = min(_FAC_MAX, max(_FAC_MIN, fac))
            err_prev = err
            h = min(h * fac, cfg.h_max)
        else:
            fac = max(_FAC_MIN, _SAFETY * err ** (-_ALPHA))
            h *= fac
            if h < cfg.h_min:
                status = "step-underflow"
                break

    return Trajectory(np.array(times), np.array(states), np.array(derivs), status, cfg.t_end)


def integrate_fixed(field: Field, s0, t_end: float, n_steps: int, *, t0: float = 0.0) -> np.ndarray:
    """Fixed-step fifth-order Dormand-Prince solution at ``t0 + t_end``.

    No error control or positivity monitoring; intended for convergence
    studies.
    """
    if n_steps < 1:
        raise ParameterError("n_steps must be at least 1")
    y = np.array(s0, dtype=float)
    h = t_end / n_steps
    t = t0
    ks = [None] * 7
    for _ in range(n_steps):
        ks[0] = np.asarray(field(t, y), dtype=float)
        for i in range(1, 7):
            yi = y.copy()
            for j, aij in enumerate(_A[i]):
                if aij:
                    yi += (h * aij) * ks[j]
            ks[i] = np.asarray(field(t + _C[i] * h, yi), dtype=float)
        y = yi
        t += h
    return y


def sample_uniform(traj: Trajectory, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Dense-output samples at ``t0, t0 + dt, t0 + 2 dt, ...``.

    Returns ``(times, states)`` with ``floor(t_end / dt) + 1`` rows.

    Raises
    ------
    IncompleteTrajectoryError
        If the trajectory did not complete.
    """
    if not dt > 0:
        raise ParameterError("dt must be positive")
    if not traj.completed:
        raise IncompleteTrajectoryError(f"cannot sample a trajectory with status {traj.status!r}")
    n = int(math.floor(traj.t_end / dt + 1e-9)) + 1
    t = traj.times[0] + dt * np.arange(n)
    t = np.minimum(t, traj.times[-1])
    return t, traj.interpolate(t)

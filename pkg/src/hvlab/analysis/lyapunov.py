"""Lyapunov exponents of the planar flow by tangent-space QR renormalisation."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..exceptions import IntegrationError, ParameterError
from ..integrator import IntegratorConfig, integrate
from ..model import Params, make_rhs

__all__ = ["LyapunovResult", "lyapunov_exponents", "variational_rhs"]


@dataclass(frozen=True)
class LyapunovResult:
    """Exponents in descending order, plus diagnostics.

    ``convergence_history`` has rows ``(t, lambda1_estimate, lambda2_estimate)``
    recorded at every renormalisation. ``mean_trace`` is the time average of
    the Jacobian trace over the same window, which must equal the exponent
    sum.
    """

    lambda1: float
    lambda2: float
    transient_discarded: float
    total_time: float
    convergence_history: np.ndarray
    mean_trace: float
    converged: bool
    final_state: tuple

    def __post_init__(self):
        if self.lambda1 < self.lambda2:
            raise ParameterError("exponents must be sorted in descending order")

    def to_dict(self) -> dict:
        return {
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "transient_discarded": self.transient_discarded,
            "total_time": self.total_time,
            "mean_trace": self.mean_trace,
            "converged": self.converged,
            "final_state": list(self.final_state),
        }


def variational_rhs(params: Params):
    """Flow, tangent frame and trace integral as one 7-component system.

    Layout: ``(x, y, Phi[0,0], Phi[1,0], Phi[0,1], Phi[1,1], int trace J dt)``.
    The Jacobian here repeats :func:`hvlab.model.jacobian` inline for speed;
    the tests hold the two in agreement.
    """
    m, c, d, e, a, p = params.m, params.c, params.d, params.e, params.a, params.p

    def f(t, s):
        x, y, u1, u2, v1, v2, _ = s.tolist()
        xp = x**p
        den = xp + c
        j11 = 1.0 - 2.0 * x - m * y * (den - p * xp) / (den * den)
        j12 = -m * x / den
        xa = x + a
        kappa = d - e / xa
        j21 = e * y * y / (xa * xa)
        j22 = 2.0 * y * kappa
        return np.array(
            [
                x * (1.0 - x) - m * x * y / den,
                kappa * y * y,
                j11 * u1 + j12 * u2,
                j21 * u1 + j22 * u2,
                j11 * v1 + j12 * v2,
                j21 * v1 + j22 * v2,
                j11 + j22,
            ]
        )

    return f


def lyapunov_exponents(
    params: Params,
    s0,
    total_time: float,
    transient: float,
    *,
    renorm_interval: float = 1.0,
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-12,
    drift_tol: float = 0.1,
    drift_floor: float = 1e-3,
) -> LyapunovResult:
    """Both Lyapunov exponents of the nondimensional model.

    The flow is first integrated over ``transient``; the tangent frame is
    then evolved with the variational equation and re-orthonormalised by QR
    every ``renorm_interval`` until ``total_time``. Exponents are the
    time-averaged logarithms of the diagonal of R.

    ``converged`` is false when either running estimate moves over the last
    quarter of the averaging window by more than ``drift_tol`` times its
    final magnitude, with ``drift_floor`` as an absolute allowance so that
    a zero exponent is not flagged for its O(1/T) wobble.

    Raises
    ------
    IntegrationError
        If the trajectory blows up or underflows.
    """
    s0 = np.asarray(s0, dtype=float)
    if s0.shape != (2,) or np.any(s0 <= 0):
        raise ParameterError("s0 must be a strictly positive 2-vector")
    if not (total_time > transient > 0):
        raise ParameterError("need total_time > transient > 0")
    if not renorm_interval > 0:
        raise ParameterError("renorm_interval must be positive")

    cfg = IntegratorConfig(t_end=transient, rel_tol=rel_tol, abs_tol=abs_tol)
    warm = integrate(make_rhs(params), s0, cfg)
    if not warm.completed:
        raise IntegrationError(f"transient integration ended with status {warm.status!r}")

    f = variational_rhs(params)
    state = np.concatenate([warm.final_state, [1.0, 0.0, 0.0, 1.0, 0.0]])
    window = total_time - transient
    n_intervals = max(1, int(math.ceil(window / renorm_interval - 1e-9)))
    sums = np.zeros(2)
    trace_sum = 0.0
    t = transient
    h = cfg.h_init
    history = np.empty((n_intervals, 3))
    for k in range(n_intervals):
        dt = min(renorm_interval, total_time - t)
        step_cfg = replace(cfg, t_end=dt, h_init=min(max(h, cfg.h_min), cfg.h_max))
        traj = integrate(f, state, step_cfg, t0=t, n_monitored=2)
        if not traj.completed:
            raise IntegrationError(f"variational integration ended with status {traj.status!r}")
        h = float(np.diff(traj.times).max())
        end = traj.final_state
        frame = np.array([[end[2], end[4]], [end[3], end[5]]])
        q, r = np.linalg.qr(frame)
        signs = np.sign(np.diag(r))
        signs[signs == 0] = 1.0
        q = q * signs
        diag = np.abs(np.diag(r))
        sums += np.log(diag)
        trace_sum += end[6]
        t += dt
        state = np.array([end[0], end[1], q[0, 0], q[1, 0], q[0, 1], q[1, 1], 0.0])
        history[k] = (t, *(sums / (t - transient)))

    elapsed = t - transient
    est = sums / elapsed
    lam1, lam2 = float(max(est)), float(min(est))
    quarter = history[int(0.75 * n_intervals) :, 1:]
    converged = True
    if len(quarter) > 1:
        drift = np.abs(quarter[-1] - quarter[0])
        allowed = drift_tol * np.abs(quarter[-1]) + drift_floor
        converged = bool(np.all(drift <= allowed))
    return LyapunovResult(
        lambda1=lam1,
        lambda2=lam2,
        transient_discarded=float(transient),
        total_time=float(total_time),
        convergence_history=history,
        mean_trace=trace_sum / elapsed,
        converged=converged,
        final_state=(float(state[0]), float(state[1])),
    )

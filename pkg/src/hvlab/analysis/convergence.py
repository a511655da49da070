"""Multi-initial-condition convergence runs toward the interior equilibrium."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..equilibrium import interior_equilibrium, lyapunov_value
from ..integrator import IntegratorConfig, Trajectory, integrate, sample_uniform
from ..model import Params, make_rhs

__all__ = ["ConvergenceRun", "ring_initial_conditions", "convergence_run", "convergence_runs"]


@dataclass(frozen=True)
class ConvergenceRun:
    initial_state: tuple
    final_distance: float
    max_v_increase: float
    v_non_increasing: bool
    x_max: float
    y_max: float
    status: str
    trajectory: Trajectory

    def to_dict(self) -> dict:
        return {
            "initial_state": list(self.initial_state),
            "final_distance": self.final_distance,
            "max_v_increase": self.max_v_increase,
            "v_non_increasing": self.v_non_increasing,
            "x_max": self.x_max,
            "y_max": self.y_max,
            "status": self.status,
        }


def ring_initial_conditions(
    params: Params,
    radius: float = 0.3,
    n_ring: int = 8,
    extra=((0.1, 0.1), (0.9, 0.9)),
    floor: float = 1e-3,
) -> list[tuple[float, float]]:
    """``n_ring`` points on a circle around the equilibrium, clipped into the
    open positive quadrant at ``floor``, followed by ``extra``."""
    xs, ys = interior_equilibrium(params)
    pts = []
    for k in range(n_ring):
        ang = 2.0 * math.pi * k / n_ring
        pts.append((max(xs + radius * math.cos(ang), floor), max(ys + radius * math.sin(ang), floor)))
    pts.extend(tuple(map(float, e)) for e in extra)
    return pts


def convergence_run(
    params: Params,
    s0,
    t_end: float = 1000.0,
    *,
    sample_dt: float = 0.1,
    slack: float = 1e-8,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-12,
) -> ConvergenceRun:
    """Integrate from ``s0`` and track the Lyapunov function along the way.

    V is checked on the stored steps and on a uniform grid of spacing
    ``sample_dt``; any rise larger than ``slack`` between consecutive
    samples breaks monotonicity.
    """
    xs, ys = interior_equilibrium(params)
    cfg = IntegratorConfig(t_end=t_end, rel_tol=rel_tol, abs_tol=abs_tol)
    traj = integrate(make_rhs(params), s0, cfg)
    if traj.completed:
        t_grid, st = sample_uniform(traj, sample_dt)
        t_all = np.concatenate([t_grid, traj.times])
        st_all = np.concatenate([st, traj.states])
        order = np.argsort(t_all, kind="stable")
        samples = st_all[order]
    else:
        samples = traj.states
    v = np.array([lyapunov_value(params, s) for s in samples])
    max_inc = float(np.max(np.diff(v))) if len(v) > 1 else 0.0
    final = traj.final_state
    return ConvergenceRun(
        initial_state=tuple(map(float, s0)),
        final_distance=float(math.hypot(final[0] - xs, final[1] - ys)),
        max_v_increase=max_inc,
        v_non_increasing=bool(max_inc <= slack),
        x_max=float(traj.states[:, 0].max()),
        y_max=float(traj.states[:, 1].max()),
        status=traj.status,
        trajectory=traj,
    )


def _run(args):
    params, s0, t_end = args
    return convergence_run(params, s0, t_end)


def convergence_runs(params: Params, ics, t_end: float = 1000.0, workers: int = 1) -> list[ConvergenceRun]:
    """Run :func:`convergence_run` for every initial condition, in input order."""
    jobs = [(params, ic, t_end) for ic in ics]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run, jobs))
    return [_run(j) for j in jobs]

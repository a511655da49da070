"""One-parameter sweep in the Hassell-Varley constant ``p``."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..exceptions import CycleUndecidedError, ParameterError
from ..integrator import IntegratorConfig, integrate
from ..model import Params, make_rhs
from .cycles import CycleReport, detect_limit_cycle

__all__ = ["SweepBranch", "REGIMES", "bifurcation_sweep", "sweep_point", "transition_p"]

REGIMES = ("fixed-point", "limit-cycle", "blow-up")


@dataclass(frozen=True)
class SweepBranch:
    """Attractor extrema of ``x`` and the regime tag at each ``p``."""

    p_values: np.ndarray
    attractor_min_x: np.ndarray
    attractor_max_x: np.ndarray
    regime: tuple

    def __post_init__(self):
        n = len(self.p_values)
        if not (len(self.attractor_min_x) == len(self.attractor_max_x) == len(self.regime) == n):
            raise ParameterError("sweep columns must have equal length")
        if np.any(self.attractor_min_x > self.attractor_max_x):
            raise ParameterError("attractor_min_x exceeds attractor_max_x")
        bad = set(self.regime) - set(REGIMES)
        if bad:
            raise ParameterError(f"unknown regime tags {bad}")

    def rows(self):
        return zip(self.p_values, self.attractor_min_x, self.attractor_max_x, self.regime)


def _envelope_decays(report: CycleReport) -> bool:
    heights = np.asarray(report.peak_heights)
    if len(heights) < 4:
        return True
    k = len(heights) // 3
    return np.ptp(heights[-k:]) < 0.9 * np.ptp(heights[:k]) if np.ptp(heights[:k]) > 0 else False


def sweep_point(
    params: Params,
    s0,
    transient: float,
    window: float,
    cfg: Optional[IntegratorConfig] = None,
    fixed_point_tol: float = 1e-5,
):
    """Integrate one parameter value; return ``(min_x, max_x, regime, final_state)``.

    An undecided post-transient oscillation is tagged by its envelope: a
    shrinking spread of peak heights counts as a (slowly approached) fixed
    point, anything else as a limit cycle.
    """
    total = transient + window
    cfg = IntegratorConfig(t_end=total, rel_tol=1e-9, abs_tol=1e-12) if cfg is None else cfg
    if cfg.t_end != total:
        raise ParameterError("cfg.t_end must equal transient + window")
    traj = integrate(make_rhs(params), s0, cfg, n_monitored=2)
    if not traj.completed:
        mask = traj.times >= transient
        xs = traj.states[mask, 0] if mask.any() else traj.states[:, 0]
        return float(xs.min()), float(xs.max()), "blow-up", None
    try:
        rep = detect_limit_cycle(traj, transient, fixed_point_tol=fixed_point_tol)
        regime = rep.kind
    except CycleUndecidedError as exc:
        rep = exc.report
        regime = "fixed-point" if _envelope_decays(rep) else "limit-cycle"
    return rep.x_min, rep.x_max, regime, traj.final_state.copy()


def _cold(args):
    params, s0, transient, window, cfg, tol = args
    return sweep_point(params, s0, transient, window, cfg, tol)[:3]


def bifurcation_sweep(
    base: Params,
    p_grid: Sequence[float],
    s0,
    transient: float,
    window: float,
    *,
    continuation: bool = True,
    workers: int = 1,
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-12,
    fixed_point_tol: float = 1e-5,
) -> SweepBranch:
    """Sweep ``p`` over ``p_grid`` with all other constants taken from ``base``.

    With ``continuation=True`` (sequential) each run starts from the final
    state of the previous one. With ``continuation=False`` every run starts
    from ``s0`` and runs may be spread over ``workers`` processes; results
    are returned in grid order either way.
    """
    p_grid = np.asarray(p_grid, dtype=float)
    if p_grid.ndim != 1 or len(p_grid) == 0:
        raise ParameterError("p_grid must be a non-empty 1-d sequence")
    if np.any(p_grid < 0) or np.any(p_grid > 1):
        raise ParameterError("p_grid must lie in [0, 1]")
    if not (transient >= 0 and window > 0):
        raise ParameterError("need transient >= 0 and window > 0")
    cfg = IntegratorConfig(t_end=transient + window, rel_tol=rel_tol, abs_tol=abs_tol)
    s0 = np.asarray(s0, dtype=float)

    if continuation:
        if workers > 1:
            raise ParameterError("continuation mode is sequential; use continuation=False for workers > 1")
        out = []
        seed = s0
        for p in p_grid:
            lo, hi, regime, final = sweep_point(
                base.with_p(float(p)), seed, transient, window, cfg, fixed_point_tol
            )
            out.append((lo, hi, regime))
            seed = final if final is not None else s0
    else:
        jobs = [(base.with_p(float(p)), s0, transient, window, cfg, fixed_point_tol) for p in p_grid]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                out = list(pool.map(_cold, jobs))
        else:
            out = [_cold(j) for j in jobs]

    return SweepBranch(
        p_values=p_grid,
        attractor_min_x=np.array([o[0] for o in out]),
        attractor_max_x=np.array([o[1] for o in out]),
        regime=tuple(o[2] for o in out),
    )


def transition_p(branch: SweepBranch) -> Optional[float]:
    """First ``p`` tagged limit-cycle that directly follows a fixed-point entry."""
    for i in range(1, len(branch.regime)):
        if branch.regime[i - 1] == "fixed-point" and branch.regime[i] == "limit-cycle":
            return float(branch.p_values[i])
    return None

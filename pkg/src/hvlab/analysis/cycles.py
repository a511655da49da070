"""Fixed-point versus limit-cycle detection from simulated prey series."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..exceptions import CycleUndecidedError, IncompleteTrajectoryError, ParameterError
from ..integrator import Trajectory

__all__ = ["CycleReport", "detect_limit_cycle", "classify_samples", "find_peaks"]


@dataclass(frozen=True)
class CycleReport:
    """Outcome of :func:`detect_limit_cycle`.

    ``kind`` is ``"fixed-point"``, ``"limit-cycle"`` or, on reports attached
    to :class:`CycleUndecidedError`, ``"undecided"``.
    """

    kind: str
    period: Optional[float]
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    peak_times: tuple = ()
    peak_heights: tuple = ()

    @property
    def frequency(self) -> Optional[float]:
        return None if not self.period else 1.0 / self.period

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "period": self.period,
            "x_min": self.x_min,
            "x_max": self.x_max,
            "y_min": self.y_min,
            "y_max": self.y_max,
            "n_peaks": len(self.peak_times),
        }


def find_peaks(t: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Local maxima of uniformly sampled ``x``, refined by a parabola through
    each maximum and its two neighbours."""
    if len(x) < 3:
        return np.empty(0), np.empty(0)
    mid = x[1:-1]
    idx = np.nonzero((mid > x[:-2]) & (mid >= x[2:]))[0] + 1
    if len(idx) == 0:
        return np.empty(0), np.empty(0)
    dt = t[1] - t[0]
    xm, x0, xp = x[idx - 1], x[idx], x[idx + 1]
    curv = xm - 2.0 * x0 + xp
    with np.errstate(divide="ignore", invalid="ignore"):
        shift = np.where(curv != 0, 0.5 * (xm - xp) / curv, 0.0)
    shift = np.clip(shift, -0.5, 0.5)
    times = t[idx] + shift * dt
    heights = x0 - 0.25 * (xm - xp) * shift
    return times, heights


def _consistent_run(values: np.ndarray, rtol: float, ref: float, need: int) -> int:
    """Length of the trailing run of values all within ``rtol * ref`` of their mean."""
    best = 0
    for start in range(len(values) - need, -1, -1):
        run = values[start:]
        if np.all(np.abs(run - run.mean()) <= rtol * ref):
            best = len(run)
        else:
            break
    return best


def classify_samples(
    t: np.ndarray,
    states: np.ndarray,
    *,
    fixed_point_tol: float = 1e-5,
    period_rtol: float = 0.01,
    height_rtol: float = 0.005,
    min_intervals: int = 5,
) -> CycleReport:
    """Classify uniformly sampled post-transient states.

    Peak heights are compared relative to the oscillation range of ``x``,
    so a slowly decaying spiral is not mistaken for a cycle.
    """
    t = np.asarray(t, dtype=float)
    states = np.asarray(states, dtype=float)
    x = states[:, 0]
    y = states[:, 1] if states.shape[1] > 1 else np.zeros_like(x)
    x_min, x_max = float(x.min()), float(x.max())
    y_min, y_max = float(y.min()), float(y.max())
    x_range = x_max - x_min
    if x_range < fixed_point_tol:
        return CycleReport("fixed-point", None, x_min, x_max, y_min, y_max)

    pt, ph = find_peaks(t, x)
    report = CycleReport("undecided", None, x_min, x_max, y_min, y_max, tuple(pt), tuple(ph))
    if len(pt) < min_intervals + 1:
        raise CycleUndecidedError(
            f"only {len(pt)} maxima after the transient; need {min_intervals + 1}", report
        )
    intervals = np.diff(pt)
    # take the trailing window of peaks and demand both tests on it
    last_int = intervals[-min_intervals:]
    last_h = ph[-(min_intervals + 1) :]
    period = float(last_int.mean())
    periodic = np.all(np.abs(last_int - period) <= period_rtol * period)
    steady = np.all(np.abs(last_h - last_h.mean()) <= height_rtol * x_range)
    if periodic and steady:
        run = _consistent_run(intervals, period_rtol, period, min_intervals)
        period = float(intervals[-run:].mean()) if run else period
        return CycleReport("limit-cycle", period, x_min, x_max, y_min, y_max, tuple(pt), tuple(ph))
    raise CycleUndecidedError(
        "post-transient oscillation is neither settled nor periodic; lengthen the transient",
        CycleReport("undecided", period, x_min, x_max, y_min, y_max, tuple(pt), tuple(ph)),
    )


def detect_limit_cycle(
    traj: Trajectory,
    transient: float,
    *,
    dt: Optional[float] = None,
    fixed_point_tol: float = 1e-5,
    period_rtol: float = 0.01,
    height_rtol: float = 0.005,
    min_intervals: int = 5,
) -> CycleReport:
    """Decide whether a trajectory settles on a fixed point or a periodic orbit.

    Parameters
    ----------
    traj : Trajectory
        A completed trajectory.
    transient : float
        Time discarded from the start of ``traj``.
    dt : float, optional
        Resampling interval for peak search; defaults to 1/20000 of the
        post-transient window, capped at 0.05.
    fixed_point_tol : float
        A post-transient range of ``x`` below this means a fixed point.
    period_rtol, height_rtol, min_intervals
        Limit cycle when the last ``min_intervals`` peak spacings agree to
        ``period_rtol`` of their mean and the matching peak heights agree
        to ``height_rtol`` of the oscillation range.

    Raises
    ------
    CycleUndecidedError
        When neither criterion is met.
    """
    if not traj.completed:
        raise IncompleteTrajectoryError(f"trajectory status is {traj.status!r}")
    t0, t1 = float(traj.times[0]), float(traj.times[-1])
    if not 0 <= transient < t1 - t0:
        raise ParameterError("transient must be shorter than the trajectory")
    start = t0 + transient
    if dt is None:
        dt = min(0.05, (t1 - start) / 20000)
    n = int(np.floor((t1 - start) / dt)) + 1
    t = start + dt * np.arange(n)
    return classify_samples(
        t,
        traj.interpolate(t),
        fixed_point_tol=fixed_point_tol,
        period_rtol=period_rtol,
        height_rtol=height_rtol,
        min_intervals=min_intervals,
    )

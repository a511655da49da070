"""``hvlab`` command-line front end.

Usage::

    hvlab <command> --config <path> [--plot] [--out <dir>] [--workers N] [--seed S]

Exit codes: 0 success, 1 unknown command, 2 invalid configuration or
unwritable output directory, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import io
from .analysis.convergence import convergence_runs, ring_initial_conditions
from .analysis.cycles import detect_limit_cycle
from .analysis.lyapunov import lyapunov_exponents
from .analysis.spectrum import prey_spectrum
from .analysis.sweep import bifurcation_sweep, transition_p
from .control import classify_controlled, simulate_controlled
from .equilibrium import (
    check_boundedness,
    check_global_stability,
    classify_local,
    find_hopf_points,
    interior_equilibrium,
)
from .exceptions import (
    CycleUndecidedError,
    DomainError,
    HvlabError,
    IncompleteTrajectoryError,
    IntegrationError,
    NoEquilibriumError,
    NoHopfPointError,
    ParameterError,
)
from .integrator import IntegratorConfig, integrate, sample_uniform
from .model import ControlParams, DimensionalParams, Params, make_rhs, nondimensionalize

EXIT_OK = 0
EXIT_UNKNOWN = 1
EXIT_INVALID = 2
EXIT_NUMERIC = 3

COMMANDS = ("equilibrium", "simulate", "bounds", "global", "hopf", "sweep", "lyapunov", "spectrum",
            "control", "reproduce")

# p is irrelevant to these commands; a placeholder keeps Params valid
_P_OPTIONAL = {"hopf", "sweep"}


class ConfigError(ParameterError):
    pass


@dataclass
class ExperimentConfig:
    """Parsed configuration document.

    Exactly one of ``params`` / ``dimensional_params`` appears in the
    source JSON; the dimensional block is converted on load. Each command
    reads its own settings block, keyed by the command name.
    """

    params: Params
    settings: dict = field(default_factory=dict)
    output_dir: Optional[str] = None
    seed: int = 0
    raw: dict = field(default_factory=dict)

    def block(self, command: str) -> dict:
        blk = self.settings.get(command, {})
        if not isinstance(blk, dict):
            raise ConfigError(f"settings block {command!r} must be an object")
        return blk

    @classmethod
    def from_dict(cls, data: dict, command: Optional[str] = None) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        has_nd = "params" in data
        has_dim = "dimensional_params" in data
        if has_nd == has_dim:
            raise ConfigError("exactly one of 'params' or 'dimensional_params' is required")
        if has_nd:
            block = dict(data["params"])
            if "p" not in block and command in _P_OPTIONAL:
                block["p"] = 0.5
            params = Params.from_dict(block)
        else:
            block = dict(data["dimensional_params"])
            try:
                dp = DimensionalParams(**{k: float(block[k]) for k in ("R", "K", "M", "C", "D", "E", "A", "p")})
            except KeyError as exc:
                raise ConfigError(f"missing dimensional parameter {exc.args[0]!r}") from None
            params = nondimensionalize(dp)
        settings = {k: v for k, v in data.items() if k in COMMANDS}
        seed = data.get("seed", 0)
        if not isinstance(seed, int):
            raise ConfigError("seed must be an integer")
        out = data.get("output_dir")
        return cls(params=params, settings=settings, output_dir=out, seed=seed, raw=data)

    @classmethod
    def load(cls, path, command: Optional[str] = None) -> "ExperimentConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        return cls.from_dict(data, command)


@dataclass
class Context:
    out: Path
    plot: bool = False
    workers: int = 1
    seed: int = 0


def _num(blk: dict, key: str, default, *, positive: bool = False, nonneg: bool = False) -> float:
    val = blk.get(key, default)
    try:
        val = float(val)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number, got {val!r}") from None
    if not math.isfinite(val):
        raise ConfigError(f"{key} must be finite")
    if positive and val <= 0:
        raise ConfigError(f"{key} must be positive")
    if nonneg and val < 0:
        raise ConfigError(f"{key} must be nonnegative")
    return val


def _state(blk: dict, key: str, default, dim: int = 2) -> np.ndarray:
    val = blk.get(key, default)
    try:
        arr = np.asarray(val, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a list of numbers") from None
    if arr.shape != (dim,) or not np.all(np.isfinite(arr)):
        raise ConfigError(f"{key} must be a list of {dim} finite numbers")
    if np.any(arr[:2] <= 0):
        raise ConfigError(f"{key}: densities must be strictly positive")
    return arr


def _integrator_cfg(blk: dict, t_end: float) -> IntegratorConfig:
    return IntegratorConfig(
        t_end=t_end,
        rel_tol=_num(blk, "rel_tol", 1e-9, positive=True),
        abs_tol=_num(blk, "abs_tol", 1e-12, positive=True),
    )


def _write_traj(path: Path, traj, dt: Optional[float], names=("x", "y")):
    if dt:
        times, states = sample_uniform(traj, dt)
    else:
        times, states = traj.times, traj.states
    io.write_csv(path, ("t", *names), io.trajectory_rows(times, states))


# commands ------------------------------------------------------------------


def cmd_equilibrium(cfg: ExperimentConfig, ctx: Context) -> int:
    rep = classify_local(cfg.params)
    io.write_json(ctx.out / "equilibrium.json", {"params": cfg.params.as_dict(), **rep.to_dict()})
    return EXIT_OK


def cmd_simulate(cfg: ExperimentConfig, ctx: Context) -> int:
    blk = cfg.block("simulate")
    t_end = _num(blk, "t_end", 500.0, nonneg=True)
    s0 = _state(blk, "s0", [0.5, 0.5])
    dt = blk.get("dt")
    dt = _num(blk, "dt", None, positive=True) if dt is not None else None
    traj = integrate(make_rhs(cfg.params), s0, _integrator_cfg(blk, t_end))
    if not traj.completed:
        _write_traj(ctx.out / "trajectory.csv", traj, None)
        print(f"integration stopped: {traj.status}", file=sys.stderr)
        return EXIT_NUMERIC
    _write_traj(ctx.out / "trajectory.csv", traj, dt)
    if ctx.plot:
        io.gnuplot_script(ctx.out / "trajectory_phase.gp", "Phase portrait",
                          [("trajectory.csv", "2:3", "orbit")], "x", "y")
        io.gnuplot_script(ctx.out / "trajectory_series.gp", "Time series",
                          [("trajectory.csv", "1:2", "x"), ("trajectory.csv", "1:3", "y")], "t", "density")
    return EXIT_OK


def cmd_bounds(cfg: ExperimentConfig, ctx: Context) -> int:
    rep = check_boundedness(cfg.params)
    io.write_json(ctx.out / "bounds.json", rep.to_dict())
    return EXIT_OK


def cmd_global(cfg: ExperimentConfig, ctx: Context) -> int:
    blk = cfg.block("global")
    t_end = _num(blk, "t_end", 1000.0, positive=True)
    radius = _num(blk, "ring_radius", 0.3, positive=True)
    n_ring = int(_num(blk, "n_ring", 8, nonneg=True))
    extra = blk.get("extra_ics", [[0.1, 0.1], [0.9, 0.9]])
    for ic in extra:
        _state({"ic": ic}, "ic", None)
    n_random = int(_num(blk, "n_random", 0, nonneg=True))
    ics = ring_initial_conditions(cfg.params, radius, n_ring, extra)
    if n_random:
        rng = np.random.default_rng(ctx.seed)
        ics.extend(tuple(map(float, rng.uniform(0.05, 1.0, size=2))) for _ in range(n_random))
    report = check_global_stability(cfg.params)
    runs = convergence_runs(cfg.params, ics, t_end, workers=ctx.workers)
    xs, ys = interior_equilibrium(cfg.params)
    plots = []
    for k, run in enumerate(runs):
        name = f"global_ic{k:02d}.csv"
        _write_traj(ctx.out / name, run.trajectory, None)
        plots.append((name, "2:3", f"IC {k}"))
    io.write_json(
        ctx.out / "global.json",
        {
            "params": cfg.params.as_dict(),
            "equilibrium": {"x": xs, "y": ys},
            "conditions": report.to_dict(),
            "runs": [r.to_dict() for r in runs],
        },
    )
    if ctx.plot:
        io.gnuplot_script(ctx.out / "global.gp", "Convergence from several initial conditions", plots, "x", "y")
    if any(r.status != "completed" for r in runs):
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_hopf(cfg: ExperimentConfig, ctx: Context) -> int:
    blk = cfg.block("hopf")
    n_scan = int(_num(blk, "n_scan", 200, positive=True))
    res = find_hopf_points(cfg.params, n_scan=n_scan)
    io.write_json(ctx.out / "hopf.json", res.to_dict())
    return EXIT_OK


def cmd_sweep(cfg: ExperimentConfig, ctx: Context) -> int:
    blk = cfg.block("sweep")
    p_min = _num(blk, "p_min", 0.3, nonneg=True)
    p_max = _num(blk, "p_max", 0.7, nonneg=True)
    step = _num(blk, "p_step", 0.01, positive=True)
    if not 0 <= p_min <= p_max <= 1:
        raise ConfigError("need 0 <= p_min <= p_max <= 1")
    n = int(math.floor((p_max - p_min) / step + 1e-9)) + 1
    grid = np.round(p_min + step * np.arange(n), 12)
    continuation = bool(blk.get("continuation", ctx.workers <= 1))
    branch = bifurcation_sweep(
        cfg.params,
        grid,
        _state(blk, "s0", [0.3, 0.5]),
        _num(blk, "transient", 4000.0, nonneg=True),
        _num(blk, "window", 500.0, positive=True),
        continuation=continuation,
        workers=1 if continuation else ctx.workers,
    )
    io.write_csv(ctx.out / "sweep.csv", ("p", "min_x", "max_x", "regime"), branch.rows())
    io.write_json(ctx.out / "sweep.json", {"transition_p": transition_p(branch), "n_points": len(grid)})
    if ctx.plot:
        io.gnuplot_script(ctx.out / "sweep.gp", "Bifurcation diagram in p",
                          [("sweep.csv", "1:2", "min x"), ("sweep.csv", "1:3", "max x")], "p", "x")
    return EXIT_OK


def cmd_lyapunov(cfg: ExperimentConfig, ctx: Context) -> int:
    blk = cfg.block("lyapunov")
    res = lyapunov_exponents(
        cfg.params,
        _state(blk, "s0", [0.5, 0.5]),
        _num(blk, "total_time", 2000.0, positive=True),
        _num(blk, "transient", 200.0, positive=True),
        renorm_interval=_num(blk, "renorm_interval", 1.0, positive=True),
    )
    io.write_json(ctx.out / "lyapunov.json", res.to_dict())
    io.write_csv(ctx.out / "lyapunov_history.csv", ("t", "lambda1", "lambda2"), res.convergence_history)
    if ctx.plot:
        io.gnuplot_script(ctx.out / "lyapunov.gp", "Lyapunov exponent estimates",
                          [("lyapunov_history.csv", "1:2", "lambda1"),
                           ("lyapunov_history.csv", "1:3", "lambda2")], "t", "exponent")
    return EXIT_OK if res.converged else EXIT_NUMERIC


def cmd_spectrum(cfg: ExperimentConfig, ctx: Context) -> int:
    blk = cfg.block("spectrum")
    fs = _num(blk, "fs", 1.0, positive=True)
    transient_samples = int(_num(blk, "transient_samples", 1000, nonneg=True))
    n_samples = int(_num(blk, "n_samples", 2000, positive=True))
    fft_length = int(_num(blk, "fft_length", 1024, positive=True))
    t_end = (transient_samples + n_samples - 1) / fs
    traj = integrate(make_rhs(cfg.params), _state(blk, "s0", [0.5, 0.5]), _integrator_cfg(blk, t_end))
    if not traj.completed:
        print(f"integration stopped: {traj.status}", file=sys.stderr)
        return EXIT_NUMERIC
    spec = prey_spectrum(traj, transient_samples=transient_samples, n_samples=n_samples, fs=fs,
                         fft_length=fft_length)
    io.write_csv(ctx.out / "spectrum.csv", ("freq", "power"), zip(spec.freqs, spec.power))
    summary = {"dominant_frequency": spec.dominant_frequency(), "bin_width": spec.bin_width,
               "fft_length": spec.fft_length, "n_samples": spec.n_samples, "fs": spec.fs}
    try:
        cyc = detect_limit_cycle(traj, transient_samples / fs)
        summary["cycle"] = cyc.to_dict()
    except CycleUndecidedError:
        summary["cycle"] = None
    io.write_json(ctx.out / "spectrum.json", summary)
    if ctx.plot:
        io.gnuplot_script(ctx.out / "spectrum.gp", "Power spectrum of x",
                          [("spectrum.csv", "1:2", "PSD")], "frequency (Hz)", "power", logscale_y=True)
    return EXIT_OK


def cmd_control(cfg: ExperimentConfig, ctx: Context) -> int:
    blk = cfg.block("control")
    try:
        cp = ControlParams(**{k: float(blk[k]) for k in ("b", "b1", "b2", "b3")})
    except KeyError as exc:
        raise ConfigError(f"control block needs {exc.args[0]!r}") from None
    rep = classify_controlled(cfg.params, cp)
    eq = np.array(rep.equilibrium)
    default_s0 = (eq * np.array([1.05, 0.95, 1.0])).tolist()
    s0 = _state(blk, "s0", default_s0, dim=3)
    t_end = _num(blk, "t_end", 500.0, positive=True)
    traj = simulate_controlled(cfg.params, cp, s0, _integrator_cfg(blk, t_end))
    io.write_json(ctx.out / "control.json", {"control": cp.as_dict(), **rep.to_dict(), "trajectory_status": traj.status})
    _write_traj(ctx.out / "control_trajectory.csv", traj, None, names=("x", "y", "xi"))
    if ctx.plot:
        io.gnuplot_script(ctx.out / "control.gp", "Controlled system",
                          [("control_trajectory.csv", "2:3", "orbit")], "x", "y")
    return EXIT_OK if traj.completed else EXIT_NUMERIC


HANDLERS = {
    "equilibrium": cmd_equilibrium,
    "simulate": cmd_simulate,
    "bounds": cmd_bounds,
    "global": cmd_global,
    "hopf": cmd_hopf,
    "sweep": cmd_sweep,
    "lyapunov": cmd_lyapunov,
    "spectrum": cmd_spectrum,
    "control": cmd_control,
}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hvlab", description="Hassell-Varley predator-prey analysis")
    ap.add_argument("command", help=", ".join(COMMANDS))
    ap.add_argument("--config", help="JSON configuration file")
    ap.add_argument("--plot", action="store_true", help="also write gnuplot scripts")
    ap.add_argument("--out", help="output directory (default: $HVLAB_OUT or ./hvlab_out)")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=None)
    return ap


def _prepare_out(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from None
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    return out


def run(command: str, config_path=None, *, plot=False, out=None, workers=1, seed=None) -> int:
    """Execute one subcommand and return its exit code."""
    if command not in COMMANDS:
        print(f"hvlab: unknown command {command!r}; choose from {', '.join(COMMANDS)}", file=sys.stderr)
        return EXIT_UNKNOWN
    try:
        if workers < 1:
            raise ConfigError("--workers must be at least 1")
        if command == "reproduce":
            from .figures import reproduce_figures

            target = _prepare_out(out or os.environ.get("HVLAB_OUT") or "hvlab_out")
            manifest = reproduce_figures(target, workers=workers)
            return EXIT_OK if all(e.get("status") == "ok" for e in manifest.values()) else EXIT_NUMERIC
        if config_path is None:
            raise ConfigError("--config is required")
        cfg = ExperimentConfig.load(config_path, command)
        target = _prepare_out(out or cfg.output_dir or os.environ.get("HVLAB_OUT") or "hvlab_out")
        ctx = Context(out=target, plot=plot, workers=workers, seed=cfg.seed if seed is None else seed)
        return HANDLERS[command](cfg, ctx)
    except (ConfigError, ParameterError, DomainError) as exc:
        print(f"hvlab: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NoEquilibriumError, NoHopfPointError, IntegrationError, IncompleteTrajectoryError,
            CycleUndecidedError) as exc:
        print(f"hvlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except HvlabError as exc:
        print(f"hvlab: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    return run(args.command, args.config, plot=args.plot, out=args.out, workers=args.workers, seed=args.seed)


if __name__ == "__main__":
    sys.exit(main())

"""Canned runs that regenerate every figure dataset and a manifest of outcomes."""
from __future__ import annotations

import traceback
from pathlib import Path

import numpy as np

from . import io
from .analysis.convergence import convergence_runs, ring_initial_conditions
from .analysis.cycles import detect_limit_cycle
from .analysis.lyapunov import lyapunov_exponents
from .analysis.spectrum import prey_spectrum
from .analysis.sweep import bifurcation_sweep, transition_p
from .control import classify_controlled, simulate_controlled
from .equilibrium import check_global_stability, classify_local, hopf_point
from .integrator import IntegratorConfig, integrate
from .model import ControlParams, Params, make_rhs

STABLE_SET = Params(m=1.2, c=0.3, d=0.4, e=0.25, a=0.2, p=0.7)
CYCLE_SET = Params(m=1.2, c=1.0, d=0.7, e=0.2, a=0.2, p=0.7)
HOPF_SET = Params(m=1.2, c=0.25, d=1.0, e=0.45, a=0.2, p=0.5)
CONTROL_ON = ControlParams(b=0.3, b1=0.3, b2=0.2, b3=0.7)
CONTROL_OFF = ControlParams(b=0.0, b1=0.3, b2=0.2, b3=0.7)


def _traj_csv(path, traj, names=("x", "y")):
    io.write_csv(path, ("t", *names), io.trajectory_rows(traj.times, traj.states))


def _portrait(out: Path, stem: str, params: Params, s0, t_end: float, transient: float) -> dict:
    traj = integrate(make_rhs(params), s0, IntegratorConfig(t_end=t_end))
    _traj_csv(out / f"{stem}.csv", traj)
    io.gnuplot_script(out / f"{stem}_phase.gp", f"{stem} phase portrait", [(f"{stem}.csv", "2:3", "orbit")], "x", "y")
    io.gnuplot_script(out / f"{stem}_series.gp", f"{stem} time series",
                      [(f"{stem}.csv", "1:2", "x"), (f"{stem}.csv", "1:3", "y")], "t", "density")
    cyc = detect_limit_cycle(traj, transient)
    return {"regime": cyc.kind, "period": cyc.period, "x_min": cyc.x_min, "x_max": cyc.x_max,
            "classification": classify_local(params).classification, "traj": traj}


def fig1(out: Path, workers: int) -> dict:
    info = _portrait(out, "fig1", STABLE_SET, (0.5, 0.5), 500.0, 300.0)
    info.pop("traj")
    return info


def fig2(out: Path, workers: int) -> dict:
    info = _portrait(out, "fig2", CYCLE_SET, (0.5, 0.5), 3000.0, 1000.0)
    info.pop("traj")
    return info


def fig3(out: Path, workers: int) -> dict:
    res = {}
    for tag, params in (("stable", STABLE_SET), ("cycle", CYCLE_SET)):
        ly = lyapunov_exponents(params, (0.5, 0.5), 2000.0, 200.0)
        io.write_csv(out / f"fig3_{tag}.csv", ("t", "lambda1", "lambda2"), ly.convergence_history)
        io.gnuplot_script(out / f"fig3_{tag}.gp", f"Lyapunov exponents ({tag})",
                          [(f"fig3_{tag}.csv", "1:2", "lambda1"), (f"fig3_{tag}.csv", "1:3", "lambda2")],
                          "t", "exponent")
        res[tag] = {"lambda1": ly.lambda1, "lambda2": ly.lambda2, "mean_trace": ly.mean_trace}
    return res


def fig4(out: Path, workers: int) -> dict:
    ics = ring_initial_conditions(STABLE_SET)
    runs = convergence_runs(STABLE_SET, ics, 1000.0, workers=workers)
    plots = []
    for k, run in enumerate(runs):
        _traj_csv(out / f"fig4_ic{k:02d}.csv", run.trajectory)
        plots.append((f"fig4_ic{k:02d}.csv", "2:3", f"IC {k}"))
    io.gnuplot_script(out / "fig4.gp", "Convergence from several initial conditions", plots, "x", "y")
    cond = check_global_stability(STABLE_SET)
    return {
        "all_converged": all(r.final_distance < 1e-3 for r in runs),
        "v_non_increasing": [r.v_non_increasing for r in runs],
        "conditions": cond.to_dict(),
    }


def fig5(out: Path, workers: int) -> dict:
    p1 = hopf_point(HOPF_SET)
    a = _portrait(out, "fig5a", HOPF_SET.with_p(0.3), (0.3, 0.5), 3000.0, 1000.0)
    b = _portrait(out, "fig5b", HOPF_SET.with_p(0.7), (0.3, 0.5), 3000.0, 1000.0)
    spectra = {}
    for tag, info in (("fig7a", a), ("fig7b", b)):
        spec = prey_spectrum(info.pop("traj"))
        io.write_csv(out / f"{tag}.csv", ("freq", "power"), zip(spec.freqs, spec.power))
        io.gnuplot_script(out / f"{tag}.gp", f"Power spectrum {tag}", [(f"{tag}.csv", "1:2", "PSD")],
                          "frequency (Hz)", "power", logscale_y=True)
        spectra[tag] = {"dominant_frequency": spec.dominant_frequency()}
    grid = np.round(np.arange(0.3, 0.7 + 1e-9, 0.01), 12)
    branch = bifurcation_sweep(HOPF_SET, grid, (0.3, 0.5), 4000.0, 500.0,
                               continuation=workers <= 1, workers=workers)
    io.write_csv(out / "fig5c.csv", ("p", "min_x", "max_x", "regime"), branch.rows())
    io.gnuplot_script(out / "fig5c.gp", "Bifurcation diagram in p",
                      [("fig5c.csv", "1:2", "min x"), ("fig5c.csv", "1:3", "max x")], "p", "x")
    return {"p1": p1, "fig5a": a, "fig5b": b, "transition_p": transition_p(branch), **spectra}


def fig6(out: Path, workers: int) -> dict:
    res = {}
    for tag, cp in (("fig6_off", CONTROL_OFF), ("fig6_on", CONTROL_ON)):
        rep = classify_controlled(CYCLE_SET, cp)
        s0 = np.array(rep.equilibrium) * np.array([1.05, 0.95, 1.0])
        traj = simulate_controlled(CYCLE_SET, cp, s0, IntegratorConfig(t_end=1000.0))
        _traj_csv(out / f"{tag}.csv", traj, ("x", "y", "xi"))
        io.gnuplot_script(out / f"{tag}.gp", tag, [(f"{tag}.csv", "2:3", "orbit")], "x", "y")
        res[tag] = {"stable": rep.stable, "equilibrium": list(rep.equilibrium),
                    "max_real_eigenvalue": max(z.real for z in rep.eigenvalues)}
    return res


FIGURES = {"fig1": fig1, "fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5, "fig6": fig6}


def reproduce_figures(output_dir, workers: int = 1) -> dict:
    """Run every canned configuration; failures are recorded and skipped.

    Returns the manifest, which is also written to ``manifest.json``.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {}
    for name, fn in FIGURES.items():
        try:
            entry = fn(out, workers)
            entry["status"] = "ok"
        except Exception as exc:  # keep going with the remaining figures
            entry = {"status": "error", "error": f"{type(exc).__name__}: {exc}",
                     "traceback": traceback.format_exc(limit=3)}
        manifest[name] = entry
    io.write_json(out / "manifest.json", manifest)
    return manifest

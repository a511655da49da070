"""Lyapunov exponents, spectra, cycle detection and parameter sweeps."""

from .cycles import CycleReport, detect_limit_cycle
from .lyapunov import LyapunovResult, lyapunov_exponents
from .spectrum import SpectrumResult, power_spectrum, prey_spectrum
from .sweep import SweepBranch, bifurcation_sweep, transition_p

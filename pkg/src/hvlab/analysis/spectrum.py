"""Power spectral density of the prey series."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from ..exceptions import ParameterError
from ..integrator import Trajectory, sample_uniform

__all__ = ["SpectrumResult", "power_spectrum", "prey_spectrum"]

FS = 1.0
FFT_LENGTH = 1024
N_SAMPLES = 2000
TRANSIENT_SAMPLES = 1000


@dataclass(frozen=True)
class SpectrumResult:
    freqs: np.ndarray
    power: np.ndarray
    fft_length: int = FFT_LENGTH
    n_samples: int = N_SAMPLES
    fs: float = FS

    def __post_init__(self):
        if len(self.freqs) != self.fft_length // 2 + 1 or len(self.power) != len(self.freqs):
            raise ParameterError("spectrum must have fft_length // 2 + 1 bins")
        if np.any(self.power < 0):
            raise ParameterError("power must be nonnegative")

    @property
    def bin_width(self) -> float:
        return self.fs / self.fft_length

    def dominant_frequency(self) -> float:
        """Centre of the strongest non-DC bin."""
        return float(self.freqs[1 + int(np.argmax(self.power[1:]))])


def power_spectrum(
    series,
    *,
    fs: float = FS,
    fft_length: int = FFT_LENGTH,
    n_samples: int = N_SAMPLES,
) -> SpectrumResult:
    """Welch estimate of a uniformly sampled series.

    The first ``n_samples`` values are used (the caller discards any
    transient). Segments of ``fft_length`` points with a Hann window and
    50% overlap are averaged after removing the mean; the one-sided density
    is returned, so ``sum(power) * fs / fft_length`` approximates the
    variance.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ParameterError("series must be one-dimensional")
    if len(x) < n_samples:
        raise ParameterError(f"series has {len(x)} samples, need at least {n_samples}")
    if n_samples < fft_length:
        raise ParameterError("n_samples must be at least fft_length")
    freqs, power = signal.welch(
        x[:n_samples],
        fs=fs,
        window="hann",
        nperseg=fft_length,
        noverlap=fft_length // 2,
        detrend="constant",
        return_onesided=True,
        scaling="density",
    )
    return SpectrumResult(
        freqs=freqs,
        power=np.maximum(power, 0.0),
        fft_length=fft_length,
        n_samples=n_samples,
        fs=fs,
    )


def prey_spectrum(
    traj: Trajectory,
    *,
    transient_samples: int = TRANSIENT_SAMPLES,
    n_samples: int = N_SAMPLES,
    fs: float = FS,
    fft_length: int = FFT_LENGTH,
) -> SpectrumResult:
    """Sample ``x(t)`` at ``fs``, drop ``transient_samples`` and analyse the next ``n_samples``."""
    _, states = sample_uniform(traj, 1.0 / fs)
    x = states[:, 0]
    if len(x) < transient_samples + n_samples:
        raise ParameterError(
            f"trajectory yields {len(x)} samples; need {transient_samples + n_samples} "
            f"(t_end >= {(transient_samples + n_samples - 1) / fs:g})"
        )
    return power_spectrum(
        x[transient_samples : transient_samples + n_samples],
        fs=fs,
        fft_length=fft_length,
        n_samples=n_samples,
    )

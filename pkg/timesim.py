"""
Time-domain energization of the line model and spectral post-processing
"""
import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg, signal

from exceptions import InsufficientSamplesError, InvalidParameterError, UnstableModelError
from schemas import SourceWaveform, SpectralPeak, StateSpaceModel, Trajectory

logger = logging.getLogger(__name__)

MIN_SPECTRUM_SAMPLES = 1024


def discretize_zoh(A: np.ndarray, B: np.ndarray, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Exact zero-order-hold discretisation.

    expm([[A, B], [0, 0]] * dt) = [[Ad, Bd], [0, I]]
    """
    if dt <= 0:
        raise InvalidParameterError(f"dt must be positive, got {dt}")
    A, B = np.asarray(A, dtype=float), np.asarray(B, dtype=float)
    n, m = A.shape[0], B.shape[1]
    block = np.zeros((n + m, n + m))
    block[:n, :n] = A
    block[:n, n:] = B
    phi = linalg.expm(block * dt)
    return phi[:n, :n], phi[:n, n:]


def spectral_radius(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(linalg.eigvals(matrix))))


def steady_state(model: StateSpaceModel, u: np.ndarray) -> Optional[np.ndarray]:
    """x_ss = -A^{-1} B u, or None when A is singular."""
    try:
        return -linalg.solve(model.A, model.B @ u)
    except (linalg.LinAlgError, ValueError):
        return None


def simulate_energization(
    model: StateSpaceModel,
    source: SourceWaveform,
    dt: float,
    horizon: float,
    allow_unstable: bool = False,
    x0: Optional[np.ndarray] = None,
) -> Trajectory:
    """
    Energise from x0 (zero by default) with the given source waveform.
    The input is held constant over each step (zero-order hold).
    """
    if dt <= 0 or horizon < dt:
        raise InvalidParameterError(f"need dt > 0 and horizon >= dt, got dt={dt}, horizon={horizon}")
    x = np.zeros(model.dim) if x0 is None else np.array(x0, dtype=float)
    if x.shape != (model.dim,):
        raise InvalidParameterError(f"x0 must have shape ({model.dim},), got {x.shape}")

    Ad, Bd = discretize_zoh(model.A, model.B, dt)
    radius = spectral_radius(Ad)
    stable = radius < 1.0
    if not stable:
        if not allow_unstable:
            raise UnstableModelError(f"discrete spectral radius {radius:.12g} >= 1")
        logger.warning("simulating an unstable model (spectral radius %.12g)", radius)

    samples = int(math.floor(horizon / dt + 1e-9)) + 1
    times = np.arange(samples) * dt
    inputs = np.array([source.inputs(t) for t in times[:-1]])
    forcing = inputs @ Bd.T if samples > 1 else np.zeros((0, model.dim))

    states = np.zeros((samples, model.dim))
    states[0] = x
    for step in range(samples - 1):
        x = Ad @ x + forcing[step]
        states[step + 1] = x

    final = steady_state(model, source.inputs(horizon)) if stable else None
    logger.info(
        "simulated %d samples, dt=%.3g s, spectral radius %.12f", samples, dt, radius
    )
    return Trajectory(
        dt=dt, times=times, states=states, labels=model.labels, steady_state=final, stable=stable
    )


# ==================== Spectral analysis ====================
def amplitude_spectrum(
    trajectory: Trajectory, index: int, alpha: float = 1.0
) -> Tuple[np.ndarray, np.ndarray]:
    """Tukey-windowed one-sided amplitude spectrum of the deviation from steady state."""
    if not 0 <= index < len(trajectory.labels):
        raise InvalidParameterError(f"state index {index} out of range")
    if trajectory.n_samples < MIN_SPECTRUM_SAMPLES:
        raise InsufficientSamplesError(
            f"{trajectory.n_samples} samples, at least {MIN_SPECTRUM_SAMPLES} required"
        )
    x = trajectory.deviation(index)
    x = x - x.mean()
    window = signal.windows.tukey(x.shape[0], alpha)
    mags = np.abs(np.fft.rfft(x * window)) * 2.0 / window.sum()
    freqs = np.fft.rfftfreq(x.shape[0], trajectory.dt)
    return freqs, mags


def _interpolate(mags: np.ndarray, i: int) -> float:
    """Fractional bin offset of a peak from a parabola through log-magnitudes."""
    if i <= 0 or i >= mags.shape[0] - 1:
        return 0.0
    lo, mid, hi = np.log(np.maximum(mags[i - 1:i + 2], 1e-300))
    curvature = lo - 2 * mid + hi
    if curvature >= 0:
        return 0.0
    return float(0.5 * (lo - hi) / curvature)


def spectral_peaks(
    trajectory: Trajectory, index: int, alpha: float = 1.0, threshold: float = 0.01
) -> List[SpectralPeak]:
    """Local maxima above threshold * max, strongest first."""
    freqs, mags = amplitude_spectrum(trajectory, index, alpha)
    top = float(mags.max())
    if top == 0:
        return []
    found, _ = signal.find_peaks(mags, height=threshold * top)
    df = freqs[1] - freqs[0]
    peaks = [
        SpectralPeak(
            frequency_hz=float(freqs[i] + _interpolate(mags, i) * df),
            magnitude=float(mags[i]),
            relative_magnitude=float(mags[i] / top),
        )
        for i in found
    ]
    return sorted(peaks, key=lambda p: p.magnitude, reverse=True)


def envelope_decay_rate(trajectory: Trajectory, index: int, window_s: float = 0.02) -> float:
    """
    Exponential decay rate (1/s) of the transient at `index`, from a
    least-squares line through log RMS over consecutive windows.
    """
    width = int(round(window_s / trajectory.dt))
    x = trajectory.deviation(index)
    count = x.shape[0] // max(width, 1)
    if width < 2 or count < 3:
        raise InsufficientSamplesError("need at least three windows of two samples or more")
    blocks = x[: count * width].reshape(count, width)
    rms = np.sqrt(np.mean(blocks**2, axis=1))
    centres = trajectory.times[: count * width].reshape(count, width).mean(axis=1)
    keep = rms > 0
    slope, _ = np.polyfit(centres[keep], np.log(rms[keep]), 1)
    return float(-slope)

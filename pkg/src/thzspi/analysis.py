"""Imaging products from a reconstructed data cube.

Time-of-flight (delay, thickness), spectra and spectral transmission
images, and the peak-field RMS error used to grade compressive
reconstructions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import hilbert

from .scene import C_MM_PER_PS
from .simulator import DataCube, Waveform

INVALID_THRESHOLD = 0.05
AVG_BINS = 3


@dataclass(frozen=True, eq=False)
class DelayImage:
    """Per-pixel delay in ps; invalid pixels hold NaN and ``valid`` False."""

    n: int
    values: np.ndarray
    valid: np.ndarray


@dataclass(frozen=True, eq=False)
class ThicknessImage:
    n: int
    values: np.ndarray
    valid: np.ndarray
    clamped: np.ndarray
    n_r: float


@dataclass(frozen=True, eq=False)
class Spectrum:
    freqs: np.ndarray
    amplitude: np.ndarray
    phase: np.ndarray


@dataclass(frozen=True, eq=False)
class TransmissionImage:
    n: int
    f0_thz: float
    values: np.ndarray


def _parabolic_offset(y0, y1, y2) -> float:
    denom = y0 - 2.0 * y1 + y2
    if denom == 0:
        return 0.0
    return 0.5 * (y0 - y2) / denom


def peak_time(w: Waveform, method: str = "envelope") -> float:
    """Sub-sample time of the pulse peak, NaN for an all-zero waveform.

    ``method="envelope"`` locates the maximum of the analytic-signal
    magnitude ``|E + i H[E]|``. It is polarity independent and has a single
    maximum for a single-cycle pulse, whereas ``method="abs"`` (maximum of
    ``|E|``) can jump between the two equal lobes of such a pulse. The
    discrete argmax is refined with a 3-point parabola; at the grid edge
    the grid time is returned unrefined.
    """
    x = w.field
    if not np.any(x):
        return float("nan")
    if method == "envelope":
        y = np.abs(hilbert(x))
    elif method == "abs":
        y = np.abs(x)
    else:
        raise ValueError(f"unknown peak method {method!r}")
    k = int(np.argmax(y))
    t = w.grid.times
    if k == 0 or k == len(y) - 1:
        return float(t[k])
    return float(t[k] + w.grid.dt * _parabolic_offset(y[k - 1], y[k], y[k + 1]))


def delay_map(cube: DataCube, reference: Waveform,
              invalid_threshold: float = INVALID_THRESHOLD,
              method: str = "envelope") -> DelayImage:
    """Per-pixel peak delay relative to a free-space reference waveform."""
    t_ref = peak_time(reference, method)
    ref_peak = np.max(np.abs(reference.field))
    pixel_peak = np.max(np.abs(cube.fields), axis=1)
    valid = pixel_peak >= invalid_threshold * ref_peak
    values = np.full(cube.N, np.nan)
    for p in np.flatnonzero(valid):
        values[p] = peak_time(cube.pixel(p), method) - t_ref
    valid &= np.isfinite(values)
    return DelayImage(n=cube.n, values=values.reshape(cube.n, cube.n),
                      valid=valid.reshape(cube.n, cube.n))


def thickness_map(delays: DelayImage, n_r: float) -> ThicknessImage:
    """Thickness ``d = c dt / (n_r - 1)``; negative delays clamp to 0."""
    if not n_r > 1:
        raise ValueError(f"refractive index must exceed 1, got {n_r}")
    d = C_MM_PER_PS * delays.values / (n_r - 1.0)
    clamped = delays.valid & (d < 0)
    d = np.where(clamped, 0.0, d)
    return ThicknessImage(n=delays.n, values=d, valid=delays.valid.copy(),
                          clamped=clamped, n_r=float(n_r))


def spectrum(w: Waveform) -> Spectrum:
    """One-sided DFT of a waveform (rectangular window, bins 0..nt/2)."""
    F = np.fft.rfft(w.field)
    return Spectrum(freqs=w.grid.freqs, amplitude=np.abs(F), phase=np.angle(F))


def spectral_image(cube: DataCube, reference: Waveform, f0_thz: float,
                   avg_bins: int = AVG_BINS) -> TransmissionImage:
    """Amplitude transmission image at ``f0_thz``.

    Each pixel is the mean, over the ``avg_bins`` DFT bins nearest
    ``f0_thz``, of the pixel amplitude spectrum divided by the reference
    amplitude spectrum.
    """
    freqs = cube.grid.freqs
    if not 0 <= f0_thz <= freqs[-1]:
        raise ValueError(f"f0={f0_thz} THz outside [0, {freqs[-1]}] THz (Nyquist)")
    if avg_bins < 1:
        raise ValueError("avg_bins must be >= 1")
    bins = np.argsort(np.abs(freqs - f0_thz), kind="stable")[:avg_bins]

    ref_amp = np.abs(np.fft.rfft(reference.field))
    if np.any(ref_amp[bins] < 1e-9 * ref_amp.max()):
        raise ValueError(f"reference spectrum has a null near {f0_thz} THz")
    pix_amp = np.abs(np.fft.rfft(cube.fields, axis=1))[:, bins]
    values = np.mean(pix_amp / ref_amp[bins], axis=1)
    return TransmissionImage(n=cube.n, f0_thz=float(f0_thz),
                             values=values.reshape(cube.n, cube.n))


def rms_error_at_peak(test: DataCube, reference_cube: DataCube) -> float:
    """RMS field error at each reference pixel's peak sample.

    Normalised by the brightest reference peak, so 0 means identical peak
    fields and 1 means errors as large as the strongest pixel.
    """
    if test.fields.shape != reference_cube.fields.shape:
        raise ValueError(f"cube shapes differ: {test.fields.shape} vs "
                         f"{reference_cube.fields.shape}")
    ref = reference_cube.fields
    k = np.argmax(np.abs(ref), axis=1)
    rows = np.arange(ref.shape[0])
    ref_peaks = ref[rows, k]
    scale = np.max(np.abs(ref_peaks))
    if scale == 0:
        raise ValueError("reference cube is identically zero")
    err = test.fields[rows, k] - ref_peaks
    return float(np.sqrt(np.mean(err ** 2)) / scale)

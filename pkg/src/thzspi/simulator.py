"""Forward model: source pulse, per-pixel propagation, single-pixel detection."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .patterns import BinaryMaskSet
from .scene import Scene, pixel_transfer_function


@dataclass(frozen=True)
class TimeGrid:
    """Uniform sampling grid, times in ps."""

    t0: float = 0.0
    dt: float = 0.05
    nt: int = 1024

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.nt < 2 or self.nt & (self.nt - 1):
            raise ValueError(f"nt must be a power of 2 and >= 2, got {self.nt}")

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.nt)

    @property
    def freqs(self) -> np.ndarray:
        """One-sided DFT bin frequencies in THz."""
        return np.fft.rfftfreq(self.nt, self.dt)


@dataclass(frozen=True, eq=False)
class Waveform:
    grid: TimeGrid
    field: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.field, dtype=float)
        if f.shape != (self.grid.nt,):
            raise ValueError(f"expected {self.grid.nt} samples, got shape {f.shape}")
        if not np.all(np.isfinite(f)):
            raise ValueError("waveform contains non-finite samples")
        object.__setattr__(self, "field", f)


@dataclass(frozen=True, eq=False)
class DataCube:
    """Per-pixel waveforms, shape (N, nt), pixels in row-major order."""

    n: int
    grid: TimeGrid
    fields: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.fields, dtype=float)
        if f.shape != (self.n * self.n, self.grid.nt):
            raise ValueError(f"expected fields of shape {(self.n * self.n, self.grid.nt)}, "
                             f"got {f.shape}")
        if not np.all(np.isfinite(f)):
            raise ValueError("data cube contains non-finite samples")
        object.__setattr__(self, "fields", f)

    @property
    def N(self) -> int:
        return self.n * self.n

    def pixel(self, p: int) -> Waveform:
        return Waveform(self.grid, self.fields[p])

    def as_image_stack(self) -> np.ndarray:
        return self.fields.reshape(self.n, self.n, self.grid.nt)


@dataclass(frozen=True)
class NoiseModel:
    """Detector noise.

    ``additive_sigma`` is relative to the noiseless all-open record peak;
    ``multiplicative_sigma`` is the per-pattern gain jitter.
    """

    additive_sigma: float = 0.005
    multiplicative_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.additive_sigma < 0 or self.multiplicative_sigma < 0:
            raise ValueError("noise sigmas must be >= 0")

    @classmethod
    def noiseless(cls) -> "NoiseModel":
        return cls(0.0, 0.0, 0)


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    N: int
    ordering_name: str
    modulation_depth: float
    grid: TimeGrid
    records: np.ndarray
    noise: NoiseModel | None = field(default=None)

    def __post_init__(self):
        r = np.asarray(self.records, dtype=float)
        if r.ndim != 2 or r.shape[1] != self.grid.nt:
            raise ValueError(f"records must be (m, {self.grid.nt}), got {r.shape}")
        if not 1 <= r.shape[0] <= self.N:
            raise ValueError(f"record count {r.shape[0]} outside [1, {self.N}]")
        object.__setattr__(self, "records", r)

    @property
    def m(self) -> int:
        return self.records.shape[0]


def synthesize_pulse(grid: TimeGrid, center_time: float = 10.0, width: float = 0.3,
                     amplitude: float = 1.0) -> Waveform:
    """Single-cycle Gaussian-derivative pulse.

    ``E(t) = -A (t - t0)/tau * exp(-(t - t0)**2 / (2 tau**2))``. Its
    amplitude spectrum peaks at ``1 / (2 pi tau)``.
    """
    if not width > 0:
        raise ValueError(f"pulse width must be > 0, got {width}")
    t = grid.times
    if not t[0] <= center_time <= t[-1]:
        raise ValueError(f"pulse centre {center_time} ps lies outside the grid "
                         f"[{t[0]}, {t[-1]}] ps")
    x = (t - center_time) / width
    E = -amplitude * x * np.exp(-0.5 * x * x)
    peak = np.abs(amplitude) * np.exp(-0.5)
    edge = max(abs(E[0]), abs(E[-1]))
    if edge > 1e-6 * peak:
        raise ValueError(f"pulse centred at {center_time} ps is clipped by the grid edge "
                         f"(edge/peak = {edge / peak:.2e})")
    return Waveform(grid, E)


def ideal_cube(scene: Scene, pulse: Waveform) -> DataCube:
    """Ground-truth per-pixel waveforms behind each scene column.

    Propagation is applied in the frequency domain on the pulse's own DFT
    bins, so delays are circular within the time window.
    """
    grid = pulse.grid
    spectrum = np.fft.rfft(pulse.field)
    freqs = grid.freqs
    fields = np.empty((scene.N, grid.nt))
    cache = {}
    for p, column in enumerate(scene.flat_columns()):
        if column not in cache:
            T = pixel_transfer_function(column, freqs)
            cache[column] = np.fft.irfft(spectrum * T, n=grid.nt)
        fields[p] = cache[column]
    return DataCube(n=scene.n, grid=grid, fields=fields)


def measure(cube: DataCube, masks: BinaryMaskSet, m: int | None = None,
            noise: NoiseModel | None = None) -> MeasurementSet:
    """Detector records for the first ``m`` ordered masks.

    Each record is the gain-jittered sum of the masked pixel fields plus
    white additive noise. Random draws come from ``noise.seed`` alone.
    """
    basis = masks.basis
    if basis.N != cube.N:
        raise ValueError(f"mask set has N={basis.N} but the cube has N={cube.N}")
    if m is None:
        m = basis.N
    if not 1 <= m <= basis.N:
        raise ValueError(f"m={m} outside [1, {basis.N}]")
    noise = noise or NoiseModel.noiseless()

    clean = masks.matrix(m) @ cube.fields
    # record 0 is the all-open mask
    peak0 = float(np.max(np.abs(clean[0])))

    rng = np.random.default_rng(noise.seed)
    gains = 1.0 + noise.multiplicative_sigma * rng.standard_normal(m)
    eps = rng.standard_normal((m, cube.grid.nt)) * (noise.additive_sigma * peak0)
    records = gains[:, None] * clean + eps
    return MeasurementSet(N=basis.N, ordering_name=basis.ordering_name,
                          modulation_depth=masks.modulation_depth, grid=cube.grid,
                          records=records, noise=noise)

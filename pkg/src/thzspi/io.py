"""Binary measurement/cube files and PGM/CSV image output.

All binary fields are little-endian. Measurement file::

    b"THZM" | version u32 | N u32 | nt u32 | t0 f64 | dt f64 | mu f64
    | label_len u32 | label utf-8 | m u32 | m*nt f64 (record-major)

Cube file::

    b"THZC" | version u32 | n u32 | nt u32 | t0 f64 | dt f64
    | N*nt f64 (pixel-major, row-major pixels, time fastest)
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .simulator import DataCube, MeasurementSet, TimeGrid

FORMAT_VERSION = 1
MEAS_MAGIC = b"THZM"
CUBE_MAGIC = b"THZC"
PGM_MAXVAL = 65535


class FormatError(ValueError):
    pass


class _Reader:
    def __init__(self, data: bytes, path):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, size: int) -> bytes:
        if self.pos + size > len(self.data):
            raise FormatError(f"{self.path}: truncated file (needed {size} bytes at "
                              f"offset {self.pos}, file has {len(self.data)})")
        chunk = self.data[self.pos:self.pos + size]
        self.pos += size
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def samples(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<f8").astype(float)

    def finish(self):
        if self.pos != len(self.data):
            raise FormatError(f"{self.path}: {len(self.data) - self.pos} trailing bytes")


def _header(r: _Reader, magic: bytes):
    got = r.take(4)
    if got != magic:
        raise FormatError(f"{r.path}: bad magic {got!r}, expected {magic!r}")
    (version,) = r.unpack("<I")
    if version != FORMAT_VERSION:
        raise FormatError(f"{r.path}: unsupported format version {version}")


def measurements_to_bytes(meas: MeasurementSet) -> bytes:
    label = meas.ordering_name.encode("utf-8")
    g = meas.grid
    head = (MEAS_MAGIC
            + struct.pack("<III", FORMAT_VERSION, meas.N, g.nt)
            + struct.pack("<ddd", g.t0, g.dt, meas.modulation_depth)
            + struct.pack("<I", len(label)) + label
            + struct.pack("<I", meas.m))
    return head + np.ascontiguousarray(meas.records, dtype="<f8").tobytes()


def measurements_from_bytes(data: bytes, path="<bytes>") -> MeasurementSet:
    r = _Reader(data, path)
    _header(r, MEAS_MAGIC)
    N, nt = r.unpack("<II")
    t0, dt, mu = r.unpack("<ddd")
    (label_len,) = r.unpack("<I")
    try:
        label = r.take(label_len).decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: ordering label is not UTF-8") from exc
    (m,) = r.unpack("<I")
    if not 1 <= m <= N:
        raise FormatError(f"{path}: record count {m} inconsistent with N={N}")
    records = r.samples(m * nt).reshape(m, nt)
    r.finish()
    try:
        return MeasurementSet(N=N, ordering_name=label, modulation_depth=mu,
                              grid=TimeGrid(t0, dt, nt), records=records)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def cube_to_bytes(cube: DataCube) -> bytes:
    g = cube.grid
    head = (CUBE_MAGIC
            + struct.pack("<III", FORMAT_VERSION, cube.n, g.nt)
            + struct.pack("<dd", g.t0, g.dt))
    return head + np.ascontiguousarray(cube.fields, dtype="<f8").tobytes()


def cube_from_bytes(data: bytes, path="<bytes>") -> DataCube:
    r = _Reader(data, path)
    _header(r, CUBE_MAGIC)
    n, nt = r.unpack("<II")
    t0, dt = r.unpack("<dd")
    fields = r.samples(n * n * nt).reshape(n * n, nt)
    r.finish()
    try:
        return DataCube(n=n, grid=TimeGrid(t0, dt, nt), fields=fields)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_measurements(path, meas: MeasurementSet) -> None:
    Path(path).write_bytes(measurements_to_bytes(meas))


def read_measurements(path) -> MeasurementSet:
    return measurements_from_bytes(Path(path).read_bytes(), path)


def write_cube(path, cube: DataCube) -> None:
    Path(path).write_bytes(cube_to_bytes(cube))


def read_cube(path) -> DataCube:
    return cube_from_bytes(Path(path).read_bytes(), path)


# --- images -----------------------------------------------------------------

def image_range(values: np.ndarray) -> tuple[float, float]:
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return 0.0, 0.0
    return float(finite.min()), float(finite.max())


def write_image(prefix, values: np.ndarray) -> dict:
    """Write ``prefix.pgm``, ``prefix.csv`` and ``prefix.range.txt``.

    The PGM is ASCII P2 with maxval 65535, linearly mapped over the finite
    data range; non-finite pixels map to 0. Returns the written paths.
    """
    prefix = Path(prefix)
    values = np.asarray(values, dtype=float)
    lo, hi = image_range(values)
    if hi > lo:
        scaled = np.rint((values - lo) / (hi - lo) * PGM_MAXVAL)
    else:
        scaled = np.zeros_like(values)
    levels = np.where(np.isfinite(scaled), scaled, 0).astype(int)

    rows, cols = values.shape
    pgm = [f"P2\n{cols} {rows}\n{PGM_MAXVAL}\n"]
    pgm += [" ".join(str(v) for v in row) + "\n" for row in levels]
    paths = {
        "pgm": prefix.with_name(prefix.name + ".pgm"),
        "csv": prefix.with_name(prefix.name + ".csv"),
        "range": prefix.with_name(prefix.name + ".range.txt"),
    }
    paths["pgm"].write_text("".join(pgm))
    paths["csv"].write_text("".join(",".join(repr(float(v)) for v in row) + "\n"
                                    for row in values))
    paths["range"].write_text(f"{lo!r} {hi!r}\n")
    return paths


def read_csv_image(path) -> np.ndarray:
    rows = [line.split(",") for line in Path(path).read_text().splitlines() if line]
    return np.array([[float(v) for v in row] for row in rows])


def read_pgm(path) -> tuple[np.ndarray, int]:
    tokens = [tok for line in Path(path).read_text().splitlines()
              if not line.startswith("#") for tok in line.split()]
    if not tokens or tokens[0] != "P2":
        raise FormatError(f"{path}: not an ASCII PGM (P2)")
    cols, rows, maxval = (int(t) for t in tokens[1:4])
    data = np.array([int(t) for t in tokens[4:]])
    if data.size != rows * cols:
        raise FormatError(f"{path}: expected {rows * cols} pixels, got {data.size}")
    return data.reshape(rows, cols), maxval


def read_range(path) -> tuple[float, float]:
    lo, hi = Path(path).read_text().split()
    return float(lo), float(hi)

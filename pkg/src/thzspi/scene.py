"""Layered dielectric scenes and their per-pixel THz transfer functions.

A scene is an n x n grid of pixel columns; each column is a stack of
(material, thickness) layers traversed at normal incidence. Transfer
functions are taken relative to the same path length in free space.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

C_MM_PER_PS = 0.299792458


@dataclass(frozen=True)
class AbsorptionLine:
    """Lorentzian power-absorption line.

    Attributes
    ----------
    f0_thz : float
        Line centre in THz.
    fwhm_thz : float
        Full width at half maximum in THz.
    alpha0_per_cm : float
        Peak power absorption coefficient in 1/cm.
    """

    f0_thz: float
    fwhm_thz: float
    alpha0_per_cm: float

    def __post_init__(self):
        if not self.f0_thz > 0:
            raise ValueError(f"line centre must be > 0, got {self.f0_thz}")
        if not self.fwhm_thz > 0:
            raise ValueError(f"line width must be > 0, got {self.fwhm_thz}")
        if not self.alpha0_per_cm >= 0:
            raise ValueError(f"line strength must be >= 0, got {self.alpha0_per_cm}")

    def alpha(self, freqs) -> np.ndarray:
        hw2 = (0.5 * self.fwhm_thz) ** 2
        f = np.asarray(freqs, dtype=float)
        return self.alpha0_per_cm * hw2 / ((f - self.f0_thz) ** 2 + hw2)


@dataclass(frozen=True)
class Material:
    name: str
    n_r: float
    lines: tuple = ()

    def __post_init__(self):
        if not self.n_r >= 1:
            raise ValueError(f"material {self.name!r}: n_r must be >= 1, got {self.n_r}")
        object.__setattr__(self, "lines", tuple(self.lines))

    def power_absorption(self, freqs) -> np.ndarray:
        """Total power absorption coefficient (1/cm) at ``freqs`` (THz)."""
        alpha = np.zeros(np.shape(freqs))
        for line in self.lines:
            alpha = alpha + line.alpha(freqs)
        return alpha


@dataclass(frozen=True)
class Layer:
    material: Material
    d_mm: float

    def __post_init__(self):
        if not self.d_mm >= 0:
            raise ValueError(f"layer thickness must be >= 0, got {self.d_mm}")


# A pixel column is a tuple of layers; the empty tuple is free space.
PixelColumn = tuple


@dataclass(frozen=True)
class Scene:
    n: int
    pixel_pitch_mm: float
    columns: tuple
    name: str = ""

    def __post_init__(self):
        if self.n < 1 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of 2, got {self.n}")
        cols = tuple(tuple(tuple(c) for c in row) for row in self.columns)
        if len(cols) != self.n or any(len(row) != self.n for row in cols):
            raise ValueError(f"grid must be {self.n}x{self.n}")
        object.__setattr__(self, "columns", cols)

    @property
    def N(self) -> int:
        return self.n * self.n

    def flat_columns(self) -> list:
        """Columns in row-major pixel order."""
        return [c for row in self.columns for c in row]

    def thickness_mm(self) -> np.ndarray:
        """n x n array of total stack thickness."""
        return np.array([[sum(layer.d_mm for layer in c) for c in row]
                         for row in self.columns])

    def materials(self) -> dict:
        found = {}
        for c in self.flat_columns():
            for layer in c:
                found.setdefault(layer.material.name, layer.material)
        return found


def pixel_transfer_function(column, freqs) -> np.ndarray:
    """Complex field transfer of a pixel column relative to free space.

    Each layer contributes a phase delay ``exp(-2j*pi*f*(n_r-1)*d/c)`` and a
    field attenuation ``exp(-alpha(f)*d/2)`` with ``alpha`` in 1/cm.
    """
    f = np.asarray(freqs, dtype=float)
    if np.any(f < 0):
        raise ValueError("frequencies must be non-negative")
    T = np.ones(f.shape, dtype=complex)
    for layer in column:
        d = layer.d_mm
        if d == 0:
            continue
        m = layer.material
        delay_ps = (m.n_r - 1.0) * d / C_MM_PER_PS
        T = T * np.exp(-2j * np.pi * f * delay_ps)
        if m.lines:
            T = T * np.exp(-0.5 * m.power_absorption(f) * (d / 10.0))
    return T


# --- built-in samples -------------------------------------------------------

HDPE = Material("HDPE", 1.58)
PTFE = Material("PTFE", 1.45)
# Line width and strength are modelling assumptions; only the centre is measured.
LACTOSE_PTFE = Material("lactose-PTFE", 1.45, (AbsorptionLine(1.3, 0.1, 30.0),))

# 16x16 HDPE slab, 2 mm thick. "T" is carved through (0 mm left), "Z" is
# carved 1 mm deep (1 mm left). Strokes are two to three pixels wide.
TZ_BITMAP = (
    "................",
    ".TTTTTTT.ZZZZZZ.",
    ".TTTTTTT.ZZZZZZ.",
    "...TTT.......ZZ.",
    "...TTT......ZZZ.",
    "...TTT......ZZ..",
    "...TTT.....ZZZ..",
    "...TTT.....ZZ...",
    "...TTT....ZZZ...",
    "...TTT....ZZ....",
    "...TTT...ZZZ....",
    "...TTT...ZZ.....",
    "...TTT...ZZZZZZ.",
    "...TTT...ZZZZZZ.",
    "................",
    "................",
)

# 8x8 pellets, all 0.7 mm thick: L = lactose/PTFE mixture, P = pure PTFE,
# '.' = free space.
LACTOSE_BITMAP = (
    "........",
    ".LL.....",
    ".LL.PPP.",
    ".LL.PPP.",
    ".LL.PPP.",
    ".LLLL...",
    ".LLLL...",
    "........",
)

BUILTIN_SCENES = ("tz-hdpe-16", "lactose-l-8")


def _tz_hdpe_16() -> Scene:
    depth = {".": 2.0, "T": 0.0, "Z": 1.0}
    grid = [[(Layer(HDPE, depth[ch]),) for ch in row] for row in TZ_BITMAP]
    return Scene(n=16, pixel_pitch_mm=1.0, columns=grid, name="tz-hdpe-16")


def _lactose_l_8() -> Scene:
    cells = {".": (), "L": (Layer(LACTOSE_PTFE, 0.7),), "P": (Layer(PTFE, 0.7),)}
    grid = [[cells[ch] for ch in row] for row in LACTOSE_BITMAP]
    return Scene(n=8, pixel_pitch_mm=2.0, columns=grid, name="lactose-l-8")


def builtin_scene(name: str) -> Scene:
    if name == "tz-hdpe-16":
        return _tz_hdpe_16()
    if name == "lactose-l-8":
        return _lactose_l_8()
    raise ValueError(f"unknown scene {name!r}; built-ins are {BUILTIN_SCENES}")


# --- JSON configuration -----------------------------------------------------

class SceneConfigError(ValueError):
    """Malformed scene configuration; the message names the offending field."""


_TOP_KEYS = {"n", "pixel_pitch_mm", "materials", "grid", "name"}
_MATERIAL_KEYS = {"n_r", "lines"}
_LINE_KEYS = {"f0_thz", "fwhm_thz", "alpha0_per_cm"}
_LAYER_KEYS = {"material", "d_mm"}


def _check_keys(obj, allowed, required, where):
    if not isinstance(obj, dict):
        raise SceneConfigError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise SceneConfigError(f"{where}: unknown key(s) {sorted(unknown)}")
    missing = set(required) - set(obj)
    if missing:
        raise SceneConfigError(f"{where}: missing key(s) {sorted(missing)}")


def _number(value, where) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SceneConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def scene_to_dict(scene: Scene) -> dict:
    materials = {}
    for name, m in sorted(scene.materials().items()):
        materials[name] = {
            "n_r": m.n_r,
            "lines": [{"f0_thz": ln.f0_thz, "fwhm_thz": ln.fwhm_thz,
                       "alpha0_per_cm": ln.alpha0_per_cm} for ln in m.lines],
        }
    grid = [[None if not c else
             [{"material": layer.material.name, "d_mm": layer.d_mm} for layer in c]
             for c in row] for row in scene.columns]
    return {"name": scene.name, "n": scene.n, "pixel_pitch_mm": scene.pixel_pitch_mm,
            "materials": materials, "grid": grid}


def dump_scene(scene: Scene) -> str:
    return json.dumps(scene_to_dict(scene), indent=1)


def load_scene(config_text: str) -> Scene:
    """Parse a JSON scene configuration.

    Raises
    ------
    SceneConfigError
        On syntax errors (with line/column) or schema violations (with the
        path of the offending field).
    """
    try:
        doc = json.loads(config_text)
    except json.JSONDecodeError as exc:
        raise SceneConfigError(
            f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None

    _check_keys(doc, _TOP_KEYS, ("n", "pixel_pitch_mm", "materials", "grid"), "scene")
    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int):
        raise SceneConfigError(f"n: expected an integer, got {n!r}")
    if n < 1 or n & (n - 1):
        raise SceneConfigError(f"n: n must be a power of 2, got {n}")
    pitch = _number(doc["pixel_pitch_mm"], "pixel_pitch_mm")

    if not isinstance(doc["materials"], dict):
        raise SceneConfigError("materials: expected an object")
    materials = {}
    for name, spec in doc["materials"].items():
        where = f"materials.{name}"
        _check_keys(spec, _MATERIAL_KEYS, ("n_r",), where)
        lines = []
        for i, ln in enumerate(spec.get("lines", [])):
            lw = f"{where}.lines[{i}]"
            _check_keys(ln, _LINE_KEYS, _LINE_KEYS, lw)
            try:
                lines.append(AbsorptionLine(_number(ln["f0_thz"], lw + ".f0_thz"),
                                            _number(ln["fwhm_thz"], lw + ".fwhm_thz"),
                                            _number(ln["alpha0_per_cm"], lw + ".alpha0_per_cm")))
            except SceneConfigError:
                raise
            except ValueError as exc:
                raise SceneConfigError(f"{lw}: {exc}") from None
        try:
            materials[name] = Material(name, _number(spec["n_r"], where + ".n_r"), lines)
        except SceneConfigError:
            raise
        except ValueError as exc:
            raise SceneConfigError(f"{where}: {exc}") from None

    grid = doc["grid"]
    if not isinstance(grid, list) or len(grid) != n:
        raise SceneConfigError(f"grid: expected {n} rows")
    columns = []
    for i, row in enumerate(grid):
        if not isinstance(row, list) or len(row) != n:
            raise SceneConfigError(f"grid[{i}]: expected {n} entries")
        out_row = []
        for j, cell in enumerate(row):
            where = f"grid[{i}][{j}]"
            if cell is None:
                out_row.append(())
                continue
            if not isinstance(cell, list):
                raise SceneConfigError(f"{where}: expected null or a list of layers")
            layers = []
            for k, layer in enumerate(cell):
                lw = f"{where}[{k}]"
                _check_keys(layer, _LAYER_KEYS, _LAYER_KEYS, lw)
                if layer["material"] not in materials:
                    raise SceneConfigError(f"{lw}.material: undefined material "
                                           f"{layer['material']!r}")
                d = _number(layer["d_mm"], lw + ".d_mm")
                if d < 0:
                    raise SceneConfigError(f"{lw}.d_mm: thickness must be >= 0")
                layers.append(Layer(materials[layer["material"]], d))
            out_row.append(tuple(layers))
        columns.append(out_row)

    name = doc.get("name", "")
    if not isinstance(name, str):
        raise SceneConfigError("name: expected a string")
    return Scene(n=n, pixel_pitch_mm=pitch, columns=columns, name=name)

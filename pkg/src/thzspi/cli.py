"""Command-line pipeline: scene -> simulate -> reconstruct -> analyze.

Examples
--------
    thzspi scene emit tz-hdpe-16 --out tz.json
    thzspi simulate --scene tz-hdpe-16 --seed 42 --out run/
    thzspi reconstruct --meas run/meas_seed42.thzm --cr 0.4 --out run/cr40.thzc
    thzspi analyze tof --cube run/cr40.thzc --reference run/reference.thzc --out run/tof
    thzspi sweep-cr --scene tz-hdpe-16 --seed 0 1 2 --cr 1 0.8 0.6 0.4 --out sweep/
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, io
from .patterns import ORDERINGS, binary_masks, make_basis
from .recon import count_for_ratio, debias, invert_compressive, invert_full, reconstruct
from .scene import BUILTIN_SCENES, Scene, builtin_scene, dump_scene, load_scene
from .simulator import DataCube, NoiseModel, TimeGrid, ideal_cube, measure, synthesize_pulse

log = logging.getLogger("thzspi")


@dataclass
class RunManifest:
    scene: str = "tz-hdpe-16"
    t0_ps: float = 0.0
    dt_ps: float = 0.05
    nt: int = 1024
    pulse_center_ps: float = 10.0
    pulse_width_ps: float = 0.3
    pulse_amplitude: float = 1.0
    mu: float = 0.95
    noise_add: float = 0.005
    noise_mult: float = 0.0
    ordering: str = "sequency2d"
    n_r: float = 1.58
    crs: list = field(default_factory=lambda: [1.0, 0.8, 0.6, 0.4])
    seeds: list = field(default_factory=lambda: [0])
    out: str = "."

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("manifest needs at least one seed")
        for cr in self.crs:
            if not 0 < cr <= 1:
                raise ValueError(f"compression ratio {cr} outside (0, 1]")
        if self.ordering not in ORDERINGS:
            raise ValueError(f"unknown ordering {self.ordering!r}")
        if not 0 < self.mu <= 1:
            raise ValueError(f"mu={self.mu} outside (0, 1]")
        self.seeds = [int(s) for s in self.seeds]
        self.crs = [float(c) for c in self.crs]

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.t0_ps, self.dt_ps, self.nt)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        doc = json.loads(text)
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"manifest: unknown field(s) {sorted(unknown)}")
        return cls(**doc)


def resolve_scene(ref: str) -> Scene:
    if ref in BUILTIN_SCENES:
        return builtin_scene(ref)
    path = Path(ref)
    if not path.is_file():
        raise FileNotFoundError(f"scene file not found: {path}")
    return load_scene(path.read_text())


def _pulse(manifest: RunManifest):
    return synthesize_pulse(manifest.grid, manifest.pulse_center_ps,
                            manifest.pulse_width_ps, manifest.pulse_amplitude)


def _write_checked_cube(path: Path, cube: DataCube) -> Path:
    data = io.cube_to_bytes(cube)
    path.write_bytes(data)
    if path.read_bytes() != data:
        raise OSError(f"read-back mismatch for {path}")
    return path


def cmd_simulate(manifest: RunManifest) -> dict:
    """Write full measurement sets (one per seed) plus truth/reference cubes."""
    scene = resolve_scene(manifest.scene)
    out = Path(manifest.out)
    out.mkdir(parents=True, exist_ok=True)

    pulse = _pulse(manifest)
    truth = ideal_cube(scene, pulse)
    masks = binary_masks(make_basis(scene.n, manifest.ordering), manifest.mu)
    written = {"measurements": []}
    for seed in manifest.seeds:
        noise = NoiseModel(manifest.noise_add, manifest.noise_mult, seed)
        meas = measure(truth, masks, noise=noise)
        path = out / f"meas_seed{seed}.thzm"
        data = io.measurements_to_bytes(meas)
        path.write_bytes(data)
        io.read_measurements(path)
        written["measurements"].append(path)
        log.info("seed %d -> %s (N=%d, nt=%d)", seed, path, meas.N, meas.grid.nt)

    written["truth"] = _write_checked_cube(out / "truth.thzc", truth)
    ref = DataCube(n=1, grid=pulse.grid, fields=pulse.field[None, :])
    written["reference"] = _write_checked_cube(out / "reference.thzc", ref)
    written["scene"] = out / "scene.json"
    written["scene"].write_text(dump_scene(scene) + "\n")
    written["manifest"] = out / "manifest.json"
    written["manifest"].write_text(manifest.to_json())
    return written


def cmd_reconstruct(meas_path, cr: float, out_path) -> Path:
    meas = io.read_measurements(meas_path)
    m = count_for_ratio(cr, meas.N)
    log.info("%s: N=%d, using m=%d patterns (CR=%g)", meas_path, meas.N, m, cr)
    cube = reconstruct(meas, cr)
    return _write_checked_cube(Path(out_path), cube)


def _reference_waveform(path):
    ref = io.read_cube(path)
    if ref.N != 1:
        raise ValueError(f"{path}: reference must be a single-pixel cube, has N={ref.N}")
    return ref.pixel(0)


def cmd_analyze(cube_path, mode: str, reference_path, out_prefix,
                f0_thz: float | None = None, n_r: float = 1.58,
                avg_bins: int = analysis.AVG_BINS) -> dict:
    """Write a thickness (``tof``) or transmission (``spectral``) image."""
    cube = io.read_cube(cube_path)
    ref = _reference_waveform(reference_path)
    if ref.grid != cube.grid:
        raise ValueError("reference and cube time grids differ")
    if mode == "tof":
        image = analysis.thickness_map(analysis.delay_map(cube, ref), n_r).values
    elif mode == "spectral":
        if f0_thz is None:
            raise ValueError("spectral mode needs --f0-thz")
        image = analysis.spectral_image(cube, ref, f0_thz, avg_bins).values
    else:
        raise ValueError(f"unknown analysis mode {mode!r}")
    Path(out_prefix).parent.mkdir(parents=True, exist_ok=True)
    paths = io.write_image(out_prefix, image)
    back = io.read_csv_image(paths["csv"])
    if not np.array_equal(back, image, equal_nan=True):
        raise OSError(f"read-back mismatch for {paths['csv']}")
    return paths


SWEEP_COLUMNS = ("cr", "seed", "e_rms", "thickness_rms_error_mm")


def sweep_rows(manifest: RunManifest) -> list:
    """One row per (cr, seed); E_RMS is against the CR=1 result of that seed."""
    scene = resolve_scene(manifest.scene)
    pulse = _pulse(manifest)
    truth = ideal_cube(scene, pulse)
    basis = make_basis(scene.n, manifest.ordering)
    masks = binary_masks(basis, manifest.mu)
    true_d = scene.thickness_mm()

    rows = []
    for seed in manifest.seeds:
        meas = measure(truth, masks, noise=NoiseModel(manifest.noise_add,
                                                       manifest.noise_mult, seed))
        coeffs = debias(meas)
        full = invert_full(coeffs, basis)
        for cr in manifest.crs:
            m = count_for_ratio(cr, basis.N)
            cube = full if m == basis.N else invert_compressive(coeffs, basis, m)
            th = analysis.thickness_map(analysis.delay_map(cube, pulse), manifest.n_r)
            diff = (th.values - true_d)[th.valid]
            d_err = float(np.sqrt(np.mean(diff ** 2))) if diff.size else float("nan")
            rows.append({"cr": cr, "seed": seed,
                         "e_rms": analysis.rms_error_at_peak(cube, full),
                         "thickness_rms_error_mm": d_err})
    return rows


def cmd_sweep_cr(manifest: RunManifest) -> Path:
    rows = sweep_rows(manifest)
    out = Path(manifest.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep_cr.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for r in rows:
            writer.writerow([repr(float(r["cr"])), r["seed"], repr(r["e_rms"]),
                             repr(r["thickness_rms_error_mm"])])
    (out / "manifest.json").write_text(manifest.to_json())
    return path


def read_sweep(path) -> list:
    with open(path, newline="") as fh:
        return [{"cr": float(r["cr"]), "seed": int(r["seed"]), "e_rms": float(r["e_rms"]),
                 "thickness_rms_error_mm": float(r["thickness_rms_error_mm"])}
                for r in csv.DictReader(fh)]


# --- argument parsing -------------------------------------------------------

def _add_run_args(p, multi_cr: bool):
    p.add_argument("--manifest", help="JSON run manifest; explicit flags override it")
    p.add_argument("--scene", help=f"built-in name {BUILTIN_SCENES} or scene JSON path")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, nargs="+", help="noise seed(s)")
    p.add_argument("--noise-add", type=float, help="additive noise, fraction of open-mask peak")
    p.add_argument("--noise-mult", type=float, help="per-pattern gain jitter")
    p.add_argument("--mu", type=float, help="modulation depth (default 0.95)")
    p.add_argument("--ordering", choices=ORDERINGS)
    p.add_argument("--n-r", type=float, help="refractive index for thickness retrieval")
    if multi_cr:
        p.add_argument("--cr", type=float, nargs="+", help="compression ratios")


def _manifest_from_args(args) -> RunManifest:
    if args.manifest:
        manifest = RunManifest.from_json(Path(args.manifest).read_text())
    else:
        manifest = RunManifest()
    doc = asdict(manifest)
    overrides = {"scene": args.scene, "out": args.out, "seeds": args.seed,
                 "noise_add": args.noise_add, "noise_mult": args.noise_mult,
                 "mu": args.mu, "ordering": args.ordering, "n_r": args.n_r,
                 "crs": getattr(args, "cr", None)}
    doc.update({k: v for k, v in overrides.items() if v is not None})
    return RunManifest(**doc)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thzspi", description="Time-domain THz single-pixel imaging simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scene", help="scene utilities")
    scene_sub = p.add_subparsers(dest="scene_command", required=True)
    pe = scene_sub.add_parser("emit", help="write a built-in scene as JSON")
    pe.add_argument("name", choices=BUILTIN_SCENES)
    pe.add_argument("--out", help="output file (default stdout)")

    _add_run_args(sub.add_parser("simulate", help="synthesize measurement files"), False)

    p = sub.add_parser("reconstruct", help="recover a data cube from measurements")
    p.add_argument("--meas", required=True, help="measurement file (.thzm)")
    p.add_argument("--cr", type=float, default=1.0, help="compression ratio in (0, 1]")
    p.add_argument("--out", required=True, help="output cube file (.thzc)")

    p = sub.add_parser("analyze", help="time-of-flight or spectral images")
    p.add_argument("mode", choices=("tof", "spectral"))
    p.add_argument("--cube", required=True)
    p.add_argument("--reference", required=True, help="single-pixel reference cube")
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--f0-thz", type=float)
    p.add_argument("--n-r", type=float, default=1.58)
    p.add_argument("--avg-bins", type=int, default=analysis.AVG_BINS)

    _add_run_args(sub.add_parser("sweep-cr", help="E_RMS versus compression ratio"), True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "scene":
            text = dump_scene(builtin_scene(args.name)) + "\n"
            if args.out:
                Path(args.out).write_text(text)
            else:
                sys.stdout.write(text)
        elif args.command == "simulate":
            written = cmd_simulate(_manifest_from_args(args))
            for path in written["measurements"]:
                print(path)
        elif args.command == "reconstruct":
            print(cmd_reconstruct(args.meas, args.cr, args.out))
        elif args.command == "analyze":
            paths = cmd_analyze(args.cube, args.mode, args.reference, args.out,
                                args.f0_thz, args.n_r, args.avg_bins)
            for path in paths.values():
                print(path)
        elif args.command == "sweep-cr":
            print(cmd_sweep_cr(_manifest_from_args(args)))
    except (OSError, ValueError) as exc:
        print(f"thzspi: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

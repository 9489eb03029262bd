"""Command-line entry point: ``femtovox <command> ...``.

Exit codes: 0 success, 1 validation error, 2 file format error,
3 hologram did not converge, 4 infeasible frame plan.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

import numpy as np

from . import cgh
from .config import load_config
from .energy import EnergyBudget, ExposureGuard, budget_report, dots_per_pulse
from .io import formats, pgm
from .optics import LaserProfile, axial_spot_length, focal_area, lateral_spot_diameter
from .presets import available_presets, breakdown_energy, load_profile, optical_train
from .scheduler import InfeasiblePlanError, plan_frame, simulate

log = logging.getLogger("femtovox")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_FORMAT = 2
EXIT_NOT_CONVERGED = 3
EXIT_INFEASIBLE = 4


def _write_json(path, doc) -> None:
    text = formats.dumps_json(doc)
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _out_dir(args, cfg) -> str:
    out = args.out or cfg.out_dir
    os.makedirs(out, exist_ok=True)
    return out


def cmd_synth(args) -> int:
    cfg = load_config(args.config, seed=args.seed, grid_size=args.grid, ora_workers=args.workers)
    targets = formats.read_spots(args.spots)
    if not targets:
        raise formats.SpotsValidationError(f"{args.spots}: no spots given")
    geometry = cfg.geometry()
    holo, report = cgh.ora_optimize(targets, geometry, cfg.ora_params())
    out = _out_dir(args, cfg)
    phase_path = os.path.join(out, "phase.pgm")
    pgm.write_phase_map(phase_path, holo)
    doc = {
        "schema_version": pgm.SCHEMA_VERSION,
        "kind": "synth_report",
        "phase_map": "phase.pgm",
        "size_n": geometry.size_n,
        "pixel_pitch_m": geometry.pixel_pitch,
        "wavelength_m": geometry.wavelength,
        "seed": cfg.seed,
        "targets": [[t.index_vx, t.index_vy, t.desired_intensity] for t in targets],
        **report.to_dict(),
    }
    _write_json(os.path.join(out, "synth_report.json"), doc)
    if not report.converged:
        log.error("hologram did not converge after %d iterations", report.iterations)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    cfg = load_config(args.config, seed=args.seed)
    holo = pgm.read_phase_map(args.phase_map, cfg.pixel_pitch_um * 1e-6, args.expect_size)
    targets = formats.read_spots(args.spots) if args.spots else []
    cgh.validate_targets(targets, holo.size_n) if targets else None
    field = cgh.reconstruct(holo)
    out = _out_dir(args, cfg)
    pgm.write_intensity_map(os.path.join(out, "intensity.pgm"), field, targets)
    return EXIT_OK


def _laser(args, cfg) -> LaserProfile:
    laser = load_profile(args.preset or cfg.profile).laser
    energy = laser.pulse_energy if args.energy_mj is None else args.energy_mj * 1e-3
    width = laser.pulse_width if args.pulse_width_fs is None else args.pulse_width_fs * 1e-15
    return LaserProfile(energy, width, laser.repetition_rate, laser.wavelength)


def _budget(args, cfg, laser: LaserProfile, medium: str = "air") -> EnergyBudget:
    if args.elbd_mj is not None:
        elbd = args.elbd_mj * 1e-3
    else:
        train = optical_train(args.preset or cfg.profile, laser.wavelength)
        elbd = breakdown_energy(laser.pulse_width, medium, focal_area(lateral_spot_diameter(train)))
    return EnergyBudget(laser.pulse_energy, elbd, cfg.slm_efficiency, cfg.train_efficiency)


def cmd_budget(args) -> int:
    cfg = load_config(
        args.config, seed=args.seed,
        slm_efficiency=args.slm_efficiency, train_efficiency=args.train_efficiency,
    )
    preset = args.preset or cfg.profile
    profile = load_profile(preset)
    laser = _laser(args, cfg)
    budget = _budget(args, cfg, laser, args.medium)
    train = optical_train(preset, laser.wavelength)
    report = budget_report(laser, budget, focal_area(lateral_spot_diameter(train)), args.medium)
    if not profile.has_slm and report["n_dot"] > 1:
        report["n_dot_energy_limit"] = report["n_dot"]
        report["n_dot"] = 1
        report["dots_per_second"] = laser.repetition_rate
        report["dpf"] = {k: laser.repetition_rate * float(k) for k in report["dpf"]}
    if report["n_dot"] == 0:
        log.warning(report["message"])
    doc = {"schema_version": pgm.SCHEMA_VERSION, "kind": "budget_report", "preset": preset, **report}
    _write_json(args.out, doc)
    return EXIT_OK


def _plan(args, cfg):
    args.preset = args.profile or cfg.profile
    profile = load_profile(args.preset)
    cloud = formats.read_cloud(args.cloud)
    laser = _laser(args, cfg)
    budget = _budget(args, cfg, laser)
    frame_time = (args.frame_time_ms or cfg.frame_time_ms) * 1e-3
    train = optical_train(args.preset, laser.wavelength)
    plan = plan_frame(
        cloud,
        profile,
        budget,
        frame_time,
        layer_thickness=axial_spot_length(train),
        offset_cell=lateral_spot_diameter(train),
        allow_hologram_changes=args.allow_hologram_changes,
    )
    return plan, profile, budget


def cmd_plan(args) -> int:
    cfg = load_config(args.config, seed=args.seed)
    plan, _, _ = _plan(args, cfg)
    if args.out in (None, "-"):
        sys.stdout.write(formats.dumps_plan(plan))
    else:
        formats.write_plan(args.out, plan)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, seed=args.seed)
    if args.plan:
        plan = formats.read_plan(args.plan)
        # default to the profile the plan was made for
        preset = args.profile or (
            plan.profile_name if plan.profile_name in available_presets() else cfg.profile
        )
        profile = load_profile(preset)
        n_dot = None
    else:
        plan, profile, budget = _plan(args, cfg)
        preset = args.preset
        n_dot = dots_per_pulse(budget) if profile.has_slm else min(1, dots_per_pulse(budget))
    train = optical_train(preset, profile.laser.wavelength)
    guard = ExposureGuard(cell_size=lateral_spot_diameter(train))
    report = simulate(plan, profile, args.horizon_s, guard=guard, n_dot=n_dot)
    out = _out_dir(args, cfg)
    formats.write_plan(os.path.join(out, "plan.json"), plan)
    doc = {"schema_version": pgm.SCHEMA_VERSION, "kind": "sim_report", "profile": profile.name}
    doc.update(report.to_dict())
    _write_json(os.path.join(out, "sim_report.json"), doc)
    with open(os.path.join(out, "timeline.csv"), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["frame", "start_s", "pulses", "dots", "complete"])
        for row in report.timeline:
            writer.writerow([row["frame"], repr(row["start_s"]), row["pulses"], row["dots"], int(row["complete"])])
    if report.violations:
        for v in report.violations:
            log.warning("plan violation: %s", v)
        return EXIT_VALIDATION
    return EXIT_OK


def load_grayscale(path) -> np.ndarray:
    """Grayscale image scaled to ``[0, 1]``; PGM natively, anything else via Pillow."""
    with open(path, "rb") as fh:
        head = fh.read(2)
    if head == b"P5":
        counts, maxval = pgm.read_pgm(path)
        return counts / maxval
    from PIL import Image

    try:
        with Image.open(path) as img:
            full_scale = 65535.0 if img.mode.startswith("I") else 255.0
            arr = np.asarray(img.convert("F"), dtype=float)
    except OSError as exc:
        raise pgm.FormatError(f"cannot read image {path}: {exc}") from None
    return arr / full_scale


def image_to_spots(image: np.ndarray, max_spots: int, threshold: float = 0.5):
    """Bright pixels of `image` as spot targets, evenly subsampled to `max_spots`.

    Pixel ``(row, col)`` becomes target ``(vx=col, vy=row)`` with intensity
    proportional to its value.
    """
    if max_spots < 0:
        raise ValueError("max_spots must be non-negative")
    rows, cols = np.nonzero(image > threshold)
    if len(rows) > max_spots:
        keep = np.unique(np.round(np.linspace(0, len(rows) - 1, max_spots)).astype(int))
        rows, cols = rows[keep], cols[keep]
    if len(rows) == 0:
        return []
    values = image[rows, cols]
    values = values / values.max()
    return [cgh.SpotTarget(int(c), int(r), float(v)) for r, c, v in zip(rows, cols, values)]


def cmd_image2spots(args) -> int:
    load_config(args.config, seed=args.seed)
    image = load_grayscale(args.image)
    targets = image_to_spots(image, args.max_spots, args.threshold)
    if not targets:
        log.warning("no pixel above threshold %g; writing an empty spot list", args.threshold)
    text = formats.format_spots(targets)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return EXIT_OK


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value run configuration file")
    p.add_argument("--seed", type=int, default=None, help="random seed (default from config, 0)")
    p.add_argument("--out", help="output path or directory")


def _energy_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--energy-mj", type=float, help="override pulse energy [mJ]")
    p.add_argument("--pulse-width-fs", type=float, help="override pulse width [fs]")
    p.add_argument("--elbd-mj", type=float, help="breakdown energy per voxel [mJ]")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="femtovox",
        description="Hologram synthesis, energy budgets and scan planning for laser-plasma voxel displays.",
        epilog="exit codes: 0 ok, 1 validation, 2 file format, 3 not converged, 4 infeasible plan",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="design a multi-spot phase hologram")
    p.add_argument("spots", help="spot list: 'vx vy intensity [focal_f_mm]' per line")
    p.add_argument("--grid", type=int, help="hologram side in pixels")
    p.add_argument("--workers", type=int, help="threads for the ORA inner loop")
    _common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("reconstruct", help="Fourier reconstruction of a phase map")
    p.add_argument("phase_map")
    p.add_argument("--spots", help="spot list whose intensities should be reported")
    p.add_argument("--expect-size", type=int, help="reject maps of another size")
    _common(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("budget", help="voxel count and throughput for a laser preset")
    p.add_argument("--preset", help="device/laser preset name or .cfg path")
    p.add_argument("--medium", default="air", choices=["air", "water", "fluorescent"])
    p.add_argument("--slm-efficiency", type=float)
    p.add_argument("--train-efficiency", type=float)
    _energy_opts(p)
    _common(p)
    p.set_defaults(func=cmd_budget)

    for name, func in (("plan", cmd_plan), ("simulate", cmd_simulate)):
        p = sub.add_parser(name, help=f"{name} a frame for a voxel cloud")
        p.add_argument("cloud", nargs="?", help="CSV with header x_mm,y_mm,z_mm[,weight]")
        p.add_argument("--profile", help="device profile name or .cfg path")
        p.add_argument("--frame-time-ms", type=float)
        p.add_argument("--allow-hologram-changes", action="store_true")
        _energy_opts(p)
        if name == "simulate":
            p.add_argument("--plan", help="simulate an existing plan JSON instead of planning")
            p.add_argument("--horizon-s", type=float, default=1.0)
        _common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("image2spots", help="convert a grayscale image into a spot list")
    p.add_argument("image")
    p.add_argument("--max-spots", type=int, default=100)
    p.add_argument("--threshold", type=float, default=0.5, help="fraction of full scale")
    _common(p)
    p.set_defaults(func=cmd_image2spots)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO, format="femtovox: %(message)s"
    )
    if args.command in ("plan", "simulate") and not args.cloud and not getattr(args, "plan", None):
        parser.error("a cloud file is required")
    try:
        return args.func(args)
    except pgm.FormatError as exc:
        log.error("format error: %s", exc)
        return EXIT_FORMAT
    except InfeasiblePlanError as exc:
        log.error("%s", exc)
        return EXIT_INFEASIBLE
    except (ValueError, OSError) as exc:
        log.error("validation error: %s", exc)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

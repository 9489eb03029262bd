"""Text file formats: spot lists, voxel clouds, frame plans and key-value configs.

Every format names its units in the header so millimetres and metres
cannot be silently mixed. JSON documents carry ``schema_version``.
"""

from __future__ import annotations

import csv
import io
import json
from decimal import Decimal, InvalidOperation
from typing import Dict, List

import numpy as np

from ..cgh.ora import SpotTarget
from ..scheduler import FramePlan, Slot, VoxelCloud
from .pgm import SCHEMA_VERSION, FormatError

SPOTS_HEADER = "# vx vy intensity focal_f_mm"
CLOUD_COLUMNS = ["x_mm", "y_mm", "z_mm"]


class SpotsValidationError(ValueError):
    """Well-formed spot file whose entries are not a valid target set."""


# Millimetre text <-> metre floats. Shifting the decimal point on the text
# (not multiplying by 1e-3) keeps write -> read -> write byte-identical.


def mm_to_m(text: str) -> float:
    try:
        value = Decimal(text.strip())
    except InvalidOperation:
        raise ValueError(f"not a number: {text!r}") from None
    if not value.is_finite():
        raise ValueError(f"not a finite number: {text!r}")
    return float(value.scaleb(-3))


def m_to_mm(value: float) -> str:
    d = Decimal(repr(float(value))).scaleb(3)
    if d == 0 or 1e-6 <= abs(d) < 1e16:
        return format(d, "f")
    return format(d, "e")


# --- spots -----------------------------------------------------------------


def parse_spots(text: str) -> List[SpotTarget]:
    """Parse ``vx vy intensity [focal_f_mm]`` lines; ``#`` starts a comment."""
    targets = []
    seen: Dict[tuple, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) not in (3, 4):
            raise FormatError(f"line {lineno}: expected 3 or 4 fields, got {len(fields)}")
        try:
            vx, vy = int(fields[0]), int(fields[1])
            intensity = float(fields[2])
            focal = mm_to_m(fields[3]) if len(fields) == 4 else None
        except ValueError:
            raise FormatError(f"line {lineno}: cannot parse {line!r}") from None
        if (vx, vy) in seen:
            raise SpotsValidationError(
                f"line {lineno}: duplicate spot ({vx}, {vy}), first given on line {seen[(vx, vy)]}"
            )
        seen[(vx, vy)] = lineno
        try:
            targets.append(SpotTarget(vx, vy, intensity, focal))
        except ValueError as exc:
            raise SpotsValidationError(f"line {lineno}: {exc}") from None
    return targets


def format_spots(targets) -> str:
    lines = [SPOTS_HEADER]
    for t in targets:
        row = f"{t.index_vx} {t.index_vy} {t.desired_intensity!r}"
        if t.axial_focus_f is not None:
            row += f" {m_to_mm(t.axial_focus_f)}"
        lines.append(row)
    return "\n".join(lines) + "\n"


def read_spots(path) -> List[SpotTarget]:
    with open(path) as fh:
        return parse_spots(fh.read())


def write_spots(path, targets) -> None:
    with open(path, "w") as fh:
        fh.write(format_spots(targets))


# --- voxel clouds ----------------------------------------------------------


def parse_cloud(text: str) -> VoxelCloud:
    """CSV with header ``x_mm,y_mm,z_mm[,weight]``; returns positions in metres."""
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise FormatError("line 1: missing cloud header x_mm,y_mm,z_mm[,weight]")
    header = [h.strip() for h in rows[0]]
    if header[:3] != CLOUD_COLUMNS or header[3:] not in ([], ["weight"]):
        raise FormatError(f"line 1: cloud header must be x_mm,y_mm,z_mm[,weight], got {','.join(header)}")
    width = len(header)
    points, weights = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise FormatError(f"line {lineno}: expected {width} columns, got {len(row)}")
        try:
            points.append([mm_to_m(v) for v in row[:3]])
            weights.append(float(row[3]) if width == 4 else 1.0)
        except ValueError:
            raise FormatError(f"line {lineno}: non-numeric value in {row!r}") from None
    return VoxelCloud(np.array(points).reshape(-1, 3), np.array(weights))


def format_cloud(cloud: VoxelCloud, with_weights: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CLOUD_COLUMNS + (["weight"] if with_weights else []))
    for p, w in zip(cloud.points, cloud.weights):
        row = [m_to_mm(v) for v in p]
        if with_weights:
            row.append(repr(float(w)))
        writer.writerow(row)
    return buf.getvalue()


def read_cloud(path) -> VoxelCloud:
    with open(path, newline="") as fh:
        return parse_cloud(fh.read())


def write_cloud(path, cloud: VoxelCloud, with_weights: bool = False) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(format_cloud(cloud, with_weights))


# --- frame plans -----------------------------------------------------------


def plan_to_dict(plan: FramePlan) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "frame_plan",
        "profile": plan.profile_name,
        "frame_time_s": plan.frame_time,
        "repetition_rate_hz": plan.repetition_rate,
        "duration_s": plan.duration,
        "voxels_m": [[float(v) for v in p] for p in plan.voxel_positions],
        "holograms": [
            {"id": hid, "offsets_m": [list(o) for o in offsets]}
            for hid, offsets in sorted(plan.holograms.items())
        ],
        "slots": [
            {
                "time_offset_s": s.time_offset,
                "galvano_xy_rad": list(s.galvano_xy),
                "varifocal_f_m": s.varifocal_f,
                "hologram_id": s.hologram_id,
                "voxel_indices": list(s.voxel_indices),
            }
            for s in plan.slots
        ],
    }


def plan_from_dict(doc: dict) -> FramePlan:
    if doc.get("kind") != "frame_plan":
        raise FormatError("document is not a frame plan")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise FormatError(f"unsupported plan schema_version {doc.get('schema_version')!r}")
    try:
        slots = tuple(
            Slot(
                float(s["time_offset_s"]),
                tuple(float(a) for a in s["galvano_xy_rad"]),
                float(s["varifocal_f_m"]),
                None if s["hologram_id"] is None else int(s["hologram_id"]),
                tuple(int(v) for v in s["voxel_indices"]),
            )
            for s in doc["slots"]
        )
        holograms = {
            int(h["id"]): tuple(tuple(float(v) for v in o) for o in h["offsets_m"])
            for h in doc["holograms"]
        }
        voxels = np.array(doc["voxels_m"], dtype=float).reshape(-1, 3)
        return FramePlan(
            slots,
            float(doc["frame_time_s"]),
            float(doc["repetition_rate_hz"]),
            voxels,
            holograms,
            str(doc["profile"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed frame plan: {exc}") from None


def dumps_json(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def dumps_plan(plan: FramePlan) -> str:
    return dumps_json(plan_to_dict(plan))


def loads_plan(text: str) -> FramePlan:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"line {exc.lineno}: invalid JSON: {exc.msg}") from None
    return plan_from_dict(doc)


def write_plan(path, plan: FramePlan) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_plan(plan))


def read_plan(path) -> FramePlan:
    with open(path) as fh:
        return loads_plan(fh.read())


# --- key-value configs -----------------------------------------------------


def parse_keyvalue(text: str) -> Dict[str, str]:
    """``key = value`` per line, ``#`` comments, later keys override earlier ones."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise FormatError(f"line {lineno}: empty key")
        out[key] = value
    return out


def format_keyvalue(values: Dict[str, object]) -> str:
    return "".join(f"{k} = {v}\n" for k, v in values.items())


def read_keyvalue(path) -> Dict[str, str]:
    with open(path) as fh:
        return parse_keyvalue(fh.read())

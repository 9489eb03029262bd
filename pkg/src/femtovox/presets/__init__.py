"""Shipped device profiles and breakdown-energy presets.

Profiles are plain ``key = value`` files. ``FEMTOVOX_PRESET_DIR`` points
at an extra directory searched before the bundled presets.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional

from ..io.formats import read_keyvalue
from ..io.pgm import FormatError
from ..optics import LaserProfile, OpticalTrain, medium_threshold
from ..scheduler import DeviceProfile

PRESET_DIR_ENV = "FEMTOVOX_PRESET_DIR"


@dataclass(frozen=True)
class BreakdownPreset:
    pulse_width: float  # s
    energy: float  # J


#: Lowest pulse energies that produced visible plasma in air. The 269 fs
#: entry is System B's full pulse energy: it writes one voxel per pulse,
#: but its actual threshold was not measured.
BREAKDOWN_PRESETS: Dict[str, BreakdownPreset] = {
    "air_30fs": BreakdownPreset(30e-15, 0.2e-3),
    "air_100fs": BreakdownPreset(100e-15, 0.45e-3),
    "air_269fs": BreakdownPreset(269e-15, 50e-6),
}


class UnknownPresetError(ValueError):
    pass


def _search_dirs() -> List[Path]:
    dirs = []
    env = os.environ.get(PRESET_DIR_ENV)
    if env:
        dirs.append(Path(env))
    dirs.append(Path(str(resources.files(__name__))))
    return dirs


def available_presets() -> List[str]:
    names = set()
    for d in _search_dirs():
        if d.is_dir():
            names.update(p.stem for p in d.glob("*.cfg"))
    return sorted(names)


def preset_values(name_or_path) -> Dict[str, str]:
    path = Path(name_or_path)
    if path.suffix == ".cfg" and path.is_file():
        return read_keyvalue(path)
    for d in _search_dirs():
        candidate = d / f"{name_or_path}.cfg"
        if candidate.is_file():
            return read_keyvalue(candidate)
    raise UnknownPresetError(
        f"unknown preset {str(name_or_path)!r}; available presets: {', '.join(available_presets())}"
    )


def _float(values, key, default=None) -> float:
    if key not in values:
        if default is None:
            raise FormatError(f"profile is missing required key {key!r}")
        return default
    try:
        return float(values[key])
    except ValueError:
        raise FormatError(f"profile key {key!r} is not a number: {values[key]!r}") from None


def _bool(values, key, default: bool) -> bool:
    raw = values.get(key)
    if raw is None:
        return default
    if raw.lower() in ("true", "yes", "1"):
        return True
    if raw.lower() in ("false", "no", "0"):
        return False
    raise FormatError(f"profile key {key!r} is not a boolean: {raw!r}")


def laser_from_values(values: Dict[str, str]) -> LaserProfile:
    return LaserProfile(
        _float(values, "laser_pulse_energy_j"),
        _float(values, "laser_pulse_width_s"),
        _float(values, "laser_repetition_rate_hz"),
        _float(values, "laser_wavelength_m"),
    )


def profile_from_values(values: Dict[str, str]) -> DeviceProfile:
    return DeviceProfile(
        laser=laser_from_values(values),
        galvano_rate=_float(values, "galvano_rate_hz", 1000.0),
        galvano_range=_float(values, "galvano_range_rad"),
        scan_half_width=_float(values, "scan_half_width_m", 5e-3),
        slm_response=_float(values, "slm_response_s", 0.1),
        varifocal_response=_float(values, "varifocal_response_s", 2.5e-3),
        varifocal_range=(_float(values, "varifocal_f_min_m"), _float(values, "varifocal_f_max_m")),
        has_slm=_bool(values, "has_slm", True),
        galvano_error=_float(values, "galvano_error_rad", 0.0),
        name=values.get("name", "custom"),
    )


def load_profile(name_or_path) -> DeviceProfile:
    return profile_from_values(preset_values(name_or_path))


def load_laser(name_or_path) -> LaserProfile:
    return laser_from_values(preset_values(name_or_path))


def optical_train(name_or_path, wavelength: Optional[float] = None) -> OpticalTrain:
    """Final focusing geometry of a preset (objective focal length, beam width)."""
    values = preset_values(name_or_path)
    return OpticalTrain(
        wavelength if wavelength is not None else _float(values, "laser_wavelength_m"),
        _float(values, "beam_width_m", 10e-3),
        _float(values, "objective_focal_length_m", 0.040),
    )


def breakdown_energy(
    pulse_width: float, medium: str = "air", focal_area_cm2: Optional[float] = None, thresholds=None
) -> float:
    """Breakdown pulse energy [J] for `pulse_width` [s] in `medium`.

    Air uses the measured presets (matched within 1 % of pulse width).
    Other media derive it from their intensity threshold over
    `focal_area_cm2`.
    """
    if medium == "air":
        for preset in BREAKDOWN_PRESETS.values():
            if abs(preset.pulse_width - pulse_width) <= 0.01 * preset.pulse_width:
                return preset.energy
        known = ", ".join(f"{p.pulse_width * 1e15:g} fs" for p in BREAKDOWN_PRESETS.values())
        raise UnknownPresetError(
            f"no air breakdown preset for {pulse_width * 1e15:g} fs (known: {known}); "
            "give the breakdown energy explicitly"
        )
    if focal_area_cm2 is None:
        raise ValueError("focal_area_cm2 is required for non-air media")
    return medium_threshold(medium, thresholds) * pulse_width * focal_area_cm2

"""Run configuration shared by the command-line tools.

Config files use the same ``key = value`` format as device profiles; keys
carry unit suffixes.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from typing import Optional

from .cgh import HologramGeometry, OraParams
from .io.formats import read_keyvalue
from .io.pgm import FormatError
from .presets import preset_values


@dataclass(frozen=True)
class RunConfig:
    profile: str = "system_a"
    grid_size: int = 256
    pixel_pitch_um: float = 20.0
    wavelength_nm: Optional[float] = None  # None: take the profile's laser wavelength
    beam_width_mm: float = 10.0
    focal_length_mm: float = 40.0
    ora_max_iterations: int = 100
    ora_tolerance: float = 0.02
    ora_alpha: float = 0.3
    ora_workers: int = 1
    seed: int = 0
    frame_time_ms: float = 100.0
    slm_efficiency: float = 1.0
    train_efficiency: float = 1.0
    out_dir: str = "."

    def __post_init__(self):
        preset_values(self.profile)  # raises for unknown presets
        if self.out_dir and os.path.isdir(self.out_dir) and not os.access(self.out_dir, os.W_OK):
            raise ValueError(f"output directory {self.out_dir!r} is not writable")

    @property
    def wavelength(self) -> float:
        if self.wavelength_nm is not None:
            return self.wavelength_nm * 1e-9
        return float(preset_values(self.profile)["laser_wavelength_m"])

    def geometry(self) -> HologramGeometry:
        return HologramGeometry(self.grid_size, self.pixel_pitch_um * 1e-6, self.wavelength)

    def ora_params(self) -> OraParams:
        return OraParams(
            max_iterations=self.ora_max_iterations,
            uniformity_tolerance=self.ora_tolerance,
            alpha=self.ora_alpha,
            rng_seed=self.seed,
            workers=self.ora_workers,
        )

    def updated(self, **overrides) -> "RunConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def load_config(path=None, **overrides) -> RunConfig:
    values = {}
    if path is not None:
        raw = read_keyvalue(path)
        types = {f.name: f.type for f in fields(RunConfig)}
        for key, text in raw.items():
            if key not in types:
                raise FormatError(f"{path}: unknown config key {key!r}")
            kind = types[key]
            try:
                if "int" in kind:
                    values[key] = int(text)
                elif "float" in kind:
                    values[key] = float(text)
                else:
                    values[key] = text
            except ValueError:
                raise FormatError(f"{path}: bad value for {key!r}: {text!r}") from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)

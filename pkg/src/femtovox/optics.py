"""Scalar focal-spot formulas and plasma threshold checks.

Lengths, times and energies are SI. Intensities are W/cm^2 and focal areas
cm^2, the units in which breakdown thresholds are usually quoted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

#: Operational breakdown threshold of air. Ionization physically starts
#: around 1e14 W/cm^2; visible plasma needs about 1 PW/cm^2.
AIR_THRESHOLD_W_CM2 = 1e15
AIR_ONSET_W_CM2 = 1e14

#: Only orders of magnitude are known for the other media, so these are
#: defaults meant to be overridden.
DEFAULT_THRESHOLDS_W_CM2: Mapping[str, float] = {
    "air": AIR_THRESHOLD_W_CM2,
    "water": 1e12,
    "fluorescent": 1e6,
}

M2_TO_CM2 = 1e4


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not (value > 0 and math.isfinite(value)):
            raise ValueError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class OpticalTrain:
    """Focusing geometry of the final objective.

    Parameters
    ----------
    wavelength : float
        Laser wavelength [m].
    beam_width_a : float
        Beam diameter entering the objective [m].
    focal_length_r : float
        Objective focal length [m].
    stage_apertures : sequence of float, optional
        Clear apertures [m] of lens stages the beam must pass through.
    """

    wavelength: float
    beam_width_a: float
    focal_length_r: float
    stage_apertures: Sequence[float] = field(default=())

    def __post_init__(self):
        _require_positive(
            wavelength=self.wavelength,
            beam_width_a=self.beam_width_a,
            focal_length_r=self.focal_length_r,
        )
        for aperture in self.stage_apertures:
            if self.beam_width_a > aperture:
                raise ValueError(
                    f"beam width {self.beam_width_a} m exceeds stage aperture {aperture} m"
                )


@dataclass(frozen=True)
class LaserProfile:
    """A pulsed source: energy [J], width [s], repetition rate [Hz], wavelength [m]."""

    pulse_energy: float
    pulse_width: float
    repetition_rate: float
    wavelength: float

    def __post_init__(self):
        _require_positive(
            pulse_energy=self.pulse_energy,
            pulse_width=self.pulse_width,
            repetition_rate=self.repetition_rate,
            wavelength=self.wavelength,
        )

    @property
    def average_power(self) -> float:
        return self.pulse_energy * self.repetition_rate

    @property
    def pulse_period(self) -> float:
        return 1.0 / self.repetition_rate


@dataclass(frozen=True)
class FocalSpot:
    lateral_diameter_wf: float
    axial_length_wd: float
    area: float  # cm^2


def lateral_spot_diameter(train: OpticalTrain) -> float:
    """Diffraction-limited focal diameter across the beam, ``2 lambda r / a``."""
    return 2.0 * train.wavelength * train.focal_length_r / train.beam_width_a


def axial_spot_length(train: OpticalTrain) -> float:
    """Focal length along the beam, ``4 lambda (r / a)**2``.

    Follows from similar triangles between the converging cone and the
    lateral spot, so ``axial / lateral == 2 r / a``.
    """
    ratio = train.focal_length_r / train.beam_width_a
    return 4.0 * train.wavelength * ratio * ratio


def focal_area(wf: float) -> float:
    """Area [cm^2] of a circular focal cross-section of diameter `wf` [m]."""
    _require_positive(wf=wf)
    return math.pi * (wf / 2.0) ** 2 * M2_TO_CM2


def focal_spot(train: OpticalTrain) -> FocalSpot:
    wf = lateral_spot_diameter(train)
    return FocalSpot(wf, axial_spot_length(train), focal_area(wf))


def peak_intensity(laser: LaserProfile, area: float) -> float:
    """Peak intensity [W/cm^2] of a flat-top pulse over `area` [cm^2]."""
    _require_positive(area=area)
    return laser.pulse_energy / laser.pulse_width / area


def medium_threshold(medium: str, thresholds: Optional[Mapping[str, float]] = None) -> float:
    table = DEFAULT_THRESHOLDS_W_CM2 if thresholds is None else {**DEFAULT_THRESHOLDS_W_CM2, **thresholds}
    try:
        return table[medium]
    except KeyError:
        raise ValueError(
            f"unknown medium {medium!r}; known media: {', '.join(sorted(table))}"
        ) from None


def exceeds_plasma_threshold(
    intensity: float, medium: str = "air", thresholds: Optional[Mapping[str, float]] = None
) -> bool:
    if intensity < 0:
        raise ValueError("intensity must be non-negative")
    return intensity > medium_threshold(medium, thresholds)


def threshold_margin(
    intensity: float, medium: str = "air", thresholds: Optional[Mapping[str, float]] = None
) -> float:
    """Ratio of `intensity` to the breakdown threshold of `medium`."""
    return intensity / medium_threshold(medium, thresholds)

"""Pulse-energy accounting, throughput arithmetic and the exposure guard."""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

from .optics import LaserProfile, peak_intensity, threshold_margin

#: Accumulated dwell beyond which leather samples showed heat damage.
MAX_DWELL_MS = 2000.0
#: Contact shutoff deadline: one 60 Hz frame.
CONTACT_SHUTOFF_MS = 17.0


@dataclass(frozen=True)
class EnergyBudget:
    """Energies [J] and optical-train efficiencies feeding the voxel count.

    Efficiencies multiply the pulse energy before it is divided among
    voxels.
    """

    total_pulse_energy_Etot: float
    breakdown_threshold_Elbd: float
    slm_efficiency: float = 1.0
    train_efficiency: float = 1.0

    def __post_init__(self):
        if not self.total_pulse_energy_Etot > 0:
            raise ValueError("total pulse energy must be positive")
        if not self.breakdown_threshold_Elbd > 0:
            raise ValueError("breakdown threshold energy must be positive")
        for name in ("slm_efficiency", "train_efficiency"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {value!r}")

    @property
    def delivered_energy(self) -> float:
        return self.total_pulse_energy_Etot * self.slm_efficiency * self.train_efficiency


@dataclass(frozen=True)
class FrameBudget:
    dots_per_pulse_Ndot: int
    repetition_Frep: float
    frame_time_Tf: float

    def __post_init__(self):
        if self.dots_per_pulse_Ndot < 1:
            raise ValueError("dots per pulse must be >= 1")
        if not (self.repetition_Frep > 0 and self.frame_time_Tf > 0):
            raise ValueError("repetition rate and frame time must be positive")


def dots_per_pulse(budget: EnergyBudget) -> int:
    """Voxels one pulse can ignite: ``floor(E_delivered / E_lbd)``."""
    ratio = budget.delivered_energy / budget.breakdown_threshold_Elbd
    # Absorb rounding such as 0.9e-3 / 0.3e-3 == 2.9999999999999996.
    return max(0, math.floor(ratio * (1.0 + 1e-12)))


def dots_per_frame(frame: FrameBudget) -> float:
    return frame.dots_per_pulse_Ndot * frame.repetition_Frep * frame.frame_time_Tf


def per_frame_rate_limit(Frep: float, frame_rate: float) -> float:
    """Pulses available in one displayed frame."""
    if not (Frep > 0 and frame_rate > 0):
        raise ValueError("rates must be positive")
    return Frep / frame_rate


def budget_report(
    laser: LaserProfile,
    budget: EnergyBudget,
    focal_area_cm2: float,
    medium: str = "air",
    frame_times: Sequence[float] = (1 / 60, 1 / 30, 0.1, 1.0),
    thresholds=None,
) -> dict:
    """JSON-ready summary of voxel count, throughput and threshold margins."""
    n_dot = dots_per_pulse(budget)
    intensity = peak_intensity(laser, focal_area_cm2)
    per_voxel = (
        peak_intensity(
            LaserProfile(
                budget.delivered_energy / n_dot,
                laser.pulse_width,
                laser.repetition_rate,
                laser.wavelength,
            ),
            focal_area_cm2,
        )
        if n_dot
        else 0.0
    )
    report = {
        "n_dot": n_dot,
        "repetition_rate_hz": laser.repetition_rate,
        "dots_per_second": n_dot * laser.repetition_rate,
        "dpf": {f"{t:.6g}": n_dot * laser.repetition_rate * t for t in frame_times},
        "pulses_per_frame": {
            f"{1 / t:.6g}": per_frame_rate_limit(laser.repetition_rate, 1 / t) for t in frame_times
        },
        "efficiencies": {
            "slm": budget.slm_efficiency,
            "train": budget.train_efficiency,
            "combined": budget.slm_efficiency * budget.train_efficiency,
        },
        "energies_j": {
            "total": budget.total_pulse_energy_Etot,
            "delivered": budget.delivered_energy,
            "breakdown_threshold": budget.breakdown_threshold_Elbd,
        },
        "medium": medium,
        "peak_intensity_w_cm2": intensity,
        "per_voxel_peak_intensity_w_cm2": per_voxel,
        "threshold_margin": threshold_margin(intensity, medium, thresholds),
        "per_voxel_threshold_margin": threshold_margin(per_voxel, medium, thresholds),
    }
    if n_dot == 0:
        report["message"] = (
            f"delivered pulse energy {budget.delivered_energy:.4g} J is below the breakdown "
            f"threshold {budget.breakdown_threshold_Elbd:.4g} J; no voxel can be ignited"
        )
    return report


class Verdict(enum.Enum):
    OK = "ok"
    MUST_SHUTOFF = "must_shutoff"
    LIMIT_EXCEEDED = "limit_exceeded"


@dataclass(frozen=True)
class ExposureVerdict:
    status: Verdict
    accumulated_ms: float
    limit_exceeded: bool
    deadline_ms: Optional[float] = None


@dataclass
class ExposureGuard:
    """Per-position dwell ledger enforcing exposure limits.

    Positions [m] are binned into cubic cells of `cell_size` so nearby
    pulses accumulate together. A contact event wins over the dwell limit
    when both apply; ``limit_exceeded`` on the verdict still reports the
    latter. Mutations must be serialized by the caller.
    """

    max_dwell_ms: float = MAX_DWELL_MS
    contact_shutoff_ms: float = CONTACT_SHUTOFF_MS
    cell_size: float = 6.4e-6
    dwell_ledger: Dict[Tuple[int, ...], float] = field(default_factory=lambda: defaultdict(float))
    total_ms: float = 0.0

    def __post_init__(self):
        if not self.max_dwell_ms > self.contact_shutoff_ms > 0:
            raise ValueError("need max_dwell_ms > contact_shutoff_ms > 0")
        if not self.cell_size > 0:
            raise ValueError("cell_size must be positive")
        self.dwell_ledger = defaultdict(float, self.dwell_ledger)

    def cell(self, position) -> Tuple[int, ...]:
        return tuple(math.floor(p / self.cell_size) for p in position)

    def accumulated(self, position) -> float:
        return self.dwell_ledger.get(self.cell(position), 0.0)

    def record(self, position, dwell_ms: float, contact: bool = False) -> ExposureVerdict:
        if dwell_ms < 0 or math.isnan(dwell_ms):
            raise ValueError(f"dwell must be non-negative, got {dwell_ms!r}")
        key = self.cell(position)
        self.dwell_ledger[key] += dwell_ms
        self.total_ms += dwell_ms
        acc = self.dwell_ledger[key]
        exceeded = acc > self.max_dwell_ms
        if contact:
            return ExposureVerdict(Verdict.MUST_SHUTOFF, acc, exceeded, self.contact_shutoff_ms)
        if exceeded:
            return ExposureVerdict(Verdict.LIMIT_EXCEEDED, acc, True)
        return ExposureVerdict(Verdict.OK, acc, False)


def record_exposure(guard: ExposureGuard, position, dwell_ms: float, contact: bool = False):
    """Functional wrapper around :meth:`ExposureGuard.record` returning ``(guard, verdict)``."""
    verdict = guard.record(position, dwell_ms, contact)
    return guard, verdict

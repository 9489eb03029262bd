"""Phase holograms, complex fields and Fourier reconstruction.

Arrays are indexed ``[y, x]`` (row, column). A reconstruction pixel
``(vx, vy)`` is therefore ``field.values[vy, vx]``, in the unshifted DFT
layout where the zero-order spot sits at ``(0, 0)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * np.pi
HOLOGRAM = "hologram"
RECONSTRUCTION = "reconstruction"


def wrap_phase(phase) -> np.ndarray:
    """Wrap angles into ``[0, 2 pi)``.

    ``np.mod`` can return exactly ``2 pi`` for tiny negative inputs, which
    is folded back to 0.
    """
    wrapped = np.mod(np.asarray(phase, dtype=float), TWO_PI)
    wrapped[wrapped >= TWO_PI] = 0.0
    return wrapped


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PhaseHologram:
    """Phase pattern displayed on an ideal phase-only SLM.

    Parameters
    ----------
    phases : ndarray
        Square ``(N, N)`` array of phases; wrapped into ``[0, 2 pi)``.
    pixel_pitch : float
        SLM pixel pitch [m].
    """

    phases: np.ndarray
    pixel_pitch: float = 20e-6

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=float)
        if phases.ndim != 2 or phases.shape[0] != phases.shape[1]:
            raise ValueError(f"hologram must be a square 2-D grid, got shape {phases.shape}")
        check_grid_size(phases.shape[0])
        if not np.all(np.isfinite(phases)):
            raise ValueError("hologram phases must be finite")
        if not self.pixel_pitch > 0:
            raise ValueError("pixel_pitch must be positive")
        object.__setattr__(self, "phases", _readonly(wrap_phase(phases)))

    @property
    def size_n(self) -> int:
        return self.phases.shape[0]

    def field(self, amplitude: float = 1.0) -> "ComplexField":
        """Hologram-plane field under uniform plane-wave illumination."""
        return ComplexField(amplitude * np.exp(1j * self.phases), HOLOGRAM, self.pixel_pitch)

    def __add__(self, other: "PhaseHologram") -> "PhaseHologram":
        if not isinstance(other, PhaseHologram):
            return NotImplemented
        _check_same_geometry(self, other)
        return PhaseHologram(self.phases + other.phases, self.pixel_pitch)

    def __eq__(self, other):
        if not isinstance(other, PhaseHologram):
            return NotImplemented
        return self.pixel_pitch == other.pixel_pitch and np.array_equal(self.phases, other.phases)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Square grid of complex amplitudes on the hologram or reconstruction plane."""

    values: np.ndarray
    plane: str = HOLOGRAM
    pixel_pitch: float = 20e-6

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"field must be a square 2-D grid, got shape {values.shape}")
        if self.plane not in (HOLOGRAM, RECONSTRUCTION):
            raise ValueError(f"unknown plane {self.plane!r}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", _readonly(values))

    @property
    def size_n(self) -> int:
        return self.values.shape[0]

    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def energy(self) -> float:
        return float(np.sum(self.intensity()))

    def at(self, vx: int, vy: int) -> complex:
        return complex(self.values[vy, vx])


def check_grid_size(size_n: int) -> int:
    """Grids must be even and at least 2; powers of two take numpy's fastest FFT path."""
    if int(size_n) != size_n or size_n < 2 or size_n % 2:
        raise ValueError(f"grid size must be an even integer >= 2, got {size_n!r}")
    return int(size_n)


def _check_same_geometry(a, b) -> None:
    if a.size_n != b.size_n or a.pixel_pitch != b.pixel_pitch:
        raise ValueError(
            f"geometry mismatch: {a.size_n}px @ {a.pixel_pitch} m vs {b.size_n}px @ {b.pixel_pitch} m"
        )


def reconstruct(holo: PhaseHologram) -> ComplexField:
    """Far-field (Fourier-plane) reconstruction of a phase hologram.

    Uses a unitary DFT with kernel ``exp(-2 pi i (x vx + y vy) / N)``, so the
    reconstruction carries the same total energy as the unit-amplitude
    hologram field.
    """
    return fourier_transform(holo.field())


def fourier_transform(field: ComplexField) -> ComplexField:
    if field.plane != HOLOGRAM:
        raise ValueError("expected a hologram-plane field")
    values = np.fft.fft2(field.values, norm="ortho")
    return ComplexField(values, RECONSTRUCTION, field.pixel_pitch)


def grating_field(
    size_n: int,
    cycles_x: float,
    cycles_y: float,
    weight: complex = 1.0,
    pixel_pitch: float = 20e-6,
) -> ComplexField:
    """Complex amplitude of a blazed grating steering light to ``(cycles_x, cycles_y)``."""
    size_n = check_grid_size(size_n)
    coords = np.arange(size_n)
    ramp_x = np.exp(1j * TWO_PI * cycles_x * coords / size_n)
    ramp_y = np.exp(1j * TWO_PI * cycles_y * coords / size_n)
    return ComplexField(weight * np.outer(ramp_y, ramp_x), HOLOGRAM, pixel_pitch)


def blazed_grating(
    size_n: int, cycles_x: float, cycles_y: float, pixel_pitch: float = 20e-6
) -> PhaseHologram:
    """Linear phase ramp ``2 pi (cycles_x x + cycles_y y) / N`` (mod 2 pi)."""
    size_n = check_grid_size(size_n)
    coords = np.arange(size_n, dtype=float)
    # The modulo on each axis keeps arguments small before summing.
    px = np.mod(cycles_x * coords, size_n)
    py = np.mod(cycles_y * coords, size_n)
    return PhaseHologram(TWO_PI * (py[:, None] + px[None, :]) / size_n, pixel_pitch)


def superpose(components: Sequence[ComplexField]) -> PhaseHologram:
    """Sum hologram-plane amplitudes and keep only the phase."""
    components = list(components)
    if not components:
        raise ValueError("superpose needs at least one component")
    first = components[0]
    total = np.zeros_like(first.values)
    for comp in components:
        if comp.plane != HOLOGRAM:
            raise ValueError("superpose expects hologram-plane fields")
        _check_same_geometry(first, comp)
        total = total + comp.values
    return PhaseHologram(np.angle(total), first.pixel_pitch)


def uniformity(intensities: Iterable[float]) -> float:
    """Min/max ratio of spot intensities, 1.0 for a perfectly even array."""
    values = np.asarray(list(intensities), dtype=float)
    if values.size == 0:
        raise ValueError("uniformity of an empty list is undefined")
    if np.any(values < 0):
        raise ValueError("intensities must be non-negative")
    peak = values.max()
    if peak <= 0:
        raise ValueError("uniformity is undefined when every intensity is zero")
    return float(values.min() / peak)


def spot_intensities(field: ComplexField, targets) -> np.ndarray:
    """Intensity at each target pixel; `targets` items need ``index_vx``/``index_vy``."""
    return np.array([abs(field.values[t.index_vy, t.index_vx]) ** 2 for t in targets])

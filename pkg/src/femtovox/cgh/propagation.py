"""Fresnel lens phases and scalar Fresnel propagation.

Phase convention: fields evolve as ``exp(i (w t - k z))``, so the positive
quadratic phase ``k (x^2 + y^2) / (2 f)`` converges to a focus at ``+f``.
"""

from __future__ import annotations

import numpy as np

from .fields import HOLOGRAM, TWO_PI, ComplexField, PhaseHologram, check_grid_size


def centered_coordinates(size_n: int, pixel_pitch: float) -> np.ndarray:
    """Physical pixel coordinates [m] with the origin at index ``N // 2``."""
    return (np.arange(size_n) - size_n // 2) * pixel_pitch


def lens_phase_1d(size_n: int, pixel_pitch: float, wavelength: float, focal_f: float) -> np.ndarray:
    """One axis of the separable lens phase (unwrapped)."""
    if focal_f == 0:
        raise ValueError("focal length must be non-zero")
    if not (wavelength > 0 and pixel_pitch > 0):
        raise ValueError("wavelength and pixel_pitch must be positive")
    k = TWO_PI / wavelength
    c = centered_coordinates(size_n, pixel_pitch)
    return k * c * c / (2.0 * focal_f)


def fresnel_lens_phase(
    size_n: int, pixel_pitch: float, wavelength: float, focal_f: float
) -> PhaseHologram:
    """Quadratic phase of a thin lens of focal length `focal_f` [m]."""
    size_n = check_grid_size(size_n)
    axis = lens_phase_1d(size_n, pixel_pitch, wavelength, focal_f)
    return PhaseHologram(axis[:, None] + axis[None, :], pixel_pitch)


def fresnel_propagate(
    field: ComplexField, distance: float, wavelength: float, pixel_pitch: float | None = None
) -> ComplexField:
    """Propagate `field` by `distance` [m] with the Fresnel transfer function.

    The transfer function has unit modulus, so energy is conserved and the
    sampling grid is unchanged. The grid is periodic: light leaving one
    edge re-enters from the opposite side.
    """
    if not distance > 0:
        raise ValueError("propagation distance must be positive")
    if not wavelength > 0:
        raise ValueError("wavelength must be positive")
    pitch = field.pixel_pitch if pixel_pitch is None else pixel_pitch
    n = field.size_n
    freqs = np.fft.fftfreq(n, pitch)
    k = TWO_PI / wavelength
    # Separable: exp(i pi lambda z (fx^2 + fy^2)) = h(fy) h(fx)
    h = np.exp(1j * np.pi * wavelength * distance * freqs**2)
    transfer = np.exp(-1j * k * distance) * np.outer(h, h)
    out = np.fft.ifft2(np.fft.fft2(field.values) * transfer)
    return ComplexField(out, HOLOGRAM, pitch)

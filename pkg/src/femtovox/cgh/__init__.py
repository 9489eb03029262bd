"""Phase-only computer-generated holograms."""

import numpy as np

from .fields import (
    HOLOGRAM,
    RECONSTRUCTION,
    ComplexField,
    PhaseHologram,
    blazed_grating,
    fourier_transform,
    grating_field,
    reconstruct,
    spot_intensities,
    superpose,
    uniformity,
    wrap_phase,
)
from .ora import HologramGeometry, OraParams, OraReport, SpotTarget, ora_optimize, validate_targets
from .propagation import centered_coordinates, fresnel_lens_phase, fresnel_propagate


def target_hologram(targets, geometry: HologramGeometry) -> PhaseHologram:
    """Equal-weight superposition of one grating (plus lens) per target.

    The analytic starting point ORA improves on; spot intensities are
    generally uneven.
    """
    comps = []
    for t in targets:
        comp = grating_field(geometry.size_n, t.index_vx, t.index_vy, pixel_pitch=geometry.pixel_pitch)
        if t.axial_focus_f is not None:
            lens = fresnel_lens_phase(
                geometry.size_n, geometry.pixel_pitch, geometry.wavelength, t.axial_focus_f
            )
            comp = ComplexField(comp.values * np.exp(1j * lens.phases), HOLOGRAM, comp.pixel_pitch)
        comps.append(comp)
    return superpose(comps)


__all__ = [
    "HOLOGRAM",
    "RECONSTRUCTION",
    "ComplexField",
    "HologramGeometry",
    "OraParams",
    "OraReport",
    "PhaseHologram",
    "SpotTarget",
    "blazed_grating",
    "centered_coordinates",
    "fourier_transform",
    "fresnel_lens_phase",
    "fresnel_propagate",
    "grating_field",
    "ora_optimize",
    "reconstruct",
    "spot_intensities",
    "superpose",
    "target_hologram",
    "uniformity",
    "validate_targets",
    "wrap_phase",
]

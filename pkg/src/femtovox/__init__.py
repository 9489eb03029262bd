"""femtovox: holographic multi-voxel addressing for laser-plasma volumetric displays.

Subpackages
-----------
optics     focal spot geometry, peak intensity, breakdown thresholds
cgh        phase holograms, Fourier reconstruction, ORA optimizer, Fresnel propagation
energy     simultaneous-voxel budget, frame throughput, exposure guard
scheduler  frame planning across laser, galvano, varifocal lens and SLM
io         PGM phase maps, spot lists, voxel clouds, plan JSON
"""

from . import cgh, energy, io, optics, scheduler
from .cgh import PhaseHologram, SpotTarget, ora_optimize, reconstruct
from .energy import EnergyBudget, ExposureGuard, dots_per_frame, dots_per_pulse
from .optics import LaserProfile, OpticalTrain, peak_intensity
from .scheduler import DeviceProfile, FramePlan, InfeasiblePlanError, VoxelCloud, plan_frame, simulate

__version__ = "0.1.0"

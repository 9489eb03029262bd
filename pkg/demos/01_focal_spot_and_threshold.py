# %% [markdown]
# Focal spot size and whether a pulse can ionize air.
#
# The final objective (40 mm focal length, 10 mm beam) sets the spot
# size; pulse energy and width then set the peak intensity.

# %%
from femtovox.optics import (
    LaserProfile,
    OpticalTrain,
    exceeds_plasma_threshold,
    focal_spot,
    peak_intensity,
    threshold_margin,
)

train = OpticalTrain(wavelength=800e-9, beam_width_a=10e-3, focal_length_r=40e-3)
spot = focal_spot(train)
print(f"lateral {spot.lateral_diameter_wf * 1e6:.1f} um, axial {spot.axial_length_wd * 1e6:.1f} um")
print(f"focal area {spot.area:.3e} cm^2")

# %% [markdown]
# Lowest energies that produced visible plasma, over a 2e-7 cm^2 spot.

# %%
for energy, width in [(0.2e-3, 30e-15), (0.45e-3, 100e-15)]:
    laser = LaserProfile(energy, width, 1000, 800e-9)
    i = peak_intensity(laser, 2e-7)
    print(
        f"{energy * 1e3:.2f} mJ / {width * 1e15:.0f} fs -> {i / 1e15:5.1f} PW/cm^2, "
        f"{threshold_margin(i):.0f}x the air threshold, plasma: {exceeds_plasma_threshold(i)}"
    )

# %% [markdown]
# A 50 uJ, 269 fs pulse over this spot stays below the air threshold but
# is far above the water and fluorescent ones, which break down orders of
# magnitude earlier.

# %%
laser = LaserProfile(50e-6, 269e-15, 200e3, 1045e-9)
i = peak_intensity(laser, spot.area)
for medium in ("air", "water", "fluorescent"):
    print(f"{medium:12s} margin {threshold_margin(i, medium):.3g}")

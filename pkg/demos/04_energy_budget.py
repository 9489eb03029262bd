# %% [markdown]
# How many voxels one pulse can light, and how many a frame can hold.

# %%
from femtovox.energy import (
    EnergyBudget,
    ExposureGuard,
    FrameBudget,
    dots_per_frame,
    dots_per_pulse,
    per_frame_rate_limit,
)
from femtovox.presets import load_profile, preset_values

# Each voxel needs the breakdown energy, so N_dot = floor(E / E_lbd).
for elbd in (0.2e-3, 0.45e-3):
    print(f"E_lbd {elbd * 1e3:.2f} mJ -> {dots_per_pulse(EnergyBudget(2e-3, elbd))} voxels per pulse")

# %% [markdown]
# Losses in the SLM and the optics cut that number. The presets carry the
# reported efficiencies.

# %%
vals = preset_values("system_a")
slm = float(vals["slm_efficiency_min"])
train = float(vals["train_efficiency"])
print("with losses:", dots_per_pulse(EnergyBudget(2e-3, 0.2e-3, slm, train)))

# %%
print("dpf at 100 voxels/pulse, 1 kHz, 100 ms:", dots_per_frame(FrameBudget(100, 1000, 0.1)))
for name in ("system_a", "system_b"):
    laser = load_profile(name).laser
    print(name, "pulses per 60 Hz frame", per_frame_rate_limit(laser.repetition_rate, 60))

# %% [markdown]
# The exposure guard sums dwell per 6.4 um cell. Two seconds on one spot
# burned leather; touching the display must stop it within a frame.

# %%
guard = ExposureGuard()
for ms in (800, 800, 800):
    v = guard.record((0.0, 0.0, 0.08), ms)
    print(f"+{ms} ms -> {v.accumulated_ms:.0f} ms {v.status.value}")
v = guard.record((1e-3, 0.0, 0.08), 5, contact=True)
print("contact:", v.status.value, "within", v.deadline_ms, "ms")

# %% [markdown]
# Scheduling voxels onto laser pulses, mirror moves and lens refocusing.
#
# System A fires 1000 pulses/s and uses an SLM to split each one into 4
# voxels. System B has no SLM but fires 200,000 pulses/s.

# %%
import numpy as np

from femtovox.energy import EnergyBudget
from femtovox.presets import load_profile
from femtovox.scheduler import InfeasiblePlanError, VoxelCloud, plan_frame, simulate

a = load_profile("system_a")
b = load_profile("system_b")

# 100 small squares (4 voxels each, 50 um edge) on a 0.8 mm grid in one plane.
pts = []
for i in range(10):
    for j in range(10):
        for dx, dy in ((0, 0), (50e-6, 0), (0, 50e-6), (50e-6, 50e-6)):
            pts.append(((i - 5) * 0.8e-3 + dx, (j - 5) * 0.8e-3 + dy, 0.08))
squares = VoxelCloud(np.array(pts))

# %%
plan = plan_frame(squares, a, EnergyBudget(2e-3, 0.45e-3), frame_time=0.1)
print(f"{len(plan.slots)} pulses, {len(plan.holograms)} hologram, lasts {plan.duration * 1e3:.0f} ms")
rep = simulate(plan, a, horizon=1.0)
print(f"system A: {rep.achieved_dots_per_s:.0f} dots/s at {rep.achieved_fps:.0f} fps")

# %%
rng = np.random.default_rng(0)
flat = VoxelCloud(np.column_stack([rng.uniform(-4e-3, 4e-3, (2000, 2)), np.full(2000, 0.08)]))
plan_b = plan_frame(flat, b, EnergyBudget(50e-6, 50e-6), frame_time=0.01)
rep_b = simulate(plan_b, b, horizon=1.0)
print(f"system B: {rep_b.achieved_dots_per_s:.0f} dots/s")

# %% [markdown]
# An SLM needs 100 ms to switch holograms, so arbitrary point clouds that
# need many different patterns do not fit in a frame. The planner names
# the device that runs out of time.

# %%
scatter = VoxelCloud(rng.uniform(-4e-3, 4e-3, (200, 3)) + [0, 0, 0.08])
for cloud, prof, budget in ((scatter, a, EnergyBudget(2e-3, 0.45e-3)), (scatter, b, EnergyBudget(50e-6, 50e-6))):
    try:
        plan_frame(cloud, prof, budget, frame_time=0.01)
    except InfeasiblePlanError as err:
        print(f"{prof.name}: bottleneck {err.bottleneck}, needs {err.required_time * 1e3:.1f} ms")

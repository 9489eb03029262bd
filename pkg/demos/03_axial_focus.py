# %% [markdown]
# Moving a focus along the beam with a Fresnel lens phase.
#
# Adding the quadratic phase k r^2 / 2f to the hologram makes it act like
# a thin lens. Propagating the field shows where it actually focuses.

# %%
import numpy as np

from femtovox.cgh import PhaseHologram, fresnel_lens_phase, fresnel_propagate

n, pitch, wl = 256, 20e-6, 800e-9
flat = PhaseHologram(np.zeros((n, n)), pitch).field()
c = (n // 2, n // 2)

# %%
for f in (0.06, 0.08, 0.10):
    lens = fresnel_lens_phase(n, pitch, wl, f).field()
    zs = np.linspace(0.5 * f, 1.5 * f, 81)
    on_axis = np.array([fresnel_propagate(lens, z, wl).intensity()[c] for z in zs])
    base = fresnel_propagate(flat, f, wl).intensity()[c]
    print(
        f"f = {f * 1e3:5.1f} mm: brightest at z = {zs[on_axis.argmax()] * 1e3:5.1f} mm, "
        f"gain {on_axis.max() / base:8.0f}x"
    )

# %% [markdown]
# The propagator is unitary, so total energy never changes; the lens only
# redistributes it.

# %%
lens = fresnel_lens_phase(n, pitch, wl, 0.1).field()
print("energy before/after", lens.energy(), fresnel_propagate(lens, 0.1, wl).energy())

# %% [markdown]
# Past the sampling limit f = N p^2 / lambda (here 128 mm) the wrapped
# lens phase aliases and the focus degrades.

# %%
print("critical focal length", n * pitch**2 / wl)

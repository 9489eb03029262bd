# %% [markdown]
# From a picture to an SLM phase map with the command-line tool.
#
# image2spots picks the bright pixels, synth designs the hologram and
# reconstruct checks what it would display.

# %%
import json
import tempfile
from pathlib import Path

import numpy as np

from femtovox.cli import main
from femtovox.io import encode_pgm, read_pgm

work = Path(tempfile.mkdtemp(prefix="femtovox-"))

# A small ring drawn into a 64x64 grayscale image.
yy, xx = np.mgrid[:64, :64]
r = np.hypot(xx - 20, yy - 20)
img = np.where(np.abs(r - 10) < 1.0, 255, 0)
(work / "ring.pgm").write_bytes(encode_pgm(img, maxval=255))

# %%
main(["image2spots", str(work / "ring.pgm"), "--max-spots", "24", "--out", str(work / "ring.txt")])
print((work / "ring.txt").read_text().splitlines()[:4])

code = main(["synth", str(work / "ring.txt"), "--grid", "64", "--out", str(work)])
report = json.loads((work / "synth_report.json").read_text())
print("exit", code, "iterations", report["iterations"], "uniformity", round(report["uniformity"], 3))

# %%
main(["reconstruct", str(work / "phase.pgm"), "--spots", str(work / "ring.txt"), "--out", str(work)])
counts, _ = read_pgm(work / "intensity.pgm")
print("bright pixels in the reconstruction:", int((counts > 0.5 * counts.max()).sum()))
print("outputs in", work)

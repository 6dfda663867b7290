"""
Fitting the area model
======================

Eight anchor dies, each varying one block at a time, pin down the six area
coefficients.  The anchors ship with the package and are generated from the
coefficient estimates, so the fit should return them unchanged.
"""

import random

from stencil_dse import ArchConfig, area, calibrate, data_path
from stencil_dse.area import load_anchors
from stencil_dse.core import COEFF_NAMES

anchors = load_anchors(data_path("anchors", "anchors.json"))
fitted = calibrate(anchors, COEFF_NAMES)
for name in COEFF_NAMES:
    print(f"{name:11s} {getattr(fitted, name):.6g}")

# Two percent noise on every anchor moves the coefficients but barely moves
# predictions inside the range the anchors cover.
rng = random.Random(0)
noisy = [(a, y * (1 + rng.uniform(-0.02, 0.02))) for a, y in anchors]
refit = calibrate(noisy, COEFF_NAMES)
probe = ArchConfig(20, 128, 64 * 1024, 100.0, l2_bytes=2048 * 1024, mem_ctrl_count=6)
print(f"probe die: {area(probe, fitted):.2f} mm^2 exact, {area(probe, refit):.2f} mm^2 from noisy anchors")

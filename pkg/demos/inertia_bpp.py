"""When is the Gaussian BPP shortcut trustworthy?

Brownian nodes started together spread identically, so one representative
node times N reproduces the exact mean. Nodes that keep their own constant
velocities drift apart, their standardized offsets never agree, and the
shortcut overestimates the interference by many orders of magnitude.

    python3 demos/inertia_bpp.py
"""

import numpy as np

from glcinterference import bpp, mean_interference
from glcinterference.scenarios import build_preset, inertia2d

for name, sc in [("brownian2d", build_preset("brownian2d").scenario),
                 ("inertia2d", inertia2d().scenario),
                 ("inertia2d, equal velocities", inertia2d(velocities=np.tile([0.4, -0.7], (7, 1))).scenario)]:
    verdict = bpp.check_bpp_condition(sc, horizon=1.0)
    print(f"{name}: {'satisfied' if verdict.satisfied else 'violated'} "
          f"(largest offset gap {verdict.max_pairwise_gap:.3g})")

sc = inertia2d().scenario
print(f"\n{'t - s':>7} {'exact':>12} {'BPP':>12}")
for t in (10.0, 50.0, 100.0, 500.0):
    exact = mean_interference(sc, t).mean
    approx = bpp.bpp_approx_mean(sc, t, center=True)
    print(f"{t:7g} {exact:12.4e} {approx:12.4e}")

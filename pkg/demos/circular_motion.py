"""Nodes on noisy circular orbits in 3-D.

Each node's velocity rotates about the z axis while strong isotropic noise
blurs the orbit. The prediction is compared with the Monte Carlo average
of the same scenario at a few times.

    python3 demos/circular_motion.py
"""

from glcinterference import load_preset, mean_interference
from glcinterference.montecarlo import empirical_statistics_grid

sf = load_preset("ucm3d")
sc = sf.scenario
times = [t for t in sf.run.times if t > 0][::5]

stats, _ = empirical_statistics_grid(sc, times, 10_000, seed=sf.run.seed)
print(f"{'t - s':>7} {'predicted':>11} {'simulated':>11} {'std error':>11}")
for t, st in zip(times, stats):
    print(f"{t:7g} {mean_interference(sc, t).mean:11.4e} {st.mean_hat:11.4e} {st.std_error_mean:11.4e}")

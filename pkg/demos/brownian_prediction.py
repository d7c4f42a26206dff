"""Six Brownian interferers around a Brownian receiver, all starting at the origin.

Prints the predicted mean and spread of the interference at a few horizons,
then checks the first horizon against a seeded Monte Carlo run.

    python3 demos/brownian_prediction.py
"""

from glcinterference import load_preset, mean_interference, mgf_interference
from glcinterference.montecarlo import empirical_statistics

sf = load_preset("brownian2d")
sc = sf.scenario

print(f"{'t - s':>7} {'mean':>10} {'std':>10} {'MGF(0.5)':>10}")
for t in sf.run.times:
    res = mean_interference(sc, t)
    print(f"{t:7g} {res.mean:10.5f} {res.std:10.5f} {mgf_interference(sc, t, 0.5):10.5f}")

# the nodes spread out like sqrt(t), so the mean decays roughly like 1/t
t = sf.run.times[0]
emp = empirical_statistics(sc, t, 10_000, seed=sf.run.seed)
pred = mean_interference(sc, t).mean
print(f"\nMonte Carlo at t={t:g}: {emp.mean_hat:.5f} +- {emp.std_error_mean:.5f} (predicted {pred:.5f})")

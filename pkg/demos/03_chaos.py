"""Sensitive dependence in the low-generalist, high-specialist window."""

import math

import numpy as np

from genspec.dynamics import IntegratorConfig, classify_attractor, integrate
from genspec.lyapunov import lle
from genspec.model import Params, reference_state
from genspec.sweep import basin_probability

p = Params.eq7(alpha=0.5, alpha_s=2.0)
cfg = IntegratorConfig(t_end=2500)

# two starts that differ by 1e-4 in each viral load
a = integrate(p, reference_state(p, 0.5, 0.5), cfg)
b = integrate(p, reference_state(p, 0.5001, 0.5001), cfg)
d = np.linalg.norm(a.states - b.states, axis=1)
for t in (0, 250, 500, 750, 1000, 1250, 1500, 2000, 2500):
    print(f"t={t:5d}  separation {d[int(t / cfg.sample_dt)]:.2e}")

res = lle(p, reference_state(p))
print(f"largest Lyapunov exponent {res.lle:.5f} (converged: {res.converged})")
print(f"predicted time to reach 0.1: {math.log(0.1 / d[0]) / res.lle:.0f}")

# the same window through the classifier and the basin grid
print(classify_attractor(p, reference_state(p)).key)
print(basin_probability(p).probabilities())

# compare with a limit cycle and a sink
for rates in ((0.5, 0.7), (0.2, 0.2)):
    q = Params.eq7(*rates)
    print(rates, f"LLE {lle(q, reference_state(q)).lle:+.5f}", classify_attractor(q, reference_state(q)).key)

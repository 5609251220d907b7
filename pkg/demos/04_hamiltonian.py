# %% [markdown]
# # Conservative dynamics
#
# Kick-drift-kick leapfrog for H = sum P^2/2 + alpha (C - pi)^2 / 2.

# %%
import math

import numpy as np

from spectral_flow import PhasePoint, hamiltonian, leapfrog

steps = round(2 * math.pi / 1e-3)
dt = 2 * math.pi / steps
_, q, p = leapfrog(PhasePoint([math.pi + 1], [0.0]), [1.0], dt, steps, record_every=steps)
print("after one period:", q[-1, 0] - math.pi, p[-1, 0])

# %%
alphas = np.array([1.0, 4.0, 9.0])
start = PhasePoint(math.pi + np.array([0.5, -0.2, 0.1]), np.array([0.0, 0.3, -0.1]))
_, qs, ps = leapfrog(start, alphas, 1e-3, 100_000, record_every=1000)
H = np.array([hamiltonian(PhasePoint(a, b), alphas) for a, b in zip(qs, ps)])
print("relative energy drift:", np.max(np.abs(H - H[0])) / H[0])

# %% [markdown]
# # Reading dimension from a spectrum
#
# Weyl-law spectra C_n = pi - kappa n^(2/d): the counting function near pi,
# the heat trace at small t, and eta partial sums.

# %%
import math

import numpy as np

from spectral_flow import (
    density_exponent,
    estimate_dimension,
    eta_partial,
    heat_trace,
    heat_trace_exponent,
    perturb_spectrum,
    synth_weyl_spectrum,
    weyl_constant,
)

print("gamma_3 =", weyl_constant(3, 2 * math.pi**2))
print("gamma_4 =", weyl_constant(4, 8 * math.pi**2 / 3))

# %%
for d in (3, 4, 5, 6):
    s = synth_weyl_spectrum(d, 1.0, 100_000)
    noisy = perturb_spectrum(s, 0.01, seed=d)
    print(d, round(estimate_dimension(s, 0.1).d_hat, 4), round(estimate_dimension(noisy, 0.1).d_hat, 4), round(density_exponent(s), 3))

# %% [markdown]
# The heat trace of a truncated spectrum is completed with the tail of the
# Weyl envelope, so the small-t fit does not see the cutoff.

# %%
ts = np.geomspace(1e-4, 1e-3, 10)
for d in (1, 3, 4):
    s = synth_weyl_spectrum(d, 1.0, 3000 if d == 1 else 1_000_000)
    print(d, round(heat_trace_exponent(s, ts), 4))
print("sum exp(-n^2) =", heat_trace(synth_weyl_spectrum(1, 1.0, 20), 1.0))

# %%
s = synth_weyl_spectrum(3, 10.0, 200)
print([round(eta_partial(s, 2.0, k).value, 6) for k in (1, 10, 100, 200)])

# %% [markdown]
# # Triple overlaps
#
# With the simplified prefactor sqrt(2/pi), the integral of three sine modes has
# a four-term closed form. Half the triples vanish by parity.

# %%
import numpy as np

from spectral_flow import (
    EigenBasis,
    PhysicalConstants,
    closed_form_array,
    decay_bound,
    overlap_closed_form,
    quadrature_array,
    sorted_triples,
)

basis = EigenBasis(PhysicalConstants(v_c=0.8257), 12, "simplified")
for t in [(0, 0, 0), (1, 1, 1), (1, 2, 3)]:
    print(t, round(overlap_closed_form(basis, *t), 7))

# %%
diff = np.max(np.abs(closed_form_array(basis) - quadrature_array(basis)))
print("closed form vs quadrature:", diff)

# %% [markdown]
# The 1/(max+1) estimate is a typical size, not a bound: triples (0, M, M) keep
# a resonant channel with frequency 1 and do not decay at all.

# %%
for M in (3, 6, 12):
    print(M, round(overlap_closed_form(basis, 0, M, M), 4), round(decay_bound(0, M, M, basis.v_c), 4))
bad = [t for t in sorted_triples(12) if max(t) >= 3 and abs(overlap_closed_form(basis, *t)) > decay_bound(*t, basis.v_c)]
print(len(bad), "triples exceed the estimate")

# %% [markdown]
# # The Dirichlet sine basis
#
# Modes live on [-v_c, v_c] with v_c = c sqrt(1 - 1/pi). We build a basis,
# check orthonormality by Gauss-Legendre quadrature, and expand a bump.

# %%

import numpy as np

from spectral_flow import EigenBasis, eigenvalues, gram_matrix, make_constants, project, synthesize

basis = EigenBasis(make_constants(1.0), n_max=32)
print(f"v_c = {basis.v_c:.6f}")

# %%
G = gram_matrix(basis)
print("max |G - I| =", np.max(np.abs(G - np.eye(basis.size))))

# %% [markdown]
# Eigenvalues start below pi and fall off quadratically in the mode index.

# %%
print(eigenvalues(basis)[:5])

# %%
f = lambda v: np.exp(v) * (1 - (v / basis.v_c) ** 2)
v = np.linspace(-basis.v_c, basis.v_c, 9)
for n_max in (4, 8, 16, 32):
    b = basis.with_n_max(n_max)
    err = np.max(np.abs(synthesize(b, project(b, f), v) - f(v)))
    print(f"n_max={n_max:3d}  reconstruction error {err:.2e}")

# %% [markdown]
# # Spectral entropy
#
# Along a linear flow with increasing stiffness the deviation entropy collapses
# onto the slowest mode. For the degenerate power-law model the entropy grows
# like log(1/tau), but with a slope well under d/2.

# %%
import numpy as np

from spectral_flow import SpectralState, entropy_scaling_experiment, exact_trajectory, entropy_report

n = np.arange(13)
alphas = 1.0 + 0.5 * n
traj = exact_trajectory(SpectralState.from_deviations(np.cos(n + 0.3)), alphas, np.linspace(0, 25, 6))
for s in traj.states:
    r = entropy_report(s)
    print(f"tau={r.tau:5.1f}  S={r.deviation_entropy:.4f}  modes={r.effective_modes}")

# %%
taus = np.geomspace(1e-5, 1e-3, 25)
for d in (3, 4, 5):
    for beta in ((d - 1) / 2 + 0.01, (d + 1) / 2):
        print(f"d={d} beta={beta:.2f}  slope={entropy_scaling_experiment(d, beta, 1.0, taus):.3f}")

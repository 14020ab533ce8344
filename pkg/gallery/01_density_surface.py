"""
Expected density of progress over the selection region
======================================================

The relay is the nearest receiver inside a forward sector of angle ``phi``
that starts at distance ``r_m``.  Widening the sector or pulling ``r_m`` in
shortens hops (more likely to succeed); narrowing or pushing out lengthens
them.  The product has an interior maximum.
"""
# %%
# Evaluate the closed form on a grid
# ----------------------------------
import math

import numpy as np

from selregion import NetworkConfig, SelectionRegion, expected_density_of_progress, expected_density_numeric

cfg = NetworkConfig(lam=1.0, p=0.01, alpha=3.0, beta=10.0)
phis = np.linspace(math.pi / 40, math.pi, 40)
rms = np.linspace(0.0, 2.0, 40)
surface = np.array([[expected_density_of_progress(cfg, SelectionRegion(f, r)) for r in rms] for f in phis])

i, j = np.unravel_index(surface.argmax(), surface.shape)
print(f"grid maximum {surface[i, j]:.6e} at phi = {phis[i] / math.pi:.3f} pi, r_m = {rms[j]:.3f}")

# %%
# Cross-check against quadrature
# ------------------------------
# The closed form is only trusted because it agrees with a direct numerical
# integral of the hop-distance law.
region = SelectionRegion(phis[i], rms[j])
closed = expected_density_of_progress(cfg, region)
numeric = expected_density_numeric(cfg, region)
print(f"closed form {closed:.15e}\nquadrature  {numeric:.15e}\nrelative gap {abs(closed - numeric) / numeric:.1e}")

# %%
# Slices through the peak
# -----------------------
print("\nr_m     E[D] at the best angle")
for r in rms[::5]:
    print(f"{r:5.2f}   {expected_density_of_progress(cfg, SelectionRegion(phis[i], r)):.4e}")

"""
Checking the link model against an explicit interference field
==============================================================

Interferers are drawn as a Poisson field around the receiver with Rayleigh
fading on every link.  The near field is simulated point by point; the far
field is handled exactly through an extra independent Bernoulli draw, so no
truncation bias remains.  A doubled-radius run on coupled realisations shows
how much the inner radius matters.
"""
# %%
# Link success probability
# ------------------------
import math

import numpy as np

from selregion import NetworkConfig, Point2, ProtocolSpec, estimate_success_probability, simulate_route, success_probability
from selregion.simulate import truncation_audit

cfg = NetworkConfig(lam=1.0, p=0.05, alpha=3.0, beta=10.0)
for d in (0.2, 0.5, 1.0):
    est = estimate_success_probability(cfg, d, 20_000, seed=11)
    target = success_probability(cfg, d)
    print(f"d={d:.1f}  simulated {est.mean:.4f} +/- {est.std_error:.4f}   closed form {target:.4f}   z={est.z_score(target):+.2f}")

# %%
# Power and fading scale drop out
# -------------------------------
for change in ({"rho": 2.0}, {"mu": 0.5}, {"mu": 2.0}):
    est = estimate_success_probability(cfg.replace(**change), 0.5, 20_000, seed=11)
    print(change, f"{est.mean:.4f}")

audit = truncation_audit(cfg, 1.0, 20_000, seed=5)
print(f"\ndoubling the simulated radius moves the estimate by {audit.shift_in_sigma:.2f} standard errors")

# %%
# A multi-hop route
# -----------------
# The packet re-aims its sector at the destination each slot and the network
# is redrawn every slot.
proto = ProtocolSpec.selection_region(0.718 * math.pi, 0.22)
trace = simulate_route(cfg, proto, Point2(0.0, 0.0), Point2(25.0, 0.0), 2000, np.random.default_rng(1), mode="physical")
moves = sum(ok for _, _, ok in trace.hops)
print(f"{trace.terminated} after {len(trace.hops)} slots ({moves} successful hops)")

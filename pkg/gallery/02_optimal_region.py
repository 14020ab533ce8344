"""
Optimal selection angle and reference distance
==============================================

For each transmit probability ``p`` we find the jointly optimal ``(phi, r_m)``
and compare the reference distance against its analytic upper bound.
"""
# %%
# Bound versus numerical optimum at a fixed angle
# -----------------------------------------------
import math

from selregion import NetworkConfig, optimal_rm_given_phi, optimize_joint, rm_from_phi_closed_form, rm_upper_bound

base = NetworkConfig(lam=1.0, alpha=3.0, beta=10.0)
p_grid = (0.01, 0.02, 0.03, 0.05, 0.07, 0.1, 0.15, 0.2, 0.25, 0.3)

print("   p     bound     r_m*  (phi = pi/3)")
for p in p_grid:
    cfg = base.replace(p=p)
    b = rm_upper_bound(cfg, math.pi / 3).upper_bound
    r = optimal_rm_given_phi(cfg, math.pi / 3).rm_star
    print(f"{p:5.2f}  {b:8.5f}  {r:8.5f}")

# %%
# Joint optimum
# -------------
# The angle opens up and the reference distance shrinks as contention grows.
# At high ``p`` the optimum sits almost at ``r_m = 0``: plain nearest-neighbour
# forwarding inside a wide sector.
print("\n   p   phi*/pi      r_m*        E*     r_m from the joint condition")
for p in p_grid:
    cfg = base.replace(p=p)
    res = optimize_joint(cfg)
    print(f"{p:5.2f}  {res.phi_star / math.pi:7.4f}  {res.rm_star:8.5f}  {res.e_star:.5e}  {rm_from_phi_closed_form(cfg, res.phi_star):8.5f}")

# %%
# Density scaling
# ---------------
# Doubling the node density multiplies the best density of progress by
# sqrt(2) and divides the best reference distance by sqrt(2).
for lam in (0.5, 1.0, 2.0, 4.0):
    res = optimize_joint(base.replace(p=0.05, lam=lam))
    print(f"lam={lam:3.1f}  E*/sqrt(lam)={res.e_star / math.sqrt(lam):.12e}  r_m*·sqrt(lam)={res.rm_star * math.sqrt(lam):.12e}")

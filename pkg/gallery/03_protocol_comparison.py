"""
Comparing relay-selection rules by simulation
=============================================

Four rules, each simulated hop by hop with success drawn from the closed-form
link probability:

* best progress: any forward receiver, picked to maximise expected progress
* selection region with the jointly optimal ``(phi, r_m)``
* nearest neighbour in the optimal sector (``r_m = 0``)
* nearest neighbour in a fixed quarter-turn sector
"""
# %%
# Run the comparison
# ------------------
# The same machinery backs ``selregion compare``.
from selregion.experiments import build_config, cmd_compare

config = build_config("compare", {"trials": 4000, "seed": 3, "sweep": [{"name": "p", "values": [0.01, 0.05, 0.1, 0.2, 0.3]}]})
table = cmd_compare(config)

print(f"{'p':>5}  {'rule':<46} {'estimate':>10} {'s.e.':>9} {'closed form':>12}")
for row in table.records():
    analytic = "" if row["analytic"] is None else f"{row['analytic']:.4e}"
    print(f"{row['p']:5.2f}  {row['protocol']:<46} {row['e_density']:10.4e} {row['std_error']:9.2e} {analytic:>12}")

# %%
# Work per hop
# ------------
# A sector of angle ``phi`` holds a fraction ``phi / 2 pi`` of the receivers,
# which is all a relay-selection step has to look at.
import math

from selregion import NetworkConfig, candidate_count_ratio

est = candidate_count_ratio(NetworkConfig(p=0.05), math.pi / 2, 5000, seed=1)
print(f"\nfraction of receivers inspected at phi = pi/2: {est.mean:.4f} +/- {est.std_error:.4f}")

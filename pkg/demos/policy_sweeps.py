"""
Critical-point sweeps across agent densities
============================================

Sweeps the synergy factor for each policy at several agent densities and
extracts where the evolved cooperation probability crosses 0.5.  Uses a
reduced grid so the whole script finishes in about a minute; the test
suite repeats this at full desk scale with tighter statistics.
"""

from pggsim import Policy, SimParams, predicted_critical_r
from pggsim.sweep import SweepConfig, run_sweep

base = SimParams(k=4, grid_width=16, grid_height=16, generations=1000,
                 mu=0.01)


def sweep(policy, r_values, rho_values, seed):
    cfg = SweepConfig(base=base, policy=policy, r_values=r_values,
                      rho_values=rho_values, replicates=5,
                      master_seed=seed)
    return run_sweep(cfg)


# Mandatory cooperation: agents lift payoffs uniformly, so the critical
# synergy should sit near k+1 = 5 at every density.
r_high = tuple(3.5 + 0.5 * i for i in range(7))
result = sweep(Policy.MANDATORY_COOPERATION, r_high, (0.0, 0.5, 1.0), 1)
print("mandatory cooperation (expected r* ~ 5 throughout):")
for cp in result.critical_points:
    print(f"  rho={cp.rho_a:.2f}  observed r* = {cp.r_critical}")

# Player-controlled: same story for the players' own cooperation, but
# the agent trait p_AC is swept upward by selection.
result = sweep(Policy.PLAYER_CONTROLLED, r_high, (0.25, 0.75), 2)
print("\nplayer-controlled:")
for cp in result.critical_points:
    print(f"  rho={cp.rho_a:.2f}  observed r* = {cp.r_critical}")
for cell in result.cells[::4]:
    print(f"  rho={cell.rho_a:.2f} r={cell.r:.1f}: evolved p_AC = "
          f"{cell.mean_p_ac:.3f}")

# Mimic: the threshold itself moves, tracking (k+1)/(rho*k+1).
r_full = tuple(1.0 + 0.5 * i for i in range(11))
result = sweep(Policy.MIMIC, r_full, (0.25, 0.5, 0.75), 3)
print("\nmimic (threshold shifts with density):")
for cp in result.critical_points:
    pred = predicted_critical_r(4, cp.rho_a)
    print(f"  rho={cp.rho_a:.2f}  observed r* = {cp.r_critical}  "
          f"predicted {pred:.3f}")

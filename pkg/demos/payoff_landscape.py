"""
Payoff structure and the predicted cooperation threshold
========================================================

Closed-form tour of the game's economics: where the social dilemma
lives, how the cooperate/defect gap depends on the synergy factor, and
how copying agents move the threshold at which cooperating starts to
pay.  Pure arithmetic, runs in milliseconds.
"""

import numpy as np

from pggsim import (
    dilemma_bounds,
    mimic_cooperation_gain,
    payoff_cooperator,
    payoff_defector,
    predicted_critical_r,
)

# The group size is k+1: one focal player plus k peripheral slots.
k = 4
low, high = dilemma_bounds(k)
print(f"group size {k + 1}: dilemma exists for {low} < r < {high}")

# A defector always out-earns a cooperator facing the same group by
# exactly 1 - r/(k+1), independent of how many others cooperate.
for r in (2.0, 4.0, 6.0):
    gap = payoff_defector(2, k, r) - payoff_cooperator(2, k, r)
    print(f"  r={r}: defector advantage {gap:+.3f}")

# Copying agents break that independence.  When a fraction rho of the
# peripheral slots holds an agent that mirrors the focal action, part of
# the group's contribution level is tied to the focal's own choice, and
# cooperating becomes profitable above r* = (k+1)/(rho*k+1).
print("\npredicted critical synergy r* by agent density:")
rhos = np.linspace(0.0, 1.0, 5)
for rho in rhos:
    print(f"  rho={rho:.2f}  r*={predicted_critical_r(k, rho):.4f}")

# The gain from cooperating flips sign exactly at r*, whatever the
# number of would-be peripheral cooperators.
rho = 0.5
r_star = predicted_critical_r(k, rho)
for r in (0.9 * r_star, r_star, 1.1 * r_star):
    gains = [mimic_cooperation_gain(k, rho, n_c, r) for n_c in range(k + 1)]
    print(f"r={r:.3f}: cooperation gain {gains[0]:+.4f} "
          f"(same for all n_c: spread {max(gains) - min(gains):.1e})")

# Optional picture: threshold curves for a few group sizes.
try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    grid = np.linspace(0.0, 1.0, 101)
    for kk in (2, 4, 8):
        plt.plot(grid, [predicted_critical_r(kk, x) for x in grid],
                 label=f"k={kk}")
    plt.xlabel("agent density rho_A")
    plt.ylabel("critical synergy r*")
    plt.legend()
    plt.tight_layout()
    plt.savefig("payoff_landscape.png", dpi=120)
    print("\nwrote payoff_landscape.png")

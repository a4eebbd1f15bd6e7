"""
How density grows with the number of rotations
==============================================

The exact expected density from the row-count recurrence, next to a
Monte Carlo estimate.
"""

import numpy as np
from sparse_ortho import expected_density_curve, monte_carlo_density_curve, rotations_for_density
from sparse_ortho.density_model import inflection_point

n = 100
dp = expected_density_curve(n, 1000)
mc, se = monte_carlo_density_curve(n, 1000, 50, rng=0)

for t in (0, 100, 200, 300, 400, 600, 1000):
    print(f"t={t:5d}  exact={dp[t]:.4f}  mc={mc[t]:.4f} +- {se[t]:.4f}")

print("largest |exact - mc|:", np.max(np.abs(dp - mc)))
print("curve turns concave at t =", inflection_point(dp))

# the inverse question: rotations needed for a target density
for d in (0.05, 0.1, 0.5):
    print(f"density {d}: ~{rotations_for_density(n, d)} rotations")

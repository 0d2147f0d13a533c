r"""
Observed error, expected error and decay
========================================

How much evidence does one observed action carry against a candidate policy?
The observed error is ``1 - p`` of the action taken. Its expectation is
``sum p (1 - p)`` if the opponent really follows the policy, and
``(n - 1) / n`` if it acts uniformly at random. The decay interpolates
between the two with the strictness factor ``alpha``.
"""

import numpy as np

from opsdemo.error_estimation import (
    decay,
    expected_error_following,
    expected_error_not_following,
    observed_error,
    observed_error_l1,
)

dists = {
    "near-deterministic": [0.9, 0.025, 0.025, 0.025, 0.025],
    "two-way split": [0.45, 0.45, 1 / 30, 1 / 30, 1 / 30],
    "uniform": [0.2] * 5,
}

print(f"{'policy':>20} {'e_f':>7} {'e_nf':>7}  decay(alpha=0.8, 0.9, 0.95, 0.99)")
for name, p in dists.items():
    row = [decay(p, a) for a in (0.8, 0.9, 0.95, 0.99)]
    print(f"{name:>20} {expected_error_following(p):7.4f} {expected_error_not_following(5):7.4f}  "
          + "  ".join(f"{d:.4f}" for d in row))

###############################################################################
# The simplified error and the half-L1 distance to the one-hot observation
# agree to rounding:

rng = np.random.default_rng(0)
diffs = []
for _ in range(1000):
    p = rng.dirichlet(np.ones(5))
    a = int(rng.integers(5))
    diffs.append(abs(observed_error(p, a) - observed_error_l1(p, a)))
print("largest difference over 1000 draws:", max(diffs))

###############################################################################
# Monte Carlo check of both expectations for the near-deterministic policy.

p = np.array(dists["near-deterministic"])
follow = rng.choice(5, size=100_000, p=p)
violate = rng.integers(5, size=100_000)
print("following:     sampled %.4f  closed form %.4f" % (np.mean(1 - p[follow]), expected_error_following(p)))
print("not following: sampled %.4f  closed form %.4f" % (np.mean(1 - p[violate]), expected_error_not_following(5)))

r"""
Detecting a switch between two deterministic policies
=====================================================

A two-action toy: policy 0 always plays action 0, policy 1 always plays
action 1. The opponent follows policy 0 for 20 steps and then switches. With
``alpha = 0.99`` and ``threshold = 5`` each violating step adds ``0.995`` to
the wrong policy's running error, so the switch is flagged on the sixth
violating observation.
"""

import matplotlib.pyplot as plt
import numpy as np

from opsdemo.detector import Detector, DetectorConfig
from opsdemo.policy_core import PolicyBank, TabularPolicy

bank = PolicyBank([TabularPolicy({}, default=[1.0, 0.0]), TabularPolicy({}, default=[0.0, 1.0])])
det = Detector(bank, config=DetectorConfig(alpha=0.99, threshold=5.0, initial_assumed=0))

actions = [0] * 20 + [1] * 20
errors, assumed = [], []
for t, a in enumerate(actions):
    upd = det.observe("s", a)
    errors.append(upd.running_errors)
    assumed.append(upd.assumed_after)
    if upd.switched:
        print(f"t={t}: switch {upd.switched[0]} -> {upd.switched[1]}, "
              f"running errors now {[round(e, 3) for e in upd.running_errors]}")

errors = np.array(errors)
fig, ax = plt.subplots(figsize=(6, 3))
ax.plot(errors[:, 0], label="policy 0")
ax.plot(errors[:, 1], label="policy 1")
ax.axvline(20, color="grey", ls=":", label="true switch")
ax.axhline(5.0, color="k", lw=0.5)
ax.set_xlabel("observation")
ax.set_ylabel("running error")
ax.legend()
fig.tight_layout()
fig.savefig("detector_toy.png", dpi=120)
print("wrote detector_toy.png")

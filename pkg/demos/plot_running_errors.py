r"""
Running errors in the predator-prey grid
========================================

Predator B alternates between chasing prey X and prey Y every 100 timesteps.
Predator A never sees B's policy, only its actions, and tracks both
candidate policies with running errors. The wrong candidate saturates at
the threshold almost immediately after each switch; the right one sinks
back more slowly.
"""

import matplotlib.pyplot as plt
import numpy as np

from opsdemo.agents import SwitchSchedule
from opsdemo.detector import DetectorConfig
from opsdemo.experiment import ExperimentConfig, run_experiment

fig, axes = plt.subplots(2, 1, figsize=(8, 5), sharey=True)
for ax, period in zip(axes, (100, 200)):
    cfg = ExperimentConfig(
        detector=DetectorConfig(alpha=0.95, threshold=5.0, initial_assumed=0),
        switch=SwitchSchedule(period),
        episodes=40,
        base_seed=1,
    )
    metrics, summary = run_experiment(cfg)
    horizon = min(800, len(metrics))
    t = metrics.t[:horizon]
    ax.plot(t, metrics.running_errors[:horizon, 0], label="chase X")
    ax.plot(t, metrics.running_errors[:horizon, 1], label="chase Y")
    for s in range(period, horizon, period):
        ax.axvline(s, color="grey", ls=":", lw=0.8)
    ax.set_title(f"switch every {period} steps: accuracy {summary.aop_accuracy:.3f}, "
                 f"latency {summary.mean_detection_latency:.1f}")
    ax.set_ylabel("running error")
axes[0].legend(loc="upper right")
axes[-1].set_xlabel("timestep")
fig.tight_layout()
fig.savefig("running_errors.png", dpi=120)
print("wrote running_errors.png")

###############################################################################
# Average shape around a switch: mean running error of the outgoing and the
# incoming policy, aligned on the switch step.

cfg = ExperimentConfig(detector=DetectorConfig(alpha=0.95), runs=10, episodes=100)
m, _ = run_experiment(cfg)
out_curves, in_curves = [], []
for r in range(cfg.runs):
    sel = m.run == r
    actual, re = m.actual[sel], m.running_errors[sel]
    for s in np.flatnonzero(actual[1:] != actual[:-1]) + 1:
        if s + 100 <= len(actual):
            out_curves.append(re[s : s + 100, actual[s - 1]])
            in_curves.append(re[s : s + 100, actual[s]])
out_mean, in_mean = np.mean(out_curves, axis=0), np.mean(in_curves, axis=0)
print("steps after switch:        0     10     25     50     99")
print("outgoing policy:  " + " ".join(f"{out_mean[i]:6.2f}" for i in (0, 10, 25, 50, 99)))
print("incoming policy:  " + " ".join(f"{in_mean[i]:6.2f}" for i in (0, 10, 25, 50, 99)))

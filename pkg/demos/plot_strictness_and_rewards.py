r"""
Strictness factor and reward comparison
=======================================

Sweep the strictness factor over 0.8, 0.9, 0.95 and 0.99, then compare
episodic rewards of predator A with switch detection against an agent that
keeps its initial assumption forever.
"""

import matplotlib.pyplot as plt
import numpy as np

from opsdemo.detector import DetectorConfig
from opsdemo.experiment import ExperimentConfig, episode_rewards, run_experiment, sweep_alpha

base = ExperimentConfig(runs=20, episodes=100)
table = sweep_alpha(base, [0.8, 0.9, 0.95, 0.99])
for alpha, s in table:
    print(f"alpha={alpha:<5} accuracy={s.aop_accuracy:.4f} latency={s.mean_detection_latency:.1f} "
          f"false switches={s.false_switches}")

###############################################################################
# Rewards, 25 runs of 200 episodes each.

totals = {}
for mode in ("opsdemo", "fixed_baseline"):
    cfg = ExperimentConfig(runs=25, episodes=200, agent_mode=mode, detector=DetectorConfig(alpha=0.95))
    metrics, summary = run_experiment(cfg)
    totals[mode] = episode_rewards(metrics)
    print(f"{mode:>15}: mean {summary.mean_episodic_reward:.2f}  std {summary.std_episodic_reward:.2f}")

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.2))
ax1.plot([a for a, _ in table], [s.aop_accuracy for _, s in table], "o-")
ax1.set_xlabel("alpha")
ax1.set_ylabel("assumed-policy accuracy")
edges = np.arange(-80, 101, 10)
for mode, vals in totals.items():
    ax2.hist(vals, bins=edges, alpha=0.6, label=mode)
ax2.set_xlabel("episodic reward of predator A")
ax2.legend()
fig.tight_layout()
fig.savefig("strictness_and_rewards.png", dpi=120)
print("wrote strictness_and_rewards.png")

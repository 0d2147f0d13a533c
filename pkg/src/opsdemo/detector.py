"""Online opponent-policy switch detection by running-error estimation.

The detector keeps one running error per policy in the opponent bank. Each
observed opponent action adds the observed error of every candidate policy
and subtracts that policy's decay; values are clamped to ``[0, threshold]``.
When the currently assumed policy hits the threshold a switch is declared
and the lowest-error alternative becomes the new assumption, with its
running error halved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

from opsdemo.error_estimation import decay, observed_error
from opsdemo.policy_core import PolicyBank, ResponseBank, check_action, sample_action


@dataclass(frozen=True)
class DetectorConfig:
    alpha: float = 0.95
    threshold: float = 5.0
    initial_assumed: int | Literal["random"] = "random"

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.threshold > 0:
            raise ValueError(f"threshold must be positive, got {self.threshold}")
        if self.initial_assumed != "random" and (
            isinstance(self.initial_assumed, bool)
            or not isinstance(self.initial_assumed, int)
            or self.initial_assumed < 0
        ):
            raise ValueError(f"initial_assumed must be a policy id or 'random', got {self.initial_assumed!r}")


class PolicyError(NamedTuple):
    observed: float
    decay: float
    # after clamping, before any halving
    running_error: float


@dataclass(frozen=True)
class DetectorUpdate:
    per_policy: tuple[PolicyError, ...]
    switched: tuple[int, int] | None
    assumed_after: int
    # final running errors, halving applied
    running_errors: tuple[float, ...]


class Detector:
    """Mutable detector state. One writer at a time.

    Args:
        bank: candidate opponent policies.
        responses: response policy for each opponent id.
        config: strictness, threshold and initial assumption.
        seed: seed or generator used to draw a random initial assumption.
    """

    def __init__(
        self,
        bank: PolicyBank,
        responses: ResponseBank | None = None,
        config: DetectorConfig | None = None,
        seed: int | np.random.Generator | None = None,
    ):
        self.bank = bank
        self.responses = responses
        self.config = config or DetectorConfig()
        if self.config.initial_assumed != "random" and self.config.initial_assumed >= len(bank):
            raise ValueError(
                f"initial_assumed={self.config.initial_assumed} not in bank of size {len(bank)}"
            )
        if responses is not None:
            missing = [i for i in bank.ids if i not in responses.mapping]
            if missing:
                raise ValueError(f"response bank has no entry for opponent ids {missing}")
        self._seed_rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        self.reset()

    def reset(self) -> Detector:
        """Zero every running error and re-draw the initial assumption."""
        self.running_errors = [0.0] * len(self.bank)
        if self.config.initial_assumed == "random":
            self.assumed = int(self._seed_rng.integers(len(self.bank)))
        else:
            self.assumed = self.config.initial_assumed
        self.switch_count = 0
        return self

    def observe(self, state, action: int) -> DetectorUpdate:
        check_action(action, self.bank.n)
        alpha = self.config.alpha
        threshold = self.config.threshold

        # computed in full before committing so a failing policy leaves state untouched
        per_policy = []
        for pid, policy in enumerate(self.bank.policies):
            dist = policy.distribution(state)
            e_o = observed_error(dist, action)
            d = decay(dist, alpha)
            value = min(max(self.running_errors[pid] + e_o - d, 0.0), threshold)
            per_policy.append(PolicyError(e_o, d, value))
        self.running_errors = [pe.running_error for pe in per_policy]
        hit_threshold = self.running_errors[self.assumed] >= threshold

        switched = None
        if hit_threshold and len(self.bank) > 1:
            old = self.assumed
            new = min((pid for pid in self.bank.ids if pid != old), key=lambda pid: (self.running_errors[pid], pid))
            self.running_errors[new] /= 2.0
            self.assumed = new
            self.switch_count += 1
            switched = (old, new)

        return DetectorUpdate(tuple(per_policy), switched, self.assumed, tuple(self.running_errors))

    def respond(self, state, rng: np.random.Generator) -> int:
        """Sample an action from the response to the assumed opponent policy."""
        if self.responses is None:
            raise RuntimeError("detector was built without a response bank")
        return sample_action(self.responses[self.assumed], state, rng)

    def __repr__(self):
        errs = ", ".join(f"{e:.3f}" for e in self.running_errors)
        return f"Detector(assumed={self.assumed}, running_errors=[{errs}])"

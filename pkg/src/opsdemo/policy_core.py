"""Action distributions, policies and policy banks.

A policy maps a state to an :class:`ActionDistribution`. States are either
canonical grid-state keys (strings) or :class:`~opsdemo.gridworld.GridState`
objects; tabular policies look states up by key, parametric policies read
positions directly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

SUM_TOL = 1e-9


class ActionDistribution:
    """Probability vector over actions ``0..n-1``.

    Stored as a tuple of floats; instances are immutable and hashable.
    """

    __slots__ = ("probs",)

    def __init__(self, probs: Iterable[float]):
        probs = tuple(float(p) for p in probs)
        if len(probs) < 2:
            raise ValueError(f"need at least 2 actions, got {len(probs)}")
        for p in probs:
            if not (0.0 <= p <= 1.0) or math.isnan(p):
                raise ValueError(f"probability out of [0, 1]: {p}")
        if abs(math.fsum(probs) - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {math.fsum(probs)!r}, not 1")
        object.__setattr__(self, "probs", probs)

    def __setattr__(self, name, value):
        raise AttributeError("ActionDistribution is immutable")

    @classmethod
    def uniform(cls, n: int) -> ActionDistribution:
        return cls([1.0 / n] * n)

    @classmethod
    def deterministic(cls, n: int, action: int) -> ActionDistribution:
        probs = [0.0] * n
        probs[action] = 1.0
        return cls(probs)

    @property
    def n(self) -> int:
        return len(self.probs)

    def __len__(self) -> int:
        return len(self.probs)

    def __getitem__(self, action: int) -> float:
        return self.probs[check_action(action, len(self.probs))]

    def __iter__(self):
        return iter(self.probs)

    def __eq__(self, other):
        if isinstance(other, ActionDistribution):
            return self.probs == other.probs
        return NotImplemented

    def __hash__(self):
        return hash(self.probs)

    def __repr__(self):
        return f"ActionDistribution({list(self.probs)})"


def check_action(action: int, n: int) -> int:
    """Validate an action index against an action count and return it."""
    if isinstance(action, bool) or not isinstance(action, (int, np.integer)):
        raise ValueError(f"action index must be an integer, got {action!r}")
    if not 0 <= action < n:
        raise ValueError(f"action index {action} outside 0..{n - 1}")
    return int(action)


def _key_of(state) -> str:
    if isinstance(state, str):
        return state
    from opsdemo.gridworld import state_key

    return state_key(state)


class Policy:
    """Base class: subclasses implement :meth:`distribution`."""

    n: int

    def distribution(self, state) -> ActionDistribution:
        raise NotImplementedError

    def action_prob(self, state, action: int) -> float:
        return action_prob(self, state, action)

    def sample(self, state, rng: np.random.Generator) -> int:
        return sample_action(self, state, rng)

    def to_dict(self) -> dict:
        raise NotImplementedError


class UniformPolicy(Policy):
    def __init__(self, n: int):
        if n < 2:
            raise ValueError(f"need at least 2 actions, got {n}")
        self.n = n
        self._dist = ActionDistribution.uniform(n)

    def distribution(self, state) -> ActionDistribution:
        return self._dist

    def to_dict(self) -> dict:
        return {"kind": "uniform"}

    def __repr__(self):
        return f"UniformPolicy({self.n})"


class TabularPolicy(Policy):
    """Lookup table from state key to distribution.

    Unlisted states fall back to ``default`` (uniform when not given).
    """

    def __init__(
        self,
        table: Mapping[str, ActionDistribution | Sequence[float]],
        default: ActionDistribution | Sequence[float] | None = None,
        n: int | None = None,
    ):
        table = {
            str(k): v if isinstance(v, ActionDistribution) else ActionDistribution(v)
            for k, v in table.items()
        }
        if default is not None and not isinstance(default, ActionDistribution):
            default = ActionDistribution(default)
        sizes = {d.n for d in table.values()}
        if default is not None:
            sizes.add(default.n)
        if n is not None:
            sizes.add(n)
        if not sizes:
            raise ValueError("cannot infer action count of an empty tabular policy")
        if len(sizes) > 1:
            raise ValueError(f"inconsistent action counts in tabular policy: {sorted(sizes)}")
        self.n = sizes.pop()
        self.table = table
        self.default = default if default is not None else ActionDistribution.uniform(self.n)

    def distribution(self, state) -> ActionDistribution:
        return self.table.get(_key_of(state), self.default)

    def to_dict(self) -> dict:
        return {
            "kind": "tabular",
            "default": list(self.default.probs),
            "table": {k: list(v.probs) for k, v in self.table.items()},
        }

    def __repr__(self):
        return f"TabularPolicy({len(self.table)} states, n={self.n})"


def action_prob(policy: Policy, state, action: int) -> float:
    """Probability that ``policy`` picks ``action`` in ``state``."""
    check_action(action, policy.n)
    return policy.distribution(state).probs[action]


def sample_from(dist: ActionDistribution, rng: np.random.Generator) -> int:
    u = rng.random()
    acc = 0.0
    last = 0
    for i, p in enumerate(dist.probs):
        if p > 0.0:
            last = i
            acc += p
            if u < acc:
                return i
    # rounding left u above the cumulative sum
    return last


def sample_action(policy: Policy, state, rng: np.random.Generator) -> int:
    """Draw one action from ``policy`` at ``state`` using ``rng``."""
    return sample_from(policy.distribution(state), rng)


class PolicyBank:
    """Ordered, non-empty collection of policies sharing one action count.

    Policy ids are the positions ``0..k-1``.
    """

    def __init__(self, policies: Sequence[Policy]):
        policies = tuple(policies)
        if not policies:
            raise ValueError("policy bank must not be empty")
        sizes = {p.n for p in policies}
        if len(sizes) != 1:
            raise ValueError(f"policies in a bank must share one action count, got {sorted(sizes)}")
        self.policies = policies
        self.n = sizes.pop()

    def __len__(self) -> int:
        return len(self.policies)

    def __getitem__(self, policy_id: int) -> Policy:
        return self.policies[policy_id]

    def __iter__(self):
        return iter(self.policies)

    @property
    def ids(self) -> range:
        return range(len(self.policies))

    def to_dict(self) -> dict:
        return {"n": self.n, "policies": [p.to_dict() for p in self.policies]}

    def __repr__(self):
        return f"PolicyBank({list(self.policies)!r})"


class ResponseBank:
    """Maps every opponent policy id in a bank to a response policy."""

    def __init__(self, mapping: Mapping[int, Policy] | Sequence[Policy], bank: PolicyBank | None = None):
        if not isinstance(mapping, Mapping):
            mapping = dict(enumerate(mapping))
        self.mapping = dict(mapping)
        if bank is not None:
            missing = [i for i in bank.ids if i not in self.mapping]
            if missing:
                raise ValueError(f"response bank has no entry for opponent ids {missing}")

    def __getitem__(self, policy_id: int) -> Policy:
        return self.mapping[policy_id]

    def __len__(self) -> int:
        return len(self.mapping)


def policy_from_dict(spec: Mapping[str, Any], n: int) -> Policy:
    kind = spec.get("kind")
    if kind == "uniform":
        return UniformPolicy(n)
    if kind == "tabular":
        return TabularPolicy(spec.get("table", {}), spec.get("default"), n=n)
    if kind == "chase":
        from opsdemo.agents import ChasePolicy

        if n != 5:
            raise ValueError(f"chase policies have 5 actions, bank declares n={n}")
        return ChasePolicy(
            target=spec["target"],
            epsilon=float(spec.get("epsilon", 0.1)),
            role=spec.get("role", "B"),
            width=int(spec.get("width", 10)),
            height=int(spec.get("height", 10)),
        )
    raise ValueError(f"unknown policy kind {kind!r}")


def bank_from_dict(data: Mapping[str, Any]) -> PolicyBank:
    try:
        n = int(data["n"])
        entries = data["policies"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"policy bank needs 'n' and 'policies': {exc}") from None
    if not isinstance(entries, list):
        raise ValueError("'policies' must be a list")
    return PolicyBank([policy_from_dict(e, n) for e in entries])


def load_bank(path: str | Path) -> PolicyBank:
    with open(path) as fh:
        return bank_from_dict(json.load(fh))


def dump_bank(bank: PolicyBank) -> str:
    return json.dumps(bank.to_dict(), indent=2, sort_keys=True) + "\n"

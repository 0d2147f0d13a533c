"""Scripted predator and prey behaviour.

Predator B (the opponent) chases one of the two prey; which one follows a
periodic :class:`SwitchSchedule`. Predator A's response to "B chases X" is to
chase Y and vice versa. Prey move uniformly at random.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from opsdemo.gridworld import MOVES, N_ACTIONS, GridAction, GridState, manhattan, parse_state_key
from opsdemo.policy_core import ActionDistribution, Policy, PolicyBank, ResponseBank, UniformPolicy

CHASE_X = 0
CHASE_Y = 1
PREY = ("X", "Y")

OPPONENT_EPSILON = 0.1
RESPONSE_EPSILON = 0.05


@lru_cache(maxsize=65536)
def _chase_probs(role_pos, target_pos, caught, epsilon, width, height):
    if caught:
        return ActionDistribution.uniform(N_ACTIONS)
    dist_now = manhattan(role_pos, target_pos)
    reducing = []
    for a, (dx, dy) in enumerate(MOVES):
        nxt = (min(max(role_pos[0] + dx, 0), width - 1), min(max(role_pos[1] + dy, 0), height - 1))
        if manhattan(nxt, target_pos) < dist_now:
            reducing.append(a)
    if not reducing:
        reducing = [GridAction.STAY]
    k = len(reducing)
    inside = (1.0 - epsilon) / k
    outside = epsilon / (N_ACTIONS - k)
    return ActionDistribution([inside if a in reducing else outside for a in range(N_ACTIONS)])


class ChasePolicy(Policy):
    """Move the ``role`` predator toward prey ``target``.

    Mass ``1 - epsilon`` is spread evenly over the moves that strictly shrink
    the Manhattan distance to the target (``Stay`` when already on it); the
    remaining ``epsilon`` is spread evenly over the other moves. Once the
    target is caught the policy is uniform.
    """

    n = N_ACTIONS

    def __init__(self, target: str, epsilon: float = OPPONENT_EPSILON, role: str = "B", width: int = 10, height: int = 10):
        if target not in PREY:
            raise ValueError(f"target must be 'X' or 'Y', got {target!r}")
        if role not in ("A", "B"):
            raise ValueError(f"role must be 'A' or 'B', got {role!r}")
        if not 0.0 <= epsilon < 1.0:
            raise ValueError(f"epsilon must lie in [0, 1), got {epsilon}")
        self.target = target
        self.epsilon = float(epsilon)
        self.role = role
        self.width = width
        self.height = height

    def distribution(self, state) -> ActionDistribution:
        if isinstance(state, str):
            state = parse_state_key(state)
        return chase_distribution(self, state)

    def to_dict(self) -> dict:
        return {
            "kind": "chase",
            "target": self.target,
            "epsilon": self.epsilon,
            "role": self.role,
            "width": self.width,
            "height": self.height,
        }

    def __eq__(self, other):
        return isinstance(other, ChasePolicy) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(tuple(sorted(self.to_dict().items())))

    def __repr__(self):
        return f"ChasePolicy(target={self.target!r}, epsilon={self.epsilon}, role={self.role!r})"


def chase_distribution(policy: ChasePolicy, state: GridState) -> ActionDistribution:
    return _chase_probs(
        state.position(policy.role),
        state.position(policy.target),
        state.caught(policy.target),
        policy.epsilon,
        policy.width,
        policy.height,
    )


def opponent_bank(epsilon: float = OPPONENT_EPSILON, width: int = 10, height: int = 10) -> PolicyBank:
    """Predator B's candidate policies: id 0 chases X, id 1 chases Y."""
    return PolicyBank([ChasePolicy(t, epsilon, "B", width, height) for t in PREY])


def response_policy_for(opponent: int, epsilon: float = RESPONSE_EPSILON, width: int = 10, height: int = 10) -> ChasePolicy:
    """Predator A takes the prey the opponent is not chasing."""
    if opponent == CHASE_X:
        return ChasePolicy("Y", epsilon, "A", width, height)
    if opponent == CHASE_Y:
        return ChasePolicy("X", epsilon, "A", width, height)
    raise ValueError(f"unknown opponent policy id {opponent!r}")


def response_bank(epsilon: float = RESPONSE_EPSILON, width: int = 10, height: int = 10) -> ResponseBank:
    return ResponseBank({pid: response_policy_for(pid, epsilon, width, height) for pid in (CHASE_X, CHASE_Y)})


PREY_POLICY = UniformPolicy(N_ACTIONS)


@dataclass(frozen=True)
class SwitchSchedule:
    """Opponent cycles through ``sequence``, holding each id for ``period`` steps."""

    period: int = 100
    sequence: tuple[int, ...] = (CHASE_X, CHASE_Y)

    def __post_init__(self):
        if self.period < 1:
            raise ValueError(f"period must be >= 1, got {self.period}")
        if not self.sequence:
            raise ValueError("switch sequence must not be empty")
        object.__setattr__(self, "sequence", tuple(int(s) for s in self.sequence))


def scheduled_policy(schedule: SwitchSchedule, t: int) -> int:
    if t < 0:
        raise ValueError(f"timestep must be non-negative, got {t}")
    return schedule.sequence[(t // schedule.period) % len(schedule.sequence)]

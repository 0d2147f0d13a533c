"""Two-predator, two-prey grid world.

Predators A and B chase prey X and Y on a ``width x height`` grid. All four
entities move simultaneously; moves are clamped at the borders and a caught
prey stays put. Cells are ``(col, row)`` with ``Up`` increasing the row.

Rewards, per predator and per step:

* +100 to both predators on the step the second prey is caught;
* -1 if the predator ends the step farther than one cell (Manhattan) from
  every prey that was still free at the start of the step;
* -1 to both predators if they end the step on the same cell.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import NamedTuple, Sequence

import numpy as np

Cell = tuple[int, int]

CAPTURE_REWARD = 100.0
NOT_ADJACENT_PENALTY = -1.0
COLLISION_PENALTY = -1.0


class GridAction(IntEnum):
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3
    STAY = 4


N_ACTIONS = len(GridAction)

MOVES: tuple[Cell, ...] = ((0, 1), (0, -1), (-1, 0), (1, 0), (0, 0))


class EpisodeFinishedError(RuntimeError):
    """Raised when stepping an episode that has already ended."""


@dataclass(frozen=True)
class GridConfig:
    width: int = 10
    height: int = 10
    max_steps: int = 40

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise ValueError(f"grid must be at least 2x2, got {self.width}x{self.height}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")


@dataclass(frozen=True)
class GridState:
    pos_A: Cell
    pos_B: Cell
    pos_X: Cell
    pos_Y: Cell
    caught_X: bool = False
    caught_Y: bool = False
    t: int = 0

    def position(self, entity: str) -> Cell:
        return getattr(self, f"pos_{entity}")

    def caught(self, prey: str) -> bool:
        return getattr(self, f"caught_{prey}")


class StepOutcome(NamedTuple):
    next_state: GridState
    reward_A: float
    reward_B: float
    done: bool


def manhattan(p: Cell, q: Cell) -> int:
    return abs(p[0] - q[0]) + abs(p[1] - q[1])


def move(cell: Cell, action: int, width: int, height: int) -> Cell:
    dx, dy = MOVES[action]
    x = min(max(cell[0] + dx, 0), width - 1)
    y = min(max(cell[1] + dy, 0), height - 1)
    return (x, y)


def is_done(state: GridState, cfg: GridConfig) -> bool:
    return (state.caught_X and state.caught_Y) or state.t >= cfg.max_steps


def step(state: GridState, actions: Sequence[int], cfg: GridConfig = GridConfig()) -> StepOutcome:
    """Advance one timestep with joint actions ordered ``(A, B, X, Y)``."""
    if is_done(state, cfg):
        raise EpisodeFinishedError(f"episode already finished at t={state.t}")
    if len(actions) != 4:
        raise ValueError(f"expected 4 actions (A, B, X, Y), got {len(actions)}")
    for a in actions:
        if not 0 <= a < N_ACTIONS:
            raise ValueError(f"invalid grid action {a}")
    w, h = cfg.width, cfg.height
    a_act, b_act, x_act, y_act = actions

    pos_A = move(state.pos_A, a_act, w, h)
    pos_B = move(state.pos_B, b_act, w, h)
    pos_X = state.pos_X if state.caught_X else move(state.pos_X, x_act, w, h)
    pos_Y = state.pos_Y if state.caught_Y else move(state.pos_Y, y_act, w, h)

    caught_X = state.caught_X or pos_X == pos_A or pos_X == pos_B
    caught_Y = state.caught_Y or pos_Y == pos_A or pos_Y == pos_B

    # prey free at the start of the step, including any caught during it
    live = [p for p, was in ((pos_X, state.caught_X), (pos_Y, state.caught_Y)) if not was]

    rewards = []
    for pred in (pos_A, pos_B):
        r = 0.0
        if not any(manhattan(pred, p) <= 1 for p in live):
            r += NOT_ADJACENT_PENALTY
        if pos_A == pos_B:
            r += COLLISION_PENALTY
        if caught_X and caught_Y:
            r += CAPTURE_REWARD
        rewards.append(r)

    nxt = GridState(pos_A, pos_B, pos_X, pos_Y, caught_X, caught_Y, state.t + 1)
    return StepOutcome(nxt, rewards[0], rewards[1], is_done(nxt, cfg))


def state_key(state: GridState) -> str:
    """Canonical key ``"Ax,Ay|Bx,By|Xx,Xy|Yx,Yy|cX,cY"``; the timestep is not encoded."""
    a, b, x, y = state.pos_A, state.pos_B, state.pos_X, state.pos_Y
    return (
        f"{a[0]},{a[1]}|{b[0]},{b[1]}|{x[0]},{x[1]}|{y[0]},{y[1]}"
        f"|{int(state.caught_X)},{int(state.caught_Y)}"
    )


def parse_state_key(key: str, t: int = 0) -> GridState:
    """Inverse of :func:`state_key`."""
    try:
        parts = key.split("|")
        if len(parts) != 5:
            raise ValueError
        cells = []
        for part in parts:
            u, v = part.split(",")
            cells.append((int(u), int(v)))
        cx, cy = cells[4]
        if cx not in (0, 1) or cy not in (0, 1):
            raise ValueError
    except ValueError:
        raise ValueError(f"malformed state key {key!r}") from None
    return GridState(cells[0], cells[1], cells[2], cells[3], bool(cx), bool(cy), t)


def reset_episode(cfg: GridConfig, rng: np.random.Generator) -> GridState:
    """Place A, B, X, Y on four distinct cells drawn uniformly at random."""
    idx = rng.choice(cfg.width * cfg.height, size=4, replace=False)
    a, b, x, y = ((int(i) % cfg.width, int(i) // cfg.width) for i in idx)
    return GridState(a, b, x, y)


def render(state: GridState, cfg: GridConfig = GridConfig()) -> str:
    """ASCII picture, top row printed first. Caught prey show in lowercase."""
    grid = [["." for _ in range(cfg.width)] for _ in range(cfg.height)]
    for name, pos in (("X", state.pos_X), ("Y", state.pos_Y), ("A", state.pos_A), ("B", state.pos_B)):
        label = name.lower() if name in "XY" and state.caught(name) else name
        grid[pos[1]][pos[0]] = label
    return "\n".join("".join(row) for row in reversed(grid))

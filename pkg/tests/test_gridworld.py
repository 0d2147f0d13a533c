import itertools

import numpy as np
import pytest

from opsdemo.gridworld import (
    EpisodeFinishedError,
    GridAction,
    GridConfig,
    GridState,
    manhattan,
    parse_state_key,
    reset_episode,
    state_key,
    step,
)

STAY = GridAction.STAY


def test_manhattan():
    assert manhattan((0, 0), (0, 0)) == 0
    assert manhattan((2, 2), (7, 7)) == 10
    rng = np.random.default_rng(0)
    for _ in range(100):
        p, q = tuple(rng.integers(10, size=2)), tuple(rng.integers(10, size=2))
        assert manhattan(p, q) == manhattan(q, p)


def test_double_capture():
    s = GridState((2, 2), (7, 7), (3, 2), (7, 6))
    out = step(s, (GridAction.RIGHT, GridAction.DOWN, STAY, STAY))
    assert out.next_state.caught_X and out.next_state.caught_Y
    assert out.reward_A == out.reward_B == 100.0
    assert out.done


def test_collision_and_no_adjacent_prey():
    s = GridState((2, 2), (3, 2), (9, 9), (0, 9))
    out = step(s, (GridAction.RIGHT, STAY, STAY, STAY))
    assert out.next_state.pos_A == out.next_state.pos_B
    assert out.reward_A == out.reward_B == -2.0


def test_border_clamp():
    s = GridState((0, 5), (5, 5), (9, 9), (9, 0))
    out = step(s, (GridAction.LEFT, STAY, STAY, STAY))
    assert out.next_state.pos_A == (0, 5)
    out = step(GridState((9, 9), (5, 5), (0, 0), (1, 0)), (GridAction.UP, STAY, STAY, STAY))
    assert out.next_state.pos_A == (9, 9)


def test_single_capture_and_caught_prey_frozen():
    s = GridState((2, 2), (8, 8), (3, 2), (0, 9))
    out = step(s, (GridAction.RIGHT, STAY, STAY, STAY))
    nxt = out.next_state
    assert nxt.caught_X and not nxt.caught_Y
    assert out.reward_A == 0.0 and out.reward_B == -1.0
    out2 = step(nxt, (STAY, STAY, GridAction.LEFT, STAY))
    assert out2.next_state.pos_X == (3, 2)
    # X is no longer free, so standing on it earns the non-adjacency penalty
    assert out2.reward_A == -1.0


def test_swap_is_not_collision():
    s = GridState((2, 2), (3, 2), (9, 9), (0, 9))
    out = step(s, (GridAction.RIGHT, GridAction.LEFT, STAY, STAY))
    assert out.reward_A == out.reward_B == -1.0


def test_episode_ends_at_max_steps_and_refuses_more():
    cfg = GridConfig(max_steps=3)
    s = GridState((0, 0), (9, 9), (5, 5), (5, 6))
    for i in range(3):
        out = step(s, (STAY, STAY, STAY, STAY), cfg)
        s = out.next_state
    assert out.done and s.t == 3
    with pytest.raises(EpisodeFinishedError):
        step(s, (STAY, STAY, STAY, STAY), cfg)


def test_fig2_key():
    s = GridState((2, 2), (7, 7), (6, 3), (4, 8))
    assert state_key(s) == "2,2|7,7|6,3|4,8|0,0"


def test_key_round_trip_and_injective():
    rng = np.random.default_rng(1)
    seen = {}
    for _ in range(1000):
        cells = [tuple(int(v) for v in rng.integers(10, size=2)) for _ in range(4)]
        s = GridState(*cells, bool(rng.integers(2)), bool(rng.integers(2)))
        k = state_key(s)
        assert parse_state_key(k) == s
        if k in seen:
            assert seen[k] == s
        seen[k] = s


@pytest.mark.parametrize("bad", ["", "1,2|3,4", "a,b|1,1|1,1|1,1|0,0", "1,1|1,1|1,1|1,1|2,0"])
def test_parse_rejects_malformed(bad):
    with pytest.raises(ValueError):
        parse_state_key(bad)


def test_reset_episode():
    cfg = GridConfig()
    a = reset_episode(cfg, np.random.default_rng(42))
    assert a == reset_episode(cfg, np.random.default_rng(42))
    rng = np.random.default_rng(0)
    for _ in range(1000):
        s = reset_episode(cfg, rng)
        cells = [s.pos_A, s.pos_B, s.pos_X, s.pos_Y]
        assert len(set(cells)) == 4
        assert all(0 <= x < 10 and 0 <= y < 10 for x, y in cells)
        assert not s.caught_X and not s.caught_Y and s.t == 0


def _rule_table(pre: GridState, a, b, x, y):
    """Rewards (A, B) from post-move cells, written from the rules directly."""
    free = [p for p, c in ((x, pre.caught_X), (y, pre.caught_Y)) if not c]
    x_taken = pre.caught_X or x in (a, b)
    y_taken = pre.caught_Y or y in (a, b)
    bonus = 100 if (x_taken and y_taken) else 0
    crash = -1 if a == b else 0
    out = []
    for me in (a, b):
        near = min((abs(me[0] - p[0]) + abs(me[1] - p[1]) for p in free), default=99)
        out.append(bonus + crash + (0 if near <= 1 else -1))
    return tuple(out)


def test_rewards_exhaustive_small_grid():
    # Rewards depend only on post-move cells and pre-step caught flags. With
    # prey holding still, enumerating every start layout and every predator
    # move pair reaches every post-move configuration on a 3x3 grid.
    cfg = GridConfig(3, 3, 40)
    cells = [(c, r) for c in range(3) for r in range(3)]
    seen = set()
    moves = list(itertools.product(range(5), repeat=2))
    for flags in ((False, False), (True, False), (False, True)):
        for a, b, x, y in itertools.product(cells, repeat=4):
            pre = GridState(a, b, x, y, *flags)
            for ma, mb in moves:
                out = step(pre, (ma, mb, STAY, STAY), cfg)
                nxt = out.next_state
                expected = _rule_table(pre, nxt.pos_A, nxt.pos_B, nxt.pos_X, nxt.pos_Y)
                assert (out.reward_A, out.reward_B) == expected
                seen.update(expected)
    assert seen <= {100, 0, -1, -2, 99, 98}
    assert {0, -1, -2, 100, 99} <= seen


def test_random_joint_actions_keep_invariants():
    rng = np.random.default_rng(5)
    cfg = GridConfig()
    for _ in range(200):
        s = reset_episode(cfg, rng)
        done = False
        while not done:
            prev = s
            out = step(s, tuple(int(v) for v in rng.integers(5, size=4)), cfg)
            s, done = out.next_state, out.done
            assert (prev.caught_X <= s.caught_X) and (prev.caught_Y <= s.caught_Y)
            for p in (s.pos_A, s.pos_B, s.pos_X, s.pos_Y):
                assert 0 <= p[0] < 10 and 0 <= p[1] < 10
        assert s.t <= cfg.max_steps

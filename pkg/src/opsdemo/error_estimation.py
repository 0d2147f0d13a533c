"""Observed and expected compliance errors, and the dynamic decay.

Every function accepts an :class:`~opsdemo.policy_core.ActionDistribution`
or any plain sequence of probabilities.
"""

from __future__ import annotations

from typing import Sequence

from opsdemo.policy_core import ActionDistribution, check_action


def _probs(dist: ActionDistribution | Sequence[float]) -> Sequence[float]:
    return dist.probs if isinstance(dist, ActionDistribution) else dist


def observed_error(dist, action: int) -> float:
    """Error of seeing ``action`` under ``dist``: ``1 - p[action]``."""
    probs = _probs(dist)
    return 1.0 - probs[check_action(action, len(probs))]


def observed_error_l1(dist, action: int) -> float:
    """Half the L1 distance between ``dist`` and the one-hot vector of ``action``.

    Mathematically identical to :func:`observed_error`; kept as an
    independent cross-check.
    """
    probs = _probs(dist)
    check_action(action, len(probs))
    return 0.5 * sum(abs(p - (1.0 if k == action else 0.0)) for k, p in enumerate(probs))


def expected_error_following(dist) -> float:
    """Mean observed error when actions really are drawn from ``dist``."""
    return sum(p * (1.0 - p) for p in _probs(dist))


def expected_error_not_following(n: int) -> float:
    """Mean observed error when actions are uniform over ``n`` choices."""
    if n < 2:
        raise ValueError(f"need at least 2 actions, got {n}")
    return (n - 1) / n


def decay(dist, alpha: float) -> float:
    """Per-step decay: ``alpha * e_f + (1 - alpha) * e_nf``.

    ``alpha`` is the strictness factor; ``alpha = 1`` makes the decay equal
    to the compliant expectation, ``alpha = 0`` to the uniform-violation one.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    probs = _probs(dist)
    return alpha * expected_error_following(probs) + (1.0 - alpha) * expected_error_not_following(
        len(probs)
    )

import math

import numpy as np

from opsdemo.policy_core import PolicyBank, TabularPolicy

CRITERIA: dict[int, tuple[bool, str]] = {}


def reference_running_errors(dists, action, errors, assumed, alpha, threshold):
    """Straight-line transcription of the update loop, used as an oracle.

    ``dists`` holds one probability list per policy. Observed error is taken
    from the half-L1 form, never from ``1 - p``. Returns
    ``(errors, assumed, switched)`` without mutating the inputs.
    """
    errors = list(errors)
    for i, probs in enumerate(dists):
        n = len(probs)
        onehot = [1.0 if k == action else 0.0 for k in range(n)]
        e_o = 0.5 * sum(abs(p - f) for p, f in zip(probs, onehot))
        e_f = sum(p * (1.0 - p) for p in probs)
        e_nf = (n - 1) / n
        d = alpha * e_f + (1.0 - alpha) * e_nf
        errors[i] = errors[i] + e_o - d
        if errors[i] < 0:
            errors[i] = 0.0
        if errors[i] > threshold:
            errors[i] = threshold
    switched = None
    if errors[assumed] >= threshold and len(dists) > 1:
        best = None
        for i in range(len(dists)):
            if i == assumed:
                continue
            if best is None or errors[i] < errors[best]:
                best = i
        switched = (assumed, best)
        assumed = best
        errors[assumed] = errors[assumed] / 2
    return errors, assumed, switched


def two_policy_bank():
    return PolicyBank([TabularPolicy({"s": [1.0, 0.0]}), TabularPolicy({"s": [0.0, 1.0]})])


def violations_until_switch(alpha, threshold):
    return math.ceil(threshold / (1.0 - (1.0 - alpha) * 0.5))


def random_tabular_bank(rng: np.random.Generator, k: int, n: int, states: list[str]) -> PolicyBank:
    policies = []
    for _ in range(k):
        table = {}
        for s in states:
            p = rng.dirichlet(np.full(n, 0.3))
            p[-1] = 1.0 - p[:-1].sum()
            table[s] = np.clip(p, 0.0, 1.0).tolist()
        policies.append(TabularPolicy(table))
    return PolicyBank(policies)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        ok, detail = CRITERIA[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")

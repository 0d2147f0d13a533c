"""Acceptance criteria, one test each, reported in the terminal summary."""

import time

import numpy as np

from conftest import CRITERIA, random_tabular_bank, reference_running_errors, two_policy_bank, violations_until_switch
from opsdemo.cli import main
from opsdemo.detector import Detector, DetectorConfig
from opsdemo.error_estimation import (
    expected_error_following,
    expected_error_not_following,
    observed_error,
    observed_error_l1,
)
from opsdemo.experiment import ExperimentConfig, run_experiment, simulate
from opsdemo.policy_core import ActionDistribution

PAPER_ALPHAS = (0.8, 0.9, 0.95, 0.99)


def record(k, ok, detail):
    CRITERIA[k] = (bool(ok), detail)
    assert ok, detail


def test_criterion_1_lemma_identity():
    rng = np.random.default_rng(1)
    dists = []
    for _ in range(10_000):
        n = int(rng.integers(2, 11))
        p = rng.dirichlet(np.ones(n))
        p[-1] = 1.0 - p[:-1].sum()
        dists.append((ActionDistribution(np.clip(p, 0, 1)), int(rng.integers(n))))
    start = time.perf_counter()
    worst = max(abs(observed_error(d, a) - observed_error_l1(d, a)) for d, a in dists)
    elapsed = time.perf_counter() - start
    record(1, worst <= 1e-12 and elapsed < 1.0, f"max |diff| = {worst:.2e}, {elapsed:.2f}s")


def test_criterion_2_expectations_monte_carlo():
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    worst_f = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 11))
        p = rng.dirichlet(np.ones(n))
        draws = rng.choice(n, size=100_000, p=p)
        worst_f = max(worst_f, abs(np.mean(1.0 - p[draws]) - expected_error_following(p)))
    worst_nf = 0.0
    for n in (2, 5, 10):
        for _ in range(5):
            p = rng.dirichlet(np.ones(n))
            draws = rng.integers(n, size=100_000)
            worst_nf = max(worst_nf, abs(np.mean(1.0 - p[draws]) - expected_error_not_following(n)))
    elapsed = time.perf_counter() - start
    record(
        2,
        worst_f <= 0.01 and worst_nf <= 0.01 and elapsed < 10.0,
        f"following err {worst_f:.4f}, violation err {worst_nf:.4f}, {elapsed:.2f}s",
    )


def test_criterion_3_detector_oracle():
    alpha, threshold = 0.99, 5.0
    det = Detector(two_policy_bank(), config=DetectorConfig(alpha, threshold, initial_assumed=0))
    errors, assumed = [0.0, 0.0], 0
    detector_at = oracle_at = None
    for i in range(1, 20):
        errors, assumed, switched = reference_running_errors([[1.0, 0.0], [0.0, 1.0]], 1, errors, assumed, alpha, threshold)
        if switched and oracle_at is None:
            oracle_at = i
        if det.observe("s", 1).switched and detector_at is None:
            detector_at = i
    expected = violations_until_switch(alpha, threshold)
    record(3, detector_at == oracle_at == expected == 6,
           f"detector {detector_at}, oracle {oracle_at}, closed form {expected}")


def test_criterion_4_clamp_and_halving_fuzz():
    rng = np.random.default_rng(4)
    steps = violations = switches = 0
    while steps < 100_000:
        states = [f"s{i}" for i in range(int(rng.integers(1, 6)))]
        bank = random_tabular_bank(rng, int(rng.integers(1, 5)), int(rng.integers(2, 7)), states)
        threshold = float(rng.uniform(0.2, 6.0))
        det = Detector(bank, config=DetectorConfig(float(rng.uniform()), threshold, "random"), seed=rng)
        for _ in range(1000):
            upd = det.observe(states[int(rng.integers(len(states)))], int(rng.integers(bank.n)))
            steps += 1
            if not all(0.0 <= v <= threshold for v in upd.running_errors):
                violations += 1
            if upd.switched is not None:
                switches += 1
                old, new = upd.switched
                if new == old or upd.running_errors[new] != upd.per_policy[new].running_error / 2:
                    violations += 1
    record(4, violations == 0 and switches > 0,
           f"{steps} steps, {switches} switches, {violations} violations")


def test_criterion_5_running_error_traces():
    cfg = ExperimentConfig(detector=DetectorConfig(alpha=0.95, threshold=5.0), runs=10, episodes=100, base_seed=0)
    start = time.perf_counter()
    m = simulate(cfg)
    elapsed = time.perf_counter() - start
    period, threshold = cfg.switch.period, cfg.detector.threshold
    horizon = min(int(np.sum(m.run == r)) for r in range(cfg.runs))
    mean = np.mean([m.running_errors[m.run == r][:horizon] for r in range(cfg.runs)], axis=0)
    fractions = []
    for w in range(horizon // period):
        true = cfg.switch.sequence[w % len(cfg.switch.sequence)]
        seg = mean[w * period + period // 2 : (w + 1) * period]
        ok = (seg[:, true] < threshold / 4) & (seg[:, 1 - true] > 3 * threshold / 4)
        fractions.append(float(ok.mean()))
    worst = min(fractions)
    record(5, worst >= 0.8 and elapsed < 120,
           f"{len(fractions)} windows, worst second-half fraction {worst:.2f} (need >= 0.80), "
           f"per window {[round(f, 2) for f in fractions]}, {elapsed:.1f}s")


def test_criterion_6_accuracy_trend():
    start = time.perf_counter()
    acc = []
    for alpha in PAPER_ALPHAS:
        cfg = ExperimentConfig(detector=DetectorConfig(alpha=alpha), runs=20, episodes=100, base_seed=0)
        acc.append(run_experiment(cfg)[1].aop_accuracy)
    elapsed = time.perf_counter() - start
    monotone = all(b >= a for a, b in zip(acc, acc[1:]))
    record(6, monotone and acc[-1] > 0.85 and elapsed < 300,
           "accuracy " + ", ".join(f"{a}:{v:.4f}" for a, v in zip(PAPER_ALPHAS, acc)) + f", {elapsed:.1f}s")


def test_criterion_7_reward_comparison():
    start = time.perf_counter()
    res = {}
    for mode in ("opsdemo", "fixed_baseline"):
        cfg = ExperimentConfig(runs=25, episodes=200, agent_mode=mode, base_seed=0)
        res[mode] = run_experiment(cfg)[1]
    elapsed = time.perf_counter() - start
    ops, base = res["opsdemo"], res["fixed_baseline"]
    ok = (
        ops.mean_episodic_reward > base.mean_episodic_reward
        and ops.std_episodic_reward < base.std_episodic_reward
        and elapsed < 300
    )
    record(7, ok, f"opsdemo {ops.mean_episodic_reward:.2f}+-{ops.std_episodic_reward:.2f} vs "
                  f"baseline {base.mean_episodic_reward:.2f}+-{base.std_episodic_reward:.2f}, {elapsed:.1f}s")


def test_criterion_8_determinism(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"runs": 3, "episodes": 10}')
    outs = {}
    for name, extra in (("a", []), ("b", []), ("par", ["--workers", "2"])):
        outs[name] = tmp_path / name
        assert main(["simulate", "--config", str(cfg), "--out", str(outs[name]), "--seed", "7", *extra]) == 0
    same = all(
        (outs["a"] / f).read_bytes() == (outs[other] / f).read_bytes()
        for other in ("b", "par")
        for f in ("metrics.csv", "summary.json")
    )
    record(8, same, "repeat and parallel outputs byte-identical" if same else "outputs differ")

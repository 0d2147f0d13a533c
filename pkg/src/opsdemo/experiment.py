"""Seeded predator-prey runs with a switching opponent.

Each timestep: the opponent (predator B) acts from its scheduled policy,
predator A's detector observes that action, A then acts from the response
to its assumed opponent policy, the prey move at random and the grid steps.
Running errors persist across episodes within a run.

Run ``r`` draws all randomness from
``np.random.default_rng(np.random.SeedSequence([base_seed, r]))``, so runs
can be executed in any order or in parallel with identical results.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Literal, Sequence

import numpy as np

from opsdemo import agents
from opsdemo.detector import Detector, DetectorConfig
from opsdemo.gridworld import GridConfig, reset_episode, state_key, step
from opsdemo.policy_core import PolicyBank, sample_action

AgentMode = Literal["opsdemo", "fixed_baseline"]


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    switch: agents.SwitchSchedule = field(default_factory=agents.SwitchSchedule)
    episodes: int = 100
    runs: int = 1
    base_seed: int = 0
    agent_mode: AgentMode = "opsdemo"
    opponent_epsilon: float = agents.OPPONENT_EPSILON
    response_epsilon: float = agents.RESPONSE_EPSILON

    def __post_init__(self):
        if self.episodes < 1:
            raise ConfigError(f"episodes must be >= 1, got {self.episodes}")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if self.agent_mode not in ("opsdemo", "fixed_baseline"):
            raise ConfigError(f"agent_mode must be 'opsdemo' or 'fixed_baseline', got {self.agent_mode!r}")
        if any(s not in (agents.CHASE_X, agents.CHASE_Y) for s in self.switch.sequence):
            raise ConfigError(f"switch sequence may only contain ids 0 and 1, got {self.switch.sequence}")
        if self.detector.initial_assumed not in ("random", 0, 1):
            raise ConfigError(f"initial_assumed must be 0, 1 or 'random', got {self.detector.initial_assumed!r}")
        for name in ("opponent_epsilon", "response_epsilon"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ConfigError(f"{name} must lie in [0, 1)")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["switch"]["sequence"] = list(self.switch.sequence)
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentConfig:
        if not isinstance(data, dict):
            raise ConfigError("experiment config must be a JSON object")
        data = dict(data)
        try:
            grid = GridConfig(**data.pop("grid", {}))
            detector = DetectorConfig(**data.pop("detector", {}))
            switch = data.pop("switch", {})
            if "sequence" in switch:
                switch = {**switch, "sequence": tuple(switch["sequence"])}
            schedule = agents.SwitchSchedule(**switch)
            return cls(grid=grid, detector=detector, switch=schedule, **data)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None


def run_rng(base_seed: int, run: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([base_seed, run]))


@dataclass
class MetricsRecord:
    """Column store with one entry per environment timestep."""

    n_policies: int
    run: np.ndarray
    episode: np.ndarray
    t: np.ndarray
    state: list[str]
    action: np.ndarray
    actual: np.ndarray
    assumed: np.ndarray
    running_errors: np.ndarray  # (rows, n_policies); NaN when no detector ran
    reward_a: np.ndarray
    switch: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    @property
    def header(self) -> list[str]:
        return (
            ["run", "episode", "t", "state", "action", "actual", "assumed"]
            + [f"re_{k}" for k in range(self.n_policies)]
            + ["reward_a", "switch"]
        )

    @classmethod
    def from_rows(cls, rows: Sequence[tuple], n_policies: int) -> MetricsRecord:
        if not rows:
            return cls(
                n_policies,
                *(np.zeros(0, dtype=int) for _ in range(3)),
                [],
                *(np.zeros(0, dtype=int) for _ in range(3)),
                np.zeros((0, n_policies)),
                np.zeros(0),
                np.zeros(0, dtype=bool),
            )
        cols = list(zip(*rows))
        return cls(
            n_policies,
            np.asarray(cols[0], dtype=int),
            np.asarray(cols[1], dtype=int),
            np.asarray(cols[2], dtype=int),
            list(cols[3]),
            np.asarray(cols[4], dtype=int),
            np.asarray(cols[5], dtype=int),
            np.asarray(cols[6], dtype=int),
            np.asarray(cols[7], dtype=float).reshape(len(rows), n_policies),
            np.asarray(cols[8], dtype=float),
            np.asarray(cols[9], dtype=bool),
        )

    @classmethod
    def concat(cls, parts: Iterable[MetricsRecord]) -> MetricsRecord:
        parts = list(parts)
        n = parts[0].n_policies
        return cls(
            n,
            np.concatenate([p.run for p in parts]),
            np.concatenate([p.episode for p in parts]),
            np.concatenate([p.t for p in parts]),
            [s for p in parts for s in p.state],
            np.concatenate([p.action for p in parts]),
            np.concatenate([p.actual for p in parts]),
            np.concatenate([p.assumed for p in parts]),
            np.concatenate([p.running_errors for p in parts]),
            np.concatenate([p.reward_a for p in parts]),
            np.concatenate([p.switch for p in parts]),
        )

    def write_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(self.header)
        for i in range(len(self)):
            res = ["" if math.isnan(v) else repr(float(v)) for v in self.running_errors[i]]
            writer.writerow(
                [
                    int(self.run[i]),
                    int(self.episode[i]),
                    int(self.t[i]),
                    self.state[i],
                    int(self.action[i]),
                    int(self.actual[i]),
                    int(self.assumed[i]),
                    *res,
                    repr(float(self.reward_a[i])),
                    int(self.switch[i]),
                ]
            )

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    @classmethod
    def read_csv(cls, fh) -> MetricsRecord:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("metrics file is empty") from None
        re_cols = [h for h in header if h.startswith("re_")]
        expected = ["run", "episode", "t", "state", "action", "actual", "assumed", *re_cols, "reward_a", "switch"]
        if header != expected:
            raise ValueError(f"unexpected metrics header {header}")
        k = len(re_cols)
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(header):
                raise ValueError(f"line {lineno}: expected {len(header)} fields, got {len(rec)}")
            try:
                res = tuple(float(v) if v else math.nan for v in rec[7 : 7 + k])
                rows.append(
                    (
                        int(rec[0]), int(rec[1]), int(rec[2]), rec[3],
                        int(rec[4]), int(rec[5]), int(rec[6]),
                        res, float(rec[7 + k]), bool(int(rec[8 + k])),
                    )
                )
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
        return cls.from_rows(rows, k)

    def trace_lines(self) -> list[str]:
        """Observation trace as JSON Lines (``t, state, action, actual, run``)."""
        return [
            json.dumps(
                {
                    "t": int(self.t[i]),
                    "state": self.state[i],
                    "action": int(self.action[i]),
                    "actual": int(self.actual[i]),
                    "run": int(self.run[i]),
                }
            )
            for i in range(len(self))
        ]


@dataclass(frozen=True)
class Summary:
    aop_accuracy: float
    mean_episodic_reward: float
    std_episodic_reward: float
    mean_detection_latency: float | None
    switches_detected: int
    false_switches: int

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _run_one(cfg: ExperimentConfig, run: int) -> MetricsRecord:
    rng = run_rng(cfg.base_seed, run)
    w, h = cfg.grid.width, cfg.grid.height
    bank = agents.opponent_bank(cfg.opponent_epsilon, w, h)
    responses = agents.response_bank(cfg.response_epsilon, w, h)
    detector = Detector(bank, responses, cfg.detector, seed=rng)
    fixed_response = responses[detector.assumed]
    baseline = cfg.agent_mode == "fixed_baseline"
    no_errors = (math.nan,) * len(bank)
    prey = agents.PREY_POLICY

    rows = []
    t_global = 0
    for episode in range(cfg.episodes):
        state = reset_episode(cfg.grid, rng)
        done = False
        while not done:
            actual = agents.scheduled_policy(cfg.switch, t_global)
            b_action = sample_action(bank[actual], state, rng)
            if baseline:
                a_action = sample_action(fixed_response, state, rng)
                assumed, errors, switched = detector.assumed, no_errors, False
            else:
                update = detector.observe(state, b_action)
                a_action = detector.respond(state, rng)
                assumed, errors, switched = update.assumed_after, update.running_errors, update.switched is not None
            x_action = sample_action(prey, state, rng)
            y_action = sample_action(prey, state, rng)
            outcome = step(state, (a_action, b_action, x_action, y_action), cfg.grid)
            rows.append(
                (run, episode, t_global, state_key(state), b_action, actual, assumed, errors, outcome.reward_A, switched)
            )
            state, done = outcome.next_state, outcome.done
            t_global += 1
    return MetricsRecord.from_rows(rows, len(bank))


def simulate(cfg: ExperimentConfig, workers: int = 1) -> MetricsRecord:
    """Run every repetition in ``cfg`` and merge the metrics in run order."""
    if workers > 1 and cfg.runs > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_one, [cfg] * cfg.runs, range(cfg.runs)))
    else:
        parts = [_run_one(cfg, r) for r in range(cfg.runs)]
    return MetricsRecord.concat(parts)


def aop_accuracy(metrics: MetricsRecord) -> float:
    """Fraction of timesteps where the assumed opponent policy was the true one."""
    if len(metrics) == 0:
        raise ValueError("aop_accuracy of empty metrics")
    return float(np.mean(metrics.assumed == metrics.actual))


def _run_slices(metrics: MetricsRecord):
    runs = metrics.run
    if len(runs) == 0:
        return
    cuts = np.flatnonzero(runs[1:] != runs[:-1]) + 1
    bounds = [0, *cuts.tolist(), len(runs)]
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        yield slice(lo, hi)


def detection_latencies(metrics: MetricsRecord, period: int) -> list[int]:
    """Latency of every opponent switch, in timesteps.

    A switch is any step where the true opponent policy differs from the
    previous step's within a run. Its latency is the distance to the first
    step (from the switch step on) where the assumption matches; switches
    never matched before the next switch or the end of the run count as
    ``period``.
    """
    out = []
    for sl in _run_slices(metrics):
        actual, assumed, t = metrics.actual[sl], metrics.assumed[sl], metrics.t[sl]
        starts = (np.flatnonzero(actual[1:] != actual[:-1]) + 1).tolist()
        ends = starts[1:] + [len(actual)]
        for s, e in zip(starts, ends):
            hits = np.flatnonzero(assumed[s:e] == actual[s:e])
            out.append(int(t[s + hits[0]] - t[s]) if len(hits) else period)
    return out


def detection_latency(metrics: MetricsRecord, period: int) -> float:
    lat = detection_latencies(metrics, period)
    if not lat:
        raise ValueError("no opponent switches in metrics")
    return float(np.mean(lat))


def episode_rewards(metrics: MetricsRecord) -> np.ndarray:
    """Accumulated ``reward_a`` of every (run, episode), in record order."""
    if len(metrics) == 0:
        return np.zeros(0)
    key = metrics.run.astype(np.int64) * (int(metrics.episode.max()) + 1) + metrics.episode
    cuts = np.flatnonzero(key[1:] != key[:-1]) + 1
    return np.add.reduceat(metrics.reward_a, np.concatenate([[0], cuts]))


def reward_stats(metrics: MetricsRecord) -> tuple[float, float]:
    """Mean and population standard deviation of episodic reward of predator A."""
    totals = episode_rewards(metrics)
    if len(totals) == 0:
        raise ValueError("reward_stats needs at least one episode")
    return float(np.mean(totals)), float(np.std(totals))


def summarize(metrics: MetricsRecord, period: int) -> Summary:
    mean, std = reward_stats(metrics)
    lat = detection_latencies(metrics, period)
    idx = np.flatnonzero(metrics.switch)
    return Summary(
        aop_accuracy=aop_accuracy(metrics),
        mean_episodic_reward=mean,
        std_episodic_reward=std,
        mean_detection_latency=float(np.mean(lat)) if lat else None,
        switches_detected=int(len(idx)),
        false_switches=int(np.sum(metrics.assumed[idx] != metrics.actual[idx])),
    )


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> tuple[MetricsRecord, Summary]:
    metrics = simulate(cfg, workers)
    return metrics, summarize(metrics, cfg.switch.period)


def sweep_alpha(cfg: ExperimentConfig, alphas: Sequence[float], workers: int = 1) -> list[tuple[float, Summary]]:
    """One full experiment per strictness factor, all sharing ``cfg.base_seed``."""
    if not alphas:
        raise ValueError("alphas must not be empty")
    table = []
    for alpha in alphas:
        try:
            det = dataclasses.replace(cfg.detector, alpha=float(alpha))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        _, summary = run_experiment(dataclasses.replace(cfg, detector=det), workers)
        table.append((float(alpha), summary))
    return table


def summary_json(summary: Summary, cfg: ExperimentConfig) -> str:
    doc = {**summary.to_dict(), "std_kind": "population", "config": cfg.to_dict()}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def opponent_bank_for(cfg: ExperimentConfig) -> PolicyBank:
    return agents.opponent_bank(cfg.opponent_epsilon, cfg.grid.width, cfg.grid.height)

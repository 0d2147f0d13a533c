"""Command-line entry point: ``opsdemo {simulate,sweep,trace,report}``.

Exit codes: 0 success, 2 usage or configuration error, 3 I/O error. Outputs
are written to temporary files and renamed only once everything succeeded.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from opsdemo import experiment as ex
from opsdemo.detector import Detector, DetectorConfig
from opsdemo.policy_core import bank_from_dict, dump_bank

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3

HIST_EDGES = np.arange(-80, 101, 10)


class UsageError(Exception):
    pass


class IOFailure(Exception):
    pass


def _write_outputs(out_dir: str | Path, files: dict[str, str]) -> None:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IOFailure(f"cannot create output directory {out}: {exc}") from None
    staged = []
    try:
        for name, content in files.items():
            fd, tmp = tempfile.mkstemp(dir=out, prefix=f".{name}.", suffix=".tmp")
            staged.append((tmp, out / name))
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(content)
        for tmp, final in staged:
            os.replace(tmp, final)
    except OSError as exc:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise IOFailure(f"writing outputs to {out} failed: {exc}") from None


def _load_config(path: str, seed: int | None) -> ex.ExperimentConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    except OSError as exc:
        raise IOFailure(f"cannot read config {path}: {exc}") from None
    if seed is not None and isinstance(data, dict):
        data["base_seed"] = seed
    try:
        return ex.ExperimentConfig.from_dict(data)
    except ex.ConfigError as exc:
        raise UsageError(f"bad config {path}: {exc}") from None


def _parse_alphas(text: str) -> list[float]:
    try:
        alphas = [float(a) for a in text.split(",") if a.strip()]
    except ValueError:
        raise UsageError(f"--alpha expects comma-separated numbers, got {text!r}") from None
    if not alphas:
        raise UsageError("--alpha needs at least one value")
    bad = [a for a in alphas if not 0.0 <= a <= 1.0]
    if bad:
        raise UsageError(f"alpha values must lie in [0, 1], got {bad}")
    return alphas


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config, args.seed)
    metrics, summary = ex.run_experiment(cfg, workers=args.workers)
    trace = metrics.trace_lines()
    _write_outputs(
        args.out,
        {
            "metrics.csv": metrics.to_csv(),
            "summary.json": ex.summary_json(summary, cfg),
            "trace.jsonl": "".join(line + "\n" for line in trace),
            "bank.json": dump_bank(ex.opponent_bank_for(cfg)),
        },
    )
    print(f"{len(metrics)} timesteps, aop_accuracy={summary.aop_accuracy:.4f}, "
          f"reward={summary.mean_episodic_reward:.3f}+-{summary.std_episodic_reward:.3f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    alphas = _parse_alphas(args.alpha)
    cfg = _load_config(args.config, args.seed)
    table = ex.sweep_alpha(cfg, alphas, workers=args.workers)
    files = {}
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["alpha", "aop_accuracy", "mean_episodic_reward", "std_episodic_reward",
                     "mean_detection_latency", "switches_detected", "false_switches"])
    for alpha, summary in table:
        swept = dataclasses.replace(cfg, detector=dataclasses.replace(cfg.detector, alpha=alpha))
        files[f"summary_alpha_{alpha!r}.json"] = ex.summary_json(summary, swept)
        lat = "" if summary.mean_detection_latency is None else repr(summary.mean_detection_latency)
        writer.writerow([repr(alpha), repr(summary.aop_accuracy), repr(summary.mean_episodic_reward),
                         repr(summary.std_episodic_reward), lat, summary.switches_detected, summary.false_switches])
        print(f"alpha={alpha}: aop_accuracy={summary.aop_accuracy:.4f}")
    files["accuracy.csv"] = buf.getvalue()
    _write_outputs(args.out, files)
    return EXIT_OK


def _read_trace(path: str) -> list[dict]:
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except FileNotFoundError:
        raise UsageError(f"trace file not found: {path}") from None
    except OSError as exc:
        raise IOFailure(f"cannot read trace {path}: {exc}") from None
    rows = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise ValueError("not an object")
            row = {
                "line": lineno,
                "t": int(obj["t"]),
                "state": str(obj["state"]),
                "action": int(obj["action"]),
                "actual": None if obj.get("actual") is None else int(obj["actual"]),
                "run": int(obj.get("run", 0)),
            }
        except (ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"{path}: malformed trace line {lineno}: {exc}") from None
        rows.append(row)
    return rows


def _initial(text: str):
    if text == "random":
        return "random"
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a policy id or 'random', got {text!r}") from None


def cmd_trace(args) -> int:
    try:
        with open(args.bank) as fh:
            bank = bank_from_dict(json.load(fh))
    except FileNotFoundError:
        raise UsageError(f"bank file not found: {args.bank}") from None
    except (json.JSONDecodeError, ValueError, KeyError) as exc:
        raise UsageError(f"bad bank file {args.bank}: {exc}") from None
    except OSError as exc:
        raise IOFailure(f"cannot read bank {args.bank}: {exc}") from None
    alphas = _parse_alphas(args.alpha)
    if len(alphas) != 1:
        raise UsageError("trace takes a single --alpha value")
    try:
        config = DetectorConfig(alphas[0], args.threshold, args.initial)
        detector = Detector(bank, config=config, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = _read_trace(args.trace)

    k = len(bank)
    upd_buf, sw_buf = io.StringIO(), io.StringIO()
    upd = csv.writer(upd_buf, lineterminator="\n")
    sw = csv.writer(sw_buf, lineterminator="\n")
    upd.writerow(["line", "run", "t", "action", "assumed", *[f"re_{i}" for i in range(k)], "switch"])
    sw.writerow(["line", "run", "t", "from", "to"])
    matches = labelled = switches = 0
    current_run = rows[0]["run"] if rows else 0
    for row in rows:
        if row["run"] != current_run:
            detector.reset()
            current_run = row["run"]
        try:
            update = detector.observe(row["state"], row["action"])
        except ValueError as exc:
            raise UsageError(f"{args.trace}: line {row['line']}: {exc}") from None
        flag = int(update.switched is not None)
        upd.writerow([row["line"], row["run"], row["t"], row["action"], update.assumed_after,
                      *[repr(v) for v in update.running_errors], flag])
        if update.switched is not None:
            switches += 1
            sw.writerow([row["line"], row["run"], row["t"], *update.switched])
            print(f"switch at line {row['line']} (t={row['t']}): {update.switched[0]} -> {update.switched[1]}")
        if row["actual"] is not None:
            labelled += 1
            matches += update.assumed_after == row["actual"]

    summary = {
        "observations": len(rows),
        "switches": switches,
        "alpha": alphas[0],
        "threshold": args.threshold,
        "aop_accuracy": matches / labelled if labelled else None,
    }
    _write_outputs(
        args.out,
        {
            "updates.csv": upd_buf.getvalue(),
            "switches.csv": sw_buf.getvalue(),
            "trace_summary.json": json.dumps(summary, indent=2, sort_keys=True) + "\n",
        },
    )
    return EXIT_OK


def _infer_period(metrics: ex.MetricsRecord) -> int | None:
    for sl in ex._run_slices(metrics):
        actual = metrics.actual[sl]
        change = np.flatnonzero(actual[1:] != actual[:-1])
        if len(change):
            return int(metrics.t[sl][change[0] + 1])
    return None


def report_row(label: str, metrics: ex.MetricsRecord, period: int | None) -> dict:
    totals = ex.episode_rewards(metrics)
    mean, std = ex.reward_stats(metrics)
    counts, _ = np.histogram(np.clip(totals, HIST_EDGES[0], HIST_EDGES[-1]), bins=HIST_EDGES)
    period = period or _infer_period(metrics)
    lat = ex.detection_latencies(metrics, period) if period else []
    return {
        "label": label,
        "episodes": int(len(totals)),
        "mean_episodic_reward": mean,
        "std_episodic_reward": std,
        "aop_accuracy": ex.aop_accuracy(metrics),
        "mean_detection_latency": float(np.mean(lat)) if lat else None,
        "histogram": {"edges": HIST_EDGES.tolist(), "counts": counts.tolist()},
    }


def cmd_report(args) -> int:
    rows = []
    for path in args.metrics:
        try:
            with open(path, newline="") as fh:
                metrics = ex.MetricsRecord.read_csv(fh)
        except OSError as exc:
            raise IOFailure(f"cannot read metrics {path}: {exc}") from None
        except ValueError as exc:
            raise UsageError(f"{path}: {exc}") from None
        if len(metrics) == 0:
            raise UsageError(f"{path}: metrics contain no timesteps")
        rows.append(report_row(str(path), metrics, args.period))

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["label", "episodes", "mean_episodic_reward", "std_episodic_reward",
                     "aop_accuracy", "mean_detection_latency"])
    for r in rows:
        lat = "" if r["mean_detection_latency"] is None else repr(r["mean_detection_latency"])
        writer.writerow([r["label"], r["episodes"], repr(r["mean_episodic_reward"]),
                         repr(r["std_episodic_reward"]), repr(r["aop_accuracy"]), lat])
        print(f"{r['label']}: episodes={r['episodes']} reward={r['mean_episodic_reward']:.3f}"
              f"+-{r['std_episodic_reward']:.3f} (population std) aop_accuracy={r['aop_accuracy']:.4f}")
        bins = [f"[{lo},{lo + 10}{']' if lo + 10 == HIST_EDGES[-1] else ')'}:{c}"
                for lo, c in zip(HIST_EDGES[:-1], r["histogram"]["counts"])]
        print("  histogram " + " ".join(bins))
    if args.out:
        _write_outputs(
            args.out,
            {"report.csv": buf.getvalue(), "report.json": json.dumps(rows, indent=2, sort_keys=True) + "\n"},
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opsdemo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run an experiment, write metrics.csv, summary.json, trace.jsonl, bank.json")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run one experiment per strictness factor")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--alpha", default="0.8,0.9,0.95,0.99")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("trace", help="replay a recorded observation trace through the detector")
    p.add_argument("--bank", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--alpha", default="0.95")
    p.add_argument("--threshold", type=float, default=5.0)
    p.add_argument("--initial", type=_initial, default=0, help="initial assumed policy id or 'random'")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("report", help="reward statistics, histogram and accuracy of metrics files")
    p.add_argument("metrics", nargs="+")
    p.add_argument("--out")
    p.add_argument("--period", type=int, help="switch period; inferred from the metrics when omitted")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"opsdemo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IOFailure as exc:
        print(f"opsdemo: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

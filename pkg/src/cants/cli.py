"""``cants`` command line: ``run``, ``sweep`` and ``replay``.

Exit codes: 0 success, 1 config error, 2 data error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import statistics
import sys
from pathlib import Path

from loguru import logger

from cants.colony import run
from cants.config import RANDOM, ConfigError, ColonyConfig, load_config
from cants.dataio import DataError, SchemaError, load_csv, normalize_and_split, parse_synth, synth_generate
from cants.trace import TraceWriter, read_trace, write_history
from cants.training import evaluate

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3

# ablation grids from the published experiments
PUBLISHED_GRIDS = {
    "num_ants": (10, 30, 60, 100, 150, 210),
    "sensing_radius": (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, RANDOM),
}
DEFAULT_TRIALS = 10
SWEEP_FIELDS = ("parameter", "value", "trials", "min", "median", "max")


class DataProblem(Exception):
    pass


def _data_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--synth", metavar="SPEC", help="synthetic series, e.g. noisy-sine:T=2000,sigma=0.05")
    src.add_argument("--data", metavar="CSV", help="CSV file with a header row")
    p.add_argument("--inputs", help="comma-separated input columns (with --data)")
    p.add_argument("--outputs", help="comma-separated output columns (with --data)")
    p.add_argument("--config", metavar="FILE", help="key = value config file")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--out", required=True, metavar="DIR", help="output directory")
    p.add_argument("--no-figures", action="store_true", help="skip the PNG figures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cants", description="Continuous ant-based neural topology search for RNNs.")
    parser.add_argument("-q", "--quiet", action="store_true", help="only log warnings")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="one search run")
    _data_args(p_run)

    p_sweep = sub.add_parser("sweep", help="repeat runs over a grid of one hyperparameter")
    _data_args(p_sweep)
    p_sweep.add_argument("--param", required=True, choices=sorted(PUBLISHED_GRIDS))
    p_sweep.add_argument("--values", default="published", help="comma-separated values, or 'published' for the published grid")
    p_sweep.add_argument("--trials", type=int, default=DEFAULT_TRIALS)

    p_replay = sub.add_parser("replay", help="render frames of a trace.jsonl to PNG")
    p_replay.add_argument("trace")
    p_replay.add_argument("--frame", type=int, action="append", help="frame index (default: last); repeatable")
    p_replay.add_argument("--levels", type=int, help="number of levels (default: from the trace)")
    p_replay.add_argument("--out", required=True, metavar="DIR")
    return parser


def load_dataset(args, config: ColonyConfig):
    try:
        if args.synth:
            kind, opts = parse_synth(args.synth)
            ds = synth_generate(kind, **opts)
        else:
            if not args.inputs or not args.outputs:
                raise DataProblem("--data needs --inputs and --outputs")
            ds = load_csv(args.data, args.inputs.split(","), args.outputs.split(","))
        return normalize_and_split(ds, config.split)
    except (SchemaError, DataError, OSError, ValueError) as exc:
        raise DataProblem(str(exc)) from exc


def sweep_values(param: str, spec: str) -> list:
    """Parse ``--values``; ``published`` selects the published grid."""
    if spec.strip().lower() == "published":
        return list(PUBLISHED_GRIDS[param])
    values = []
    for raw in filter(None, (v.strip() for v in spec.split(","))):
        if param == "sensing_radius" and raw.lower() == RANDOM:
            values.append(RANDOM)
            continue
        try:
            values.append(int(raw) if param == "num_ants" else float(raw))
        except ValueError:
            raise ConfigError(param, f"cannot parse sweep value {raw!r}") from None
    if not values:
        raise ConfigError(param, "no sweep values given")
    return values


def _config_value(param: str, value):
    return None if value == RANDOM else value


def execute_run(config: ColonyConfig, dataset, out: Path, figures: bool = True) -> dict:
    """One run with all artifacts written to ``out``; returns the summary."""
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(config.to_text())
    with TraceWriter(out / "trace.jsonl") as tracer:
        result = run(config, dataset, recorder=tracer)
        frames = tracer.count
    write_history(out / "history.csv", result.history)
    best = result.best
    summary = {
        "candidates": len(result.history),
        "accepted": sum(r.accepted for r in result.history),
        "frames": frames,
        "best_fitness": result.colony.population.best_fitness,
        "aborted_paths": result.colony.stats.aborted,
        "dropped_paths": result.colony.stats.dropped,
        "space_points": len(result.space),
    }
    if best is None:
        (out / "best_genome.json").write_text("null\n")
        summary.update(validation_mae=float("inf"), test_mse=float("inf"), test_mae=float("inf"))
    else:
        (out / "best_genome.json").write_text(best.to_json() + "\n")
        summary["validation_mae"] = evaluate(best, dataset, "validation", config.horizon)[1]
        summary["test_mse"], summary["test_mae"] = evaluate(best, dataset, "test", config.horizon)
        summary.update({f"best_{k}": v for k, v in best.summary().items() if k != "fitness"})
    (out / "summary.txt").write_text("".join(f"{k}: {v}\n" for k, v in summary.items()))
    if figures:
        from cants.report import plot_history

        plot_history(result.history, out / "history.png")
    summary["result"] = result
    return summary


def cmd_run(args) -> int:
    config = load_config(args.config, args.overrides)
    dataset = load_dataset(args, config)
    summary = execute_run(config, dataset, Path(args.out), not args.no_figures)
    logger.info("best validation MSE {:.6g}, test MAE {:.6g}", summary["best_fitness"], summary["test_mae"])
    return EXIT_OK


def sweep_table(param: str, results: dict) -> list[dict]:
    rows = []
    for value, fits in results.items():
        rows.append(
            {
                "parameter": param,
                "value": value,
                "trials": len(fits),
                "min": min(fits),
                "median": statistics.median(fits),
                "max": max(fits),
            }
        )
    return rows


def write_sweep(path: Path, rows: list[dict]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, SWEEP_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def plan_sweep(base: ColonyConfig, param: str, values: list, trials: int) -> list[tuple[object, int, ColonyConfig]]:
    """Every (value, trial, config) of a sweep; trial t uses seed ``base.seed + t``."""
    if trials < 1:
        raise ConfigError("trials", "must be >= 1")
    plan = []
    for value in values:
        for t in range(trials):
            plan.append((value, t, base.replace(**{param: _config_value(param, value), "seed": base.seed + t})))
    return plan


def cmd_sweep(args) -> int:
    base = load_config(args.config, args.overrides)
    values = sweep_values(args.param, args.values)
    plan = plan_sweep(base, args.param, values, args.trials)
    dataset = load_dataset(args, base)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    results: dict = {v: [] for v in values}
    with (out / "sweep_trials.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("parameter", "value", "trial", "seed", "best_fitness", "nodes", "edges"))
        for value, t, cfg in plan:
            logger.info("sweep {}={} trial {}", args.param, value, t)
            summary = execute_run(cfg, dataset, out / f"{args.param}={value}" / f"trial{t}", figures=False)
            results[value].append(summary["best_fitness"])
            writer.writerow((args.param, value, t, cfg.seed, repr(summary["best_fitness"]), summary.get("best_nodes"), summary.get("best_edges")))
            fh.flush()
    rows = sweep_table(args.param, results)
    write_sweep(out / "sweep.csv", rows)
    if not args.no_figures:
        from cants.report import plot_sweep

        plot_sweep(rows, args.param, out / "sweep.png")
    return EXIT_OK


def cmd_replay(args) -> int:
    from cants.report import plot_frame

    try:
        frames = read_trace(args.trace)
    except (OSError, ValueError) as exc:
        raise DataProblem(f"cannot read trace: {exc}") from exc
    if not frames:
        raise DataProblem("trace has no frames")
    levels = args.levels or max((p["level"] for f in frames for p in f["points"]), default=1)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for idx in args.frame or [len(frames) - 1]:
        if not -len(frames) <= idx < len(frames):
            raise DataProblem(f"frame {idx} out of range (trace has {len(frames)})")
        frame = frames[idx]
        plot_frame(frame, levels, out / f"frame_{frame['iteration']:05d}.png")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "replay": cmd_replay}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logger.remove()
    logger.add(sys.stderr, level="WARNING" if args.quiet else "INFO", format="{level: <7} {message}")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        logger.error("config error in {}", exc)
        return EXIT_CONFIG
    except DataProblem as exc:
        logger.error("data error: {}", exc)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        logger.exception("runtime failure: {}", exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

import csv
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cants.cli import EXIT_CONFIG, EXIT_DATA, EXIT_OK, PUBLISHED_GRIDS, main, plan_sweep, sweep_values
from cants.config import ColonyConfig
from cants.genome import RnnGenome
from cants.trace import emit, parse, read_history, read_trace

SMALL = ["--set", "num_ants=4", "--set", "epochs=2", "--set", "max_lag=2", "--set", "population_size=4"]


def _run(tmp_path, name, *extra):
    out = tmp_path / name
    code = main(["-q", "run", "--synth", "noisy-sine:T=300,sigma=0.05,seed=0", "--out", str(out), *extra])
    return code, out


def test_run_with_defaults_writes_all_artifacts(tmp_path):
    code, out = _run(tmp_path, "run", "--set", "max_iterations=200", "--no-figures")
    assert code == EXIT_OK
    history = read_history(out / "history.csv")
    assert len(history) == 200
    frames = read_trace(out / "trace.jsonl")
    # one frame per accepted candidate, none for rejections
    assert len(frames) == sum(r["accepted"] for r in history)
    assert [f["candidate_id"] for f in frames] == [r["candidate_id"] for r in history if r["accepted"]]
    best = RnnGenome.from_json((out / "best_genome.json").read_text())
    summary = dict(line.split(": ", 1) for line in (out / "summary.txt").read_text().splitlines())
    assert float(summary["best_fitness"]) == best.fitness == min(r["fitness"] for r in history)
    assert math.isfinite(float(summary["test_mae"]))


def test_run_renders_figure(tmp_path):
    code, out = _run(tmp_path, "fig", *SMALL, "--set", "max_iterations=5")
    assert code == EXIT_OK
    assert (out / "history.png").stat().st_size > 0


def test_seeded_runs_are_byte_identical(tmp_path):
    args = (*SMALL, "--set", "max_iterations=8", "--set", "seed=5", "--no-figures")
    _, a = _run(tmp_path, "a", *args)
    _, b = _run(tmp_path, "b", *args)
    for name in ("history.csv", "best_genome.json", "trace.jsonl"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_config_file_and_bad_field(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("num_ants = 0\n")
    code, _ = _run(tmp_path, "bad", "--config", str(cfg))
    assert code == EXIT_CONFIG
    code, _ = _run(tmp_path, "bad2", "--set", "sensing_radius=2")
    assert code == EXIT_CONFIG


def test_data_errors(tmp_path):
    out = str(tmp_path / "o")
    assert main(["-q", "run", "--data", str(tmp_path / "missing.csv"), "--inputs", "a", "--outputs", "b", "--out", out]) == EXIT_DATA
    path = tmp_path / "d.csv"
    path.write_text("a,b\n1,2\n")
    assert main(["-q", "run", "--data", str(path), "--inputs", "a", "--outputs", "target", "--out", out]) == EXIT_DATA
    assert main(["-q", "run", "--synth", "brownian", "--out", out]) == EXIT_DATA


def test_run_from_csv(tmp_path):
    path = tmp_path / "d.csv"
    rows = "\n".join(f"{math.sin(t / 8):.6f},{math.cos(t / 8):.6f}" for t in range(120))
    path.write_text("y,c\n" + rows + "\n")
    out = tmp_path / "o"
    args = ["-q", "run", "--data", str(path), "--inputs", "y,c", "--outputs", "y", "--out", str(out), *SMALL, "--set", "max_iterations=3", "--no-figures"]
    assert main(args) == EXIT_OK
    assert len(read_history(out / "history.csv")) == 3


def test_published_grids_exact():
    assert sweep_values("num_ants", "published") == [10, 30, 60, 100, 150, 210]
    assert sweep_values("sensing_radius", "published") == [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, "random"]
    assert PUBLISHED_GRIDS["num_ants"] == (10, 30, 60, 100, 150, 210)


def test_sweep_plan_uses_distinct_seeds():
    plan = plan_sweep(ColonyConfig(seed=3), "sensing_radius", [0.5, "random"], 10)
    assert len(plan) == 20
    seeds = [cfg.seed for value, _, cfg in plan if value == 0.5]
    assert seeds == list(range(3, 13))
    assert all(cfg.sensing_radius is None for value, _, cfg in plan if value == "random")


def test_single_value_sweep_gives_one_row(tmp_path):
    out = tmp_path / "sweep"
    code = main(["-q", "sweep", "--synth", "noisy-sine:T=300", "--param", "num_ants", "--values", "3", "--trials", "1", "--out", str(out), *SMALL[2:], "--set", "max_iterations=3"])
    assert code == EXIT_OK
    with (out / "sweep.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1
    row = rows[0]
    assert (row["parameter"], row["value"], row["trials"]) == ("num_ants", "3", "1")
    assert float(row["min"]) == float(row["median"]) == float(row["max"])
    assert (out / "sweep.png").exists()


def test_bad_sweep_value(tmp_path):
    code = main(["-q", "sweep", "--synth", "noisy-sine", "--param", "num_ants", "--values", "lots", "--out", str(tmp_path)])
    assert code == EXIT_CONFIG


def test_replay_renders_frames(tmp_path):
    _, out = _run(tmp_path, "r", *SMALL, "--set", "max_iterations=6", "--no-figures")
    assert main(["-q", "replay", str(out / "trace.jsonl"), "--frame", "0", "--frame", "-1", "--out", str(tmp_path / "png")]) == EXIT_OK
    assert len(list((tmp_path / "png").glob("frame_*.png"))) >= 1
    assert main(["-q", "replay", str(out / "trace.jsonl"), "--frame", "999", "--out", str(tmp_path / "png")]) == EXIT_DATA


scalars = st.one_of(st.integers(-(10**6), 10**6), st.floats(allow_nan=False, allow_infinity=False), st.text(max_size=8))
frame = st.fixed_dictionaries(
    {
        "iteration": st.integers(0, 10**6),
        "points": st.lists(st.fixed_dictionaries({"level": st.integers(1, 6), "x": st.floats(0, 1), "y": st.floats(0, 1), "pheromone": st.floats(0.05, 10)}), max_size=5),
        "paths": st.lists(st.lists(st.lists(scalars, max_size=3), max_size=4), max_size=3),
        "genome": st.dictionaries(st.text(max_size=6), scalars, max_size=4),
    }
)


@settings(max_examples=100)
@given(frames=st.lists(frame, max_size=6))
def test_trace_round_trip(frames):
    assert parse(emit(frames)) == frames
    assert emit(frames).count("\n") == len(frames)


def test_real_frames_round_trip(tmp_path):
    _, out = _run(tmp_path, "t", *SMALL, "--set", "max_iterations=4", "--no-figures")
    frames = read_trace(out / "trace.jsonl")
    assert parse(emit(frames)) == frames
    for f in frames:
        assert f["genome"]["nodes"] >= 1
        json.dumps(f)

"""Replay traces (JSON lines, one self-contained frame per accepted candidate)
and the run history CSV."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from cants.colony import HISTORY_FIELDS, HistoryRow


def emit(frames) -> str:
    return "".join(json.dumps(frame) + "\n" for frame in frames)


def parse(text: str) -> list[dict]:
    return [json.loads(line) for line in text.splitlines() if line.strip()]


class TraceWriter:
    """Streams frames to disk as they are produced; usable as a recorder."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._fh = self.path.open("w")
        self.count = 0

    def __call__(self, frame: dict) -> None:
        self._fh.write(json.dumps(frame) + "\n")
        self._fh.flush()
        self.count += 1

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_trace(path: str | Path) -> list[dict]:
    return parse(Path(path).read_text())


def write_history(path: str | Path, history: list[HistoryRow]) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HISTORY_FIELDS)
        for row in history:
            writer.writerow(row.as_row())


def read_history(path: str | Path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        for key in ("iteration", "candidate_id", "accepted", "nodes", "edges", "recurrent_edges"):
            row[key] = int(row[key])
        for key in ("fitness", "best_fitness", "population_worst"):
            row[key] = float(row[key])
    return rows

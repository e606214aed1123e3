"""Time-series ingestion, min-max normalization, splitting and synthetic data."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from loguru import logger

SPLITS = ("train", "validation", "test")


class SchemaError(ValueError):
    """The CSV header does not provide a requested column."""


class DataError(ValueError):
    """A data cell could not be parsed or a split is unusable."""


@dataclass
class Dataset:
    names: list[str]
    inputs: list[str]
    outputs: list[str]
    rows: np.ndarray
    boundaries: tuple[int, int] | None = None
    minimum: np.ndarray | None = None
    maximum: np.ndarray | None = None
    rejected_rows: list[int] = field(default_factory=list)

    @property
    def length(self) -> int:
        return self.rows.shape[0]

    @property
    def normalized(self) -> bool:
        return self.minimum is not None

    def columns(self, names) -> list[int]:
        return [self.names.index(n) for n in names]

    def split_range(self, split: str) -> tuple[int, int]:
        if self.boundaries is None:
            raise DataError("dataset has not been split")
        a, b = self.boundaries
        return {"train": (0, a), "validation": (a, b), "test": (b, self.length)}[split]

    def windows(self, split: str, horizon: int = 1) -> tuple[np.ndarray, np.ndarray]:
        """Input rows and the targets ``horizon`` steps later within one split."""
        start, stop = self.split_range(split)
        if stop - start <= horizon:
            raise DataError(f"{split} split has {stop - start} rows, too few for horizon {horizon}")
        block = self.rows[start:stop]
        X = block[:-horizon, self.columns(self.inputs)]
        Y = block[horizon:, self.columns(self.outputs)]
        return np.ascontiguousarray(X), np.ascontiguousarray(Y)

    def denormalize(self, values, columns=None) -> np.ndarray:
        """Map normalized values back to the original scale.

        ``columns`` defaults to the output columns.
        """
        idx = self.columns(columns or self.outputs)
        lo, hi = self.minimum[idx], self.maximum[idx]
        return np.asarray(values) * (hi - lo) + lo


def load_csv(path: str | Path, inputs: list[str], outputs: list[str]) -> Dataset:
    """Read a headered CSV file in row order.

    Rows holding non-finite values are dropped and their line numbers kept in
    ``rejected_rows``; cells that are not numbers raise :class:`DataError`.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file, header row required") from None
        for name in list(inputs) + list(outputs):
            if name not in header:
                raise SchemaError(f"{path}: missing column {name!r}")
        wanted = list(dict.fromkeys(list(inputs) + list(outputs)))
        idx = [header.index(n) for n in wanted]
        rows, rejected = [], []
        for lineno, record in enumerate(reader, start=2):
            if not record or all(not c.strip() for c in record):
                continue
            try:
                values = [float(record[i]) for i in idx]
            except (ValueError, IndexError):
                raise DataError(f"{path}:{lineno}: cannot parse row {record!r}") from None
            if not all(math.isfinite(v) for v in values):
                rejected.append(lineno)
                continue
            rows.append(values)
    if rejected:
        logger.warning("{}: rejected {} non-finite rows at lines {}", path, len(rejected), rejected)
    data = np.array(rows, dtype=float).reshape(-1, len(wanted))
    return Dataset(wanted, list(inputs), list(outputs), data, rejected_rows=rejected)


def normalize_and_split(dataset: Dataset, fractions=(0.7, 0.15, 0.15)) -> Dataset:
    """Contiguous train/validation/test split, min-max scaled on train only.

    Constant training columns map to 0.
    """
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != 3 or min(fractions) <= 0 or abs(sum(fractions) - 1) > 1e-9:
        raise ValueError("fractions must be three positive numbers summing to 1")
    T = dataset.length
    a = int(round(T * fractions[0]))
    b = a + int(round(T * fractions[1]))
    if not 0 < a < b < T:
        raise DataError(f"{T} rows cannot be split into three non-empty parts")
    train = dataset.rows[:a]
    lo, hi = train.min(axis=0), train.max(axis=0)
    span = hi - lo
    flat = span == 0
    if flat.any():
        logger.warning("constant training columns normalized to 0: {}", [dataset.names[i] for i in np.flatnonzero(flat)])
    scaled = np.where(flat, 0.0, (dataset.rows - lo) / np.where(flat, 1.0, span))
    return replace(dataset, rows=scaled, boundaries=(a, b), minimum=lo, maximum=hi)


def synth_generate(kind: str, T: int = 2000, noise: float = 0.0, seed: int = 0) -> Dataset:
    """Synthetic multivariate series with a single ``target`` output.

    ``noisy-sine``: sin(2 pi t / 50) plus a phase-shifted cosine input.
    ``mackey-glass``: the delay equation (tau 17) with a lag-6 input column.
    ``linear-ar``: y_t = 0.8 y_{t-1} + e_t with a lag-2 input column.
    """
    if T < 200:
        raise ValueError("synthetic series need T >= 200")
    rng = np.random.default_rng(seed)
    t = np.arange(T, dtype=float)
    if kind == "noisy-sine":
        target = np.sin(2 * np.pi * t / 50) + noise * rng.standard_normal(T)
        extra = np.cos(2 * np.pi * t / 50) + noise * rng.standard_normal(T)
        names = ["target", "cosine"]
    elif kind == "mackey-glass":
        target = _mackey_glass(T, rng) + noise * rng.standard_normal(T)
        extra = np.concatenate([np.full(6, target[0]), target[:-6]])
        names = ["target", "lag6"]
    elif kind == "linear-ar":
        eps = (noise if noise > 0 else 1.0) * rng.standard_normal(T)
        target = np.zeros(T)
        for i in range(1, T):
            target[i] = 0.8 * target[i - 1] + eps[i]
        extra = np.concatenate([np.zeros(2), target[:-2]])
        names = ["target", "lag2"]
    else:
        raise ValueError(f"unknown synthetic series {kind!r}")
    rows = np.column_stack([target, extra])
    return Dataset(names, list(names), ["target"], rows)


def _mackey_glass(T: int, rng, tau: int = 17, beta: float = 0.2, gamma: float = 0.1, n: int = 10, dt: float = 0.1) -> np.ndarray:
    steps = int(round(1.0 / dt))
    lag = tau * steps
    hist = list(1.2 + 0.1 * rng.standard_normal(lag + 1))
    out = np.empty(T)
    x = hist[-1]
    for i in range(T):
        for _ in range(steps):
            delayed = hist[-lag - 1]
            x = x + dt * (beta * delayed / (1 + delayed**n) - gamma * x)
            hist.append(x)
        out[i] = x
        if len(hist) > 4 * lag:
            del hist[: len(hist) - 2 * lag]
    return out


def parse_synth(spec: str) -> tuple[str, dict]:
    """``noisy-sine:T=2000,sigma=0.05,seed=1`` -> ("noisy-sine", {...})."""
    kind, _, rest = spec.partition(":")
    opts: dict = {}
    for item in filter(None, rest.split(",")):
        key, _, value = item.partition("=")
        key = key.strip()
        if key in ("T", "seed"):
            opts[key] = int(value)
        elif key in ("sigma", "noise"):
            opts["noise"] = float(value)
        else:
            raise ValueError(f"unknown synthetic option {key!r}")
    return kind.strip(), opts

"""Fixed-epoch BPTT training and error metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from cants.dataio import Dataset
from cants.genome import RnnGenome
from cants.network import UnrolledNet

DIVERGED = math.inf


@dataclass
class TrainReport:
    train_mse: list[float] = field(default_factory=list)
    final_train_mse: float = math.inf
    fitness: float = math.inf
    validation_mae: float = math.inf
    test_mse: float = math.inf
    test_mae: float = math.inf
    test_mae_denormalized: float = math.inf
    diverged: bool = False


def metrics(pred, target) -> tuple[float, float]:
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float).reshape(pred.shape)
    if pred.size == 0:
        raise ValueError("cannot score an empty split")
    diff = pred - target
    return float(np.mean(diff**2)), float(np.mean(np.abs(diff)))


def evaluate(genome: RnnGenome, dataset: Dataset, split: str = "validation", horizon: int = 1) -> tuple[float, float]:
    """(MSE, MAE) of ``genome`` on one split, on the normalized scale."""
    X, Y = dataset.windows(split, horizon)
    return metrics(UnrolledNet(genome).forward(X), Y)


def train(
    genome: RnnGenome,
    dataset: Dataset,
    epochs: int = 40,
    learning_rate: float = 1e-3,
    clip: float = 1.0,
    horizon: int = 1,
    rng: np.random.Generator | None = None,
) -> tuple[RnnGenome, TrainReport]:
    """Full-sequence gradient descent for ``epochs`` steps.

    The genome is copied, trained, scored on validation (its fitness) and
    test, and returned. A non-finite loss stops training and leaves fitness at
    ``inf`` with ``diverged`` set. ``rng`` is accepted for interface symmetry;
    training itself draws no random numbers.
    """
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    genome = genome.copy()
    net = UnrolledNet(genome)
    X, Y = dataset.windows("train", horizon)
    report = TrainReport()
    theta = net.theta.copy()
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(epochs):
            loss, grad = net.loss_and_grad(X, Y, theta)
            if not math.isfinite(loss) or not np.all(np.isfinite(grad)):
                report.diverged = True
                break
            report.train_mse.append(loss)
            norm = float(np.sqrt(grad @ grad))
            if norm > clip:
                grad *= clip / norm
            theta -= learning_rate * grad
        if not report.diverged:
            report.final_train_mse = net.loss(X, Y, theta)
            if not math.isfinite(report.final_train_mse):
                report.diverged = True
    if report.diverged:
        genome.fitness = DIVERGED
        return genome, report
    net.write_back(genome, theta)
    Xv, Yv = dataset.windows("validation", horizon)
    report.fitness, report.validation_mae = metrics(net.forward(Xv, theta), Yv)
    Xt, Yt = dataset.windows("test", horizon)
    pred = net.forward(Xt, theta)
    report.test_mse, report.test_mae = metrics(pred, Yt)
    if dataset.normalized:
        report.test_mae_denormalized = metrics(dataset.denormalize(pred), dataset.denormalize(Yt))[1]
    genome.fitness = report.fitness if math.isfinite(report.fitness) else DIVERGED
    return genome, report

"""Figures written next to the CSV outputs."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.dpi": 120,
}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_history(history, path: str | Path) -> Path:
    """Candidate fitness over the run with the best-so-far curve."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 3.5))
        it = np.array([r.iteration for r in history])
        fit = np.array([r.fitness for r in history], dtype=float)
        acc = np.array([r.accepted for r in history], dtype=bool)
        best = np.array([r.best_fitness for r in history], dtype=float)
        finite = np.isfinite(fit)
        ax.scatter(it[finite & ~acc], fit[finite & ~acc], s=6, c="0.7", label="rejected")
        ax.scatter(it[finite & acc], fit[finite & acc], s=8, c="tab:blue", label="accepted")
        ax.plot(it, np.where(np.isfinite(best), best, np.nan), c="tab:red", lw=1.2, label="best")
        ax.set_xlabel("candidate")
        ax.set_ylabel("validation MSE")
        if finite.any() and np.nanmin(fit[finite]) > 0:
            ax.set_yscale("log")
        ax.legend(loc="upper right")
        return _save(fig, path)


def plot_sweep(rows: list[dict], parameter: str, path: str | Path) -> Path:
    """Min/median/max best fitness per swept value."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        labels = [str(r["value"]) for r in rows]
        x = np.arange(len(rows))
        med = np.array([r["median"] for r in rows], dtype=float)
        lo = med - np.array([r["min"] for r in rows], dtype=float)
        hi = np.array([r["max"] for r in rows], dtype=float) - med
        ax.errorbar(x, med, yerr=np.vstack([lo, hi]), fmt="o", capsize=3, color="k")
        ax.set_xticks(x)
        ax.set_xticklabels(labels)
        ax.set_xlabel(parameter.replace("_", " "))
        ax.set_ylabel("best validation MSE")
        return _save(fig, path)


def plot_frame(frame: dict, levels: int, path: str | Path) -> Path:
    """One replay frame: pheromone points and agent paths, one panel per level."""
    with plt.rc_context(STYLE):
        cols = min(levels, 3)
        rows = math.ceil(levels / cols)
        fig, axes = plt.subplots(rows, cols, figsize=(3 * cols, 3 * rows), squeeze=False)
        pts = frame["points"]
        vmax = max([p["pheromone"] for p in pts], default=1.0)
        for level in range(1, levels + 1):
            ax = axes[(level - 1) // cols][(level - 1) % cols]
            on = [p for p in pts if p["level"] == level]
            if on:
                ax.scatter(
                    [p["x"] for p in on],
                    [p["y"] for p in on],
                    c=[p["pheromone"] for p in on],
                    s=8,
                    cmap="viridis",
                    vmin=0,
                    vmax=vmax,
                )
            for path_coords in frame["paths"]:
                seg = [(x, y) for lv, x, y in path_coords if lv == level]
                if len(seg) > 1:
                    xs, ys = zip(*seg)
                    ax.plot(xs, ys, lw=0.5, c="tab:red", alpha=0.5)
            ax.set_xlim(0, 1)
            ax.set_ylim(0, 1)
            ax.set_title(f"lag {level - 1}")
            ax.set_aspect("equal")
        for k in range(levels, rows * cols):
            axes[k // cols][k % cols].axis("off")
        g = frame.get("genome", {})
        fig.suptitle(f"candidate {frame.get('candidate_id')}  nodes {g.get('nodes')}  fitness {g.get('fitness')}")
        return _save(fig, path)

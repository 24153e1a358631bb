"""
Static figures: trajectory rasters, reconstructions, score and training curves.

Rasters use one pixel per cell. Everything is drawn with the Agg backend so
rendering works on headless machines.
"""

import logging
from collections import defaultdict
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  pylint: disable=wrong-import-position
import numpy as np  # noqa: E402  pylint: disable=wrong-import-position

from services.estimator_service import ScorePoint, WorldModel  # noqa: E402
from services.gridworld_service import GridMap, RunRecord  # noqa: E402
from services.learner_service import EvalReport  # noqa: E402
from utils.enums import Mode  # noqa: E402

logger = logging.getLogger(__name__)

CLEAR = (255, 255, 255)
ANOMALY = (200, 40, 40)
SWEEP = (60, 90, 200)
INSPECT = (250, 180, 30)


def trajectory_raster(grid: GridMap, run: RunRecord) -> np.ndarray:
    """(H, W, 3) uint8 image: truth underneath, sweep steps blue, inspection steps amber."""
    image = np.empty((grid.height, grid.width, 3), dtype=np.uint8)
    image[:] = CLEAR
    image[grid.values == 1] = ANOMALY
    for obs, mode in zip(run.trajectory, run.modes):
        image[obs.cell.y, obs.cell.x] = INSPECT if mode == Mode.CLOSE_INSPECTION else SWEEP
    return image


def render_run(grid: GridMap, run: RunRecord, path: str | Path) -> None:
    plt.imsave(path, trajectory_raster(grid, run))


def render_model(model: WorldModel, path: str | Path) -> None:
    plt.imsave(path, model.estimates, cmap="gray_r", vmin=0.0, vmax=1.0)


def plot_score_series(named_series: dict[str, Sequence[ScorePoint]], path: str | Path,
                      title: str = "") -> None:
    """Score against time, one line per run label."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for label, series in sorted(named_series.items()):
        if series:
            ax.plot([p.t for p in series], [p.score for p in series], label=label)
    ax.set_xlabel("timestep")
    ax.set_ylabel("score")
    if title:
        ax.set_title(title)
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_bench(results, out_dir: str | Path) -> list[Path]:
    """One score figure per budget, averaged over seeds where timesteps line up."""
    by_budget: dict[int, dict[str, list]] = defaultdict(lambda: defaultdict(list))
    for result in results:
        if result.series:
            by_budget[result.row.budget][result.row.algorithm].append(result.series)

    written = []
    for budget, by_alg in sorted(by_budget.items()):
        averaged = {}
        for alg, runs in by_alg.items():
            length = min(len(s) for s in runs)
            averaged[alg] = [
                ScorePoint(runs[0][i].t, float(np.mean([s[i].score for s in runs])),
                           runs[0][i].anomalies_found, runs[0][i].mode)
                for i in range(length)
            ]
        path = Path(out_dir) / f"score_b{budget}.png"
        plot_score_series(averaged, path, title=f"b = {budget}")
        written.append(path)
    logger.info("wrote %d bench figures to %s", len(written), out_dir)
    return written


def plot_training_curve(reports: Sequence[EvalReport], path: str | Path) -> None:
    """Anomalies discovered (left) and cumulative reward (right) per cycle."""
    cycles = [r.cycle for r in reports]
    fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
    left.plot(cycles, [r.anomalies_discovered for r in reports], marker="o")
    left.set_xlabel("cycle")
    left.set_ylabel("anomalies discovered")
    right.plot(cycles, [r.cumulative_reward for r in reports], marker="o", color="tab:orange")
    right.set_xlabel("cycle")
    right.set_ylabel("cumulative reward")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)

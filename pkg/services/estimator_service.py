"""
World-model estimation and the asymmetric exploration score.

`estimate` turns a list of observations into a dense W x H model with the
adaptive disk rule; `score_eca` compares a model with the ground truth and
`score_series` tracks that score along a run.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
import pandas as pd
from scipy.spatial import cKDTree

from schemas.scoreschema import ScoreParams
from services.gridworld_service import Bounds, GridMap, Observation, RunRecord
from utils.enums import ObservationValue
from utils.errors import BoundsError, ConfigurationError, ShapeError

logger = logging.getLogger(__name__)

MIN_RADIUS = 1.0
MAX_RADIUS = 10.0
DEFAULT_STRIDE = 50
SERIES_COLUMNS = ["t", "score", "anomalies_found", "mode"]


@dataclass(frozen=True)
class WorldModel:
    """Estimated anomaly field, indexed [y, x] like GridMap.values."""
    estimates: np.ndarray

    @property
    def width(self) -> int:
        return self.estimates.shape[1]

    @property
    def height(self) -> int:
        return self.estimates.shape[0]


class ScorePoint(NamedTuple):
    t: int
    score: float
    anomalies_found: int
    mode: str


def adaptive_radii(points: np.ndarray, tree: cKDTree) -> np.ndarray:
    """Half the distance to the nearest other observation, clamped to [1, 10]."""
    if len(points) < 2:
        return np.full(len(points), MAX_RADIUS)
    distances, _ = tree.query(points, k=2)
    return np.clip(distances[:, 1] / 2.0, MIN_RADIUS, MAX_RADIUS)


def estimate(observations: Sequence[Observation], bounds: Bounds) -> WorldModel:
    """
    Build the adaptive disk model.

    Observed cells keep their label. Every other cell copies the label of
    its nearest observation when it lies within that observation's radius,
    and is 0 otherwise.
    """
    width, height = bounds
    estimates = np.zeros((height, width), dtype=np.float64)
    if not observations:
        return WorldModel(estimates)

    labels: dict[tuple[int, int], int] = {}
    for obs in observations:
        x, y = obs.cell
        if not (0 <= x < width and 0 <= y < height):
            raise BoundsError(f"observation at {(x, y)} is outside the {width}x{height} map")
        labels[(x, y)] = int(obs.value)

    points = np.array(list(labels), dtype=np.float64)
    values = np.fromiter(labels.values(), dtype=np.float64, count=len(labels))
    tree = cKDTree(points)
    radii = adaptive_radii(points, tree)

    xs, ys = np.meshgrid(np.arange(width), np.arange(height))
    grid_points = np.column_stack([xs.ravel(), ys.ravel()])
    distances, nearest = tree.query(grid_points, k=1)
    covered = distances <= radii[nearest]
    estimates.ravel()[covered] = values[nearest[covered]]
    return WorldModel(estimates)


def score_eca(truth: GridMap, model: WorldModel, params: ScoreParams | None = None) -> float:
    """Negative asymmetric mean squared error; 0 only when the model equals the truth."""
    params = params or ScoreParams()
    if model.estimates.shape != truth.values.shape:
        raise ShapeError(
            f"model is {model.width}x{model.height}, map is {truth.width}x{truth.height}"
        )
    y = truth.values.astype(np.float64)
    y_hat = model.estimates
    squared = (y - y_hat) ** 2
    weights = np.where(y_hat < y, params.w_miss, np.where(y_hat > y, params.w_false_alarm, 0.0))
    return -float((weights * squared).sum()) / truth.size + 0.0


def score_series(run: RunRecord, truth: GridMap, params: ScoreParams | None = None,
                 stride: int = DEFAULT_STRIDE) -> list[ScorePoint]:
    """Score after timesteps 0, stride, 2*stride, ... and always the last one."""
    if stride < 1:
        raise ConfigurationError("stride must be >= 1")
    params = params or ScoreParams()
    end = len(run.trajectory) - 1
    timesteps = list(range(0, end + 1, stride))
    if timesteps[-1] != end:
        timesteps.append(end)

    found = []
    seen: set = set()
    for obs in run.trajectory:
        if obs.value == ObservationValue.ANOMALY:
            seen.add(obs.cell)
        found.append(len(seen))

    series = []
    for t in timesteps:
        model = estimate(run.trajectory[:t + 1], truth.bounds)
        mode = run.modes[t].value if t < len(run.modes) else ""
        series.append(ScorePoint(t, score_eca(truth, model, params), found[t], mode))
    logger.debug("%s b=%d: %d score points", run.algorithm, run.b_total, len(series))
    return series


def series_frame(series: Sequence[ScorePoint]) -> pd.DataFrame:
    return pd.DataFrame(list(series), columns=SERIES_COLUMNS)


def write_series(series: Sequence[ScorePoint], path: str | Path) -> None:
    series_frame(series).to_csv(path, index=False, lineterminator="\n")

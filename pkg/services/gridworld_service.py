"""
Ground-truth environment, robot kinematics and budget accounting.

The world is a W x H lattice of binary anomaly labels, stored as an
(H, W) numpy array indexed [y, x] with row 0 at the top. A robot moves
between 4-adjacent cells at one budget unit per move and observes every
cell it occupies.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from utils.enums import Algorithm, Direction, Mode, ObservationValue
from utils.errors import BoundsError, BudgetError, MapFormatError
from utils.seeding import MAP_STREAM, substream

logger = logging.getLogger(__name__)

FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
CENTER_ATTEMPTS = 100


class Cell(NamedTuple):
    """Lattice coordinate; may be out of bounds for neighbour queries."""
    x: int
    y: int

    def moved(self, direction: Direction) -> "Cell":
        dx, dy = direction.delta
        return Cell(self.x + dx, self.y + dy)


class Bounds(NamedTuple):
    width: int
    height: int


class Observation(NamedTuple):
    cell: Cell
    value: ObservationValue
    timestep: int


@dataclass(frozen=True)
class GridMap:
    """Immutable ground-truth anomaly field."""
    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 2 or 0 in self.values.shape:
            raise BoundsError("map must have width >= 1 and height >= 1")
        frozen = np.ascontiguousarray(self.values, dtype=np.uint8).copy()
        if frozen.max(initial=0) > 1:
            raise MapFormatError("map labels must be 0 or 1")
        frozen.setflags(write=False)
        object.__setattr__(self, "values", frozen)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def bounds(self) -> Bounds:
        return Bounds(self.width, self.height)

    @property
    def size(self) -> int:
        return self.values.size

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell.x < self.width and 0 <= cell.y < self.height

    def label(self, cell: Cell) -> int:
        return int(self.values[cell.y, cell.x])

    def anomaly_count(self) -> int:
        return int(self.values.sum())

    def __eq__(self, other):
        if not isinstance(other, GridMap):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.values.shape, self.values.tobytes()))


@dataclass
class RobotRun:
    """
    Trajectory and budget ledger of one robot.

    `novel[i]` is True when trajectory[i] is the first visit of an anomalous
    cell; `modes[i]` is the controller mode after processing timestep i.
    """
    position: Cell
    b_total: int
    b_remain: int
    mode: Mode = Mode.BOUSTROPHEDON
    trajectory: list[Observation] = field(default_factory=list)
    novel: list[bool] = field(default_factory=list)
    modes: list[Mode] = field(default_factory=list)
    visit_counts: Counter = field(default_factory=Counter)

    @classmethod
    def start(cls, grid: GridMap, cell: Cell, b_total: int) -> "RobotRun":
        """Place a robot on `cell` and record the timestep-0 observation."""
        if b_total < 0:
            raise BudgetError("budget must be non-negative")
        run = cls(position=cell, b_total=b_total, b_remain=b_total)
        run.record(observe(grid, cell, 0))
        return run

    @property
    def moves(self) -> int:
        return self.b_total - self.b_remain

    def record(self, obs: Observation) -> None:
        self.visit_counts[obs.cell] += 1
        self.trajectory.append(obs)
        self.novel.append(
            obs.value == ObservationValue.ANOMALY and self.visit_counts[obs.cell] == 1
        )
        self.modes.append(self.mode)


@dataclass
class RunRecord:
    """Finished run: what the scorer, the trace writer and the bench consume."""
    algorithm: Algorithm
    b_total: int
    seed: int
    width: int
    height: int
    trajectory: list[Observation]
    modes: list[Mode]

    @classmethod
    def from_run(cls, run: RobotRun, grid: GridMap, algorithm: Algorithm, seed: int):
        return cls(
            algorithm=algorithm,
            b_total=run.b_total,
            seed=seed,
            width=grid.width,
            height=grid.height,
            trajectory=list(run.trajectory),
            modes=list(run.modes),
        )

    @property
    def moves(self) -> int:
        return len(self.trajectory) - 1

    def cells(self) -> list[Cell]:
        return [obs.cell for obs in self.trajectory]

    def coverage(self) -> float:
        """Fraction of map cells visited at least once."""
        return len(set(self.cells())) / (self.width * self.height)

    def anomalies_found(self) -> int:
        return len({o.cell for o in self.trajectory if o.value == ObservationValue.ANOMALY})


def generate_clustered_map(width: int, height: int, n_clusters: int,
                           cluster_size: int, seed: int) -> GridMap:
    """
    Generate a map of `n_clusters` connected anomaly blobs.

    Each blob starts at a uniformly sampled centre and grows by
    `cluster_size` accretion steps: a random member cell is picked and its
    neighbour in a random direction joins the blob. Centres are re-drawn
    (up to CENTER_ATTEMPTS times) when they fall too close to an earlier
    centre; blobs can still touch and merge.
    """
    if width < 1 or height < 1:
        raise BoundsError(f"map dimensions must be positive, got {width}x{height}")
    if n_clusters < 0 or cluster_size < 1:
        raise BoundsError("n_clusters must be >= 0 and cluster_size >= 1")

    rng = substream(seed, MAP_STREAM)
    values = np.zeros((height, width), dtype=np.uint8)
    separation = 2.0 * (np.sqrt(cluster_size) + 2.0)
    centers: list[Cell] = []
    directions = list(Direction)

    for _ in range(n_clusters):
        center = None
        for _ in range(CENTER_ATTEMPTS):
            center = Cell(int(rng.integers(width)), int(rng.integers(height)))
            if all(np.hypot(center.x - c.x, center.y - c.y) >= separation for c in centers):
                break
        centers.append(center)

        members = [center]
        values[center.y, center.x] = 1
        for _ in range(cluster_size):
            base = members[int(rng.integers(len(members)))]
            candidate = base.moved(directions[int(rng.integers(4))])
            if not (0 <= candidate.x < width and 0 <= candidate.y < height):
                continue
            if values[candidate.y, candidate.x] == 0:
                values[candidate.y, candidate.x] = 1
                members.append(candidate)

    logger.debug("generated %dx%d map with %d clusters (seed=%d)", width, height, n_clusters, seed)
    return GridMap(values)


def component_labels(grid: GridMap) -> tuple[np.ndarray, int]:
    """4-connected labelling of the anomalous cells."""
    labels, count = ndimage.label(grid.values, structure=FOUR_CONNECTED)
    return labels, int(count)


def component_count(grid: GridMap) -> int:
    """Number of 4-connected anomaly clusters."""
    return component_labels(grid)[1]


def parse_map(text: str) -> GridMap:
    """Parse the `W H` header plus H rows of W characters from {0,1}."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise MapFormatError("empty map file", line=1)

    header = lines[0].split(" ")
    if len(header) != 2 or not all(part.isdigit() for part in header):
        raise MapFormatError("header must be two integers 'W H'", line=1)
    width, height = int(header[0]), int(header[1])
    if width < 1 or height < 1:
        raise MapFormatError("map dimensions must be positive", line=1)

    rows = lines[1:]
    if len(rows) != height:
        raise MapFormatError(
            f"expected {height} rows, found {len(rows)}",
            line=min(len(rows), height) + 2,
        )

    values = np.zeros((height, width), dtype=np.uint8)
    for y, row in enumerate(rows):
        line_no = y + 2
        if len(row) != width:
            raise MapFormatError(f"expected {width} characters, found {len(row)}", line=line_no)
        if set(row) - {"0", "1"}:
            raise MapFormatError("labels must be 0 or 1", line=line_no)
        values[y] = np.frombuffer(row.encode("ascii"), dtype=np.uint8) - ord("0")
    return GridMap(values)


def format_map(grid: GridMap) -> str:
    """Inverse of parse_map: header line, then one row of labels per line."""
    rows = ["".join("1" if v else "0" for v in row) for row in grid.values]
    return f"{grid.width} {grid.height}\n" + "\n".join(rows) + "\n"


def decode_map(raw: bytes) -> str:
    """ASCII-decode map bytes; a stray byte is reported with its line number."""
    try:
        return raw.decode("ascii")
    except UnicodeDecodeError as exc:
        line = raw[:exc.start].count(b"\n") + 1
        raise MapFormatError(f"non-ASCII byte 0x{raw[exc.start]:02x}", line=line) from exc


def load_map(path: str | Path) -> GridMap:
    """Read and validate a map file."""
    return parse_map(decode_map(Path(path).read_bytes()))


def save_map(grid: GridMap, path: str | Path) -> None:
    """Write `grid` in the map file format with LF line endings."""
    Path(path).write_text(format_map(grid), encoding="ascii", newline="\n")


def observe(grid: GridMap, cell: Cell, timestep: int = 0) -> Observation:
    """Noiseless reading of `cell`; pure query."""
    if not grid.in_bounds(cell):
        raise BoundsError(f"cell {tuple(cell)} is outside the {grid.width}x{grid.height} map")
    return Observation(cell, ObservationValue(grid.label(cell)), timestep)


def step(run: RobotRun, grid: GridMap, action: Direction) -> RobotRun:
    """Move one cell, pay one budget unit and observe the destination."""
    if run.b_remain < 1:
        raise BudgetError("exploration budget exhausted")
    destination = run.position.moved(action)
    if not grid.in_bounds(destination):
        raise BoundsError(f"move {action.name} from {tuple(run.position)} leaves the map")

    run.b_remain -= 1
    run.position = destination
    run.record(observe(grid, destination, run.moves))
    return run


def direction_between(a: Cell, b: Cell) -> Direction:
    """Direction of the unit move a -> b."""
    delta = (b.x - a.x, b.y - a.y)
    for direction in Direction:
        if direction.delta == delta:
            return direction
    raise BoundsError(f"cells {tuple(a)} and {tuple(b)} are not 4-adjacent")

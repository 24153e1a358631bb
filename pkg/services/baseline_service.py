"""Reference explorers: full-budget Boustrophedon and RandomWaypoint."""

import logging
from dataclasses import dataclass, field

import numpy as np

from services.coverage_service import BudgetLedger, expand_plan, plan_remaining
from services.gridworld_service import (
    Bounds, Cell, GridMap, RobotRun, RunRecord, direction_between, step,
)
from utils.enums import Algorithm, Direction
from utils.seeding import WAYPOINT_STREAM, substream

logger = logging.getLogger(__name__)

START_CELL = Cell(0, 0)
START_DIRECTION = Direction.EAST


@dataclass
class WaypointSampler:
    """Deterministic stream of uniformly drawn in-bounds cells."""
    seed: int
    bounds: Bounds
    rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self.rng = substream(self.seed, WAYPOINT_STREAM)

    def next(self) -> Cell:
        return Cell(int(self.rng.integers(self.bounds.width)), int(self.rng.integers(self.bounds.height)))


def follow_path(run: RobotRun, grid: GridMap, cells: list[Cell]) -> RobotRun:
    """Walk consecutive cells until the path or the budget runs out."""
    for nxt in cells:
        if nxt == run.position:
            continue
        if run.b_remain < 1:
            break
        step(run, grid, direction_between(run.position, nxt))
    return run


def l_path(start: Cell, goal: Cell) -> list[Cell]:
    """Horizontal-then-vertical shortest path, excluding start."""
    cells = []
    x, y = start
    sx = (goal.x > x) - (goal.x < x)
    while x != goal.x:
        x += sx
        cells.append(Cell(x, y))
    sy = (goal.y > y) - (goal.y < y)
    while y != goal.y:
        y += sy
        cells.append(Cell(x, y))
    return cells


def boustrophedon_run(grid: GridMap, b_total: int, reserve_fraction: float = 0.0,
                      seed: int = 0) -> RunRecord:
    """One plan_remaining call from the start corner, executed to the end."""
    run = RobotRun.start(grid, START_CELL, b_total)
    ledger = BudgetLedger.from_remaining(b_total, b_total, reserve_fraction)
    plan = plan_remaining(START_CELL, grid.bounds, ledger, START_DIRECTION)
    follow_path(run, grid, expand_plan(plan))
    logger.debug("boustrophedon b=%d: %d moves over %d rows", b_total, run.moves, len(plan.y_steps))
    return RunRecord.from_run(run, grid, Algorithm.BOUSTROPHEDON, seed)


def random_waypoint_run(grid: GridMap, b_total: int, seed: int) -> RunRecord:
    """Walk L-paths to uniformly drawn waypoints until the budget is spent."""
    run = RobotRun.start(grid, START_CELL, b_total)
    sampler = WaypointSampler(seed, grid.bounds)
    if grid.size > 1:
        while run.b_remain > 0:
            goal = sampler.next()
            if goal == run.position:
                continue
            follow_path(run, grid, l_path(run.position, goal))
    return RunRecord.from_run(run, grid, Algorithm.RANDOM_WAYPOINT, seed)

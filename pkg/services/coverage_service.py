"""
Budget-aware boustrophedon planning over the remaining area.

Sweeps are full-width horizontal passes joined by vertical moves along the
side edges. The remaining area is a band of rows, by default from the
band's start row down to the bottom row of the map.
"""

import logging
import math
from dataclasses import dataclass, field

from services.gridworld_service import Bounds, Cell
from utils.enums import Direction
from utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

DEFAULT_RESERVE_FRACTION = 0.25


@dataclass
class BudgetLedger:
    """Budget split between the sweep and future close inspections."""
    b_total: int
    b_remain: int
    c_close_inspect: int
    b_avail: int = field(init=False)

    def __post_init__(self):
        if self.c_close_inspect < 0 or self.c_close_inspect > self.b_remain:
            raise ConfigurationError("close-inspection reserve must lie in [0, b_remain]")
        self.b_avail = self.b_remain - self.c_close_inspect

    @classmethod
    def from_remaining(cls, b_total: int, b_remain: int, reserve_fraction: float) -> "BudgetLedger":
        reserve = estimate_close_inspect_reserve(b_remain, reserve_fraction)
        return cls(b_total=b_total, b_remain=b_remain, c_close_inspect=reserve)


@dataclass(frozen=True)
class PathPlan:
    """Rectilinear waypoint list; cost is the total move count."""
    waypoints: tuple[Cell, ...]
    d: Direction
    y_steps: tuple[int, ...]
    cost: int

    def __len__(self):
        return len(self.waypoints)

    @property
    def is_empty(self) -> bool:
        return not self.waypoints


def empty_plan(d: Direction) -> PathPlan:
    """Plan with no waypoints; the sweep is over."""
    return PathPlan(waypoints=(), d=d, y_steps=(), cost=0)


def manhattan(a: Cell, b: Cell) -> int:
    """Rectilinear move count between two cells."""
    return abs(a.x - b.x) + abs(a.y - b.y)


def estimate_close_inspect_reserve(b_remain: int, reserve_fraction: float) -> int:
    """Budget held back for close inspection: floor(fraction * b_remain)."""
    if not 0.0 <= reserve_fraction < 1.0:
        raise ConfigurationError(f"reserve fraction must lie in [0, 1), got {reserve_fraction}")
    return max(0, math.floor(reserve_fraction * b_remain))


def _first_pass_cost(start: Cell, d: Direction, width: int) -> int:
    return (width - 1 - start.x) if d == Direction.EAST else start.x


def serpentine_cost(start: Cell, rows: int, span: int, d: Direction, width: int) -> int:
    """Cost of `rows` passes covering a vertical span, first pass from `start`."""
    if rows <= 0:
        return 0
    vertical = span if rows > 1 else 0
    return _first_pass_cost(start, d, width) + (rows - 1) * (width - 1) + vertical


def calc_y_steps(start: Cell, end: Cell, b_avail: int, d: Direction, bounds: Bounds) -> list[int]:
    """
    Rows to sweep between start's row and end's row within `b_avail`.

    Picks the largest row count n whose equally spaced serpentine (start and
    end rows pinned, floor spacing so gaps widen toward the end) fits the
    budget. Returns only the start row when two rows do not fit, and an
    empty list when not even the first pass fits.
    """
    width = bounds.width
    first = _first_pass_cost(start, d, width)
    if b_avail <= 0 or b_avail < first:
        return []

    span = abs(end.y - start.y)
    sign = 1 if end.y >= start.y else -1
    best = 1
    for n in range(span + 1, 1, -1):
        if serpentine_cost(start, n, span, d, width) <= b_avail:
            best = n
            break
    if best == 1:
        return [start.y]
    return [start.y + sign * (i * span) // (best - 1) for i in range(best)]


def gen_points(start: Cell, end: Cell, y_steps: list[int], d: Direction) -> PathPlan:
    """
    Serpentine through `y_steps` over the columns spanned by start and end.

    The first pass runs from start in direction d to the far edge; each
    following row is reached along the edge column and swept in the
    reverse direction. Waypoints are segment endpoints.
    """
    if not y_steps:
        return empty_plan(d)

    x_min, x_max = min(start.x, end.x), max(start.x, end.x)
    heading = d
    waypoints = [start]
    if start.y != y_steps[0]:
        waypoints.append(Cell(start.x, y_steps[0]))

    def sweep(row: int, direction: Direction):
        target = Cell(x_max if direction == Direction.EAST else x_min, row)
        if target != waypoints[-1]:
            waypoints.append(target)

    sweep(y_steps[0], heading)
    for row in y_steps[1:]:
        waypoints.append(Cell(waypoints[-1].x, row))
        heading = heading.opposite
        sweep(row, heading)

    cost = sum(manhattan(a, b) for a, b in zip(waypoints, waypoints[1:]))
    return PathPlan(waypoints=tuple(waypoints), d=d, y_steps=tuple(y_steps), cost=cost)


def _transit(position: Cell, corner: Cell) -> list[Cell]:
    """Horizontal-then-vertical leg from position to corner, endpoints included."""
    legs = [position]
    elbow = Cell(corner.x, position.y)
    if elbow != legs[-1]:
        legs.append(elbow)
    if corner != legs[-1]:
        legs.append(corner)
    return legs


def plan_remaining(position: Cell, bounds: Bounds, ledger: BudgetLedger, d: Direction,
                   start_row: int | None = None, end_row: int | None = None) -> PathPlan:
    """
    Boustrophedon coverage of the band of rows from `start_row` to `end_row`.

    The band defaults to the robot's row down to the bottom edge; an
    `end_row` above `start_row` sweeps the band upward instead. The robot
    first travels to the band's corner on the side the sweep direction
    starts from (West edge for East sweeps). Row selection uses the budget
    left after that transit; spare budget then buys extra full-width passes
    on the rows right after the last planned row.
    """
    width, height = bounds
    band_start = position.y if start_row is None else start_row
    band_end = height - 1 if end_row is None else end_row
    if ledger.b_avail <= 0 or not 0 <= band_start < height or not 0 <= band_end < height:
        return empty_plan(d)

    corner = Cell(0 if d == Direction.EAST else width - 1, band_start)
    far = Cell(width - 1 - corner.x, band_end)
    transit = _transit(position, corner)
    transit_cost = manhattan(position, corner)
    budget = ledger.b_avail - transit_cost
    rows = calc_y_steps(corner, far, budget, d, bounds)
    if not rows:
        return empty_plan(d)

    sweep = gen_points(corner, far, rows, d)
    rows = list(sweep.y_steps)
    waypoints = transit[:-1] + list(sweep.waypoints)
    cost = transit_cost + sweep.cost
    heading = d if len(rows) % 2 == 1 else d.opposite
    toward = 1 if band_end >= band_start else -1

    while rows[-1] != band_end and ledger.b_avail - cost >= width:
        row = rows[-1] + toward
        heading = heading.opposite
        end_x = width - 1 if heading == Direction.EAST else 0
        waypoints.append(Cell(waypoints[-1].x, row))
        if end_x != waypoints[-1].x:
            waypoints.append(Cell(end_x, row))
        rows.append(row)
        cost += width

    logger.debug("planned %d rows from %s, cost %d of %d", len(rows), tuple(position), cost, ledger.b_avail)
    return PathPlan(waypoints=tuple(waypoints), d=d, y_steps=tuple(rows), cost=cost)


def expand_plan(plan: PathPlan) -> list[Cell]:
    """Every cell the plan visits, in order, starting with its first waypoint."""
    if plan.is_empty:
        return []
    cells = [plan.waypoints[0]]
    for target in plan.waypoints[1:]:
        current = cells[-1]
        step_x = (target.x > current.x) - (target.x < current.x)
        step_y = (target.y > current.y) - (target.y < current.y)
        while current != target:
            current = Cell(current.x + step_x, current.y + step_y)
            cells.append(current)
    return cells

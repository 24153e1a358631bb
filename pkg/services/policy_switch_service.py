"""
The BNM controller.

Follows a boustrophedon plan until the robot steps onto a never-visited
anomaly, hands control to the close-inspection policy, and returns to a
freshly planned sweep of the remaining rows once `novelty_allowance`
consecutive steps bring no new anomaly.
"""

import logging
from dataclasses import dataclass, field
from typing import Protocol, Sequence

from services.baseline_service import (
    START_CELL, START_DIRECTION, boustrophedon_run, random_waypoint_run,
)
from services.coverage_service import (
    DEFAULT_RESERVE_FRACTION, BudgetLedger, PathPlan, expand_plan, plan_remaining,
)
from services.gridworld_service import (
    Cell, GridMap, Observation, RobotRun, RunRecord, direction_between, step,
)
from services.inspection_service import (
    BeliefGrid, encode_state, phase_transition, state_index, valid_actions,
)
from utils.enums import Algorithm, Direction, Mode, ObservationValue, Phase
from utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

DEFAULT_NOVELTY_ALLOWANCE = 10


class InspectionPolicy(Protocol):
    """Anything that maps a state index to a move among the valid ones."""

    def greedy_action(self, index: int, valid: Sequence[Direction]) -> Direction:
        ...


@dataclass
class ControllerState:
    mode: Mode
    plan: PathPlan
    novelty_allowance: int = DEFAULT_NOVELTY_ALLOWANCE
    reserve_fraction: float = DEFAULT_RESERVE_FRACTION
    plan_cursor: int = 0
    entry_direction: Direction = START_DIRECTION
    heading: Direction = START_DIRECTION
    last_action: Direction = START_DIRECTION
    phase: Phase = Phase.ENTRY
    phase_anchor: Phase | None = None
    held_back: int = 0
    finished: bool = False
    path: list[Cell] = field(default_factory=list)
    belief: BeliefGrid | None = None

    def __post_init__(self):
        if self.novelty_allowance < 1:
            raise ConfigurationError("novelty allowance must be >= 1")
        if not self.path:
            self.path = expand_plan(self.plan)

    def adopt(self, plan: PathPlan) -> None:
        self.plan = plan
        self.path = expand_plan(plan)
        self.plan_cursor = 0


def should_initiate(o: Observation, l: Cell, p: Sequence[Observation],
                    visits: int | None = None) -> bool:
    """True on the first visit of an anomalous cell."""
    if o.value != ObservationValue.ANOMALY:
        return False
    count = visits if visits is not None else sum(1 for obs in p if obs.cell == l)
    return count == 1


def novelty_flags(p: Sequence[Observation]) -> list[bool]:
    seen = set()
    flags = []
    for obs in p:
        flags.append(obs.value == ObservationValue.ANOMALY and obs.cell not in seen)
        seen.add(obs.cell)
    return flags


def should_terminate(p: Sequence[Observation], a: int, novel: Sequence[bool] | None = None) -> bool:
    """
    True when none of the last a+1 trajectory entries found a new anomaly.

    The window runs from len(p) back to len(p) - a inclusive and is clamped
    at the start of the trajectory.
    """
    flags = novel if novel is not None else novelty_flags(p)
    window = flags[max(0, len(flags) - (a + 1)):]
    return not any(window)


def _enter_inspection(ctrl: ControllerState, run: RobotRun) -> None:
    ctrl.mode = run.mode = Mode.CLOSE_INSPECTION
    run.modes[-1] = Mode.CLOSE_INSPECTION
    ctrl.entry_direction = ctrl.heading
    ctrl.phase = Phase.ENTRY
    ctrl.phase_anchor = None
    logger.debug("t=%d: close inspection at %s", run.moves, tuple(run.position))


def _replan(ctrl: ControllerState, run: RobotRun, grid: GridMap, d: Direction,
            reserve_fraction: float, start_row: int, end_row: int | None = None) -> PathPlan:
    ledger = BudgetLedger.from_remaining(run.b_total, run.b_remain, reserve_fraction)
    plan = plan_remaining(run.position, grid.bounds, ledger, d, start_row, end_row)
    ctrl.adopt(plan)
    ctrl.held_back = ledger.c_close_inspect
    if plan.is_empty:
        ctrl.finished = True
    logger.debug("t=%d: sweep rows %d..%s heading %s, plan cost %d of %d (%d held back)",
                 run.moves, start_row, end_row if end_row is not None else grid.height - 1,
                 d.name, plan.cost, ledger.b_avail, ledger.c_close_inspect)
    return plan


def _band_start(ctrl: ControllerState, run: RobotRun) -> int:
    return max(run.position.y, ctrl.belief.highest_complete_row() + 1)


def _resume_sweep(ctrl: ControllerState, run: RobotRun, grid: GridMap) -> None:
    """Back to the sweep after an inspection; part of the budget stays reserved."""
    ctrl.mode = run.mode = Mode.BOUSTROPHEDON
    run.modes[-1] = Mode.BOUSTROPHEDON
    _replan(ctrl, run, grid, ctrl.entry_direction, ctrl.reserve_fraction, _band_start(ctrl, run))
    if ctrl.finished and run.b_remain > 0:
        ctrl.finished = False
        _release_reserve(ctrl, run, grid)


def _release_reserve(ctrl: ControllerState, run: RobotRun, grid: GridMap) -> None:
    """
    Spend the reserve of a finished sweep plan.

    Rows below the robot come first; once the bottom is done the gap rows
    left between sparse passes are swept upward.
    """
    logger.debug("t=%d: releasing %d reserved units", run.moves, ctrl.held_back)
    start_row = _band_start(ctrl, run)
    if start_row < grid.height:
        _replan(ctrl, run, grid, ctrl.heading.opposite, 0.0, start_row)
        return
    gaps = ctrl.belief.incomplete_rows(below=run.position.y)
    if gaps.size == 0:
        ctrl.held_back = 0
        ctrl.finished = True
        return
    _replan(ctrl, run, grid, ctrl.heading.opposite, 0.0, int(gaps[-1]), int(gaps[0]))


def _move(ctrl: ControllerState, run: RobotRun, grid: GridMap, action: Direction) -> Observation:
    step(run, grid, action)
    obs = run.trajectory[-1]
    ctrl.belief.record(obs.cell, obs.value)
    ctrl.last_action = action
    if action.is_horizontal:
        ctrl.heading = action
    return obs


def bnm_step(ctrl: ControllerState, run: RobotRun, grid: GridMap,
             policy: InspectionPolicy) -> tuple[ControllerState, RobotRun]:
    """Advance the controller by one move (or finish the run)."""
    if ctrl.finished or run.b_remain < 1:
        ctrl.finished = True
        return ctrl, run

    if ctrl.mode == Mode.BOUSTROPHEDON:
        if ctrl.plan_cursor >= len(ctrl.path) - 1:
            if ctrl.held_back == 0:
                ctrl.finished = True
                return ctrl, run
            _release_reserve(ctrl, run, grid)
            if ctrl.finished or len(ctrl.path) < 2:
                ctrl.finished = True
                return ctrl, run
        action = direction_between(run.position, ctrl.path[ctrl.plan_cursor + 1])
        obs = _move(ctrl, run, grid, action)
        ctrl.plan_cursor += 1
        if should_initiate(obs, obs.cell, run.trajectory, visits=run.visit_counts[obs.cell]):
            _enter_inspection(ctrl, run)
        return ctrl, run

    valid = valid_actions(run.position, grid.bounds)
    if not valid:
        ctrl.finished = True
        return ctrl, run
    state = encode_state(ctrl.belief, run.position, ctrl.last_action, ctrl.phase,
                         ctrl.entry_direction, grid.bounds, ctrl.phase_anchor)
    action = policy.greedy_action(state_index(state), valid)
    obs = _move(ctrl, run, grid, action)

    new_phase = phase_transition(ctrl.phase, action, ctrl.belief.cell_status(obs.cell),
                                 ctrl.entry_direction)
    if new_phase == Phase.OFF_PATTERN:
        ctrl.phase_anchor = ctrl.phase if ctrl.phase != Phase.OFF_PATTERN else ctrl.phase_anchor
    else:
        ctrl.phase_anchor = None
    ctrl.phase = new_phase

    if should_terminate(run.trajectory, ctrl.novelty_allowance, run.novel):
        _resume_sweep(ctrl, run, grid)
    return ctrl, run


def run_bnm(grid: GridMap, b_total: int, policy: InspectionPolicy, seed: int = 0,
            novelty_allowance: int = DEFAULT_NOVELTY_ALLOWANCE,
            reserve_fraction: float = DEFAULT_RESERVE_FRACTION) -> RunRecord:
    """
    Full BNM episode.

    The opening sweep is the plain boustrophedon plan; `reserve_fraction` is
    only held back when the sweep is replanned after a close inspection.
    """
    run = RobotRun.start(grid, START_CELL, b_total)
    ledger = BudgetLedger.from_remaining(b_total, b_total, 0.0)
    plan = plan_remaining(START_CELL, grid.bounds, ledger, START_DIRECTION)
    ctrl = ControllerState(
        mode=Mode.BOUSTROPHEDON,
        plan=plan,
        novelty_allowance=novelty_allowance,
        reserve_fraction=reserve_fraction,
        belief=BeliefGrid(grid.width, grid.height),
    )
    first = run.trajectory[0]
    ctrl.belief.record(first.cell, first.value)
    if should_initiate(first, first.cell, run.trajectory, visits=1):
        _enter_inspection(ctrl, run)

    while not ctrl.finished:
        bnm_step(ctrl, run, grid, policy)
    logger.debug("bnm b=%d finished after %d moves", b_total, run.moves)
    return RunRecord.from_run(run, grid, Algorithm.BNM, seed)


def run_episode(grid: GridMap, b_total: int, algorithm: Algorithm,
                policy: InspectionPolicy | None = None, seed: int = 0,
                novelty_allowance: int = DEFAULT_NOVELTY_ALLOWANCE,
                reserve_fraction: float = DEFAULT_RESERVE_FRACTION) -> RunRecord:
    """Run one algorithm on one map until its budget or plan is exhausted."""
    algorithm = Algorithm(algorithm)
    if algorithm == Algorithm.BNM:
        if policy is None:
            raise ConfigurationError("the bnm algorithm needs a close-inspection policy")
        return run_bnm(grid, b_total, policy, seed, novelty_allowance, reserve_fraction)
    if algorithm == Algorithm.BOUSTROPHEDON:
        return boustrophedon_run(grid, b_total, seed=seed)
    return random_waypoint_run(grid, b_total, seed)

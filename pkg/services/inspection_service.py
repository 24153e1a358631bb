"""
Close-inspection decision process.

State is an 8-integer vector s:
    s[0..3]  knowledge of the N, E, S, W neighbours (CellKnowledge)
    s[4]     status of the robot's own cell (CellStatus)
    s[5]     last action (Direction)
    s[6]     grazing-pattern phase (Phase), 12 when off pattern
    s[7]     entry horizontal direction, 0 = East, 1 = West

The dense index is mixed-radix over (4, 4, 4, 4, 4, 4, 9, 2). The off-pattern
sentinel has no radix slot of its own: it is indexed under the last
in-pattern phase (the state's `anchor`).
"""

from dataclasses import dataclass

import numpy as np

from services.gridworld_service import Cell
from utils.enums import CellKnowledge, CellStatus, Direction, ObservationValue, Phase
from utils.errors import EncodingError

N_STATES = 4 ** 6 * 9 * 2
N_ACTIONS = len(Direction)
N_PHASE_SLOTS = 9

ENTRY_CODES = {Direction.EAST: 0, Direction.WEST: 1}
ENTRY_DIRECTIONS = {0: Direction.EAST, 1: Direction.WEST}

ANOMALOUS_STATUSES = (CellStatus.KNOWN_ANOMALOUS, CellStatus.NEW_ANOMALOUS)
NEW_CELL_STATUSES = (CellStatus.NOT_ANOMALOUS, CellStatus.NEW_ANOMALOUS)
LATERAL_STEP_PHASES = (Phase.TOP_STEP, Phase.BOTTOM_STEP)

NORTH, SOUTH, LATERAL = "N", "S", "L"

# (phase, move, lands on anomaly) -> next phase. Missing keys go off pattern.
PATTERN_EDGES = {
    (Phase.ENTRY, NORTH, True): Phase.ASCEND,
    (Phase.ENTRY, NORTH, False): Phase.TOP_EXIT,
    (Phase.ENTRY, SOUTH, True): Phase.DESCEND,
    (Phase.ENTRY, SOUTH, False): Phase.BOTTOM_EXIT,
    (Phase.ASCEND, NORTH, True): Phase.ASCEND,
    (Phase.ASCEND, NORTH, False): Phase.TOP_EXIT,
    (Phase.TOP_EXIT, LATERAL, True): Phase.TOP_STEP,
    (Phase.TOP_EXIT, LATERAL, False): Phase.TOP_STEP,
    (Phase.TOP_STEP, SOUTH, True): Phase.DESCEND_AFTER_TOP_STEP,
    (Phase.TOP_STEP, SOUTH, False): Phase.BOTTOM_EXIT,
    (Phase.DESCEND_AFTER_TOP_STEP, SOUTH, True): Phase.DESCEND,
    (Phase.DESCEND_AFTER_TOP_STEP, SOUTH, False): Phase.BOTTOM_EXIT,
    (Phase.DESCEND, SOUTH, True): Phase.DESCEND,
    (Phase.DESCEND, SOUTH, False): Phase.BOTTOM_EXIT,
    (Phase.BOTTOM_EXIT, LATERAL, True): Phase.BOTTOM_STEP,
    (Phase.BOTTOM_EXIT, LATERAL, False): Phase.BOTTOM_STEP,
    (Phase.BOTTOM_STEP, NORTH, True): Phase.ASCEND_AFTER_BOTTOM_STEP,
    (Phase.BOTTOM_STEP, NORTH, False): Phase.TOP_EXIT,
    (Phase.ASCEND_AFTER_BOTTOM_STEP, NORTH, True): Phase.ASCEND,
    (Phase.ASCEND_AFTER_BOTTOM_STEP, NORTH, False): Phase.TOP_EXIT,
}

# In the table but not desirable: a second lateral step skips a column.
LATERAL_REPEATS = {
    Phase.TOP_STEP: Phase.TOP_STEP,
    Phase.BOTTOM_STEP: Phase.BOTTOM_STEP,
}


@dataclass(frozen=True)
class InspectionState:
    """The 8-integer state vector plus the phase used for indexing the sentinel."""
    s: tuple[int, int, int, int, int, int, int, int]
    anchor: Phase | None = None

    def __post_init__(self):
        s = self.s
        if len(s) != 8:
            raise EncodingError(f"state vector must have 8 entries, got {len(s)}")
        if any(not 0 <= v <= 3 for v in s[:6]):
            raise EncodingError(f"s[0..5] must lie in 0..3, got {s[:6]}")
        if not (0 <= s[6] <= 8 or s[6] == Phase.OFF_PATTERN):
            raise EncodingError(f"s[6] must lie in 0..8 or be 12, got {s[6]}")
        if s[7] not in (0, 1):
            raise EncodingError(f"s[7] must be 0 or 1, got {s[7]}")
        if s[6] == Phase.OFF_PATTERN:
            if self.anchor is None or self.anchor == Phase.OFF_PATTERN:
                raise EncodingError("off-pattern state needs an in-pattern anchor phase")
        elif self.anchor is not None:
            raise EncodingError("anchor is only meaningful for the off-pattern sentinel")

    @property
    def status(self) -> CellStatus:
        return CellStatus(self.s[4])

    @property
    def last_action(self) -> Direction:
        return Direction(self.s[5])

    @property
    def phase(self) -> Phase:
        return Phase(self.s[6])

    @property
    def entry_direction(self) -> Direction:
        return ENTRY_DIRECTIONS[self.s[7]]


class BeliefGrid:
    """What the robot knows about each cell, plus per-cell visit counts."""

    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.knowledge = np.zeros((height, width), dtype=np.int8)
        self.visits = np.zeros((height, width), dtype=np.int32)

    def record(self, cell: Cell, value: ObservationValue) -> None:
        self.visits[cell.y, cell.x] += 1
        self.knowledge[cell.y, cell.x] = (
            CellKnowledge.KNOWN_ANOMALOUS if value == ObservationValue.ANOMALY
            else CellKnowledge.KNOWN_CLEAR
        )

    def knowledge_at(self, x: int, y: int) -> int:
        if 0 <= x < self.width and 0 <= y < self.height:
            return int(self.knowledge[y, x])
        return CellKnowledge.OUT_OF_AREA

    def cell_status(self, cell: Cell) -> CellStatus:
        """s[4]: first visits are 'new', later visits 'previously visited'."""
        visits = int(self.visits[cell.y, cell.x])
        if visits == 0:
            raise EncodingError(f"cell {tuple(cell)} has not been observed yet")
        anomalous = self.knowledge[cell.y, cell.x] == CellKnowledge.KNOWN_ANOMALOUS
        if visits == 1:
            return CellStatus.NEW_ANOMALOUS if anomalous else CellStatus.NOT_ANOMALOUS
        return CellStatus.KNOWN_ANOMALOUS if anomalous else CellStatus.PREVIOUSLY_VISITED

    def highest_complete_row(self) -> int:
        """Largest row index whose every cell was visited, or -1."""
        complete = np.flatnonzero((self.visits > 0).all(axis=1))
        return int(complete[-1]) if complete.size else -1

    def incomplete_rows(self, below: int | None = None) -> np.ndarray:
        """Ascending indices of rows with an unvisited cell, optionally only rows above `below`."""
        rows = np.flatnonzero(~(self.visits > 0).all(axis=1))
        return rows if below is None else rows[rows < below]


def encode_state(belief: BeliefGrid, position: Cell, last_action: Direction, phase: Phase,
                 entry_dir: Direction, bounds=None, anchor: Phase | None = None) -> InspectionState:
    """
    Read the robot's knowledge around `position` into a state vector.

    `belief` must already hold the observation of `position`. `bounds` is
    accepted for symmetry with valid_actions; the belief grid carries the
    map dimensions.
    """
    x, y = position
    neighbours = (
        belief.knowledge_at(x, y - 1),
        belief.knowledge_at(x + 1, y),
        belief.knowledge_at(x, y + 1),
        belief.knowledge_at(x - 1, y),
    )
    if entry_dir not in ENTRY_CODES:
        raise EncodingError(f"entry direction must be horizontal, got {entry_dir.name}")
    status = belief.cell_status(position)
    return InspectionState(
        s=(*neighbours, int(status), int(last_action), int(phase), ENTRY_CODES[entry_dir]),
        anchor=anchor if phase == Phase.OFF_PATTERN else None,
    )


def phase_rank(phase: int, anchor: Phase | None = None) -> int:
    """Phase value used for indexing; the sentinel counts as its anchor phase."""
    if phase == Phase.OFF_PATTERN:
        return int(anchor)
    return int(phase)


def state_index(state: InspectionState) -> int:
    """
    Dense index of a state vector.

    The first six entries are base-4 digits, followed by the phase rank
    and the entry bit.
    """
    s = state.s
    index = 0
    for value in s[:6]:
        index = index * 4 + value
    index = index * N_PHASE_SLOTS + phase_rank(s[6], state.anchor)
    return index * 2 + s[7]


def decode_state(index: int) -> InspectionState:
    """Inverse of state_index over tuples whose phase is in 0..8."""
    if not 0 <= index < N_STATES:
        raise EncodingError(f"state index {index} outside [0, {N_STATES})")
    index, entry = divmod(index, 2)
    index, phase = divmod(index, N_PHASE_SLOTS)
    digits = []
    for _ in range(6):
        index, digit = divmod(index, 4)
        digits.append(digit)
    return InspectionState(s=(*reversed(digits), phase, entry))


def _move_kind(action: Direction, entry_dir: Direction) -> str | None:
    if action == Direction.NORTH:
        return NORTH
    if action == Direction.SOUTH:
        return SOUTH
    if action == entry_dir:
        return LATERAL
    return None


def pattern_step(prev_phase: Phase, action: Direction, new_cell_status: CellStatus,
                 entry_dir: Direction) -> tuple[Phase, bool]:
    """
    Next phase and whether the move follows the desirable grazing pattern.

    From the off-pattern sentinel, moves are matched against the ENTRY row,
    so any vertical move re-enters the pattern.
    """
    kind = _move_kind(action, entry_dir)
    source = Phase.ENTRY if prev_phase == Phase.OFF_PATTERN else Phase(prev_phase)
    if kind is None:
        return Phase.OFF_PATTERN, False

    anomalous = new_cell_status in ANOMALOUS_STATUSES
    nxt = PATTERN_EDGES.get((source, kind, anomalous))
    if nxt is not None:
        return nxt, True
    if kind == LATERAL and source in LATERAL_REPEATS:
        return LATERAL_REPEATS[source], False
    return Phase.OFF_PATTERN, False


def phase_transition(prev_phase: Phase, action: Direction, new_cell_status: CellStatus,
                     entry_dir: Direction) -> Phase:
    """Next grazing-pattern phase after `action` lands on a cell of the given status."""
    return pattern_step(prev_phase, action, new_cell_status, entry_dir)[0]


def reward(previous_state: InspectionState, new_state: InspectionState) -> int:
    """
    Reward for one close-inspection move, checked in this order:
    off pattern -1; desirable move onto a new cell +1; second lateral
    step from a lateral-step phase -10; anything else -1.
    """
    if new_state.phase == Phase.OFF_PATTERN:
        return -1
    action = new_state.last_action
    entry_dir = previous_state.entry_direction
    _, desirable = pattern_step(previous_state.phase, action, new_state.status, entry_dir)
    if desirable and new_state.status in NEW_CELL_STATUSES:
        return 1
    if previous_state.phase in LATERAL_STEP_PHASES and action == entry_dir:
        return -10
    return -1


def valid_actions(position: Cell, bounds) -> tuple[Direction, ...]:
    """Directions whose destination stays on the map, in code order."""
    width, height = bounds
    return tuple(
        d for d in Direction
        if 0 <= position.x + d.delta[0] < width and 0 <= position.y + d.delta[1] < height
    )

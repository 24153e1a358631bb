"""
Grid-world enums shared by the planner, the inspection MDP and the CLI.

Integer values are part of the wire formats (state vector, trace files),
so members must never be renumbered.
"""

from enum import Enum, IntEnum


class Direction(IntEnum):
    """Grid move. Values match s[5] of the inspection state vector."""
    NORTH = 0
    EAST = 1
    SOUTH = 2
    WEST = 3

    @property
    def delta(self) -> tuple[int, int]:
        """(dx, dy) with row 0 at the top of the map."""
        return _DELTAS[self]

    @property
    def opposite(self) -> "Direction":
        return Direction((self + 2) % 4)

    @property
    def is_horizontal(self) -> bool:
        return self in (Direction.EAST, Direction.WEST)


_DELTAS = {
    Direction.NORTH: (0, -1),
    Direction.EAST: (1, 0),
    Direction.SOUTH: (0, 1),
    Direction.WEST: (-1, 0),
}


class Mode(Enum):
    """Controller mode; value is the trace-file label."""
    BOUSTROPHEDON = "B"
    CLOSE_INSPECTION = "C"


class ObservationValue(IntEnum):
    """Noiseless binary sensor reading."""
    NO_ANOMALY = 0
    ANOMALY = 1


class CellKnowledge(IntEnum):
    """Belief about a cell. Values match s[0..3] of the inspection state vector."""
    UNVISITED = 0
    KNOWN_CLEAR = 1
    KNOWN_ANOMALOUS = 2
    OUT_OF_AREA = 3


class CellStatus(IntEnum):
    """Status of the robot's own cell, s[4]."""
    PREVIOUSLY_VISITED = 0
    KNOWN_ANOMALOUS = 1
    NOT_ANOMALOUS = 2
    NEW_ANOMALOUS = 3


class Phase(IntEnum):
    """Grazing-pattern phase, s[6]. OFF_PATTERN is the reward sentinel."""
    ENTRY = 0
    ASCEND = 1
    TOP_EXIT = 2
    TOP_STEP = 3
    DESCEND = 4
    BOTTOM_EXIT = 5
    BOTTOM_STEP = 6
    ASCEND_AFTER_BOTTOM_STEP = 7
    DESCEND_AFTER_TOP_STEP = 8
    OFF_PATTERN = 12


class Algorithm(str, Enum):
    """Exploration algorithms selectable from the CLI and API."""
    BNM = "bnm"
    BOUSTROPHEDON = "boustrophedon"
    RANDOM_WAYPOINT = "random"


class Task(str, Enum):
    """Curriculum start tasks on the training cluster."""
    RIGHT_EDGE = "task-1"
    LEFT_EDGE = "task-2"

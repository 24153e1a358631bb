"""
Close-inspection MDP test cases.

Covers the state vector, the dense index, the grazing-pattern automaton
and every branch of the reward function.
"""

import pytest

from services.gridworld_service import Bounds, Cell
from services.inspection_service import (
    N_STATES, BeliefGrid, InspectionState, decode_state, encode_state, pattern_step,
    phase_transition, reward, state_index, valid_actions,
)
from utils.enums import CellStatus, Direction, ObservationValue, Phase
from utils.errors import EncodingError


def state(n=0, e=0, s=0, w=0, status=2, last=Direction.EAST, phase=Phase.ENTRY, entry=0, anchor=None):
    return InspectionState((n, e, s, w, int(status), int(last), int(phase), entry), anchor)


# state_index / decode_state TESTCASES
def test_state_space_size():
    """
    Verify the table has 4^6 * 9 * 2 rows.
    """
    assert N_STATES == 73728


def test_index_is_a_bijection():
    """
    Verify every index decodes to a state that encodes back to it.
    """
    seen = set()
    for index in range(N_STATES):
        decoded = decode_state(index)
        assert state_index(decoded) == index
        seen.add(decoded.s)
    assert len(seen) == N_STATES


def test_index_extremes():
    """
    Verify the all-zero vector is index 0 and the largest vector the last index.
    """
    assert state_index(state(status=0, last=Direction.NORTH)) == 0
    top = InspectionState((3, 3, 3, 3, 3, 3, 8, 1))
    assert state_index(top) == N_STATES - 1


def test_off_pattern_indexes_under_anchor():
    """
    Verify the sentinel shares the row of its anchor phase.
    """
    off = state(phase=Phase.OFF_PATTERN, anchor=Phase.TOP_STEP)
    assert state_index(off) == state_index(state(phase=Phase.TOP_STEP))


@pytest.mark.parametrize(
    "vector, anchor",
    [
        ((0, 0, 0, 0, 4, 0, 0, 0), None),
        ((0, 0, 0, 0, 0, 0, 9, 0), None),
        ((0, 0, 0, 0, 0, 0, 0, 2), None),
        ((0, 0, 0, 0, 0, 0, 12, 0), None),
        ((0, 0, 0, 0, 0, 0, 1, 0), Phase.ASCEND),
        ((0, 0, 0, 0, 0, 0, 0), None),
    ],
)
def test_invalid_state_vectors(vector, anchor):
    """
    Verify out-of-range fields raise EncodingError.
    """
    with pytest.raises(EncodingError):
        InspectionState(vector, anchor)


def test_decode_out_of_range():
    """
    Verify indices outside the table are rejected.
    """
    with pytest.raises(EncodingError):
        decode_state(N_STATES)


# BeliefGrid / encode_state TESTCASES
def test_encode_corner_first_visit():
    """
    Verify out-of-area neighbours read 3 and a new clear cell reads 2.
    """
    belief = BeliefGrid(3, 3)
    belief.record(Cell(0, 0), ObservationValue.NO_ANOMALY)
    s = encode_state(belief, Cell(0, 0), Direction.EAST, Phase.ENTRY, Direction.EAST)
    assert s.s == (3, 0, 0, 3, 2, 1, 0, 0)


def test_encode_reads_neighbour_knowledge():
    """
    Verify visited neighbours read clear (1) or anomalous (2).
    """
    belief = BeliefGrid(3, 3)
    belief.record(Cell(1, 0), ObservationValue.ANOMALY)
    belief.record(Cell(2, 1), ObservationValue.NO_ANOMALY)
    belief.record(Cell(1, 1), ObservationValue.ANOMALY)
    s = encode_state(belief, Cell(1, 1), Direction.NORTH, Phase.ASCEND, Direction.WEST)
    assert s.s == (2, 1, 0, 0, 3, 0, 1, 1)


def test_cell_status_over_visits():
    """
    Verify first visits are new (3 or 2) and revisits are known (1 or 0).
    """
    belief = BeliefGrid(2, 1)
    belief.record(Cell(0, 0), ObservationValue.ANOMALY)
    belief.record(Cell(1, 0), ObservationValue.NO_ANOMALY)
    assert belief.cell_status(Cell(0, 0)) == CellStatus.NEW_ANOMALOUS
    assert belief.cell_status(Cell(1, 0)) == CellStatus.NOT_ANOMALOUS
    belief.record(Cell(0, 0), ObservationValue.ANOMALY)
    belief.record(Cell(1, 0), ObservationValue.NO_ANOMALY)
    assert belief.cell_status(Cell(0, 0)) == CellStatus.KNOWN_ANOMALOUS
    assert belief.cell_status(Cell(1, 0)) == CellStatus.PREVIOUSLY_VISITED


def test_cell_status_unvisited():
    """
    Verify the status of an unobserved cell is undefined.
    """
    with pytest.raises(EncodingError):
        BeliefGrid(2, 2).cell_status(Cell(1, 1))


def test_encode_rejects_vertical_entry():
    """
    Verify the entry direction must be East or West.
    """
    belief = BeliefGrid(2, 2)
    belief.record(Cell(0, 0), ObservationValue.NO_ANOMALY)
    with pytest.raises(EncodingError):
        encode_state(belief, Cell(0, 0), Direction.EAST, Phase.ENTRY, Direction.NORTH)


def test_highest_complete_row():
    """
    Verify the highest fully visited row is reported, or -1.
    """
    belief = BeliefGrid(2, 3)
    assert belief.highest_complete_row() == -1
    for x in range(2):
        belief.record(Cell(x, 0), ObservationValue.NO_ANOMALY)
        belief.record(Cell(x, 1), ObservationValue.NO_ANOMALY)
    assert belief.highest_complete_row() == 1


# phase_transition TESTCASES
@pytest.mark.parametrize(
    "prev, action, status, expected",
    [
        (Phase.ENTRY, Direction.NORTH, CellStatus.NEW_ANOMALOUS, Phase.ASCEND),
        (Phase.ENTRY, Direction.SOUTH, CellStatus.NOT_ANOMALOUS, Phase.BOTTOM_EXIT),
        (Phase.ASCEND, Direction.NORTH, CellStatus.NOT_ANOMALOUS, Phase.TOP_EXIT),
        (Phase.TOP_EXIT, Direction.EAST, CellStatus.NOT_ANOMALOUS, Phase.TOP_STEP),
        (Phase.TOP_STEP, Direction.SOUTH, CellStatus.NEW_ANOMALOUS, Phase.DESCEND_AFTER_TOP_STEP),
        (Phase.DESCEND_AFTER_TOP_STEP, Direction.SOUTH, CellStatus.NEW_ANOMALOUS, Phase.DESCEND),
        (Phase.DESCEND, Direction.SOUTH, CellStatus.NOT_ANOMALOUS, Phase.BOTTOM_EXIT),
        (Phase.BOTTOM_EXIT, Direction.EAST, CellStatus.NOT_ANOMALOUS, Phase.BOTTOM_STEP),
        (Phase.BOTTOM_STEP, Direction.NORTH, CellStatus.NEW_ANOMALOUS, Phase.ASCEND_AFTER_BOTTOM_STEP),
        (Phase.ASCEND_AFTER_BOTTOM_STEP, Direction.NORTH, CellStatus.NEW_ANOMALOUS, Phase.ASCEND),
        (Phase.ASCEND, Direction.WEST, CellStatus.NOT_ANOMALOUS, Phase.OFF_PATTERN),
        (Phase.ASCEND, Direction.SOUTH, CellStatus.PREVIOUSLY_VISITED, Phase.OFF_PATTERN),
        (Phase.OFF_PATTERN, Direction.NORTH, CellStatus.NEW_ANOMALOUS, Phase.ASCEND),
    ],
)
def test_phase_transition_east_entry(prev, action, status, expected):
    """
    Verify the grazing-pattern automaton for an East entry.
    """
    assert phase_transition(prev, action, status, Direction.EAST) == expected


def test_second_lateral_step_is_undesirable():
    """
    Verify a repeated lateral step stays in place but is not desirable.
    """
    assert pattern_step(Phase.TOP_STEP, Direction.EAST, CellStatus.NOT_ANOMALOUS,
                        Direction.EAST) == (Phase.TOP_STEP, False)


@pytest.mark.parametrize(
    "prev, action, status, expected",
    [
        (Phase.ENTRY, Direction.NORTH, CellStatus.KNOWN_ANOMALOUS, Phase.ASCEND),
        (Phase.TOP_EXIT, Direction.WEST, CellStatus.NOT_ANOMALOUS, Phase.TOP_STEP),
        (Phase.BOTTOM_EXIT, Direction.WEST, CellStatus.NEW_ANOMALOUS, Phase.BOTTOM_STEP),
        (Phase.BOTTOM_STEP, Direction.NORTH, CellStatus.NOT_ANOMALOUS, Phase.TOP_EXIT),
        (Phase.TOP_STEP, Direction.WEST, CellStatus.NOT_ANOMALOUS, Phase.TOP_STEP),
        (Phase.TOP_EXIT, Direction.EAST, CellStatus.NOT_ANOMALOUS, Phase.OFF_PATTERN),
        (Phase.ENTRY, Direction.WEST, CellStatus.NEW_ANOMALOUS, Phase.OFF_PATTERN),
        (Phase.OFF_PATTERN, Direction.SOUTH, CellStatus.NOT_ANOMALOUS, Phase.BOTTOM_EXIT),
    ],
)
def test_phase_transition_west_entry(prev, action, status, expected):
    """
    Verify a West entry makes West the lateral step and East an off-pattern move.
    """
    assert phase_transition(prev, action, status, Direction.WEST) == expected


def test_phase_transition_is_total():
    """
    Verify every phase, move, cell status and entry side maps to one phase.
    """
    seen = set()
    for prev in Phase:
        for action in Direction:
            for status in CellStatus:
                for entry in (Direction.EAST, Direction.WEST):
                    nxt = phase_transition(prev, action, status, entry)
                    assert isinstance(nxt, Phase)
                    seen.add(nxt)
    assert seen == set(Phase) - {Phase.ENTRY}


def test_off_pattern_reenters_like_entry():
    """
    Verify every move from the sentinel is matched as if from ENTRY and
    every vertical move brings the automaton back into the pattern.
    """
    for action in Direction:
        for status in CellStatus:
            for entry in (Direction.EAST, Direction.WEST):
                nxt = phase_transition(Phase.OFF_PATTERN, action, status, entry)
                assert nxt == phase_transition(Phase.ENTRY, action, status, entry)
                if not action.is_horizontal:
                    assert nxt != Phase.OFF_PATTERN


# reward TESTCASES
def test_reward_off_pattern():
    """
    Verify a move to the sentinel phase costs 1.
    """
    prev = state(phase=Phase.ASCEND, last=Direction.NORTH)
    new = state(phase=Phase.OFF_PATTERN, anchor=Phase.ASCEND, last=Direction.WEST)
    assert reward(prev, new) == -1


def test_reward_desirable_new_cell():
    """
    Verify a desirable move onto a never-visited cell earns 1.
    """
    prev = state(phase=Phase.ENTRY)
    new = state(phase=Phase.ASCEND, last=Direction.NORTH, status=CellStatus.NEW_ANOMALOUS)
    assert reward(prev, new) == 1


def test_reward_repeated_lateral_step():
    """
    Verify a second lateral step from a lateral-step phase costs 10.
    """
    prev = state(phase=Phase.TOP_STEP, last=Direction.EAST)
    new = state(phase=Phase.TOP_STEP, last=Direction.EAST, status=CellStatus.NOT_ANOMALOUS)
    assert reward(prev, new) == -10


def test_reward_default_step():
    """
    Verify a desirable move onto a visited cell falls through to -1.
    """
    prev = state(phase=Phase.ASCEND, last=Direction.NORTH)
    new = state(phase=Phase.TOP_EXIT, last=Direction.NORTH, status=CellStatus.PREVIOUSLY_VISITED)
    assert reward(prev, new) == -1


def test_reward_west_entry_lateral_step():
    """
    Verify a West entry pays for the West lateral step and penalises repeating it.
    """
    prev = state(phase=Phase.TOP_EXIT, last=Direction.NORTH, entry=1)
    new = state(phase=Phase.TOP_STEP, last=Direction.WEST, status=CellStatus.NOT_ANOMALOUS, entry=1)
    assert reward(prev, new) == 1
    again = state(phase=Phase.TOP_STEP, last=Direction.WEST, status=CellStatus.NOT_ANOMALOUS, entry=1)
    assert reward(new, again) == -10


def test_reward_west_entry_east_step():
    """
    Verify an East step under a West entry leaves the pattern and costs 1.
    """
    prev = state(phase=Phase.BOTTOM_STEP, last=Direction.WEST, entry=1)
    new = state(phase=Phase.OFF_PATTERN, anchor=Phase.BOTTOM_STEP, last=Direction.EAST,
                status=CellStatus.NEW_ANOMALOUS, entry=1)
    assert reward(prev, new) == -1


# valid_actions TESTCASES
def test_valid_actions_at_corner():
    """
    Verify only on-map moves are offered, in code order.
    """
    assert valid_actions(Cell(0, 0), Bounds(3, 3)) == (Direction.EAST, Direction.SOUTH)
    assert valid_actions(Cell(1, 1), Bounds(3, 3)) == tuple(Direction)
    assert valid_actions(Cell(0, 0), Bounds(1, 1)) == ()

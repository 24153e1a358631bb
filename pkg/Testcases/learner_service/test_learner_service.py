"""
Learner service test cases.

Covers the action-value table, the temporal-difference update, the
inspection environment, curriculum training and the policy file format.
"""

import numpy as np
import pandas as pd
import pytest

from schemas.learnerschema import Hyperparams, TrainSchedule
from services.gridworld_service import Cell, GridMap, parse_map
from services.learner_service import (
    CURVE_COLUMNS, InspectionEnv, Policy, cached_policy, evaluate, load_policy, q_update,
    random_policy_rollouts, save_policy, task_starts, train, write_curve,
)
from utils.enums import Direction, Phase, Task
from utils.errors import ConfigurationError, NumericError, PolicyFormatError

SMALL_SCHEDULE = TrainSchedule(cycles=2, steps_per_cycle=300)
SMALL_HP = Hyperparams(episode_cap=50)


# Policy TESTCASES
def test_greedy_action_breaks_ties_by_code():
    """
    Verify equal values resolve to the lowest direction code.
    """
    policy = Policy.zeros()
    assert policy.greedy_action(5, (Direction.EAST, Direction.SOUTH)) == Direction.EAST


def test_greedy_action_only_considers_valid():
    """
    Verify a better but invalid action is never chosen.
    """
    policy = Policy.zeros()
    policy.q_values[7] = [5.0, -1.0, 2.0, 0.0]
    assert policy.greedy_action(7, tuple(Direction)) == Direction.NORTH
    assert policy.greedy_action(7, (Direction.EAST, Direction.SOUTH)) == Direction.SOUTH


# q_update TESTCASES
def test_q_update_moves_toward_target():
    """
    Verify q(s, a) += alpha * (r + gamma * max q(s') - q(s, a)) and nothing else changes.
    """
    policy = Policy.zeros()
    policy.q_values[2] = [0.0, 2.0, 0.0, 0.0]
    hp = Hyperparams(learning_rate=0.5, discount=0.9)
    q_update(policy, 1, Direction.SOUTH, -1.0, 2, False, hp)
    assert policy.q_values[1, Direction.SOUTH] == pytest.approx(0.4)
    assert np.count_nonzero(policy.q_values) == 2


def test_q_update_terminal_ignores_next_state():
    """
    Verify terminal transitions bootstrap from zero.
    """
    policy = Policy.zeros()
    policy.q_values[2] = [10.0, 10.0, 10.0, 10.0]
    q_update(policy, 1, Direction.NORTH, -1.0, 2, True, Hyperparams(learning_rate=1.0))
    assert policy.q_values[1, Direction.NORTH] == -1.0


def test_q_update_zero_learning_rate():
    """
    Verify alpha = 0 leaves the table unchanged.
    """
    policy = Policy.zeros()
    q_update(policy, 3, Direction.WEST, 1.0, 4, False, Hyperparams(learning_rate=0.0))
    assert not policy.q_values.any()


def test_q_update_rejects_non_finite_reward():
    """
    Verify a NaN reward is a numeric error.
    """
    with pytest.raises(NumericError):
        q_update(Policy.zeros(), 0, Direction.NORTH, float("nan"), 1, False, Hyperparams())


# task_starts TESTCASES
def test_task_starts_use_largest_cluster_edges():
    """
    Verify Task-1 starts at the right edge entering West and Task-2 at the left edge entering East.
    """
    grid = parse_map("5 5\n00000\n01100\n00110\n00000\n10000\n")
    starts = task_starts(grid)
    assert starts[Task.RIGHT_EDGE] == (Cell(3, 2), Direction.WEST)
    assert starts[Task.LEFT_EDGE] == (Cell(1, 1), Direction.EAST)


def test_task_starts_need_anomalies():
    """
    Verify an anomaly-free training map is a configuration error.
    """
    with pytest.raises(ConfigurationError):
        task_starts(GridMap(np.zeros((4, 4), dtype=np.uint8)))


# InspectionEnv TESTCASES
def test_env_reset_state():
    """
    Verify reset observes the start cell with phase ENTRY and the entry direction as last action.
    """
    grid = parse_map("3 3\n000\n010\n000\n")
    env = InspectionEnv(grid, novelty_allowance=10, cap=5)
    s = env.reset(Cell(1, 1), Direction.EAST)
    assert s.s == (0, 0, 0, 0, 3, int(Direction.EAST), int(Phase.ENTRY), 0)
    assert env.anomalies_discovered == 1


def test_env_truncates_at_cap():
    """
    Verify an episode is done after `cap` steps.
    """
    grid = parse_map("3 3\n010\n010\n010\n")
    env = InspectionEnv(grid, novelty_allowance=10, cap=2)
    env.reset(Cell(1, 2), Direction.EAST)
    first = env.step(Direction.NORTH)
    second = env.step(Direction.NORTH)
    assert (first.reward, first.done) == (1, False)
    assert second.done and not second.terminal


def test_env_terminates_without_novelty():
    """
    Verify the episode is terminal once the novelty window closes.
    """
    grid = parse_map("4 1\n1000\n")
    env = InspectionEnv(grid, novelty_allowance=1, cap=10)
    env.reset(Cell(0, 0), Direction.EAST)
    assert not env.step(Direction.EAST).terminal
    result = env.step(Direction.EAST)
    assert result.terminal and result.done


# train / evaluate TESTCASES
def test_train_alternates_tasks(cluster_map):
    """
    Verify one evaluation per cycle, alternating Task-1 and Task-2.
    """
    policy, reports = train(cluster_map, SMALL_SCHEDULE, SMALL_HP, seed=1)
    assert [r.task for r in reports] == [Task.RIGHT_EDGE, Task.LEFT_EDGE]
    assert [r.cycle for r in reports] == [0, 1]
    assert policy.steps == 600
    assert np.isfinite(policy.q_values).all()


def test_train_is_deterministic(cluster_map):
    """
    Verify the same seed yields the same table.
    """
    first, _ = train(cluster_map, SMALL_SCHEDULE, SMALL_HP, seed=5)
    second, _ = train(cluster_map, SMALL_SCHEDULE, SMALL_HP, seed=5)
    assert np.array_equal(first.q_values, second.q_values)


def test_train_rejects_zero_cap(cluster_map):
    """
    Verify training needs at least one step per episode.
    """
    with pytest.raises(ConfigurationError):
        train(cluster_map, SMALL_SCHEDULE, Hyperparams(episode_cap=0), seed=0)


def test_evaluate_with_zero_cap_returns_empty_report(cluster_map):
    """
    Verify a zero cap evaluates nothing and leaves the table alone.
    """
    policy = Policy.zeros()
    start, entry = task_starts(cluster_map)[Task.RIGHT_EDGE]
    report = evaluate(policy, cluster_map, start, entry, cap=0)
    assert (report.steps, report.cumulative_reward) == (0, 0.0)
    assert not policy.q_values.any()


def test_learned_policy_beats_random(cluster_map):
    """
    Verify the greedy policy earns more reward than random moves on both tasks.
    """
    schedule = TrainSchedule(cycles=4, steps_per_cycle=20_000)
    hp = Hyperparams(episode_cap=200)
    policy, _ = train(cluster_map, schedule, hp, seed=0)
    for task, (start, entry) in task_starts(cluster_map).items():
        greedy = evaluate(policy, cluster_map, start, entry, cap=200)
        rollouts = random_policy_rollouts(cluster_map, start, entry, cap=200, n=100, seed=1)
        random_mean = np.mean([r.cumulative_reward for r in rollouts])
        assert greedy.cumulative_reward > random_mean, task


@pytest.mark.slow
def test_full_curriculum_doubles_random_reward(trained_policy):
    """
    Verify the full curriculum beats random moves by a 2x margin on both tasks.

    Rewards are mostly negative, so the margin is read as
    greedy - random_mean >= |random_mean|.
    """
    grid, policy = trained_policy
    cap = Hyperparams().episode_cap
    for task, (start, entry) in task_starts(grid).items():
        greedy = evaluate(policy, grid, start, entry, cap=cap)
        rollouts = random_policy_rollouts(grid, start, entry, cap=cap, n=100, seed=1)
        random_mean = float(np.mean([r.cumulative_reward for r in rollouts]))
        assert greedy.cumulative_reward - random_mean >= abs(random_mean), task


# save_policy / load_policy TESTCASES
def test_policy_file_round_trip(tmp_path):
    """
    Verify values survive the text format bit for bit.
    """
    policy = Policy.zeros(seed=9)
    rng = np.random.default_rng(0)
    policy.q_values[:] = rng.normal(size=policy.q_values.shape)
    policy.q_values[0, 0] = 0.1
    path = tmp_path / "pi.bnmq"
    save_policy(policy, path)
    loaded = load_policy(path)
    assert np.array_equal(loaded.q_values, policy.q_values)
    assert loaded.seed == 9


def test_policy_file_keeps_hyperparams(tmp_path, cluster_map):
    """
    Verify training metadata survives save and load.
    """
    policy, _ = train(cluster_map, SMALL_SCHEDULE, SMALL_HP, seed=2)
    path = tmp_path / "pi.bnmq"
    save_policy(policy, path)
    loaded = load_policy(path)
    assert loaded.hyperparams == SMALL_HP.model_dump()
    assert (loaded.seed, loaded.steps) == (2, SMALL_SCHEDULE.total_steps)
    assert np.array_equal(loaded.q_values, policy.q_values)


def test_load_policy_bad_hyperparams(tmp_path):
    """
    Verify an invalid hyperparameter sidecar is a policy format error.
    """
    path = tmp_path / "pi.bnmq"
    save_policy(Policy.zeros(hp=Hyperparams()), path)
    (tmp_path / "pi.bnmq.hp.json").write_text('{"learning_rate": 7}')
    with pytest.raises(PolicyFormatError):
        load_policy(path)


def test_write_curve(tmp_path, cluster_map):
    """
    Verify the learning curve has one row per cycle in curriculum order.
    """
    _, reports = train(cluster_map, SMALL_SCHEDULE, SMALL_HP, seed=0)
    path = tmp_path / "curve.csv"
    write_curve(reports, path)
    frame = pd.read_csv(path)
    assert list(frame.columns) == CURVE_COLUMNS
    assert frame["cycle"].tolist() == [0, 1]
    assert frame["task"].tolist() == [Task.RIGHT_EDGE.value, Task.LEFT_EDGE.value]
    assert frame["cumulative_reward"].tolist() == [r.cumulative_reward for r in reports]


def test_load_truncated_policy(tmp_path):
    """
    Verify a file with missing rows is rejected.
    """
    path = tmp_path / "pi.bnmq"
    save_policy(Policy.zeros(), path)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:1000]) + "\n")
    with pytest.raises(PolicyFormatError):
        load_policy(path)


@pytest.mark.parametrize("header", ["HELLO 73728 4 0 0", "BNMQ2 73728 4 0 0", "BNMQ1 10 4 0 0"])
def test_load_policy_bad_header(tmp_path, header):
    """
    Verify foreign, future-version and mis-sized headers are rejected.
    """
    path = tmp_path / "pi.bnmq"
    path.write_text(header + "\n0 0 0 0\n")
    with pytest.raises(PolicyFormatError):
        load_policy(path)


def test_cached_policy_matches_file(tmp_path):
    """
    Verify the cached load returns the stored table.
    """
    policy = Policy.zeros()
    policy.q_values[11] = [1.0, 2.0, 3.0, 4.0]
    path = tmp_path / "pi.bnmq"
    save_policy(policy, path)
    first = cached_policy(path)
    second = cached_policy(path)
    assert np.array_equal(first.q_values, policy.q_values)
    assert np.array_equal(second.q_values, policy.q_values)


def test_q_update_full_step_no_discount():
    """
    Verify alpha = 1 and gamma = 0 collapse the update to the reward.
    """
    policy = Policy.zeros()
    q_update(policy, 0, Direction.EAST, 1.0, 1, False, Hyperparams(learning_rate=1.0, discount=0.0))
    assert policy.q_values[0, Direction.EAST] == 1.0


def test_evaluate_ascending_policy_on_column():
    """
    Verify a policy that always prefers North maps a vertical anomaly column.
    """
    grid = parse_map("3 3\n010\n010\n010\n")
    policy = Policy.zeros()
    policy.q_values[:, Direction.NORTH] = 1.0
    report = evaluate(policy, grid, Cell(1, 2), Direction.EAST, cap=10)
    assert report.anomalies_discovered == 3
    assert not policy.q_values[:, Direction.EAST].any()


def test_evaluate_on_clear_region():
    """
    Verify nothing is discovered where there is nothing to find.
    """
    grid = GridMap(np.zeros((6, 6), dtype=np.uint8))
    report = evaluate(Policy.zeros(), grid, Cell(3, 3), Direction.WEST, cap=20)
    assert report.anomalies_discovered == 0
    assert report.steps <= 20

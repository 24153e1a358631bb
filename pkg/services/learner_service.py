"""
Tabular value learning for the close-inspection policy.

The inspection state space has exactly N_STATES entries, so the policy is
a dense (N_STATES, 4) action-value table trained by one-step Q-learning
on an alternating two-task curriculum.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple, Sequence

import numpy as np
import pandas as pd
from diskcache import Cache
from pydantic import ValidationError

from config import CACHE_DIR
from schemas.learnerschema import Hyperparams, TrainSchedule
from services.gridworld_service import Cell, GridMap, Observation, component_labels, observe
from services.inspection_service import (
    N_ACTIONS, N_STATES, BeliefGrid, InspectionState, encode_state, phase_transition, reward,
    state_index, valid_actions,
)
from services.policy_switch_service import should_terminate
from utils.enums import Direction, ObservationValue, Phase, Task
from utils.errors import BoundsError, ConfigurationError, NumericError, PolicyFormatError
from utils.seeding import POLICY_STREAM, substream

logger = logging.getLogger(__name__)

POLICY_VERSION = 1
POLICY_MAGIC = f"BNMQ{POLICY_VERSION}"
CURRICULUM = (Task.RIGHT_EDGE, Task.LEFT_EDGE)
CURVE_COLUMNS = ["cycle", "task", "anomalies_discovered", "cumulative_reward", "steps"]


@dataclass
class Policy:
    """Action-value table with the metadata needed to reproduce it."""
    q_values: np.ndarray
    version: int = POLICY_VERSION
    seed: int = 0
    steps: int = 0
    hyperparams: dict | None = None

    @classmethod
    def zeros(cls, seed: int = 0, hp: Hyperparams | None = None) -> "Policy":
        return cls(
            q_values=np.zeros((N_STATES, N_ACTIONS), dtype=np.float64),
            seed=seed,
            hyperparams=hp.model_dump() if hp is not None else None,
        )

    def greedy_action(self, index: int, valid: Sequence[Direction]) -> Direction:
        """Best valid action; ties go to the lowest direction code."""
        row = self.q_values[index]
        best = valid[0]
        best_value = row[best]
        for direction in valid[1:]:
            if row[direction] > best_value:
                best, best_value = direction, row[direction]
        return best


@dataclass
class EvalReport:
    anomalies_discovered: int
    cumulative_reward: float
    steps: int
    cycle: int | None = None
    task: Task | None = None


class StepResult(NamedTuple):
    state: InspectionState
    reward: int
    done: bool
    terminal: bool


@dataclass
class InspectionEnv:
    """
    The close-inspection MDP as a stepping environment.

    An episode starts on `start` with a fresh belief, counts as terminal when
    the novelty window closes, and is truncated after `cap` steps.
    """
    grid: GridMap
    novelty_allowance: int = 10
    cap: int = 400
    belief: BeliefGrid = field(init=False)
    position: Cell = field(init=False)
    state: InspectionState = field(init=False)

    def reset(self, start: Cell, entry_dir: Direction) -> InspectionState:
        if not self.grid.in_bounds(start):
            raise BoundsError(f"start {tuple(start)} is outside the map")
        self.belief = BeliefGrid(self.grid.width, self.grid.height)
        self.position = start
        self.entry_dir = entry_dir
        self.last_action = entry_dir
        self.phase = Phase.ENTRY
        self.anchor = None
        self.steps = 0
        self.total_reward = 0
        first = observe(self.grid, start, 0)
        self.trajectory: list[Observation] = [first]
        self.novel = [first.value == ObservationValue.ANOMALY]
        self.belief.record(start, first.value)
        self.state = self._encode()
        return self.state

    def _encode(self) -> InspectionState:
        return encode_state(self.belief, self.position, self.last_action, self.phase,
                            self.entry_dir, self.grid.bounds, self.anchor)

    def valid_actions(self) -> tuple[Direction, ...]:
        return valid_actions(self.position, self.grid.bounds)

    @property
    def anomalies_discovered(self) -> int:
        return sum(self.novel)

    def step(self, action: Direction) -> StepResult:
        cell = self.position.moved(action)
        obs = observe(self.grid, cell, self.steps + 1)
        is_new = obs.value == ObservationValue.ANOMALY and self.belief.visits[cell.y, cell.x] == 0
        self.belief.record(cell, obs.value)
        self.trajectory.append(obs)
        self.novel.append(is_new)
        self.steps += 1

        new_phase = phase_transition(self.phase, action, self.belief.cell_status(cell), self.entry_dir)
        if new_phase == Phase.OFF_PATTERN:
            self.anchor = self.phase if self.phase != Phase.OFF_PATTERN else self.anchor
        else:
            self.anchor = None
        self.phase = new_phase
        self.position = cell
        self.last_action = action

        previous = self.state
        self.state = self._encode()
        r = reward(previous, self.state)
        self.total_reward += r

        terminal = should_terminate(self.trajectory, self.novelty_allowance, self.novel)
        done = terminal or self.steps >= self.cap or not self.valid_actions()
        return StepResult(self.state, r, done, terminal)


def task_starts(grid: GridMap) -> dict[Task, tuple[Cell, Direction]]:
    """
    Curriculum start cells on the largest anomaly cluster.

    Task-1 starts on the cluster's rightmost cell having arrived moving West,
    Task-2 on its leftmost cell having arrived moving East. Ties go to the
    lowest cell on the map.
    """
    labels, count = component_labels(grid)
    if count == 0:
        raise ConfigurationError("training map has no anomaly cells")
    sizes = np.bincount(labels.ravel())[1:]
    largest = int(np.argmax(sizes)) + 1
    ys, xs = np.nonzero(labels == largest)
    right = max(zip(xs, ys), key=lambda c: (c[0], c[1]))
    left = min(zip(xs, ys), key=lambda c: (c[0], -c[1]))
    return {
        Task.RIGHT_EDGE: (Cell(int(right[0]), int(right[1])), Direction.WEST),
        Task.LEFT_EDGE: (Cell(int(left[0]), int(left[1])), Direction.EAST),
    }


def q_update(policy: Policy, s: int, a: Direction, r: float, s_next: int, terminal: bool,
             hp: Hyperparams) -> Policy:
    """One temporal-difference update of q(s, a); every other entry is untouched."""
    if not math.isfinite(r):
        raise NumericError(f"non-finite reward {r}")
    q = policy.q_values
    target = r if terminal else r + hp.discount * float(q[s_next].max())
    updated = q[s, a] + hp.learning_rate * (target - q[s, a])
    if not math.isfinite(updated):
        raise NumericError(f"update of q[{s}, {int(a)}] is not finite")
    q[s, a] = updated
    return policy


def _rollout(env: InspectionEnv, start: Cell, entry_dir: Direction,
             choose: Callable[[int, tuple[Direction, ...]], Direction]) -> EvalReport:
    state = env.reset(start, entry_dir)
    done = env.cap <= 0 or not env.valid_actions()
    while not done:
        valid = env.valid_actions()
        result = env.step(choose(state_index(state), valid))
        state, done = result.state, result.done
    return EvalReport(env.anomalies_discovered, float(env.total_reward), env.steps)


def evaluate(policy: Policy, grid: GridMap, start: Cell, entry_dir: Direction, cap: int,
             novelty_allowance: int = 10) -> EvalReport:
    """Greedy rollout; reads the table, never writes it."""
    env = InspectionEnv(grid, novelty_allowance, cap)
    return _rollout(env, start, entry_dir, policy.greedy_action)


def random_policy_rollouts(grid: GridMap, start: Cell, entry_dir: Direction, cap: int,
                           n: int, seed: int, novelty_allowance: int = 10) -> list[EvalReport]:
    """Rollouts of the uniform-random policy over valid actions."""
    rng = substream(seed, "random-rollouts")
    env = InspectionEnv(grid, novelty_allowance, cap)

    def choose(_index, valid):
        return valid[int(rng.integers(len(valid)))]

    return [_rollout(env, start, entry_dir, choose) for _ in range(n)]


def train(grid: GridMap, schedule: TrainSchedule, hp: Hyperparams,
          seed: int) -> tuple[Policy, list[EvalReport]]:
    """
    Epsilon-greedy Q-learning over the alternating curriculum.

    Each cycle trains `steps_per_cycle` steps from its task's start cell and
    ends with a greedy evaluation on that task.
    """
    starts = task_starts(grid)
    if hp.episode_cap < 1:
        raise ConfigurationError("episode_cap must be >= 1 for training")

    rng = substream(seed, POLICY_STREAM)
    policy = Policy.zeros(seed, hp)
    env = InspectionEnv(grid, hp.novelty_allowance, hp.episode_cap)
    total = schedule.total_steps
    global_step = 0
    reports = []

    for cycle in range(schedule.cycles):
        task = CURRICULUM[cycle % len(CURRICULUM)]
        start, entry_dir = starts[task]
        cycle_steps = 0
        while cycle_steps < schedule.steps_per_cycle:
            s = state_index(env.reset(start, entry_dir))
            if not env.valid_actions():
                raise ConfigurationError("training start cell has no legal moves")
            done = False
            while not done and cycle_steps < schedule.steps_per_cycle:
                valid = env.valid_actions()
                if rng.random() < hp.epsilon(global_step, total):
                    action = valid[int(rng.integers(len(valid)))]
                else:
                    action = policy.greedy_action(s, valid)
                result = env.step(action)
                s_next = state_index(result.state)
                q_update(policy, s, action, result.reward, s_next, result.terminal, hp)
                s, done = s_next, result.done
                cycle_steps += 1
                global_step += 1

        policy.steps = global_step
        report = evaluate(policy, grid, start, entry_dir, hp.episode_cap, hp.novelty_allowance)
        report.cycle, report.task = cycle, task
        reports.append(report)
        logger.info("cycle %d (%s): %d anomalies, reward %.1f, %d steps",
                    cycle, task.value, report.anomalies_discovered,
                    report.cumulative_reward, report.steps)
    return policy, reports


def write_curve(reports: Sequence[EvalReport], path: str | Path) -> None:
    """One row per training cycle's greedy evaluation."""
    frame = pd.DataFrame(
        [(r.cycle, r.task.value, r.anomalies_discovered, r.cumulative_reward, r.steps)
         for r in reports],
        columns=CURVE_COLUMNS,
    )
    frame.to_csv(path, index=False, lineterminator="\n")


def hyperparams_path(path: str | Path) -> Path:
    return Path(f"{path}.hp.json")


def save_policy(policy: Policy, path: str | Path) -> None:
    """
    Write the header line then one row of 4 values per state.

    Hyperparameters, when known, go to a `<path>.hp.json` sidecar.
    """
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"{POLICY_MAGIC} {N_STATES} {N_ACTIONS} {policy.seed} {policy.steps}\n")
        np.savetxt(fh, policy.q_values, fmt="%.17g", delimiter=" ")
    if policy.hyperparams is not None:
        hp = Hyperparams.model_validate(policy.hyperparams)
        hyperparams_path(path).write_text(hp.model_dump_json(indent=2) + "\n", encoding="utf-8")


def _load_hyperparams(path: str | Path) -> dict | None:
    sidecar = hyperparams_path(path)
    if not sidecar.is_file():
        return None
    try:
        return Hyperparams.model_validate_json(sidecar.read_text(encoding="utf-8")).model_dump()
    except (ValidationError, UnicodeDecodeError) as exc:
        raise PolicyFormatError(f"bad hyperparameter file {sidecar}: {exc}") from exc


def load_policy(path: str | Path) -> Policy:
    """Read a policy file and its hyperparameter sidecar; hyperparams is None without one."""
    try:
        with open(path, encoding="ascii") as fh:
            header = fh.readline().split()
    except UnicodeDecodeError as exc:
        raise PolicyFormatError("policy file is not text") from exc
    if len(header) != 5 or not header[0].startswith("BNMQ"):
        raise PolicyFormatError("missing BNMQ header")
    if header[0] != POLICY_MAGIC:
        raise PolicyFormatError(f"unsupported policy version {header[0]}")
    try:
        states, actions, seed, steps = (int(v) for v in header[1:])
    except ValueError as exc:
        raise PolicyFormatError("malformed policy header") from exc
    if (states, actions) != (N_STATES, N_ACTIONS):
        raise PolicyFormatError(f"expected a {N_STATES}x{N_ACTIONS} table, header says {states}x{actions}")

    try:
        frame = pd.read_csv(path, sep=" ", header=None, skiprows=1, dtype=np.float64,
                            float_precision="round_trip")
    except (ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise PolicyFormatError(f"unreadable policy body: {exc}") from exc
    values = frame.to_numpy(dtype=np.float64)
    if values.shape != (states, actions) or not np.isfinite(values).all():
        raise PolicyFormatError(f"policy body is truncated or malformed (shape {values.shape})")
    return Policy(q_values=np.ascontiguousarray(values), seed=seed, steps=steps,
                  hyperparams=_load_hyperparams(path))


def cached_policy(path: str | Path) -> Policy:
    """load_policy memoised on disk by (path, mtime, size)."""
    resolved = Path(path).resolve()
    stat = resolved.stat()
    key = f"policy:{resolved}:{stat.st_mtime_ns}:{stat.st_size}"
    sidecar = hyperparams_path(resolved)
    if sidecar.is_file():
        key += f":{sidecar.stat().st_mtime_ns}"
    with Cache(CACHE_DIR) as cache:
        policy = cache.get(key)
        if policy is None:
            policy = load_policy(resolved)
            cache.set(key, policy)
    return policy

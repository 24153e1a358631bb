"""
Training configuration schemas for the close-inspection learner.

None of the defaults come from a published run; they are desk-scale
settings that train a usable table in minutes.
"""
# pylint: disable=too-few-public-methods
from pydantic import BaseModel, Field


class Hyperparams(BaseModel):
    """
    Temporal-difference learning settings.

    Attributes:
        learning_rate: step size alpha.
        discount: gamma.
        epsilon_start / epsilon_end: exploration rate at the first step and
            after `epsilon_decay_fraction` of all training steps.
        episode_cap: hard limit on steps per training episode.
        novelty_allowance: the termination window used inside episodes.
    """
    learning_rate: float = Field(0.1, ge=0.0, le=1.0)
    discount: float = Field(0.99, ge=0.0, lt=1.0)
    epsilon_start: float = Field(1.0, ge=0.0, le=1.0)
    epsilon_end: float = Field(0.05, ge=0.0, le=1.0)
    epsilon_decay_fraction: float = Field(0.8, gt=0.0, le=1.0)
    episode_cap: int = Field(400, ge=0)
    novelty_allowance: int = Field(10, ge=1)

    def epsilon(self, step: int, total_steps: int) -> float:
        """Linear decay from epsilon_start to epsilon_end, then flat."""
        horizon = max(1.0, self.epsilon_decay_fraction * total_steps)
        frac = min(1.0, step / horizon)
        return self.epsilon_start + frac * (self.epsilon_end - self.epsilon_start)


class TrainSchedule(BaseModel):
    """Alternating two-task curriculum: even cycles Task-1, odd cycles Task-2."""
    cycles: int = Field(5, ge=1)
    steps_per_cycle: int = Field(50_000, ge=1)

    @property
    def total_steps(self) -> int:
        return self.cycles * self.steps_per_cycle

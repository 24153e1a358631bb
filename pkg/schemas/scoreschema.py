"""
Pydantic schemas for world-model scoring.
"""
# pylint: disable=too-few-public-methods,missing-class-docstring
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator


class ScoreParams(BaseModel):
    """
    Asymmetric error weights.

    w_miss applies where the model underestimates the truth (a missed
    anomaly), w_false_alarm where it overestimates.
    """
    w_miss: float = Field(100.0, ge=0.0)
    w_false_alarm: float = Field(1.0, ge=0.0)


class ScoreRequest(BaseModel):
    """Two equally sized label grids, rows top to bottom."""
    truth: List[List[int]]
    model: List[List[float]]
    params: ScoreParams = ScoreParams()

    @model_validator(mode="after")
    def check_rows(self):
        for name, grid in (("truth", self.truth), ("model", self.model)):
            if not grid or not grid[0]:
                raise ValueError(f"{name} must have at least one row and one column")
            if any(len(row) != len(grid[0]) for row in grid):
                raise ValueError(f"{name} rows must all have the same length")
        return self


class ScoreResponse(BaseModel):
    score: float
    cells: int


class ScorePointResponse(BaseModel):
    t: int
    score: float
    anomalies_found: int
    mode: Optional[str] = None

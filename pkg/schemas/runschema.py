"""
Pydantic schemas for single-episode runs over HTTP.
"""
# pylint: disable=too-few-public-methods,missing-class-docstring
from typing import List, Optional

from pydantic import BaseModel, Field

from schemas.mapschema import MapGenerateRequest
from schemas.scoreschema import ScoreParams, ScorePointResponse
from utils.enums import Algorithm


class RunRequest(BaseModel):
    algorithm: Algorithm
    budget: int = Field(..., ge=0)
    seed: int = 0
    map: MapGenerateRequest = MapGenerateRequest()
    policy_path: Optional[str] = None
    novelty_allowance: int = Field(10, ge=1)
    reserve_fraction: float = Field(0.25, ge=0.0, lt=1.0)
    score: ScoreParams = ScoreParams()
    stride: int = Field(50, ge=1)


class RunResponse(BaseModel):
    algorithm: Algorithm
    budget: int
    seed: int
    moves: int
    anomalies_found: int
    coverage_pct: float
    final_score: float
    inspection_steps: int
    series: List[ScorePointResponse]

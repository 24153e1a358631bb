"""
Benchmark configuration and result schemas.

`ExperimentConfig` is the single object a bench is run from; the CLI echoes
it into `manifest.json` so that the run can be replayed exactly.
"""
# pylint: disable=too-few-public-methods,missing-class-docstring
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, model_validator

from schemas.scoreschema import ScoreParams
from utils.enums import Algorithm


class MapSource(BaseModel):
    """Either a map file or generator parameters (generated once per seed)."""
    path: Optional[str] = None
    width: int = Field(100, ge=1)
    height: int = Field(100, ge=1)
    clusters: int = Field(3, ge=0)
    cluster_size: int = Field(120, ge=1)


class ExperimentConfig(BaseModel):
    map: MapSource = MapSource()
    algorithms: List[Algorithm] = Field(..., min_length=1)
    budgets: List[int] = Field(..., min_length=1)
    seeds: List[int] = Field(..., min_length=1)
    novelty_allowance: int = Field(10, ge=1)
    reserve_fraction: float = Field(0.25, ge=0.0, lt=1.0)
    score: ScoreParams = ScoreParams()
    stride: int = Field(50, ge=1)
    policy: Optional[str] = None
    external: Dict[str, str] = Field(default_factory=dict)
    workers: int = Field(1, ge=1)
    output_dir: str = "out"

    @model_validator(mode="after")
    def check_config(self):
        if any(b < 0 for b in self.budgets):
            raise ValueError("budgets must be non-negative")
        if Algorithm.BNM in self.algorithms and not self.policy:
            raise ValueError("the bnm algorithm needs a policy file")
        return self


class SummaryRow(BaseModel):
    algorithm: str
    budget: int
    seed: int
    final_score: Optional[float] = None
    anomalies_found: Optional[int] = None
    coverage_pct: Optional[float] = None
    moves: Optional[int] = None
    status: str = "ok"

    class Config:
        from_attributes = True


class BenchResponse(BaseModel):
    rows: List[SummaryRow]
    recorded: int

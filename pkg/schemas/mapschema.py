"""
Pydantic schemas for map generation and upload.
"""
# pylint: disable=too-few-public-methods,missing-class-docstring
from typing import List, Optional

from pydantic import BaseModel, Field

from services.gridworld_service import GridMap, component_count, format_map


class MapGenerateRequest(BaseModel):
    width: int = Field(100, ge=1, le=1000)
    height: int = Field(100, ge=1, le=1000)
    clusters: int = Field(3, ge=0)
    cluster_size: int = Field(120, ge=1)
    seed: int = 0
    include_rows: bool = False


class MapSummary(BaseModel):
    """Dimensions and anomaly statistics of a map; rows only on request."""
    width: int
    height: int
    anomaly_cells: int
    components: int
    rows: Optional[List[str]] = None

    @classmethod
    def from_grid(cls, grid: GridMap, include_rows: bool = False) -> "MapSummary":
        return cls(
            width=grid.width,
            height=grid.height,
            anomaly_cells=grid.anomaly_count(),
            components=component_count(grid),
            rows=format_map(grid).splitlines()[1:] if include_rows else None,
        )

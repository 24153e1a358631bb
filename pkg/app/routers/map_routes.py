"""
Map API routes.

This module provides endpoints to:
- Generate a seeded clustered anomaly map.
- Upload a map file and get back its parsed summary.
"""

from fastapi import APIRouter, UploadFile

from schemas.mapschema import MapGenerateRequest, MapSummary
from services.gridworld_service import decode_map, generate_clustered_map, parse_map

router = APIRouter(prefix="/maps")


@router.post("/generate", response_model=MapSummary)
def generate_map(payload: MapGenerateRequest):
    """
    Generate a clustered map and summarize it.

    Args:
        payload (MapGenerateRequest): Dimensions, cluster parameters and seed.

    Returns:
        MapSummary: Dimensions, anomaly cell count and component count, plus
        the rows when `include_rows` is set.
    """
    grid = generate_clustered_map(payload.width, payload.height, payload.clusters,
                                  payload.cluster_size, payload.seed)
    return MapSummary.from_grid(grid, payload.include_rows)


@router.post("/upload", response_model=MapSummary)
async def upload_map(file: UploadFile, include_rows: bool = False):
    """
    Parse an uploaded `W H` + rows map file.

    Raises:
        MapFormatError: If the file is not ASCII or breaks the map format;
        the message carries the offending line number.
    """
    raw = await file.read()
    return MapSummary.from_grid(parse_map(decode_map(raw)), include_rows)

"""
API router aggregation module.

Registers the map, run, score and bench routers on a single FastAPI router
with tags for the API documentation.
"""

from fastapi import APIRouter
from app.routers import bench_routes, map_routes, run_routes, score_routes


router = APIRouter()

router.include_router(map_routes.router, tags=["Maps"])
router.include_router(run_routes.router, tags=["Runs"])
router.include_router(score_routes.router, tags=["Score"])
router.include_router(bench_routes.router, tags=["Bench"])

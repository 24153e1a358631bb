"""
Single-run API route.

Runs one algorithm on a generated map and returns the run summary with its
score series.
"""

from fastapi import APIRouter, HTTPException

from schemas.runschema import RunRequest, RunResponse
from services.estimator_service import score_series
from services.gridworld_service import generate_clustered_map
from services.learner_service import cached_policy
from services.policy_switch_service import run_episode
from utils.enums import Algorithm, Mode

router = APIRouter(prefix="/runs")


@router.post("", response_model=RunResponse)
def create_run(payload: RunRequest):
    """
    Execute one episode.

    Raises:
        HTTPException: 400 if the bnm algorithm is requested without a
        readable policy file.
    """
    policy = None
    if payload.algorithm == Algorithm.BNM:
        if not payload.policy_path:
            raise HTTPException(status_code=400, detail="policy_path is required for bnm")
        try:
            policy = cached_policy(payload.policy_path)
        except FileNotFoundError as exc:
            raise HTTPException(status_code=400, detail=f"policy not found: {payload.policy_path}") from exc

    source = payload.map
    grid = generate_clustered_map(source.width, source.height, source.clusters,
                                  source.cluster_size, source.seed)
    run = run_episode(grid, payload.budget, payload.algorithm, policy, payload.seed,
                      payload.novelty_allowance, payload.reserve_fraction)
    series = score_series(run, grid, payload.score, payload.stride)
    return RunResponse(
        algorithm=payload.algorithm,
        budget=payload.budget,
        seed=payload.seed,
        moves=run.moves,
        anomalies_found=run.anomalies_found(),
        coverage_pct=100.0 * run.coverage(),
        final_score=series[-1].score,
        inspection_steps=sum(1 for m in run.modes if m == Mode.CLOSE_INSPECTION),
        series=[p._asdict() for p in series],
    )

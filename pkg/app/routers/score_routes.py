"""Score API route: asymmetric error between a truth grid and a model grid."""

import numpy as np
from fastapi import APIRouter

from schemas.scoreschema import ScoreRequest, ScoreResponse
from services.estimator_service import WorldModel, score_eca
from services.gridworld_service import GridMap

router = APIRouter(prefix="/score")


@router.post("", response_model=ScoreResponse)
def score(payload: ScoreRequest):
    truth = GridMap(np.array(payload.truth))
    model = WorldModel(np.array(payload.model, dtype=np.float64))
    return ScoreResponse(score=score_eca(truth, model, payload.params), cells=truth.size)

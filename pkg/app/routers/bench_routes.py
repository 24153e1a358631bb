"""
Benchmark API routes.

This module provides endpoints to:
- Run a budget sweep in-process and persist its summary rows.
- List persisted summary rows, optionally filtered by algorithm or budget.
"""

from typing import List, Optional

from fastapi import APIRouter, Depends
from sqlalchemy.orm import Session

from db import get_db
from schemas.benchschema import BenchResponse, ExperimentConfig, SummaryRow
from services.bench_service import list_rows, record_rows, run_bench

router = APIRouter(prefix="/bench")


@router.post("", response_model=BenchResponse)
def create_bench(config: ExperimentConfig, db: Session = Depends(get_db)):
    """
    Run algorithms x budgets x seeds and store one row per run.

    Failed runs are stored too, with their error in `status`.
    """
    rows = [result.row for result in run_bench(config)]
    recorded = record_rows(db, rows)
    return BenchResponse(rows=rows, recorded=recorded)


@router.get("/results", response_model=List[SummaryRow])
def bench_results(
    algorithm: Optional[str] = None,
    budget: Optional[int] = None,
    db: Session = Depends(get_db),
):
    """Persisted summary rows in (algorithm, budget, seed) order."""
    return list_rows(db, algorithm, budget)

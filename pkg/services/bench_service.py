"""
Budget-sweep benchmark harness and run-trace I/O.

A bench is the cross product algorithms x budgets x seeds. Each triple is
run independently (optionally in a process pool); rows are merged in
sorted key order so the output does not depend on scheduling.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List

import pandas as pd
from sqlalchemy.orm import Session

from models.models import BenchRun
from schemas.benchschema import ExperimentConfig, SummaryRow
from services.estimator_service import ScorePoint, score_series, write_series
from services.gridworld_service import (
    Cell, GridMap, Observation, RunRecord, generate_clustered_map, load_map,
)
from services.learner_service import cached_policy
from services.policy_switch_service import run_episode
from utils.enums import Algorithm, Mode, ObservationValue
from utils.errors import BnmError, ConfigurationError, MapFormatError

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["t", "x", "y", "mode", "obs"]
SUMMARY_COLUMNS = list(SummaryRow.model_fields)


@dataclass
class BenchResult:
    row: SummaryRow
    series: list[ScorePoint]


def trace_frame(run: RunRecord) -> pd.DataFrame:
    return pd.DataFrame(
        [(obs.timestep, obs.cell.x, obs.cell.y, mode.value, int(obs.value))
         for obs, mode in zip(run.trajectory, run.modes)],
        columns=TRACE_COLUMNS,
    )


def write_trace(run: RunRecord, path: str | Path) -> None:
    trace_frame(run).to_csv(path, index=False, lineterminator="\n")


def load_trace(path: str | Path, grid: GridMap, algorithm: str = "external",
               seed: int = 0) -> RunRecord:
    """Read a `t,x,y,mode,obs` trace produced by any explorer on `grid`."""
    try:
        frame = pd.read_csv(path, dtype={"mode": str})
    except (ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise MapFormatError(f"unreadable trace {path}: {exc}") from exc
    if list(frame.columns) != TRACE_COLUMNS:
        raise MapFormatError(f"trace header must be {','.join(TRACE_COLUMNS)}", line=1)
    if frame.empty:
        raise MapFormatError("trace has no rows", line=2)

    trajectory, modes = [], []
    for i, row in enumerate(frame.itertuples(index=False)):
        cell = Cell(int(row.x), int(row.y))
        if not grid.in_bounds(cell):
            raise MapFormatError(f"cell {tuple(cell)} is outside the map", line=i + 2)
        try:
            modes.append(Mode(row.mode))
            value = ObservationValue(int(row.obs))
        except ValueError as exc:
            raise MapFormatError(str(exc), line=i + 2) from exc
        trajectory.append(Observation(cell, value, int(row.t)))
    return RunRecord(algorithm=algorithm, b_total=len(trajectory) - 1, seed=seed,
                     width=grid.width, height=grid.height,
                     trajectory=trajectory, modes=modes)


def build_map(config: ExperimentConfig, seed: int) -> GridMap:
    source = config.map
    if source.path:
        return load_map(source.path)
    return generate_clustered_map(source.width, source.height, source.clusters,
                                  source.cluster_size, seed)


def summarize(run: RunRecord, series: list[ScorePoint], algorithm: str, seed: int) -> SummaryRow:
    return SummaryRow(
        algorithm=algorithm,
        budget=run.b_total,
        seed=seed,
        final_score=series[-1].score,
        anomalies_found=run.anomalies_found(),
        coverage_pct=100.0 * run.coverage(),
        moves=run.moves,
    )


def run_single(config: ExperimentConfig, grid: GridMap, algorithm: Algorithm,
               budget: int, seed: int) -> BenchResult:
    """One (algorithm, budget, seed) run; domain errors become an error row."""
    try:
        policy = cached_policy(config.policy) if algorithm == Algorithm.BNM else None
        run = run_episode(grid, budget, algorithm, policy, seed,
                          config.novelty_allowance, config.reserve_fraction)
        series = score_series(run, grid, config.score, config.stride)
        row = summarize(run, series, algorithm.value, seed)
    except (BnmError, OSError) as exc:
        logger.error("%s b=%d seed=%d failed: %s", algorithm.value, budget, seed, exc)
        return BenchResult(SummaryRow(algorithm=algorithm.value, budget=budget, seed=seed,
                                      status=f"error: {exc}"), [])
    logger.info("%s b=%d seed=%d: score %.4f, %d anomalies, %.1f%% covered",
                algorithm.value, budget, seed, row.final_score, row.anomalies_found,
                row.coverage_pct)
    return BenchResult(row, series)


def _run_task(args) -> BenchResult:
    return run_single(*args)


def run_external(config: ExperimentConfig, grid: GridMap) -> List[BenchResult]:
    """Score externally produced traces against the configured map."""
    results = []
    for name, path in sorted(config.external.items()):
        try:
            run = load_trace(path, grid, name)
            series = score_series(run, grid, config.score, config.stride)
            results.append(BenchResult(summarize(run, series, name, 0), series))
        except (BnmError, OSError) as exc:
            logger.error("external trace %s failed: %s", name, exc)
            results.append(BenchResult(
                SummaryRow(algorithm=name, budget=0, seed=0, status=f"error: {exc}"), []))
    return results


def run_bench(config: ExperimentConfig) -> List[BenchResult]:
    """Run the full cross product and return results sorted by (algorithm, budget, seed)."""
    if config.external and not config.map.path:
        raise ConfigurationError("external traces need a fixed map file")
    maps = {seed: build_map(config, seed) for seed in config.seeds}
    tasks = [
        (config, maps[seed], Algorithm(alg), budget, seed)
        for alg in config.algorithms for budget in config.budgets for seed in config.seeds
    ]
    logger.info("bench: %d runs on %d worker(s)", len(tasks), config.workers)
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(task) for task in tasks]

    if config.external:
        results.extend(run_external(config, maps[config.seeds[0]]))
    results.sort(key=lambda r: (r.row.algorithm, r.row.budget, r.row.seed))
    return results


def write_bench(results: List[BenchResult], out_dir: str | Path) -> Path:
    """Write summary.csv and one series file per successful run."""
    out = Path(out_dir)
    series_dir = out / "series"
    series_dir.mkdir(parents=True, exist_ok=True)
    summary = pd.DataFrame([r.row.model_dump() for r in results], columns=SUMMARY_COLUMNS)
    summary.to_csv(out / "summary.csv", index=False, lineterminator="\n")
    for result in results:
        if result.series:
            row = result.row
            write_series(result.series, series_dir / f"{row.algorithm}_b{row.budget}_s{row.seed}.csv")
    return out / "summary.csv"


def record_rows(db: Session, rows: List[SummaryRow]) -> int:
    """Persist summary rows into bench_runs."""
    db.add_all(BenchRun(**row.model_dump()) for row in rows)
    db.commit()
    return len(rows)


def list_rows(db: Session, algorithm: str | None = None, budget: int | None = None) -> List[BenchRun]:
    query = db.query(BenchRun)
    if algorithm:
        query = query.filter(BenchRun.algorithm == algorithm)
    if budget is not None:
        query = query.filter(BenchRun.budget == budget)
    return query.order_by(BenchRun.algorithm, BenchRun.budget, BenchRun.seed, BenchRun.id).all()

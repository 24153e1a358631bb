"""
Database ORM models.

Only benchmark summaries are persisted; maps, policies and traces stay
on disk as plain files.
"""

# pylint: disable=too-few-public-methods,not-callable
from sqlalchemy import TIMESTAMP, Column, Float, Integer, String, func

from db import Base


# BENCH RUNS TABLE
class BenchRun(Base):
    """One (algorithm, budget, seed) row of a bench summary."""
    __tablename__ = "bench_runs"

    id = Column(Integer, primary_key=True, index=True)
    algorithm = Column(String(50), nullable=False, index=True)
    budget = Column(Integer, nullable=False, index=True)
    seed = Column(Integer, nullable=False)
    final_score = Column(Float, nullable=True)
    anomalies_found = Column(Integer, nullable=True)
    coverage_pct = Column(Float, nullable=True)
    moves = Column(Integer, nullable=True)
    status = Column(String(255), default="ok")

    created_at = Column(TIMESTAMP, server_default=func.now())

"""
Pytest fixtures for the planner test suites.

This module provides the SQLite test database, a FastAPI test client with
`get_db` overridden, and small maps and policies shared by the service tests.
"""

import os

os.environ.setdefault("BNM_DB_URL", "sqlite:///./test.db")
os.environ.setdefault("BNM_CACHE_DIR", "./diskcache/test_policies")

# pylint: disable=wrong-import-position
import numpy as np
import pytest
from fastapi.testclient import TestClient
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

from db import Base, get_db
from main import app
from schemas.learnerschema import Hyperparams, TrainSchedule
from services import learner_service
from services.gridworld_service import GridMap, generate_clustered_map
from services.learner_service import Policy, train


# ---------------- Test Database ----------------
SQLALCHEMY_DATABASE_URL = "sqlite:///./test.db"

engine = create_engine(
    SQLALCHEMY_DATABASE_URL,
    connect_args={"check_same_thread": False},
)

TestingSessionLocal = sessionmaker(
    autocommit=False,
    autoflush=False,
    bind=engine,
)


# ---------------- Create / Drop Tables ----------------
@pytest.fixture(scope="session", autouse=True)
def create_test_db():
    """
    Create all database tables before the test session
    and drop them after tests complete.
    """
    Base.metadata.create_all(bind=engine)
    yield
    Base.metadata.drop_all(bind=engine)


# ---------------- DB Session Fixture ----------------
@pytest.fixture()
def db_session():
    """
    Provide a database session for tests.
    Rolls back after each test.
    """
    db = TestingSessionLocal()
    try:
        yield db
    finally:
        db.rollback()
        db.close()


# ---------------- API CLIENT ----------------
@pytest.fixture()
def client(db_session):
    """
    Provide a FastAPI test client.

    Overrides:
    - get_db → test database session
    """
    def override_get_db():
        yield db_session

    app.dependency_overrides[get_db] = override_get_db

    with TestClient(app) as test_client:
        yield test_client

    app.dependency_overrides.clear()


# ---------------- Policy Cache ----------------
@pytest.fixture(autouse=True)
def policy_cache(tmp_path, monkeypatch):
    """Point the policy cache at a per-test directory."""
    monkeypatch.setattr(learner_service, "CACHE_DIR", str(tmp_path / "policy-cache"))


# ---------------- Maps and Policies ----------------
@pytest.fixture()
def empty_map():
    """100 x 100 map with no anomalies."""
    return GridMap(np.zeros((100, 100), dtype=np.uint8))


@pytest.fixture()
def cluster_map():
    """40 x 40 map with one seeded cluster."""
    return generate_clustered_map(40, 40, 1, 60, seed=3)


@pytest.fixture()
def zero_policy():
    """All-zero table: greedy choice is always the lowest valid direction code."""
    return Policy.zeros()


# ---------------- Full-size training (slow suites) ----------------
@pytest.fixture(scope="session")
def trained_policy():
    """
    Policy from the full 5 x 50000-step curriculum on a seeded
    single-cluster 100 x 100 map; returns (map, policy).
    """
    grid = generate_clustered_map(100, 100, 1, 120, seed=7)
    policy, _ = train(grid, TrainSchedule(), Hyperparams(), seed=0)
    return grid, policy

"""
Database configuration and session management.

Initializes the SQLAlchemy engine for the benchmark results store and
provides the `get_db` dependency used by the API routes and `bench --record`.
"""

from sqlalchemy import create_engine
from sqlalchemy.orm import declarative_base, sessionmaker

from config import DB_URL

Base = declarative_base()

connect_args = {"check_same_thread": False} if DB_URL.startswith("sqlite") else {}
engine = create_engine(DB_URL, connect_args=connect_args)

Session = sessionmaker(autocommit=False, autoflush=False, bind=engine)


def get_db():
    """
    Provide a database session dependency.

    Yields:
        Session: SQLAlchemy database session, closed after use.
    """
    db = Session()
    try:
        yield db
    finally:
        db.close()

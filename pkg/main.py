"""
FastAPI application entry point.

Creates the results tables, maps domain errors to JSON responses and
registers the API routes.
"""

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from app import route
from db import Base, engine
from models import models  # noqa: F401  pylint: disable=unused-import
from utils.errors import BnmError
from utils.logging_config import setup_logging

setup_logging()

app = FastAPI(title="bnm-planner")
Base.metadata.create_all(bind=engine)


@app.exception_handler(BnmError)
async def bnm_error_handler(_request: Request, exc: BnmError):
    """Return a domain error as `{"detail": ..., "error": ...}` with its status code."""
    return JSONResponse(
        status_code=exc.status_code,
        content={"detail": str(exc), "error": type(exc).__name__},
    )


app.include_router(route.router)


@app.get('/')
def greet():
    """
    Health check endpoint.

    Returns:
        str: Welcome message indicating the API is running.
    """
    return 'Welcome!'

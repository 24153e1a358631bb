"""
Environment-driven settings.

Values come from the process environment, optionally seeded from a `.env`
file. Nothing here is required; every setting has a working default.
"""

import os
from dotenv import load_dotenv

load_dotenv()

DB_URL = os.getenv("BNM_DB_URL", "sqlite:///./bnm_results.db")
CACHE_DIR = os.getenv("BNM_CACHE_DIR", "./diskcache/policies")
LOG_LEVEL = os.getenv("BNM_LOG_LEVEL", "INFO")
OUTPUT_DIR = os.getenv("BNM_OUTPUT_DIR", "./out")

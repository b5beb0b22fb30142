# src/store/__init__.py
from .db import get_engine
from .results import fetch_rows, insert_rows, run_ids

__all__ = ["fetch_rows", "get_engine", "insert_rows", "run_ids"]

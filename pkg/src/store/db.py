# src/store/db.py
from __future__ import annotations

from typing import Optional

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine

from src.settings import get_database_url

_ENGINE: Optional[Engine] = None


def get_engine(url: Optional[str] = None) -> Engine:
    """
    Singleton SQLAlchemy engine for the configured results store.
    An explicit url gets its own engine (tests, --database-url).
    """
    global _ENGINE
    if url is not None:
        return create_engine(url, future=True)
    if _ENGINE is None:
        _ENGINE = create_engine(get_database_url(), future=True)
    return _ENGINE

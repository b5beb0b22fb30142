# src/settings.py
from __future__ import annotations

import logging
import os
import sys
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

LOG_FORMAT = "[%(name)s] %(levelname)s: %(message)s"
DEFAULT_DATABASE_URL = "sqlite:///ldp_results.db"


def load_env() -> None:
    """
    Load .env from repo root if present.
    Safe to call multiple times; real environment variables win.
    """
    # repo root = .../src/settings.py -> parents[1]
    root = Path(__file__).resolve().parents[1]
    env_path = root / ".env"
    if env_path.exists():
        load_dotenv(env_path, override=False)


def default_threads() -> int:
    """LDP_THREADS, else every available core."""
    load_env()
    raw = os.getenv("LDP_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            logging.getLogger(__name__).warning("ignoring non-integer LDP_THREADS=%r", raw)
    return os.cpu_count() or 1


def log_level(verbose: int = 0) -> int:
    load_env()
    if verbose >= 2:
        return logging.DEBUG
    if verbose == 1:
        return logging.INFO
    name = os.getenv("LDP_LOG_LEVEL", "WARNING").strip().upper()
    return getattr(logging, name, logging.WARNING)


def configure_logging(verbose: int = 0) -> None:
    """Diagnostics go to stderr; stdout carries results only."""
    logging.basicConfig(level=log_level(verbose), format=LOG_FORMAT, stream=sys.stderr, force=True)


def get_database_url(cli_value: Optional[str] = None) -> str:
    """
    Prefer an explicit URL, then DATABASE_URL, then POSTGRES_* vars (when
    POSTGRES_HOST is set, matching docker-compose.yml), else a local SQLite file.
    """
    if cli_value:
        return cli_value
    load_env()

    url = os.getenv("DATABASE_URL")
    if url:
        return url

    host = os.getenv("POSTGRES_HOST")
    if not host:
        return DEFAULT_DATABASE_URL
    port = os.getenv("POSTGRES_PORT", "5432")
    db = os.getenv("POSTGRES_DB", "ldp")
    user = os.getenv("POSTGRES_USER", "ldp")
    pw = os.getenv("POSTGRES_PASSWORD", "ldp")

    # SQLAlchemy URL
    return f"postgresql+psycopg2://{user}:{pw}@{host}:{port}/{db}"

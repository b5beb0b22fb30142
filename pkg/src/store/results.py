# src/store/results.py
from __future__ import annotations

import logging
from typing import Any, Dict, List, Optional, Sequence

from sqlalchemy import text
from sqlalchemy.engine import Engine

from src.simharness.summary import BENCH_COLUMNS

logger = logging.getLogger(__name__)

TABLE = "bench_results"

RESULT_COLUMNS = BENCH_COLUMNS

SCHEMA_SQL = f"""
CREATE TABLE IF NOT EXISTS {TABLE} (
    run_id VARCHAR(64) NOT NULL,
    row_no INTEGER NOT NULL,
    protocol VARCHAR(8) NOT NULL,
    epsilon DOUBLE PRECISION NOT NULL,
    d INTEGER NOT NULL,
    n INTEGER NOT NULL,
    rep VARCHAR(16) NOT NULL,
    avg_sq_error DOUBLE PRECISION NOT NULL,
    avg_sq_error_std DOUBLE PRECISION,
    analytic_sq_error DOUBLE PRECISION NOT NULL,
    topk_error DOUBLE PRECISION NOT NULL,
    tp DOUBLE PRECISION NOT NULL,
    fp DOUBLE PRECISION NOT NULL,
    threshold DOUBLE PRECISION NOT NULL,
    seconds DOUBLE PRECISION,
    PRIMARY KEY (run_id, row_no)
)
"""


def ensure_schema(engine: Engine) -> None:
    with engine.begin() as conn:
        conn.execute(text(SCHEMA_SQL))


def insert_rows(engine: Engine, run_id: str, rows: Sequence[Dict[str, Any]]) -> int:
    """Append one bench run (rep rows + summary row) under run_id."""
    ensure_schema(engine)
    payload = []
    for i, row in enumerate(rows):
        rec = {c: row.get(c) for c in RESULT_COLUMNS}
        rec["rep"] = str(rec["rep"])
        rec["run_id"] = run_id
        rec["row_no"] = i
        payload.append(rec)
    if not payload:
        return 0

    cols = ["run_id", "row_no"] + RESULT_COLUMNS
    sql = f"INSERT INTO {TABLE} ({', '.join(cols)}) VALUES ({', '.join(':' + c for c in cols)})"
    with engine.begin() as conn:
        conn.execute(text(sql), payload)

    logger.info("stored %d rows for run %s", len(payload), run_id)
    return len(payload)


def run_ids(engine: Engine) -> List[str]:
    ensure_schema(engine)
    with engine.connect() as conn:
        rows = conn.execute(text(f"SELECT DISTINCT run_id FROM {TABLE} ORDER BY run_id")).fetchall()
    return [str(r[0]) for r in rows]


def fetch_rows(engine: Engine, run_id: Optional[str] = None) -> List[Dict[str, Any]]:
    ensure_schema(engine)
    sql = f"SELECT run_id, row_no, {', '.join(RESULT_COLUMNS)} FROM {TABLE}"
    params: Dict[str, Any] = {}
    if run_id is not None:
        sql += " WHERE run_id = :run_id"
        params["run_id"] = run_id
    sql += " ORDER BY run_id, row_no"
    with engine.connect() as conn:
        return [dict(r._mapping) for r in conn.execute(text(sql), params)]

"""
Results store round trip on a throwaway SQLite file, the stored-run
validator, and environment-driven settings.
"""
import logging

import pytest
from sqlalchemy import text

from scripts.validate_results import run_checks
from src import settings
from src.cli.main import main
from src.simharness.config import ExperimentConfig
from src.simharness.runner import run_experiment
from src.simharness.summary import SUMMARY_REP, bench_rows
from src.store.db import get_engine
from src.store.results import TABLE, fetch_rows, insert_rows, run_ids


@pytest.fixture
def engine(tmp_path):
    return get_engine(f"sqlite:///{tmp_path / 'r.db'}")


def _rows(kind="oue", reps=3):
    cfg = ExperimentConfig(kind, 2.0, 32, n=2000, master_seed=6, repetitions=reps)
    return bench_rows(cfg, run_experiment(cfg, threads=1))


def test_insert_and_fetch(engine):
    rows = _rows()
    assert insert_rows(engine, "run-a", rows) == 4
    assert insert_rows(engine, "run-b", _rows("de", reps=1)) == 2
    assert insert_rows(engine, "run-c", []) == 0

    assert run_ids(engine) == ["run-a", "run-b"]
    stored = fetch_rows(engine, "run-a")
    assert [r["row_no"] for r in stored] == [0, 1, 2, 3]
    assert [r["rep"] for r in stored] == ["0", "1", "2", SUMMARY_REP]
    assert stored[0]["avg_sq_error"] == rows[0]["avg_sq_error"]
    assert stored[-1]["seconds"] is None
    assert len(fetch_rows(engine)) == 6


def test_validator_passes_on_stored_runs(engine):
    insert_rows(engine, "run-a", _rows())
    insert_rows(engine, "run-b", _rows("sue", reps=2))
    checks = run_checks(engine)
    assert all(c.ok for c in checks), [c for c in checks if not c.ok]
    assert all(c.ok for c in run_checks(engine, run_id="run-b"))


def test_validator_catches_tampered_summary(engine):
    insert_rows(engine, "run-a", _rows())
    with engine.begin() as conn:
        conn.execute(
            text(f"UPDATE {TABLE} SET avg_sq_error = avg_sq_error * 2 WHERE rep = :rep"),
            {"rep": SUMMARY_REP},
        )
    failed = [c.name for c in run_checks(engine) if not c.ok]
    assert failed == ["summary avg_sq_error = mean of reps"]


def test_validator_catches_missing_summary_and_empty_store(engine):
    assert not run_checks(engine)[0].ok

    insert_rows(engine, "run-a", _rows()[:-1])
    failed = [c.name for c in run_checks(engine) if not c.ok]
    assert "runs: reps + exactly one summary row" in failed


def test_validator_agreement_gap(engine):
    insert_rows(engine, "run-a", _rows())
    by_name = {c.name: c for c in run_checks(engine, max_rel_gap=1e-9)}
    assert not by_name["empirical vs analytic error"].ok


def test_validator_flags_unknown_run(engine):
    insert_rows(engine, "run-a", _rows())
    by_name = {c.name: c for c in run_checks(engine, run_id="nope")}
    assert not by_name["requested run exists"].ok
    assert "run-a" in by_name["requested run exists"].details
    assert run_checks(engine)[-1].ok


def test_bench_store_flag(capsys, tmp_path):
    url = f"sqlite:///{tmp_path / 'cli.db'}"
    code = main(["bench", "--protocol", "de", "--epsilon", "2", "--d", "8", "--n", "500",
                 "--reps", "2", "--threads", "1", "--store", "--run-id", "cli-run",
                 "--database-url", url])
    _, err = capsys.readouterr()
    assert code == 0
    assert "stored 3 rows as run cli-run" in err
    assert run_ids(get_engine(url)) == ["cli-run"]


# ----------------------------
# settings
# ----------------------------

@pytest.fixture
def clean_env(monkeypatch):
    monkeypatch.setattr(settings, "load_env", lambda: None)
    for var in ("DATABASE_URL", "POSTGRES_HOST", "POSTGRES_PORT", "POSTGRES_DB",
                "POSTGRES_USER", "POSTGRES_PASSWORD", "LDP_THREADS", "LDP_LOG_LEVEL"):
        monkeypatch.delenv(var, raising=False)
    return monkeypatch


def test_database_url_resolution(clean_env):
    assert settings.get_database_url() == settings.DEFAULT_DATABASE_URL
    assert settings.get_database_url("sqlite:///x.db") == "sqlite:///x.db"

    clean_env.setenv("POSTGRES_HOST", "db")
    clean_env.setenv("POSTGRES_PASSWORD", "secret")
    assert settings.get_database_url() == "postgresql+psycopg2://ldp:secret@db:5432/ldp"

    clean_env.setenv("DATABASE_URL", "sqlite:///env.db")
    assert settings.get_database_url() == "sqlite:///env.db"


def test_default_threads(clean_env):
    clean_env.setenv("LDP_THREADS", "3")
    assert settings.default_threads() == 3
    clean_env.setenv("LDP_THREADS", "0")
    assert settings.default_threads() == 1
    clean_env.setenv("LDP_THREADS", "many")
    assert settings.default_threads() >= 1


def test_log_level(clean_env):
    assert settings.log_level() == logging.WARNING
    assert settings.log_level(1) == logging.INFO
    assert settings.log_level(2) == logging.DEBUG
    clean_env.setenv("LDP_LOG_LEVEL", "error")
    assert settings.log_level() == logging.ERROR

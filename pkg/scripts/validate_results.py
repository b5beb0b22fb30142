# scripts/validate_results.py
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from sqlalchemy import text

from src.settings import get_database_url
from src.simharness.summary import SUMMARY_REP
from src.store.db import get_engine
from src.store.results import TABLE, run_ids

# relative tolerance for the summary-mean check
MEAN_RTOL = 1e-9


@dataclass
class CheckResult:
    name: str
    ok: bool
    details: str = ""


def _run_scalar(conn, sql: str, params: Optional[dict] = None):
    return conn.execute(text(sql), params or {}).scalar()


def _run_rows(conn, sql: str, params: Optional[dict] = None):
    return conn.execute(text(sql), params or {}).fetchall()


def _run_filter(run_id: Optional[str]) -> str:
    return "WHERE run_id = :run_id" if run_id else ""


def _params(run_id: Optional[str], **extra) -> dict:
    params = dict(extra)
    if run_id:
        params["run_id"] = run_id
    return params


def check_not_empty(conn, run_id: Optional[str]) -> CheckResult:
    n = _run_scalar(conn, f"SELECT COUNT(*) FROM {TABLE} {_run_filter(run_id)};", _params(run_id))
    if not n or int(n) == 0:
        return CheckResult(
            name="bench_results not empty",
            ok=False,
            details=f"no rows{f' for run {run_id}' if run_id else ''}; did bench run with --store?",
        )
    return CheckResult(name="bench_results not empty", ok=True, details=f"rows={n}")


def check_one_summary_per_run(conn, run_id: Optional[str]) -> CheckResult:
    # every run is its rep rows followed by exactly one summary row
    rows = _run_rows(
        conn,
        f"""
        SELECT run_id,
               SUM(CASE WHEN rep = :summary THEN 1 ELSE 0 END) AS n_summary,
               COUNT(*) AS n_rows
        FROM {TABLE}
        {_run_filter(run_id)}
        GROUP BY run_id
        HAVING SUM(CASE WHEN rep = :summary THEN 1 ELSE 0 END) <> 1
            OR COUNT(*) < 2
        LIMIT 20;
        """,
        _params(run_id, summary=SUMMARY_REP),
    )
    if rows:
        sample = "\n".join([f"  {r[0]} -> summary rows={r[1]}, rows={r[2]}" for r in rows])
        return CheckResult(
            name="runs: reps + exactly one summary row",
            ok=False,
            details=f"Found malformed runs (showing up to 20):\n{sample}",
        )
    return CheckResult(name="runs: reps + exactly one summary row", ok=True)


def check_metric_sanity(conn, run_id: Optional[str]) -> CheckResult:
    where = _run_filter(run_id)
    cond = """
        avg_sq_error < 0
        OR analytic_sq_error <= 0
        OR topk_error < 0
        OR tp < 0 OR fp < 0
        OR tp + fp > d
        OR threshold < 0
    """
    sql = f"SELECT COUNT(*) FROM {TABLE} {where} {'AND' if where else 'WHERE'} ({cond});"
    n = _run_scalar(conn, sql, _params(run_id))
    if n and int(n) > 0:
        return CheckResult(
            name="metric sanity (non-negative errors, tp + fp <= d)",
            ok=False,
            details=f"{n} rows violate metric bounds",
        )
    return CheckResult(name="metric sanity (non-negative errors, tp + fp <= d)", ok=True)


def check_summary_means(conn, run_id: Optional[str]) -> CheckResult:
    """The summary row's avg_sq_error equals the mean of that run's rep rows."""
    rows = _run_rows(
        conn,
        f"""
        SELECT s.run_id, s.avg_sq_error, AVG(r.avg_sq_error)
        FROM {TABLE} s
        JOIN {TABLE} r ON r.run_id = s.run_id AND r.rep <> :summary
        WHERE s.rep = :summary {'AND s.run_id = :run_id' if run_id else ''}
        GROUP BY s.run_id, s.avg_sq_error;
        """,
        _params(run_id, summary=SUMMARY_REP),
    )
    bad: List[str] = []
    for rid, summary_mean, rep_mean in rows:
        summary_mean, rep_mean = float(summary_mean), float(rep_mean)
        if abs(summary_mean - rep_mean) > MEAN_RTOL * max(1.0, abs(rep_mean)):
            bad.append(f"{rid}: summary {summary_mean!r} vs reps {rep_mean!r}")

    if bad:
        return CheckResult(
            name="summary avg_sq_error = mean of reps",
            ok=False,
            details="\n".join(bad[:20]),
        )
    return CheckResult(name="summary avg_sq_error = mean of reps", ok=True, details=f"runs={len(rows)}")


def check_agreement(conn, run_id: Optional[str], max_rel_gap: Optional[float]) -> CheckResult:
    if max_rel_gap is None:
        return CheckResult(name="empirical vs analytic error (skipped)", ok=True)

    rows = _run_rows(
        conn,
        f"""
        SELECT run_id, protocol, avg_sq_error, analytic_sq_error
        FROM {TABLE}
        WHERE rep = :summary {'AND run_id = :run_id' if run_id else ''};
        """,
        _params(run_id, summary=SUMMARY_REP),
    )
    bad = []
    for rid, proto, emp, ana in rows:
        gap = abs(float(emp) - float(ana)) / float(ana)
        if gap > max_rel_gap:
            bad.append(f"{rid} ({proto}): |{float(emp):.6g} - {float(ana):.6g}| / analytic = {gap:.2%}")

    if bad:
        return CheckResult(
            name="empirical vs analytic error",
            ok=False,
            details="\n".join(bad[:20]),
        )
    return CheckResult(
        name="empirical vs analytic error",
        ok=True,
        details=f"runs={len(rows)} within {max_rel_gap:.0%}",
    )


def check_run_known(stored: List[str], run_id: Optional[str]) -> CheckResult:
    if run_id is None:
        return CheckResult(name="requested run exists (all runs)", ok=True, details=f"runs={len(stored)}")
    if run_id not in stored:
        sample = ", ".join(stored[:10]) or "none"
        return CheckResult(
            name="requested run exists",
            ok=False,
            details=f"run {run_id!r} not stored; known runs: {sample}",
        )
    return CheckResult(name="requested run exists", ok=True)


def run_checks(engine, run_id: Optional[str] = None, max_rel_gap: Optional[float] = None) -> List[CheckResult]:
    stored = run_ids(engine)
    with engine.connect() as conn:
        return [
            check_not_empty(conn, run_id),
            check_one_summary_per_run(conn, run_id),
            check_metric_sanity(conn, run_id),
            check_summary_means(conn, run_id),
            check_agreement(conn, run_id, max_rel_gap),
            check_run_known(stored, run_id),
        ]


def main(argv: Optional[List[str]] = None) -> int:
    ap = argparse.ArgumentParser(description="Validate stored bench results for sanity + integrity.")
    ap.add_argument("--database-url", default=None, help="Overrides DATABASE_URL env var.")
    ap.add_argument("--run-id", default=None, help="Only check this run (default: every run).")
    ap.add_argument(
        "--max-rel-gap",
        type=float,
        default=None,
        help="Fail if a summary's avg_sq_error is further than this from n * Var* (e.g. 0.15).",
    )
    args = ap.parse_args(argv)

    url = get_database_url(args.database_url)
    checks = run_checks(get_engine(url), args.run_id, args.max_rel_gap)

    print("\n[VALIDATE] RESULTS")
    failed = 0
    for c in checks:
        status = "OK" if c.ok else "FAIL"
        print(f"  - {status}: {c.name}")
        if c.details:
            print(f"      {c.details.replace(chr(10), chr(10) + '      ')}")
        if not c.ok:
            failed += 1

    if failed:
        print(f"\n[VALIDATE] FAILED ({failed} checks).")
        return 1

    print("\n[VALIDATE] PASSED.")
    return 0


if __name__ == "__main__":
    sys.exit(main())

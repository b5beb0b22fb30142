# src/cli/main.py
from __future__ import annotations

import argparse
import logging
import sys
import uuid
from datetime import datetime, timezone
from typing import Callable, Dict, List, Optional, TextIO

from src.analytics.guideline import CommBudget, choose_protocol
from src.analytics.significance import (
    ThresholdSpec,
    population_split_preferred,
    significance_threshold,
    split_ratio,
    threshold_coefficient,
)
from src.analytics.variance import communication_bits, variance_table
from src.ldp.errors import LdpError
from src.ldp.privacy_check import CheckTooLargeError, check_privacy
from src.ldp.protocols import THETA_TABLE, ProtocolKind, ProtocolSpec
from src.settings import configure_logging, default_threads
from src.simharness.config import ExperimentConfig, parse_distribution
from src.simharness.errors import ConfigError
from src.simharness.runner import run_experiment
from src.simharness.summary import BENCH_COLUMNS, bench_rows
from src.store.db import get_engine
from src.store.results import insert_rows

from .output import FORMATS, write_rows

logger = logging.getLogger(__name__)

TABLE_EPSILONS = "0.5,1,2,4"
TABLE_DS = "2,32,1024"

PRIVACY_COLUMNS = ["protocol", "epsilon", "d", "mode", "max_ratio", "bound", "verdict"]
THRESHOLD_COLUMNS = ["protocol", "epsilon", "d", "n", "alpha", "threshold", "coefficient"]
SPLIT_COLUMNS = ["protocol", "epsilon", "split_ratio", "preferred_split"]
GUIDE_COLUMNS = ["protocol", "epsilon", "d", "var_per_user", "comm_bits", "recommended"]

PROTOCOL_CHOICES = [k.value for k in ProtocolKind]


# ----------------------------
# Flag types
# ----------------------------

def _count(text: str) -> int:
    """Positive integer; accepts 10000, 1e6 and 2^20."""
    raw = text.strip()
    try:
        if "^" in raw:
            base, _, exp = raw.partition("^")
            value = int(base) ** int(exp)
        else:
            f = float(raw)
            if not f.is_integer():
                raise ValueError
            value = int(f)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a whole number, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _float_list(text: str) -> List[float]:
    try:
        values = list(dict.fromkeys(float(x) for x in text.split(",") if x.strip()))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError(f"expected at least one number, got {text!r}")
    return values


def _count_list(text: str) -> List[int]:
    values = list(dict.fromkeys(_count(x) for x in text.split(",") if x.strip()))
    if not values:
        raise argparse.ArgumentTypeError(f"expected at least one whole number, got {text!r}")
    return values


def _theta(text: str) -> Optional[float]:
    """'optimal' (None) or a float."""
    if text.strip().lower() == "optimal":
        return None
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"theta must be 'optimal' or a number, got {text!r}") from None


def _two_decimals(v: float) -> str:
    return f"{v:.2f}"


def _full_precision(v: float) -> str:
    return format(v, "#.12g")


# ----------------------------
# Subcommands
# ----------------------------

def cmd_table(args: argparse.Namespace, out: TextIO) -> int:
    table = variance_table(args.epsilons, args.ds, theta=args.theta)
    columns = ["epsilon"] + [cell.label for cell in table[0]]
    rows = []
    for cells in table:
        row: Dict[str, object] = {"epsilon": cells[0].epsilon}
        row.update({cell.label: cell.var_per_user for cell in cells})
        rows.append(row)

    fmt = _two_decimals if args.precision == "2" else _full_precision
    write_rows(rows, columns, args.format, out, float_format=fmt)
    return 0


def _run_id(config: ExperimentConfig) -> str:
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S")
    return f"{config.kind.value}-e{config.epsilon:g}-d{config.d}-{stamp}-{uuid.uuid4().hex[:6]}"


def cmd_bench(args: argparse.Namespace, out: TextIO) -> int:
    config = ExperimentConfig(
        kind=args.protocol,
        epsilon=args.epsilon,
        d=args.d,
        n=args.n,
        distribution=parse_distribution(args.dist),
        master_seed=args.seed,
        repetitions=args.reps,
        theta=args.theta,
        g=args.g,
        top_k=args.top_k,
        threshold_alpha=args.threshold_alpha,
        threshold=args.threshold,
        clamp=args.clamp,
    )
    threads = default_threads() if args.threads is None else args.threads
    if threads < 1:
        raise ConfigError(f"--threads must be >= 1, got {threads}")

    logger.info("bench: %s dist=%s reps=%d seed=%d threads=%d",
                config.spec.describe(), config.distribution, config.repetitions, config.master_seed, threads)

    results = run_experiment(config, threads=threads)
    rows = bench_rows(config, results, timing=args.timing)
    write_rows(rows, BENCH_COLUMNS, args.format, out)

    if args.store:
        run_id = args.run_id or _run_id(config)
        stored = insert_rows(get_engine(args.database_url), run_id, rows)
        print(f"[BENCH] stored {stored} rows as run {run_id}", file=sys.stderr)
    return 0


def cmd_privacy_check(args: argparse.Namespace, out: TextIO) -> int:
    try:
        result = check_privacy(args.protocol, args.epsilon, args.d, seeds=args.seeds, rng_seed=args.seed)
    except CheckTooLargeError as e:
        print(f"[PRIVACY-CHECK] REFUSED: {e}", file=sys.stderr)
        return 2

    row = {
        "protocol": result.kind.value,
        "epsilon": result.epsilon,
        "d": result.d,
        "mode": result.mode,
        "max_ratio": result.max_ratio,
        "bound": result.bound,
        "verdict": result.verdict,
    }
    write_rows([row], PRIVACY_COLUMNS, args.format, out)
    return 0 if result.passed else 1


def cmd_threshold(args: argparse.Namespace, out: TextIO) -> int:
    kind = ProtocolKind.parse(args.protocol)

    if args.split_ratio:
        ratio = split_ratio(args.epsilon, kind, d=args.d or 2)
        row = {
            "protocol": kind.value,
            "epsilon": args.epsilon,
            "split_ratio": ratio,
            "preferred_split": "population" if population_split_preferred(ratio) else "budget",
        }
        write_rows([row], SPLIT_COLUMNS, args.format, out)
        return 0

    if args.d is None or args.n is None:
        raise ConfigError("threshold needs --d and --n (or --split-ratio)")
    spec = ThresholdSpec.for_protocol(kind, args.epsilon, args.d, args.n, alpha=args.threshold_alpha)
    t = significance_threshold(spec)
    coefficient = threshold_coefficient(spec)
    row = {
        "protocol": kind.value,
        "epsilon": args.epsilon,
        "d": args.d,
        "n": args.n,
        "alpha": args.threshold_alpha,
        "threshold": t,
        "coefficient": coefficient,
    }
    write_rows([row], THRESHOLD_COLUMNS, args.format, out)
    return 0


def cmd_guide(args: argparse.Namespace, out: TextIO) -> int:
    chosen = choose_protocol(args.epsilon, args.d, args.comm)
    rows = []
    for kind in ProtocolKind:
        spec = ProtocolSpec.build(kind, args.epsilon, args.d)
        rows.append({
            "protocol": kind.value,
            "epsilon": args.epsilon,
            "d": args.d,
            "var_per_user": spec.var_star(),
            "comm_bits": communication_bits(kind, args.d, g=spec.g),
            "recommended": kind is chosen,
        })
    logger.info("guide: eps=%g d=%d comm=%s -> %s", args.epsilon, args.d, args.comm, chosen.label)
    write_rows(rows, GUIDE_COLUMNS, args.format, out)
    return 0


# ----------------------------
# Parser
# ----------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="csv", help="Output format (default csv).")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug (stderr).")

    ap = argparse.ArgumentParser(
        prog="ldp",
        description="Frequency oracles under local differential privacy: variance tables, benchmarks, checks.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    t = sub.add_parser("table", parents=[common], help="Analytic Var*/n of every protocol.")
    t.add_argument("--epsilons", type=_float_list, default=_float_list(TABLE_EPSILONS),
                   help=f"Comma-separated budgets (default {TABLE_EPSILONS}).")
    t.add_argument("--ds", type=_count_list, default=_count_list(TABLE_DS),
                   help=f"Comma-separated DE domain sizes (default {TABLE_DS}).")
    t.add_argument("--theta", type=float, default=THETA_TABLE, help="THE threshold (default 1).")
    t.add_argument("--precision", choices=("2", "full"), default="2", help="2 decimals or full precision.")
    t.set_defaults(func=cmd_table)

    b = sub.add_parser("bench", parents=[common], help="Simulate a protocol and score its estimates.")
    b.add_argument("--protocol", required=True, choices=PROTOCOL_CHOICES)
    b.add_argument("--epsilon", type=float, required=True)
    b.add_argument("--d", type=_count, required=True, help="Domain size.")
    b.add_argument("--n", type=_count, default=None, help="Users (optional for --dist file:...).")
    b.add_argument("--dist", default="zipf:1.1", help="zipf:<s> | uniform | file:<path> (default zipf:1.1).")
    b.add_argument("--reps", type=int, default=10, help="Repetitions (default 10).")
    b.add_argument("--seed", type=int, default=0, help="Master seed (default 0).")
    b.add_argument("--theta", type=_theta, default=None, help="THE threshold or 'optimal' (default).")
    b.add_argument("--g", type=int, default=None, help="OLH hash range (default round(e^eps)+1).")
    b.add_argument("--top-k", type=int, default=30, help="Values scored by topk_error (default 30).")
    b.add_argument("--threshold-alpha", type=float, default=0.05, help="Significance level for tp/fp.")
    b.add_argument("--threshold", type=float, default=None, help="Fixed tp/fp threshold (overrides alpha).")
    b.add_argument("--clamp", action="store_true", help="Clip estimates to [0, n].")
    b.add_argument("--threads", type=int, default=None, help="Worker threads (default LDP_THREADS or all cores).")
    b.add_argument("--timing", action="store_true", help="Fill the seconds column (output no longer reproducible).")
    b.add_argument("--store", action="store_true", help="Append rows to the results database.")
    b.add_argument("--run-id", default=None, help="Run id for --store (default generated).")
    b.add_argument("--database-url", default=None, help="Overrides DATABASE_URL env var.")
    b.set_defaults(func=cmd_bench)

    p = sub.add_parser("privacy-check", parents=[common], help="Max likelihood ratio against e^eps.")
    p.add_argument("--protocol", required=True, choices=PROTOCOL_CHOICES)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--d", type=_count, required=True)
    p.add_argument("--seeds", type=int, default=16, help="Hash seeds checked for BLH/OLH (default 16).")
    p.add_argument("--seed", type=int, default=0, help="Seed for drawing those hash seeds.")
    p.set_defaults(func=cmd_privacy_check)

    th = sub.add_parser("threshold", parents=[common], help="Significance threshold T_s and T_s/sqrt(n).")
    th.add_argument("--protocol", choices=PROTOCOL_CHOICES, default=ProtocolKind.OLH.value)
    th.add_argument("--epsilon", type=float, required=True)
    th.add_argument("--d", type=_count, default=None)
    th.add_argument("--n", type=_count, default=None)
    th.add_argument("--threshold-alpha", "--alpha", dest="threshold_alpha", type=float, default=0.05)
    th.add_argument("--split-ratio", action="store_true",
                    help="Print T1/T2 (halve the budget vs halve the population) instead.")
    th.set_defaults(func=cmd_threshold)

    g = sub.add_parser("guide", parents=[common], help="Which protocol to use for (eps, d).")
    g.add_argument("--epsilon", type=float, required=True)
    g.add_argument("--d", type=_count, required=True)
    g.add_argument("--comm", choices=[c.value for c in CommBudget], default=CommBudget.UNBOUNDED.value,
                   help="Per-report communication budget.")
    g.set_defaults(func=cmd_guide)

    return ap


Handler = Callable[[argparse.Namespace, TextIO], int]


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)

    handler: Handler = args.func
    try:
        return handler(args, sys.stdout)
    except LdpError as e:
        print(f"[LDP] ERROR: {e}", file=sys.stderr)
        return 2

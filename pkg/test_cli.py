"""
End-to-end checks of the `ldp` command line: output contracts, exit codes and
byte-identical reruns.
"""
import csv
import importlib
import io
import json
import math

import pytest

from src.analytics.variance import analytic_var
from src.cli.main import build_parser, main
from src.cli.output import cell, write_rows
from src.simharness.summary import BENCH_COLUMNS

TABLE_2_EPS4 = {
    "DE(d=2)": "0.02", "DE(d=32)": "0.03", "DE(d=1024)": "0.37", "SHE": "0.50",
    "THE(theta=1)": "0.34", "SUE": "0.18", "OUE": "0.08", "BLH": "1.08", "OLH": "0.08",
}


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


# ----------------------------
# table
# ----------------------------

def test_table_default_grid(capsys):
    code, out, _ = run(capsys, "table")
    assert code == 0
    rows = rows_of(out)
    assert [r["epsilon"] for r in rows] == ["0.50", "1.00", "2.00", "4.00"]
    last = rows[-1]
    for col, want in TABLE_2_EPS4.items():
        assert last[col] == want, col
    assert rows[1]["DE(d=1024)"] == "347.07"
    # OUE and OLH share a closed form
    assert all(r["OUE"] == r["OLH"] for r in rows)


def test_table_full_precision(capsys):
    code, out, _ = run(capsys, "table", "--epsilons", "1", "--ds", "2", "--precision", "full")
    assert code == 0
    row = rows_of(out)[0]
    digits = row["SUE"].replace(".", "").lstrip("0")
    assert len(digits) >= 10
    assert float(row["SUE"]) == pytest.approx(analytic_var("sue", 1.0), rel=1e-11)


def test_table_json(capsys):
    code, out, _ = run(capsys, "table", "--epsilons", "2", "--ds", "32", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload == [{
        "epsilon": 2.0, "DE(d=32)": 0.92, "SHE": 2.0, "THE(theta=1)": 1.5, "SUE": 0.92,
        "OUE": 0.72, "BLH": 1.72, "OLH": 0.72,
    }]


def test_table_rejects_bad_epsilon(capsys):
    code, _, err = run(capsys, "table", "--epsilons", "0,1")
    assert code == 2
    assert "epsilon" in err


@pytest.mark.parametrize("flag", ["--epsilons", "--ds"])
def test_table_empty_list_is_usage_error(capsys, flag):
    with pytest.raises(SystemExit) as exc:
        main(["table", flag, ","])
    assert exc.value.code == 2


def test_table_rejects_theta_outside_range(capsys):
    code, out, err = run(capsys, "table", "--theta", "0.3")
    assert code == 2
    assert out == ""
    assert "theta" in err


# ----------------------------
# bench
# ----------------------------

BENCH = ["bench", "--protocol", "olh", "--epsilon", "4", "--d", "1024", "--n", "10000",
         "--dist", "zipf:1.1", "--reps", "10", "--seed", "1"]


def test_bench_rows_and_agreement(capsys):
    code, out, _ = run(capsys, *BENCH, "--threads", "2")
    assert code == 0
    assert out.splitlines()[0] == ",".join(BENCH_COLUMNS)
    rows = rows_of(out)
    assert len(rows) == 11
    assert [r["rep"] for r in rows[:-1]] == [str(i) for i in range(10)]
    summary = rows[-1]
    assert summary["rep"] == "summary"
    assert summary["seconds"] == ""
    assert float(summary["avg_sq_error"]) == pytest.approx(10_000 * analytic_var("olh", 4.0), rel=0.15)


def test_bench_byte_identical_across_runs_and_threads(capsys):
    _, single, _ = run(capsys, *BENCH, "--threads", "1")
    _, again, _ = run(capsys, *BENCH, "--threads", "1")
    _, eight, _ = run(capsys, *BENCH, "--threads", "8")
    assert single == again
    assert single == eight


def test_bench_csv_round_trips(capsys):
    _, out, _ = run(capsys, "bench", "--protocol", "sue", "--epsilon", "1", "--d", "32",
                    "--n", "2000", "--reps", "2", "--threads", "1")
    for r in rows_of(out):
        err = r["avg_sq_error"]
        assert repr(float(err)) == err


def test_bench_json(capsys):
    code, out, _ = run(capsys, "bench", "--protocol", "de", "--epsilon", "2", "--d", "8",
                       "--n", "1e3", "--reps", "3", "--format", "json", "--threads", "1")
    assert code == 0
    payload = json.loads(out)
    assert len(payload) == 4
    assert list(payload[0]) == BENCH_COLUMNS
    assert payload[-1]["rep"] == "summary"
    assert payload[0]["n"] == 1000


def test_bench_timing_fills_seconds(capsys):
    _, out, _ = run(capsys, "bench", "--protocol", "de", "--epsilon", "2", "--d", "8",
                    "--n", "500", "--reps", "2", "--timing", "--threads", "1")
    assert all(float(r["seconds"]) >= 0.0 for r in rows_of(out))


def test_bench_file_input(capsys, tmp_path):
    path = tmp_path / "values.txt"
    path.write_text("\n".join(str(v % 8) for v in range(400)) + "\n", encoding="utf-8")
    code, out, _ = run(capsys, "bench", "--protocol", "oue", "--epsilon", "1", "--d", "8",
                       "--dist", f"file:{path}", "--reps", "2", "--threads", "1")
    assert code == 0
    assert {r["n"] for r in rows_of(out)} == {"400"}


@pytest.mark.parametrize("extra", [
    ["--dist", "gauss"],
    ["--theta", "0.9"],
    ["--threads", "0"],
    ["--reps", "0"],
])
def test_bench_invalid_combinations_exit_2(capsys, extra):
    code, out, err = run(capsys, "bench", "--protocol", "olh", "--epsilon", "1", "--d", "16",
                         "--n", "100", *extra)
    assert code == 2
    assert out == ""
    assert "ERROR" in err


def test_bench_missing_file_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "bench", "--protocol", "de", "--epsilon", "1", "--d", "4",
                       "--dist", f"file:{tmp_path / 'missing.txt'}")
    assert code == 2
    assert "file not found" in err


def test_bench_file_input_rejects_n(capsys, tmp_path):
    path = tmp_path / "values.txt"
    path.write_text("0\n1\n2\n", encoding="utf-8")
    code, out, err = run(capsys, "bench", "--protocol", "de", "--epsilon", "1", "--d", "4",
                         "--dist", f"file:{path}", "--n", "1000")
    assert code == 2
    assert out == ""
    assert "--n" in err


@pytest.mark.parametrize("bad", ["bytes", "directory"])
def test_bench_unreadable_file_exit_2(capsys, tmp_path, bad):
    path = tmp_path / "values.txt"
    if bad == "bytes":
        path.write_bytes(b"1\n\xff\xfe\n")
    else:
        path.mkdir()
    code, out, err = run(capsys, "bench", "--protocol", "de", "--epsilon", "1", "--d", "4",
                         "--dist", f"file:{path}")
    assert code == 2
    assert out == ""
    assert "ERROR" in err


def test_bad_flags_are_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bench", "--protocol", "xyz", "--epsilon", "1", "--d", "4", "--n", "10"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["bench", "--protocol", "de", "--epsilon", "1", "--d", "4.5", "--n", "10"])
    assert exc.value.code == 2


# ----------------------------
# privacy-check
# ----------------------------

def test_privacy_check_pass(capsys):
    code, out, _ = run(capsys, "privacy-check", "--protocol", "de", "--epsilon", "1", "--d", "4")
    assert code == 0
    row = rows_of(out)[0]
    assert row["verdict"] == "PASS"
    assert abs(float(row["max_ratio"]) - math.e) <= 1e-9


def test_privacy_check_olh(capsys):
    code, out, _ = run(capsys, "privacy-check", "--protocol", "olh", "--epsilon", "2", "--d", "100")
    assert code == 0
    row = rows_of(out)[0]
    assert row["mode"] == "conditional"
    assert float(row["max_ratio"]) == pytest.approx(math.exp(2.0), rel=1e-9)


def test_privacy_check_refuses_large_domain(capsys):
    code, out, err = run(capsys, "privacy-check", "--protocol", "sue", "--epsilon", "1", "--d", "16")
    assert code == 2
    assert out == ""
    assert "REFUSED" in err and "--d" in err


def test_privacy_check_fail_exit_code(capsys, monkeypatch):
    cli_main = importlib.import_module("src.cli.main")
    from src.ldp import privacy_check

    def corrupted(kind, epsilon, d, **kw):
        return privacy_check.check_privacy(kind, epsilon, d, p=0.9, q=0.05)

    monkeypatch.setattr(cli_main, "check_privacy", corrupted)
    code, out, _ = run(capsys, "privacy-check", "--protocol", "oue", "--epsilon", "1", "--d", "3")
    assert code == 1
    assert rows_of(out)[0]["verdict"] == "FAIL"


# ----------------------------
# threshold / guide
# ----------------------------

def test_threshold_constant(capsys):
    code, out, _ = run(capsys, "threshold", "--protocol", "olh", "--epsilon", "6", "--d", "2^20",
                       "--n", "1000000", "--alpha", "0.05")
    assert code == 0
    row = rows_of(out)[0]
    assert float(row["coefficient"]) == pytest.approx(0.533, abs=0.002)
    assert float(row["threshold"]) == pytest.approx(533.0, abs=2.0)


def test_threshold_coefficient_decreases_with_epsilon(capsys):
    coef = {}
    for eps in ("4", "6"):
        _, out, _ = run(capsys, "threshold", "--epsilon", eps, "--d", "1048576", "--n", "1e6")
        coef[eps] = float(rows_of(out)[0]["coefficient"])
    assert coef["6"] < coef["4"]


def test_threshold_split_ratio(capsys):
    code, out, _ = run(capsys, "threshold", "--epsilon", "4", "--split-ratio")
    assert code == 0
    row = rows_of(out)[0]
    assert float(row["split_ratio"]) == pytest.approx(4.36, abs=0.02)
    assert row["preferred_split"] == "population"


def test_threshold_needs_n(capsys):
    code, _, err = run(capsys, "threshold", "--epsilon", "4", "--d", "64")
    assert code == 2
    assert "--n" in err


def test_guide(capsys):
    code, out, _ = run(capsys, "guide", "--epsilon", "1", "--d", "1024", "--comm", "logarithmic")
    assert code == 0
    rows = {r["protocol"]: r for r in rows_of(out)}
    assert set(rows) == {"de", "she", "the", "sue", "oue", "blh", "olh"}
    assert [p for p, r in rows.items() if r["recommended"] == "true"] == ["olh"]
    assert rows["sue"]["comm_bits"] == "1024"
    assert rows["olh"]["comm_bits"] == "66"


def test_guide_small_domain_picks_de(capsys):
    _, out, _ = run(capsys, "guide", "--epsilon", "2", "--d", "8")
    chosen = [r["protocol"] for r in rows_of(out) if r["recommended"] == "true"]
    assert chosen == ["de"]


# ----------------------------
# output helpers
# ----------------------------

def test_cell_formatting():
    assert cell(None) == ""
    assert cell(True) == "true"
    assert cell(0.1) == "0.1"
    assert cell(3) == "3"
    assert cell(1.0 / 3.0, lambda v: f"{v:.2f}") == "0.33"
    assert cell(float("inf"), lambda v: f"{v:.2f}") == "inf"


def test_write_rows_rejects_unknown_format():
    with pytest.raises(ValueError):
        write_rows([], ["a"], "xml", io.StringIO())


def test_parser_lists_every_subcommand():
    help_text = build_parser().format_help()
    for name in ("table", "bench", "privacy-check", "threshold", "guide"):
        assert name in help_text

"""
Workload generation, experiment configuration, trial execution and the
error metrics.
"""
import numpy as np
import pytest

from src.analytics.significance import ThresholdSpec, significance_threshold
from src.analytics.variance import analytic_var
from src.ldp.core import EstimateVector, exact_variance
from src.simharness.config import ExperimentConfig, FromFile, Uniform, Zipf, parse_distribution
from src.simharness.errors import ConfigError, DatasetError
from src.simharness.metrics import avg_sq_error, top_k_values, topk_error, tp_fp
from src.simharness.runner import (
    TrialResult,
    collect_counts,
    data_seed,
    run_experiment,
    run_trial,
)
from src.simharness.summary import SUMMARY_REP, bench_rows
from src.simharness.workload import gen_uniform, gen_zipf, ingest_values, true_counts, zipf_probabilities

PURE = ["de", "the", "sue", "oue", "blh", "olh"]


# ----------------------------
# Workload
# ----------------------------

def test_zipf_probabilities():
    p = zipf_probabilities(4, 1.0)
    np.testing.assert_allclose(p, np.array([1, 1 / 2, 1 / 3, 1 / 4]) / (25 / 12))
    assert p.sum() == pytest.approx(1.0)


def test_gen_zipf_deterministic_and_skewed():
    a = gen_zipf(1024, 1.1, 10_000, seed=5)
    b = gen_zipf(1024, 1.1, 10_000, seed=5)
    np.testing.assert_array_equal(a, b)
    assert a.min() >= 0 and a.max() < 1024
    counts = np.bincount(a, minlength=1024)
    assert counts[0] > counts[10] > counts[500]


def test_gen_uniform_range():
    v = gen_uniform(16, 5000, seed=1)
    assert v.min() >= 0 and v.max() < 16
    assert v.shape == (5000,)


def test_ingest_values(tmp_path):
    path = tmp_path / "values.txt"
    path.write_text("3\n0\n\n7\n", encoding="utf-8")
    np.testing.assert_array_equal(ingest_values(path, 8), [3, 0, 7])


def test_ingest_values_reports_line(tmp_path):
    path = tmp_path / "values.txt"
    path.write_text("1\n2\n9\n", encoding="utf-8")
    with pytest.raises(DatasetError) as exc:
        ingest_values(path, 8)
    assert exc.value.line_no == 3
    assert ":3:" in str(exc.value)

    path.write_text("1\nabc\n", encoding="utf-8")
    with pytest.raises(DatasetError, match="not an integer"):
        ingest_values(path, 8)


def test_ingest_values_missing_file(tmp_path):
    with pytest.raises(DatasetError, match="file not found"):
        ingest_values(tmp_path / "nope.txt", 8)


def test_ingest_values_rejects_bad_bytes_and_directories(tmp_path):
    path = tmp_path / "values.txt"
    path.write_bytes(b"1\n\xff\xfe\n")
    with pytest.raises(DatasetError, match="UTF-8") as exc:
        ingest_values(path, 8)
    assert exc.value.line_no == 2

    with pytest.raises(DatasetError, match="cannot read file"):
        ingest_values(tmp_path, 8)


# ----------------------------
# Config
# ----------------------------

def test_parse_distribution():
    assert parse_distribution("zipf:1.5") == Zipf(1.5)
    assert parse_distribution("zipf") == Zipf(1.1)
    assert parse_distribution("uniform") == Uniform()
    assert isinstance(parse_distribution("file:data/x.txt"), FromFile)
    assert str(parse_distribution("zipf:1.1")) == "zipf:1.1"
    for bad in ("zipf:abc", "zipf:-1", "normal", "file:"):
        with pytest.raises(ConfigError):
            parse_distribution(bad)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig("olh", 1.0, 64)  # n missing
    with pytest.raises(ConfigError):
        ExperimentConfig("olh", 1.0, 64, n=0)
    with pytest.raises(ConfigError):
        ExperimentConfig("olh", -1.0, 64, n=10)
    with pytest.raises(ConfigError):
        ExperimentConfig("sue", 1.0, 64, n=10, theta=0.8)
    with pytest.raises(ConfigError):
        ExperimentConfig("nope", 1.0, 64, n=10)
    with pytest.raises(ConfigError):
        ExperimentConfig("de", 1.0, 64, n=10, repetitions=0)
    with pytest.raises(ConfigError):
        ExperimentConfig("de", 1.0, 64, n=10, threshold_alpha=0.0)


def test_config_top_k_capped_by_domain():
    cfg = ExperimentConfig("de", 1.0, 8, n=100, top_k=30)
    assert cfg.effective_top_k == 8


def test_config_file_input_needs_no_n(tmp_path):
    path = tmp_path / "v.txt"
    path.write_text("0\n1\n1\n", encoding="utf-8")
    cfg = ExperimentConfig("de", 2.0, 4, distribution=FromFile(path), repetitions=2)
    results = run_experiment(cfg)
    assert [r.n for r in results] == [3, 3]
    np.testing.assert_array_equal(results[0].true_counts, [1, 2, 0, 0])


def test_config_rejects_n_with_file_input(tmp_path):
    path = tmp_path / "v.txt"
    path.write_text("0\n1\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="--n"):
        ExperimentConfig("de", 2.0, 4, n=10, distribution=FromFile(path))


def test_empty_file_is_rejected(tmp_path):
    path = tmp_path / "v.txt"
    path.write_text("\n", encoding="utf-8")
    cfg = ExperimentConfig("de", 2.0, 4, distribution=FromFile(path))
    with pytest.raises(ConfigError):
        run_trial(cfg)


# ----------------------------
# Runner
# ----------------------------

def test_data_seed_depends_on_trial():
    assert data_seed(1, 0) == data_seed(1, 0)
    assert data_seed(1, 0) != data_seed(1, 1)
    assert data_seed(1, 0) != data_seed(2, 0)


@pytest.mark.parametrize("kind", ["de", "she", "sue", "olh"])
def test_counts_identical_across_thread_counts(kind):
    cfg = ExperimentConfig(kind, 2.0, 128, n=20_000, master_seed=3, repetitions=1)
    values = gen_zipf(128, 1.1, 20_000, seed=9)
    one = collect_counts(cfg.spec, values, cfg.master_seed, 0, threads=1)
    many = collect_counts(cfg.spec, values, cfg.master_seed, 0, threads=4)
    np.testing.assert_array_equal(one, many)


def test_run_trial_reproducible():
    cfg = ExperimentConfig("oue", 1.0, 64, n=5000, master_seed=11, repetitions=1)
    a = run_trial(cfg, 0, threads=1)
    b = run_trial(cfg, 0, threads=3)
    np.testing.assert_array_equal(a.estimates.estimates, b.estimates.estimates)
    assert a.avg_sq_error == b.avg_sq_error
    assert a.n == 5000


def test_clamp_flag():
    cfg = ExperimentConfig("blh", 0.5, 64, n=2000, master_seed=1, clamp=True)
    est = run_trial(cfg).estimates.estimates
    assert est.min() >= 0.0
    assert est.max() <= 2000.0


def _f_point_two_values(n, d, seed):
    """value 0 held by exactly 20% of users, the rest uniform over 1..d-1."""
    rng = np.random.default_rng(seed)
    rest = rng.integers(1, d, size=n - n // 5)
    return np.concatenate([np.zeros(n // 5, dtype=np.int64), rest])


@pytest.mark.parametrize("kind", PURE)
def test_pure_protocols_are_unbiased(kind):
    n, d, runs = 100_000, 16, 20
    cfg = ExperimentConfig(kind, 1.0, d, n=n, master_seed=2024, repetitions=runs)
    values = _f_point_two_values(n, d, seed=7)
    est = [run_trial(cfg, t, threads=2, values=values).estimates[0] for t in range(runs)]

    var = exact_variance(cfg.spec.pure_params(), n, 0.2)
    assert abs(np.mean(est) - 20_000) <= 4 * np.sqrt(var / runs)


@pytest.mark.parametrize("kind", ["sue", "oue", "blh", "olh", "she", "the"])
def test_empirical_error_matches_analytic(kind):
    n, d = 10_000, 1024
    # THE at theta = 1 to line up with the closed form
    theta = 1.0 if kind == "the" else None
    cfg = ExperimentConfig(kind, 4.0, d, n=n, distribution=Zipf(1.1), master_seed=1, repetitions=10, theta=theta)
    mean_err = np.mean([r.avg_sq_error for r in run_experiment(cfg, threads=4)])
    assert mean_err == pytest.approx(n * analytic_var(kind, 4.0, d), rel=0.15)


# ----------------------------
# Metrics
# ----------------------------

def _result(estimates, truth):
    truth = np.asarray(truth, dtype=np.int64)
    return TrialResult(0, truth, EstimateVector(np.asarray(estimates, dtype=np.float64), int(truth.sum())), 0.0, 0.0)


def test_avg_sq_error():
    assert avg_sq_error(np.array([1.0, 3.0]), np.array([0, 0])) == 5.0


def test_top_k_ties_go_to_smaller_value():
    np.testing.assert_array_equal(top_k_values(np.array([5, 9, 9, 1]), 2), [1, 2])
    np.testing.assert_array_equal(top_k_values(np.array([3, 3, 3]), 2), [0, 1])


def test_topk_error():
    res = _result([12.0, 0.0, 5.0, 40.0], [10, 1, 5, 30])
    # top-2 by truth: values 3 and 0
    assert topk_error(res, 2) == pytest.approx((10.0 ** 2 + 2.0 ** 2) / 2)


def test_tp_fp():
    res = _result([150.0, 90.0, 120.0, 10.0], [200, 110, 50, 20])
    assert tp_fp(res, 100.0) == (1, 1)
    assert tp_fp(res, 0.0) == (4, 0)


def test_bench_rows_summary():
    cfg = ExperimentConfig("olh", 2.0, 64, n=3000, master_seed=4, repetitions=3)
    rows = bench_rows(cfg, run_experiment(cfg))
    assert len(rows) == 4
    assert [r["rep"] for r in rows] == [0, 1, 2, SUMMARY_REP]
    summary = rows[-1]
    assert summary["avg_sq_error"] == pytest.approx(np.mean([r["avg_sq_error"] for r in rows[:3]]))
    assert summary["avg_sq_error_std"] >= 0.0
    assert all(r["seconds"] is None for r in rows)
    assert summary["analytic_sq_error"] == pytest.approx(3000 * cfg.spec.var_star())


def test_bench_threshold_follows_protocol_variance():
    cfg = ExperimentConfig("oue", 2.0, 64, n=3000, master_seed=4, repetitions=1, threshold_alpha=0.01)
    row = bench_rows(cfg, run_experiment(cfg))[0]
    want = significance_threshold(ThresholdSpec(64, 3000, cfg.spec.var_star(), 0.01))
    assert row["threshold"] == pytest.approx(want)

    fixed = ExperimentConfig("oue", 2.0, 64, n=3000, repetitions=1, threshold=250.0)
    assert bench_rows(fixed, run_experiment(fixed))[0]["threshold"] == 250.0


@pytest.mark.slow
def test_olh_fewer_false_positives_than_blh():
    n, d, eps = 10 ** 6, 1024, 4.0
    threshold = significance_threshold(ThresholdSpec(d, n, analytic_var("olh", eps)))
    wins = 0
    for seed in range(10):
        fps = {}
        for kind in ("olh", "blh"):
            cfg = ExperimentConfig(kind, eps, d, n=n, master_seed=seed, repetitions=1, threshold=threshold)
            _, fps[kind] = tp_fp(run_trial(cfg, 0, threads=8), threshold)
        wins += fps["olh"] < fps["blh"]
    assert wins >= 9


def test_true_counts():
    np.testing.assert_array_equal(true_counts(np.array([0, 2, 2]), 4), [1, 0, 2, 0])

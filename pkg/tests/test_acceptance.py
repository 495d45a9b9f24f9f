"""Build exit criteria. Each test prints one PASS/FAIL line, then asserts."""
import time

import numpy as np
import pytest

from oracles import (
    dtw_by_path_search, finite_difference_gradients, naive_matrix_profile,
    pairwise_overlap_counts, per_sample_counts, random_disjoint_intervals)
from tsadbench.benchmark.history import ReleaseHistory, detect_shifts
from tsadbench.benchmark.records import read_records
from tsadbench.benchmark.runner import run_benchmark
from tsadbench.benchmark.summary import SummaryTable, leaderboard, spearman_rho, summarize
from tsadbench.cli import main
from tsadbench.core.specs import pipeline_paths
from tsadbench.data.registry import DatasetRegistry
from tsadbench.data.synthetic import suite_configs, write_dataset
from tsadbench.evaluation import (
    ConfusionCounts, dataset_scores, overlapping_segment_counts, weighted_segment_counts)
from tsadbench.primitives.ar import ar_fit
from tsadbench.primitives.autoencoder import init_autoencoder, loss_and_gradients, mse_loss
from tsadbench.primitives.error_functions import dtw_distance
from tsadbench.primitives.matrix_profile import matrix_profile

from conftest import FIXTURES

pytestmark = pytest.mark.acceptance


@pytest.fixture
def verdict(capsys):
    """Print ``PASS``/``FAIL`` for a criterion so it shows in the test log, then assert."""
    def report(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'} {title}"
                  + (f" ({detail})" if detail else ""))
        assert ok, f"criterion {number} failed: {detail}"
    return report


def test_01_metric_oracle_equivalence(verdict):
    rng = np.random.default_rng(2024)
    started = time.perf_counter()
    mismatches = 0
    for _ in range(1000):
        t1 = int(rng.integers(1, 1001))
        detected = random_disjoint_intervals(rng, 10, 0, t1 - 1)
        truth = random_disjoint_intervals(rng, 10, 0, t1 - 1)
        c = overlapping_segment_counts(detected, truth, (0, t1 - 1))
        if (c.tp, c.fp, c.fn) != pairwise_overlap_counts(detected, truth):
            mismatches += 1
        w = weighted_segment_counts(detected, truth, (0, t1))
        if (w.tp, w.fp, w.fn, w.tn) != per_sample_counts(detected, truth, 0, t1):
            mismatches += 1
    elapsed = time.perf_counter() - started
    verdict(1, "segment counts match brute-force oracles",
            mismatches == 0 and elapsed < 10, f"{mismatches} mismatches, {elapsed:.2f}s")


def test_02_dataset_pooling(verdict):
    rng = np.random.default_rng(7)
    failures = 0
    for _ in range(500):
        signals = [ConfusionCounts(*map(int, rng.integers(0, 20, 3)))
                   for _ in range(int(rng.integers(1, 15)))]
        tp = fp = fn = 0
        for c in signals:
            tp, fp, fn = tp + c.tp, fp + c.fp, fn + c.fn
        precision = tp / (tp + fp) if tp + fp else None
        recall = tp / (tp + fn) if tp + fn else None
        f1 = (2 * precision * recall / (precision + recall)
              if precision is not None and recall is not None and precision + recall else None)
        got = dataset_scores(signals)
        failures += (got.precision, got.recall, got.f1) != (precision, recall, f1)
    example = dataset_scores([ConfusionCounts(2, 1, 0), ConfusionCounts(1, 0, 2)])
    example_ok = (abs(example.precision - 0.75) <= 1e-12 and abs(example.recall - 0.6) <= 1e-12
                  and abs(example.f1 - 2 / 3) <= 1e-12)
    verdict(2, "dataset pooling equals a pooled recount", failures == 0 and example_ok,
            f"{failures} mismatches, example P={example.precision} R={example.recall}")


def test_03_matrix_profile_oracle(verdict):
    rng = np.random.default_rng(11)
    started = time.perf_counter()
    failures, constant_cases = 0, 0
    for case in range(200):
        m = int(rng.choice([4, 8, 16]))
        length = int(rng.integers(2 * m, 257))
        x = rng.normal(size=length)
        if case % 3 == 0:
            # flat stretches give constant windows
            for _ in range(int(rng.integers(1, 4))):
                start = int(rng.integers(0, length - m + 1))
                x[start:start + m + int(rng.integers(0, m))] = float(rng.integers(-2, 3))
            constant_cases += 1
        elif case % 3 == 1:
            x = rng.integers(-1, 2, length).astype(float)
        got = matrix_profile(x, m).profile
        want = naive_matrix_profile(x, m)
        failures += not np.allclose(got, want, rtol=1e-6, atol=1e-6)
    elapsed = time.perf_counter() - started
    verdict(3, "matrix profile equals the naive all-pairs profile",
            failures == 0 and elapsed < 60,
            f"{failures} mismatches, {constant_cases} constant-window cases, {elapsed:.2f}s")


def test_04_dtw_exhaustive(verdict):
    rng = np.random.default_rng(5)
    failures = 0
    for case in range(500):
        n, m = (12, 12) if case < 25 else map(int, rng.integers(1, 13, 2))
        a, b = rng.normal(size=n), rng.normal(size=m)
        failures += dtw_distance(a, b) != dtw_by_path_search(a, b)
    verdict(4, "DTW equals exhaustive monotone-path search", failures == 0,
            f"{failures} mismatches over 500 pairs")


def test_05_autoencoder_gradients(verdict):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(50):
        width = int(rng.integers(2, 17))
        hidden = int(rng.integers(1, width + 1))
        latent = int(rng.integers(1, hidden + 1))
        model = init_autoencoder([width, hidden, latent, hidden, width], rng)
        weights = [w.copy() for w in model.weights]
        biases = [rng.normal(0, 0.3, b.shape) for b in model.biases]
        X = rng.normal(size=(int(rng.integers(1, 6)), width))
        _, grad_w, grad_b = loss_and_gradients(weights, biases, X)
        numeric = finite_difference_gradients(lambda: mse_loss(weights, biases, X),
                                              weights + biases, eps=1e-4)
        for analytic, approx in zip(grad_w + grad_b, numeric):
            scale = np.maximum(np.abs(analytic) + np.abs(approx), 1e-8)
            worst = max(worst, float(np.max(np.abs(analytic - approx) / scale)))
    verdict(5, "autoencoder gradients match finite differences", worst < 1e-4,
            f"max relative error {worst:.2e}")


def simulate_ar2(a1, a2, c, length, rng=None, sigma=0.0):
    x = [0.4, -0.7]
    for _ in range(length - 2):
        x.append(c + a1 * x[-1] + a2 * x[-2] + (rng.normal(0, sigma) if sigma else 0.0))
    return np.array(x)


def test_06_ar_recovery(verdict):
    noiseless = ar_fit(simulate_ar2(0.6, -0.3, 0.5, 200), p=2)
    exact_err = max(np.abs(noiseless.coefficients - [0.6, -0.3]).max(),
                    abs(noiseless.intercept - 0.5))
    rng = np.random.default_rng(0)
    noisy = ar_fit(simulate_ar2(0.6, -0.3, 0.5, 2000, rng, 0.01), p=2)
    noisy_err = float(np.abs(noisy.coefficients - [0.6, -0.3]).max())
    verdict(6, "AR(2) coefficients recovered", exact_err < 1e-6 and noisy_err < 0.05,
            f"noiseless {exact_err:.1e}, noisy {noisy_err:.3f}")


def test_07_end_to_end_detection(verdict, pipelines, tmp_path):
    path = write_dataset(suite_configs(20, seed=0), tmp_path)
    registry = DatasetRegistry.from_file(path)
    started = time.perf_counter()
    records = run_benchmark([pipelines["arima_like"], pipelines["matrix_profile"]],
                            ["synthetic"], iterations=1, seed=0, workers=1, registry=registry)
    elapsed = time.perf_counter() - started
    table = summarize(records, "f1")
    ar, mp = table.value("arima_like", "synthetic"), table.value("matrix_profile", "synthetic")
    ok = ar is not None and mp is not None and ar >= 0.8 and mp >= 0.8 and elapsed < 60
    verdict(7, "AR and MP pipelines detect the synthetic suite", ok,
            f"F1 arima_like={ar:.3f} matrix_profile={mp:.3f}, {elapsed:.1f}s")


DATASETS = ["MSL", "SMAP", "UCR", "A1", "A2", "A3", "A4", "Art", "AWS", "AdEx", "Traf", "Tweets"]
F1_052 = {
    "AER": [0.587, 0.775, 0.474, 0.780, 0.987, 0.869, 0.686, 0.769, 0.750, 0.733, 0.611, 0.581],
    "ARIMA": [0.435, 0.326, 0.090, 0.744, 0.816, 0.782, 0.684, 0.429, 0.472, 0.727, 0.429,
              0.513],
}


def test_08_leaderboard_replay(verdict):
    table = SummaryTable.from_mapping(
        {name: dict(zip(DATASETS, row)) for name, row in F1_052.items()})
    wins = {row.pipeline: row.wins for row in leaderboard(table, "ARIMA")}
    verdict(8, "released F1 table gives AER 12 wins over ARIMA",
            wins == {"AER": 12, "ARIMA": 0}, f"wins {wins}")


def test_09_rank_stability(verdict):
    rho = spearman_rho([1, 3, 2, 6, 4, 7, 5, 8, 9, 10, 11], [1, 2, 5, 7, 3, 4, 6, 8, 9, 10, 11])
    verdict(9, "rank correlation of runs 1 and 2", abs(rho - 0.9) <= 1e-9, f"rho={rho!r}")


def shift(old, new):
    history = ReleaseHistory({
        "1.0.0": {("p", d, "f1"): v for d, v in old.items()},
        "1.1.0": {("p", d, "f1"): v for d, v in new.items()}})
    (report,) = detect_shifts(history)
    return report


def test_10_shift_detection(verdict):
    old = {"a": 0.5, "b": 0.8, "c": 0.25}
    drop = shift(old, {d: v * 0.97 for d, v in old.items()})
    same = shift(old, old)
    spread = shift(old, {"a": 0.505, "b": 0.84, "c": 0.24})
    expected_delta = float(np.std([1, 5, -4]))
    ok = (drop.flagged and abs(drop.mu + 3) < 1e-9 and drop.delta < 1e-9
          and not same.flagged and same.mu == 0 and same.delta == 0
          and spread.flagged and abs(spread.mu) < 1 and abs(spread.mu - 2 / 3) < 1e-9
          and abs(spread.delta - expected_delta) < 1e-9)
    verdict(10, "release shifts flagged by mean and spread", ok,
            f"drop mu={drop.mu:.6g} delta={drop.delta:.2g}; spread mu={spread.mu:.4f} "
            f"delta={spread.delta:.4f}")


def test_11_runner_robustness(verdict, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    registry = write_dataset(suite_configs(3, seed=2, length=400), tmp_path / "suite")
    outputs = []
    for workers in (1, 4):
        out = tmp_path / f"results-{workers}.csv"
        code = main(["run", "--registry", str(registry), "--iterations", "2", "--seed", "9",
                     "--workers", str(workers), "--reproducible", "--output", str(out),
                     "--pipelines", "arima_like", "matrix_profile",
                     str(FIXTURES / "pipelines" / "failing.json"),
                     "--primitives", str(FIXTURES / "primitives")])
        assert code == 0
        outputs.append(out.read_bytes())
    records = read_records(tmp_path / "results-1.csv")
    errors = [r for r in records if r.pipeline == "failing"]
    ok = (len(records) == 3 * 3 * 2 and len(errors) == 6
          and all(r.status == "ERROR" and r.f1 is None for r in errors)
          and all(r.status == "OK" for r in records if r.pipeline != "failing")
          and outputs[0] == outputs[1])
    verdict(11, "failures recorded and reproducible output byte-identical", ok,
            f"{len(records)} records, {len(errors)} ERROR, identical={outputs[0] == outputs[1]}")


def test_12_validation_gate(verdict, capsys):
    shipped = {path.stem: main(["pipeline", "validate", str(path)])
               for path in pipeline_paths("verified")}
    bad = {}
    for name, check in (("bad_schema", "schema"), ("bad_dataflow", "data-flow"),
                        ("bad_determinism", "determinism")):
        code = main(["pipeline", "validate", str(FIXTURES / "pipelines" / f"{name}.json"),
                     "--primitives", str(FIXTURES / "primitives")])
        bad[name] = (code, f"FAIL {check}" in capsys.readouterr().out)
    ok = (len(shipped) >= 3 and all(code == 0 for code in shipped.values())
          and all(code == 1 and named for code, named in bad.values()))
    verdict(12, "validation passes shipped pipelines and rejects bad fixtures", ok,
            f"shipped {shipped}, bad {bad}")
